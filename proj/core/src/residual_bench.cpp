/*
 * Copyright 2026 The FactorBoost Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "factorboost/residual_bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "factorboost/boosting.hpp"
#include "factorboost/cuboid.hpp"
#include "factorboost/synth.hpp"

namespace factorboost {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// Fresh residual-state fact annotations: c=1, s=y, q=y^2.
void init_annotations(Relation& fact) {
  AnnotationColumns names = annotation_columns();
  const std::vector<double>& y = fact.column("y").num;
  std::vector<double> c(fact.row_count(), 1.0), s(y), q(fact.row_count());
  for (size_t r = 0; r < fact.row_count(); ++r) q[r] = y[r] * y[r];
  if (!fact.has_column(names.c)) {
    Column cc;
    cc.name = names.c;
    cc.kind = ColumnKind::numeric;
    cc.num = std::move(c);
    fact.add_column(std::move(cc));
    Column sc;
    sc.name = names.s;
    sc.kind = ColumnKind::numeric;
    sc.num = std::move(s);
    fact.add_column(std::move(sc));
    Column qc;
    qc.name = names.q;
    qc.kind = ColumnKind::numeric;
    qc.num = std::move(q);
    fact.add_column(std::move(qc));
  } else {
    fact.swap_column(names.c, std::move(c));
    fact.swap_column(names.s, std::move(s));
    fact.swap_column(names.q, std::move(q));
  }
}

}  // namespace

UpdateBenchResult run_update_bench(size_t fact_rows, size_t dim_rows, int leaves, int extra_columns,
                                   int runs, uint64_t seed) {
  UpdateBenchResult result;
  result.fact_rows = fact_rows;
  result.dim_rows = dim_rows;
  result.leaves = leaves;

  Database db = bench_schema(fact_rows, dim_rows, extra_columns, seed);

  // Train the stump factorized and measure, with the intermediate-row peak.
  ExecStats::global().reset();
  double t0 = now_seconds();
  DtParams dt;
  dt.tree.max_leaves = leaves;
  dt.tree.max_depth = 32;
  EnsembleModel model = train_decision_tree(db, dt);
  result.factorized_train_seconds = now_seconds() - t0;
  result.factorized_peak_rows = ExecStats::global().peak_rows();
  const TreeModel& tree = model.trees.front();

  // Naive baseline: materialize the join, then train on the flat table.
  ExecStats::global().reset();
  t0 = now_seconds();
  Database flat = materialize_join_flat(db);
  EnsembleModel naive_model = train_decision_tree(flat, dt);
  result.naive_train_seconds = now_seconds() - t0;
  result.naive_peak_rows = ExecStats::global().peak_rows();
  (void)naive_model;

  Cluster cluster;
  cluster.fact = "F";
  cluster.members = {"F", "D"};

  UpdateRelation u = build_update_relation(db, tree, model.features, 1.0);

  std::vector<double> swap_times, rebuild_times, naive_times;
  std::vector<double> reference_s;  // swap result, for cross-checking
  AnnotationColumns names = annotation_columns();

  for (int run = 0; run < runs; ++run) {
    // (a) annotation multiply + column swap.
    {
      Database work = db.clone_with_private({"F"});
      init_annotations(work.relation("F"));
      double start = now_seconds();
      apply_update_relation(work, cluster, u);
      swap_times.push_back(now_seconds() - start);
      if (run == 0) reference_s = work.relation("F").column(names.s).num;
    }

    // (b) rebuild every fact column into a brand-new relation.
    {
      Database work = db.clone_with_private({"F"});
      Relation& f = work.relation("F");
      init_annotations(f);
      double start = now_seconds();
      std::vector<int32_t> partition = leaf_partition(work, cluster, tree);
      const std::vector<double>& c = f.column(names.c).num;
      const std::vector<double>& s = f.column(names.s).num;
      const std::vector<double>& q = f.column(names.q).num;
      Relation rebuilt("F");
      rebuilt.set_row_count(f.row_count());
      for (const Column& col : f.columns()) {
        if (col.name == names.s || col.name == names.q) continue;
        rebuilt.add_column(col);  // full copy
      }
      std::vector<double> new_s(f.row_count()), new_q(f.row_count());
      for (size_t r = 0; r < f.row_count(); ++r) {
        double p = tree.nodes[static_cast<size_t>(partition[r])].leaf_value.front();
        new_s[r] = s[r] - p * c[r];
        new_q[r] = q[r] + p * p * c[r] - 2.0 * s[r] * p;
      }
      Column sc;
      sc.name = names.s;
      sc.kind = ColumnKind::numeric;
      sc.num = std::move(new_s);
      rebuilt.add_column(std::move(sc));
      Column qc;
      qc.name = names.q;
      qc.kind = ColumnKind::numeric;
      qc.num = std::move(new_q);
      rebuilt.add_column(std::move(qc));
      rebuild_times.push_back(now_seconds() - start);
      if (reference_s != rebuilt.column(names.s).num) fail("rebuild strategy diverged");
    }

    // (c) naive: materialize F joined through D with U, then re-create the
    // fact with multiplied annotations.
    {
      Database work = db.clone_with_private({"F"});
      Relation& f = work.relation("F");
      init_annotations(f);
      double start = now_seconds();
      const EdgeInfo& info = work.edge_info[0];
      const JoinEdge& e = work.graph.edges[0];
      const std::vector<uint32_t>& fact_codes = info.codes_of(e, "F");
      const std::vector<int32_t>& dim_row_of = e.rel_a == "D" ? info.row_of_code_a : info.row_of_code_b;
      const std::vector<double>& dim_feat = work.relation("D").column("feat").num;

      // Materialize the join F |x| D (all fact columns + the dim feature).
      Relation joined("FJ");
      joined.set_row_count(f.row_count());
      for (const Column& col : f.columns()) joined.add_column(col);
      {
        std::vector<double> feat(f.row_count());
        for (size_t r = 0; r < f.row_count(); ++r) {
          feat[r] = dim_feat[static_cast<size_t>(dim_row_of[fact_codes[r]])];
        }
        Column fc;
        fc.name = "D.feat";
        fc.kind = ColumnKind::numeric;
        fc.num = std::move(feat);
        joined.add_column(std::move(fc));
      }
      ExecStats::global().note_intermediate(joined.row_count());

      // Join with U on the referenced attribute and multiply annotations.
      const Column& u_attr = u.cells.column("D.feat");
      const std::vector<double>& u_negp = u.cells.column("neg_prediction").num;
      std::unordered_map<double, size_t> u_index;
      for (size_t i = 0; i < u.cells.row_count(); ++i) u_index[u_attr.num[i]] = i;
      const std::vector<double>& jc = joined.column(names.c).num;
      const std::vector<double>& js = joined.column(names.s).num;
      const std::vector<double>& jq = joined.column(names.q).num;
      const std::vector<double>& jfeat = joined.column("D.feat").num;
      Relation updated("F");
      updated.set_row_count(joined.row_count());
      for (const Column& col : f.columns()) {
        if (col.name == names.s || col.name == names.q) continue;
        updated.add_column(col);
      }
      std::vector<double> new_s(joined.row_count()), new_q(joined.row_count());
      for (size_t r = 0; r < joined.row_count(); ++r) {
        auto it = u_index.find(jfeat[r]);
        check(it != u_index.end(), "update relation misses a cell");
        double negp = u_negp[it->second];
        // (c,s,q) x (1, -p, p^2)
        new_s[r] = js[r] + negp * jc[r];
        new_q[r] = jq[r] + negp * negp * jc[r] + 2.0 * js[r] * negp;
      }
      Column sc;
      sc.name = names.s;
      sc.kind = ColumnKind::numeric;
      sc.num = std::move(new_s);
      updated.add_column(std::move(sc));
      Column qc;
      qc.name = names.q;
      qc.kind = ColumnKind::numeric;
      qc.num = std::move(new_q);
      updated.add_column(std::move(qc));
      ExecStats::global().note_intermediate(updated.row_count());
      naive_times.push_back(now_seconds() - start);
      if (reference_s != updated.column(names.s).num) fail("naive strategy diverged");
    }
  }

  result.swap_seconds = median(swap_times);
  result.rebuild_seconds = median(rebuild_times);
  result.naive_seconds = median(naive_times);
  result.naive_over_swap = result.swap_seconds > 0 ? result.naive_seconds / result.swap_seconds : 0.0;
  return result;
}

std::string UpdateBenchResult::table() const {
  std::ostringstream out;
  out << "residual update strategies (fact=" << fact_rows << ", dim=" << dim_rows
      << ", leaves=" << leaves << ", median seconds)\n";
  out << "  annotation multiply + column swap : " << swap_seconds << "\n";
  out << "  full-column rebuild               : " << rebuild_seconds << "\n";
  out << "  naive update-relation join        : " << naive_seconds << "\n";
  out << "  naive / swap speedup              : " << naive_over_swap << "x\n";
  out << "stump training\n";
  out << "  factorized : " << factorized_train_seconds << " s (peak intermediate rows "
      << factorized_peak_rows << ")\n";
  out << "  naive join : " << naive_train_seconds << " s (peak intermediate rows " << naive_peak_rows
      << ")\n";
  return out.str();
}

}  // namespace factorboost
