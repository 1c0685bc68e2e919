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
#pragma once

#include "factorboost/model.hpp"
#include "factorboost/tree.hpp"

namespace factorboost {

// A leaf's predicates translated into key-membership filters on the cluster's
// fact table (plus the leaf's own fact predicates).
struct LeafSelection {
  int leaf_id = -1;
  PredicateList fact_predicates;
  struct KeyFilter {
    int edge_index = -1;
    std::vector<char> member;  // over the edge's joint code space
  };
  std::vector<KeyFilter> filters;
};

// Moves each dimension predicate along its N-to-1 path into a key filter on
// `cluster.fact`. Predicates outside the cluster are a structural error.
LeafSelection translate_predicate_to_semijoins(const Database& db, const Cluster& cluster,
                                               const TreeModel& tree, int leaf_id);

std::vector<char> leaf_fact_mask(const Database& db, const std::string& fact,
                                 const LeafSelection& selection);

// Fact row -> leaf id for every leaf of the tree. Hard error when leaf
// selections overlap or leave a row uncovered.
std::vector<int32_t> leaf_partition(const Database& db, const Cluster& cluster, const TreeModel& tree);

// Distinct tuples over the attributes referenced by any leaf predicate, each
// labeled with the additive inverse of its leaf's (learning-rate scaled)
// prediction and annotated with lift(-P). Computed by message passing, never
// from a materialized join.
struct UpdateRelation {
  std::vector<FeatureRef> attrs;
  Relation cells;                  // attrs columns + "neg_prediction"
  std::vector<int> cell_leaf;      // per cell: leaf id
  std::vector<std::vector<double>> annotation;  // variance lift of neg_prediction, [comp][cell]
  const TreeModel* tree = nullptr;
  double eta = 1.0;
};

UpdateRelation build_update_relation(const Database& db, const TreeModel& tree,
                                     const std::vector<FeatureInfo>& features, double eta);

// Multiplies the cluster fact's stored annotation columns by lift(-eta*l.p)
// per leaf, using the closed forms s <- s - p*c and q <- q + p^2*c - 2*s*p;
// columns are installed by swap. The update relation is applied eagerly so
// the join graph stays acyclic.
void apply_update_relation(Database& db, const Cluster& cluster, const UpdateRelation& update);

// Names of the stored variance annotation columns used by the galaxy path.
struct AnnotationColumns {
  std::string c, s, q;
};
AnnotationColumns annotation_columns();
void ensure_annotation_columns(Relation& rel);

// Snowflake residual update: one pass builds a new prediction column (each
// leaf's rows found via its semi-join filters), recomputes gradient/hessian
// columns, and installs all of them by column swap.
void update_residuals_snowflake(Database& db, const std::string& fact, const TreeModel& tree,
                                const ObjectiveSpec& objective, double eta,
                                const std::string& y_column, const std::string& pred_column,
                                const std::string& g_column, const std::string& h_column);

// Exact order statistic of the residuals inside one leaf (lower-value
// convention, no interpolation).
double leaf_order_statistic(std::vector<double> residuals, LeafRule rule, double alpha);

enum class ResidualStrategy { automatic, snowflake, update_relation };

struct GbmParams {
  int iterations = 10;
  double learning_rate = 0.1;
  std::string objective = "rmse";
  ObjectiveParams objective_params;
  TrainParams tree;
  ResidualStrategy strategy = ResidualStrategy::automatic;
  bool use_message_cache = true;
  std::string dump_messages_dir;
};

struct IterationLog {
  int iteration = 0;
  double train_metric = 0.0;
  double seconds = 0.0;
  uint64_t messages_computed = 0;
  uint64_t messages_reused = 0;
};

EnsembleModel train_gbm(const Database& db, const GbmParams& params,
                        std::vector<IterationLog>* log = nullptr, ReaderGauge* gauge = nullptr);

// Single factorized decision tree as a model (criterion chosen from the
// target kind unless overridden: variance for numeric, gini for categorical).
struct DtParams {
  TrainParams tree;
  std::string criterion;  // empty = default by target kind
  bool use_message_cache = true;
  std::string dump_messages_dir;
};

EnsembleModel train_decision_tree(const Database& db, const DtParams& params,
                                  ReaderGauge* gauge = nullptr);

// Feature table shared by the model-level trainers.
std::vector<FeatureInfo> collect_features(const Database& db);

std::string detect_schema_kind(const Database& db);

// base-relation row -> unique matching row of `target_rel` along the N-to-1
// path (-1 when a hop is missing). Errors when a hop has non-unique keys.
std::vector<int64_t> resolve_row_map(const Database& db, const std::string& base,
                                     const std::string& target_rel);

}  // namespace factorboost
