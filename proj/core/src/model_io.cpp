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
#include "factorboost/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "factorboost/boosting.hpp"
#include "json.hpp"

namespace factorboost {

namespace {

constexpr int kFormatVersion = 1;

void json_escape(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

void write_dictionary(std::string& out, const Dictionary& dict) {
  // Canonical order: sorted by label.
  std::vector<std::pair<std::string, uint32_t>> entries;
  for (uint32_t c = 0; c < dict.size(); ++c) entries.emplace_back(dict.decode(c), c);
  std::sort(entries.begin(), entries.end());
  out.push_back('{');
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) out.push_back(',');
    json_escape(out, entries[i].first);
    out.push_back(':');
    out += std::to_string(entries[i].second);
  }
  out.push_back('}');
}

void write_node(std::string& out, const TreeModel& tree, int id) {
  const TreeNode& n = tree.nodes[static_cast<size_t>(id)];
  out.push_back('{');
  if (n.is_leaf()) {
    out += "\"prediction\":[";
    for (size_t i = 0; i < n.leaf_value.size(); ++i) {
      if (i) out.push_back(',');
      out += format_double(n.leaf_value[i]);
    }
    out += "]";
  } else {
    out += "\"feature\":" + std::to_string(n.split_feature);
    out += ",\"op\":\"";
    out += n.split.op == PredicateOp::le ? "le" : "eq";
    out += "\"";
    if (n.split.op == PredicateOp::le) {
      out += ",\"value\":" + format_double(n.split.value);
    } else {
      out += ",\"code\":" + std::to_string(n.split.code);
    }
    out += ",\"null_left\":";
    out += n.split.include_nulls ? "true" : "false";
    out += ",\"reduction\":" + format_double(n.reduction);
    out += ",\"left\":";
    write_node(out, tree, n.left);
    out += ",\"right\":";
    write_node(out, tree, n.right);
  }
  out.push_back('}');
}

void read_node(const nlohmann::json& j, TreeModel& tree, int parent, int depth,
               const std::vector<FeatureInfo>& features, int* out_id) {
  TreeNode n;
  n.id = static_cast<int>(tree.nodes.size());
  n.parent = parent;
  n.depth = depth;
  *out_id = n.id;
  tree.nodes.push_back(n);
  if (j.contains("prediction")) {
    std::vector<double> v = j.at("prediction").get<std::vector<double>>();
    tree.nodes[static_cast<size_t>(n.id)].leaf_value = std::move(v);
    return;
  }
  int feature = j.at("feature").get<int>();
  check(feature >= 0 && feature < static_cast<int>(features.size()),
        "model references unknown feature index " + std::to_string(feature));
  SplitPredicate pred;
  pred.attr = features[static_cast<size_t>(feature)].ref;
  std::string op = j.at("op").get<std::string>();
  check(op == "le" || op == "eq", "unknown split op '" + op + "'");
  pred.op = op == "le" ? PredicateOp::le : PredicateOp::eq;
  if (pred.op == PredicateOp::le) {
    pred.value = j.at("value").get<double>();
  } else {
    pred.code = j.at("code").get<uint32_t>();
  }
  pred.include_nulls = j.at("null_left").get<bool>();

  int self = n.id;
  int left_id = 0, right_id = 0;
  read_node(j.at("left"), tree, self, depth + 1, features, &left_id);
  read_node(j.at("right"), tree, self, depth + 1, features, &right_id);
  TreeNode& node = tree.nodes[static_cast<size_t>(self)];
  node.has_split = true;
  node.split = pred;
  node.split_feature = feature;
  node.reduction = j.value("reduction", 0.0);
  node.left = left_id;
  node.right = right_id;
  tree.nodes[static_cast<size_t>(left_id)].edge_predicate = pred;
  SplitPredicate neg = pred;
  neg.negated = true;
  neg.include_nulls = !pred.include_nulls;
  tree.nodes[static_cast<size_t>(right_id)].edge_predicate = neg;
}

std::shared_ptr<Dictionary> dictionary_from_json(const nlohmann::json& j) {
  std::vector<std::string> labels;
  for (auto it = j.begin(); it != j.end(); ++it) {
    uint32_t code = it.value().get<uint32_t>();
    if (code >= labels.size()) labels.resize(code + 1);
    labels[code] = it.key();
  }
  auto dict = std::make_shared<Dictionary>();
  for (const std::string& label : labels) dict->encode(label);
  return dict;
}

}  // namespace

std::string model_to_json(const EnsembleModel& model) {
  std::string out;
  out.reserve(1 << 16);
  out += "{\"format_version\":" + std::to_string(kFormatVersion);
  out += ",\"model_kind\":\"";
  out += model_kind_name(model.kind);
  out += "\",\"objective\":";
  json_escape(out, model.objective);
  out += ",\"objective_params\":{";
  out += "\"fair_c\":" + format_double(model.objective_params.fair_c);
  out += ",\"huber_delta\":" + format_double(model.objective_params.huber_delta);
  out += ",\"quantile_alpha\":" + format_double(model.objective_params.quantile_alpha);
  out += ",\"tweedie_rho\":" + format_double(model.objective_params.tweedie_rho);
  out += "}";
  out += ",\"learning_rate\":" + format_double(model.learning_rate);
  out += ",\"base_score\":" + format_double(model.base_score);
  if (!model.class_base_scores.empty()) {
    out += ",\"class_base_scores\":[";
    for (size_t i = 0; i < model.class_base_scores.size(); ++i) {
      if (i) out.push_back(',');
      out += format_double(model.class_base_scores[i]);
    }
    out += "]";
  }
  out += ",\"num_classes\":" + std::to_string(model.num_classes);
  out += ",\"schema_kind\":";
  json_escape(out, model.schema_kind);
  out += ",\"features\":[";
  for (size_t i = 0; i < model.features.size(); ++i) {
    const FeatureInfo& f = model.features[i];
    if (i) out.push_back(',');
    out += "{\"relation\":";
    json_escape(out, f.ref.relation);
    out += ",\"column\":";
    json_escape(out, f.ref.column);
    out += ",\"kind\":\"";
    out += column_kind_name(f.kind);
    out += "\"";
    if (f.kind == ColumnKind::categorical && f.dict) {
      out += ",\"dictionary\":";
      write_dictionary(out, *f.dict);
    }
    out += "}";
  }
  out += "]";
  if (model.target_dict) {
    out += ",\"target_dictionary\":";
    write_dictionary(out, *model.target_dict);
  }
  out += ",\"trees\":[";
  for (size_t i = 0; i < model.trees.size(); ++i) {
    if (i) out.push_back(',');
    write_node(out, model.trees[i], 0);
  }
  out += "]}";
  return out;
}

void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot open '" + path + "' for writing");
  out << model_to_json(model);
  check(out.good(), "failed writing '" + path + "'");
  out.close();
  // Dictionary files, one per categorical column, next to the model.
  for (const FeatureInfo& f : model.features) {
    if (f.kind != ColumnKind::categorical || !f.dict) continue;
    std::string dict_json;
    write_dictionary(dict_json, *f.dict);
    std::string dict_path = path + ".dict." + f.ref.relation + "." + f.ref.column + ".json";
    std::ofstream d(dict_path, std::ios::binary);
    check(d.good(), "cannot open '" + dict_path + "' for writing");
    d << dict_json;
  }
}

EnsembleModel model_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("malformed model file: ") + e.what());
  }
  int version = j.at("format_version").get<int>();
  check(version == kFormatVersion, "unsupported model format_version " + std::to_string(version) +
                                       " (this build reads version " + std::to_string(kFormatVersion) + ")");
  EnsembleModel model;
  std::string kind = j.at("model_kind").get<std::string>();
  if (kind == "dt") {
    model.kind = ModelKind::dt;
  } else if (kind == "rf") {
    model.kind = ModelKind::rf;
  } else if (kind == "gbm") {
    model.kind = ModelKind::gbm;
  } else {
    fail("unknown model_kind '" + kind + "'");
  }
  model.objective = j.at("objective").get<std::string>();
  if (j.contains("objective_params")) {
    const auto& p = j["objective_params"];
    model.objective_params.fair_c = p.value("fair_c", 1.0);
    model.objective_params.huber_delta = p.value("huber_delta", 1.0);
    model.objective_params.quantile_alpha = p.value("quantile_alpha", 0.5);
    model.objective_params.tweedie_rho = p.value("tweedie_rho", 1.5);
  }
  model.learning_rate = j.at("learning_rate").get<double>();
  model.base_score = j.at("base_score").get<double>();
  if (j.contains("class_base_scores")) {
    model.class_base_scores = j["class_base_scores"].get<std::vector<double>>();
  }
  model.num_classes = j.at("num_classes").get<int>();
  model.schema_kind = j.at("schema_kind").get<std::string>();
  for (const auto& f : j.at("features")) {
    FeatureInfo info;
    info.ref.relation = f.at("relation").get<std::string>();
    info.ref.column = f.at("column").get<std::string>();
    std::string k = f.at("kind").get<std::string>();
    info.kind = k == "numeric" ? ColumnKind::numeric
                               : (k == "categorical" ? ColumnKind::categorical : ColumnKind::key);
    if (f.contains("dictionary")) info.dict = dictionary_from_json(f["dictionary"]);
    model.features.push_back(std::move(info));
  }
  if (j.contains("target_dictionary")) {
    model.target_dict = dictionary_from_json(j["target_dictionary"]);
  }
  for (const auto& t : j.at("trees")) {
    TreeModel tree;
    tree.num_classes = model.num_classes;
    int root_id = 0;
    read_node(t, tree, -1, 0, model.features, &root_id);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

namespace {

// db-code -> model-code translation for one categorical feature; unseen
// values map to null.
std::vector<uint32_t> code_translation(const Dictionary& db_dict, const Dictionary& model_dict) {
  std::vector<uint32_t> map(db_dict.size(), UINT32_MAX);
  for (uint32_t c = 0; c < db_dict.size(); ++c) {
    map[c] = model_dict.lookup(db_dict.decode(c));
  }
  return map;
}

int argmax_smallest(const std::vector<double>& v) {
  int arg = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<size_t>(arg)]) arg = static_cast<int>(i);
  }
  return arg;
}

PredictionResult finish_predictions(const EnsembleModel& model,
                                    std::vector<std::vector<double>> raw) {
  PredictionResult out;
  out.values.reserve(raw.size());
  bool classification = model.is_classification();
  for (auto& scores : raw) {
    if (!classification) {
      out.values.push_back(scores.front());
      continue;
    }
    int arg = argmax_smallest(scores);
    out.values.push_back(static_cast<double>(arg));
    if (model.target_dict) out.labels.push_back(model.target_dict->decode(static_cast<uint32_t>(arg)));
  }
  return out;
}

}  // namespace

PredictionResult predict_batch(const EnsembleModel& model, const Database& db) {
  std::string base = db.graph.fact_relation;
  if (base.empty() && !is_snowflake(db.graph, &base)) base = db.target.relation;
  const Relation& rel = db.relation(base);

  struct BoundFeature {
    std::vector<int64_t> rows;
    const Column* col = nullptr;
    std::vector<uint32_t> translate;
    bool is_numeric = true;
  };
  std::vector<BoundFeature> bound(model.features.size());
  for (size_t i = 0; i < model.features.size(); ++i) {
    const FeatureInfo& f = model.features[i];
    BoundFeature b;
    b.rows = resolve_row_map(db, base, f.ref.relation);
    b.col = &db.relation(f.ref.relation).column(f.ref.column);
    b.is_numeric = b.col->kind == ColumnKind::numeric;
    check((b.col->kind == ColumnKind::numeric) == (f.kind == ColumnKind::numeric),
          "feature '" + f.ref.qualified() + "' kind differs from the model");
    if (!b.is_numeric) {
      check(b.col->dict != nullptr && f.dict != nullptr,
            "categorical feature '" + f.ref.qualified() + "' is missing a dictionary");
      b.translate = code_translation(*b.col->dict, *f.dict);
    }
    bound[i] = std::move(b);
  }

  std::vector<std::vector<double>> raw;
  raw.reserve(rel.row_count());
  for (size_t r = 0; r < rel.row_count(); ++r) {
    RowAccessor acc = [&](int fi) {
      const BoundFeature& b = bound[static_cast<size_t>(fi)];
      FeatureValue v;
      int64_t row = b.rows[r];
      if (row < 0 || !b.col->is_valid(static_cast<size_t>(row))) return v;
      if (b.is_numeric) {
        v.valid = true;
        v.num = b.col->num[static_cast<size_t>(row)];
      } else {
        uint32_t code = b.translate[b.col->codes[static_cast<size_t>(row)]];
        if (code == UINT32_MAX) return v;  // unseen category routes as null
        v.valid = true;
        v.code = code;
      }
      return v;
    };
    raw.push_back(predict_row(model, acc));
  }
  return finish_predictions(model, std::move(raw));
}

PredictionResult predict_flat(const EnsembleModel& model, const Relation& flat) {
  struct BoundFeature {
    const Column* col = nullptr;
    std::vector<uint32_t> translate;
  };
  std::vector<BoundFeature> bound(model.features.size());
  for (size_t i = 0; i < model.features.size(); ++i) {
    const FeatureInfo& f = model.features[i];
    std::string qualified = f.ref.qualified();
    const Column* col = flat.has_column(qualified) ? &flat.column(qualified)
                        : flat.has_column(f.ref.column) ? &flat.column(f.ref.column)
                                                        : nullptr;
    check(col != nullptr, "prediction input is missing feature column '" + qualified + "'");
    BoundFeature b;
    b.col = col;
    if (col->kind != ColumnKind::numeric) {
      check(col->dict != nullptr && f.dict != nullptr, "missing dictionary for '" + qualified + "'");
      b.translate = code_translation(*col->dict, *f.dict);
    }
    bound[i] = std::move(b);
  }
  std::vector<std::vector<double>> raw;
  raw.reserve(flat.row_count());
  for (size_t r = 0; r < flat.row_count(); ++r) {
    RowAccessor acc = [&](int fi) {
      const BoundFeature& b = bound[static_cast<size_t>(fi)];
      FeatureValue v;
      if (!b.col->is_valid(r)) return v;
      if (b.col->kind == ColumnKind::numeric) {
        v.valid = true;
        v.num = b.col->num[r];
      } else {
        uint32_t code = b.translate[b.col->codes[r]];
        if (code == UINT32_MAX) return v;
        v.valid = true;
        v.code = code;
      }
      return v;
    };
    raw.push_back(predict_row(model, acc));
  }
  return finish_predictions(model, std::move(raw));
}

void write_predictions_csv(const PredictionResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot open '" + path + "' for writing");
  out << "row_id,prediction\n";
  for (size_t i = 0; i < result.values.size(); ++i) {
    out << i << ',';
    if (!result.labels.empty()) {
      out << result.labels[i];
    } else {
      out << format_double(result.values[i]);
    }
    out << '\n';
  }
  check(out.good(), "failed writing '" + path + "'");
}

}  // namespace factorboost
