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

#include "factorboost/dataset.hpp"
#include "factorboost/model.hpp"

namespace factorboost {

// Canonical model JSON: fixed key order, 17-significant-digit floats, so
// identical models serialize to identical bytes. Dictionary files (one JSON
// map per categorical column) are emitted next to the model file.
std::string model_to_json(const EnsembleModel& model);
void save_model(const EnsembleModel& model, const std::string& path);

EnsembleModel model_from_json(const std::string& json_text);
EnsembleModel load_model(const std::string& path);

// Batch prediction over the normalized inputs: one prediction per row of the
// base relation (the fact for snowflakes), features resolved through N-to-1
// key lookups without materializing the join. Classification outputs the
// winning class code.
struct PredictionResult {
  std::vector<double> values;        // regression score / winning class code
  std::vector<std::string> labels;   // decoded class labels (classification)
};

PredictionResult predict_batch(const EnsembleModel& model, const Database& db);

// Prediction over a flat (pre-joined) relation whose columns are named by the
// qualified feature names (or bare column names when unambiguous).
PredictionResult predict_flat(const EnsembleModel& model, const Relation& flat);

// Predictions CSV with a row-id column.
void write_predictions_csv(const PredictionResult& result, const std::string& path);

}  // namespace factorboost
