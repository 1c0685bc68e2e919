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

#include <string>
#include <vector>

#include "factorboost/semiring.hpp"

namespace factorboost {

// How a leaf value is assigned once the tree structure is fixed. mean is the
// closed form -G/(H+beta) (identical to p_star for L2); median and percentile
// need per-leaf order statistics over the fact table.
enum class LeafRule { p_star, mean, median, percentile };

struct ObjectiveParams {
  double huber_delta = 1.0;    // delta
  double fair_c = 1.0;         // c
  double quantile_alpha = 0.5; // alpha (quantile level, not the leaf penalty)
  double tweedie_rho = 1.5;    // rho in (1, 2)
};

// A boosting objective: gradient/hessian of the per-tuple loss and the leaf
// value rule. The convention is g = dl/dp, so p* = -sum(g)/(sum(h)+beta).
// Hessians approximated as 1 upstream are kept as 1.
struct ObjectiveSpec {
  std::string name;
  LeafRule leaf_rule = LeafRule::p_star;
  ObjectiveParams params;
  bool multiclass = false;  // softmax
  bool log_link = false;    // p is a log-scale score (poisson/gamma/tweedie)

  // Regression objectives.
  double gradient(double y, double p) const;
  double hessian(double y, double p) const;
  double loss(double y, double p) const;

  // Best constant prediction, used as the boosting base score.
  double base_score(const std::vector<double>& y) const;
};

// Looks up an objective by its task name: rmse, mae, huber, fair, poisson,
// quantile, mape, gamma, tweedie, softmax. Throws on unknown names.
ObjectiveSpec make_objective(const std::string& name, const ObjectiveParams& params = {});

inline std::pair<double, double> grad_hess(const ObjectiveSpec& obj, double y, double p) {
  return {obj.gradient(y, p), obj.hessian(y, p)};
}

// Softmax per-class gradient/hessian: probs is the softmax of raw scores,
// y_class the true class. g^k = p^k - 1[y=k], h^k = K/(K-1) p^k (1 - p^k).
void softmax_grad_hess(const std::vector<double>& probs, uint32_t y_class, std::vector<double>* g,
                       std::vector<double>* h);

void softmax_probs(const double* raw, int k, double* probs);

// Lower-value percentile (no interpolation): element at ceil(alpha*n)-1.
double percentile_lower(std::vector<double> values, double alpha);

}  // namespace factorboost
