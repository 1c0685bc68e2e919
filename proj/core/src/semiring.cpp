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
#include "factorboost/semiring.hpp"

namespace factorboost {

double classification_impurity(const ClassCounts& agg, ClassificationCriterion kind) {
  check(agg.c > 0, "impurity of an empty node is undefined");
  double impurity = 0.0;
  switch (kind) {
    case ClassificationCriterion::entropy:
      for (double ck : agg.per_class) {
        if (ck <= 0) continue;
        double p = ck / agg.c;
        impurity -= p * std::log2(p);
      }
      break;
    case ClassificationCriterion::gini: {
      double sum_sq = 0.0;
      for (double ck : agg.per_class) {
        double p = ck / agg.c;
        sum_sq += p * p;
      }
      impurity = 1.0 - sum_sq;
      break;
    }
    case ClassificationCriterion::chi_square:
      fail("chi_square is a split statistic, not a node impurity");
  }
  return impurity;
}

double chi_square_split(const ClassCounts& total, const ClassCounts& left) {
  check(total.per_class.size() == left.per_class.size(), "class arity mismatch");
  double c_left = left.c;
  double c_right = total.c - left.c;
  check(c_left > 0 && c_right > 0, "chi-square requires both sides non-empty");
  double stat = 0.0;
  for (size_t k = 0; k < total.per_class.size(); ++k) {
    double ck = total.per_class[k];
    if (ck <= 0) continue;
    double exp_left = ck * c_left / total.c;
    double exp_right = ck * c_right / total.c;
    double obs_left = left.per_class[k];
    double obs_right = ck - obs_left;
    stat += (obs_left - exp_left) * (obs_left - exp_left) / exp_left;
    stat += (obs_right - exp_right) * (obs_right - exp_right) / exp_right;
  }
  return stat;
}

std::optional<double> classification_split_score(const ClassCounts& total, const ClassCounts& left,
                                                 ClassificationCriterion kind) {
  double c_left = left.c;
  double c_right = total.c - left.c;
  if (!(c_left > 0) || !(c_right > 0)) return std::nullopt;
  if (kind == ClassificationCriterion::chi_square) return chi_square_split(total, left);
  ClassCounts right;
  right.c = c_right;
  right.per_class.resize(total.per_class.size());
  for (size_t k = 0; k < total.per_class.size(); ++k) {
    right.per_class[k] = total.per_class[k] - left.per_class[k];
  }
  double parent = classification_impurity(total, kind);
  double wl = c_left / total.c;
  double wr = c_right / total.c;
  return parent - wl * classification_impurity(left, kind) - wr * classification_impurity(right, kind);
}

}  // namespace factorboost
