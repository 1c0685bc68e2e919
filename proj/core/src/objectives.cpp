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
#include "factorboost/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace factorboost {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double mean_of(const std::vector<double>& y) {
  double s = 0;
  for (double v : y) s += v;
  return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

}  // namespace

double percentile_lower(std::vector<double> v, double alpha) {
  if (v.empty()) return 0.0;
  size_t idx = 0;
  double pos = alpha * static_cast<double>(v.size());
  idx = pos <= 1.0 ? 0 : static_cast<size_t>(std::ceil(pos)) - 1;
  if (idx >= v.size()) idx = v.size() - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

double ObjectiveSpec::gradient(double y, double p) const {
  double eps = y - p;
  if (name == "rmse") return -eps;
  if (name == "mae") return -sign(eps);
  if (name == "huber") {
    double d = params.huber_delta;
    return std::fabs(eps) <= d ? -eps : -d * sign(eps);
  }
  if (name == "fair") {
    double c = params.fair_c;
    return -c * eps / (std::fabs(eps) + c);
  }
  if (name == "poisson") {
    check(y >= 0, "poisson objective requires y >= 0");
    return std::exp(p) - y;
  }
  if (name == "quantile") {
    double a = params.quantile_alpha;
    return eps < 0 ? (1.0 - a) : -a;
  }
  if (name == "mape") return -sign(eps) / std::max(1.0, std::fabs(y));
  if (name == "gamma") {
    check(y > 0, "gamma objective requires y > 0");
    return 1.0 - y * std::exp(-p);
  }
  if (name == "tweedie") {
    check(y >= 0, "tweedie objective requires y >= 0");
    double rho = params.tweedie_rho;
    return -y * std::exp((1.0 - rho) * p) + std::exp((2.0 - rho) * p);
  }
  fail("objective '" + name + "' has no scalar gradient");
}

double ObjectiveSpec::hessian(double y, double p) const {
  double eps = y - p;
  if (name == "rmse" || name == "mae" || name == "huber" || name == "quantile" || name == "mape") {
    return 1.0;
  }
  if (name == "fair") {
    double c = params.fair_c;
    double d = std::fabs(eps) + c;
    return c * c / (d * d);
  }
  if (name == "poisson") return std::exp(p);
  if (name == "gamma") return y * std::exp(-p);
  if (name == "tweedie") {
    double rho = params.tweedie_rho;
    return -(1.0 - rho) * y * std::exp((1.0 - rho) * p) + (2.0 - rho) * std::exp((2.0 - rho) * p);
  }
  fail("objective '" + name + "' has no scalar hessian");
}

double ObjectiveSpec::loss(double y, double p) const {
  double eps = y - p;
  if (name == "rmse") return eps * eps;
  if (name == "mae") return std::fabs(eps);
  if (name == "huber") {
    double d = params.huber_delta;
    return std::fabs(eps) <= d ? 0.5 * eps * eps : d * (std::fabs(eps) - 0.5 * d);
  }
  if (name == "fair") {
    double c = params.fair_c;
    return c * std::fabs(eps) - c * c * std::log(std::fabs(eps) / c + 1.0);
  }
  if (name == "poisson") return std::exp(p) - y * p;
  if (name == "quantile") {
    double a = params.quantile_alpha;
    return eps < 0 ? (a - 1.0) * eps : a * eps;
  }
  if (name == "mape") return std::fabs(eps) / std::max(1.0, std::fabs(y));
  if (name == "gamma") return y * std::exp(-p) + p;
  if (name == "tweedie") {
    double rho = params.tweedie_rho;
    return -y * std::exp((1.0 - rho) * p) / (1.0 - rho) + std::exp((2.0 - rho) * p) / (2.0 - rho);
  }
  fail("objective '" + name + "' has no scalar loss");
}

double ObjectiveSpec::base_score(const std::vector<double>& y) const {
  if (y.empty()) return 0.0;
  if (name == "mae" || name == "mape") return percentile_lower(y, 0.5);
  if (name == "quantile") return percentile_lower(y, params.quantile_alpha);
  if (log_link) {
    double m = mean_of(y);
    return std::log(std::max(m, 1e-12));
  }
  return mean_of(y);
}

ObjectiveSpec make_objective(const std::string& name, const ObjectiveParams& params) {
  ObjectiveSpec spec;
  spec.name = name;
  spec.params = params;
  if (name == "rmse") {
    spec.leaf_rule = LeafRule::mean;
  } else if (name == "mae" || name == "mape") {
    spec.leaf_rule = LeafRule::median;
  } else if (name == "quantile") {
    spec.leaf_rule = LeafRule::percentile;
  } else if (name == "huber" || name == "fair" || name == "poisson" || name == "gamma" ||
             name == "tweedie") {
    spec.leaf_rule = LeafRule::p_star;
    spec.log_link = (name == "poisson" || name == "gamma" || name == "tweedie");
  } else if (name == "softmax") {
    spec.leaf_rule = LeafRule::p_star;
    spec.multiclass = true;
  } else {
    fail("unknown objective '" + name + "'");
  }
  if (name == "tweedie") {
    check(params.tweedie_rho > 1.0 && params.tweedie_rho < 2.0, "tweedie rho must be in (1, 2)");
  }
  return spec;
}

void softmax_probs(const double* raw, int k, double* probs) {
  double mx = raw[0];
  for (int i = 1; i < k; ++i) mx = std::max(mx, raw[i]);
  double denom = 0;
  for (int i = 0; i < k; ++i) {
    probs[i] = std::exp(raw[i] - mx);
    denom += probs[i];
  }
  for (int i = 0; i < k; ++i) probs[i] /= denom;
}

void softmax_grad_hess(const std::vector<double>& probs, uint32_t y_class, std::vector<double>* g,
                       std::vector<double>* h) {
  int k = static_cast<int>(probs.size());
  g->resize(k);
  h->resize(k);
  double factor = k > 1 ? static_cast<double>(k) / (k - 1.0) : 1.0;
  for (int i = 0; i < k; ++i) {
    double yk = (static_cast<uint32_t>(i) == y_class) ? 1.0 : 0.0;
    (*g)[i] = probs[i] - yk;
    double hk = factor * probs[i] * (1.0 - probs[i]);
    (*h)[i] = std::max(hk, 1e-16);  // keep sum(h) + beta > 0
  }
}

}  // namespace factorboost
