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

#include <cmath>
#include <optional>
#include <vector>

#include "factorboost/common.hpp"

namespace factorboost {

// Commutative semi-rings carrying training statistics. Components are stored
// as a flat double vector; addition is componentwise for all kinds, while
// multiplication is kind-specific.
//
//   count        (c)                          c1*c2
//   variance     (c, s, q)                    (c1c2, s1c2 + s2c1, q1c2 + q2c1 + 2 s1s2)
//   class_count  (c, c^1..c^k)                (c1c2, c1^i c2 + c1 c2^i)
//   gradient     (c, h, g)                    (c1c2, h1h2, g1h2 + g2h1)
//   gradient_vec (c, h^1, g^1, .., h^k, g^k)  per-class gradient product
//
// The count component rides along with the gradient kinds so that leaf-size
// constraints and sampling marginals can be read off the same messages that
// carry the criterion (the count query is coalesced with the criterion).
enum class SemiRingKind { count, variance, class_count, gradient, gradient_vector };

struct AnnotationValue {
  std::vector<double> v;

  double& operator[](size_t i) { return v[i]; }
  double operator[](size_t i) const { return v[i]; }
  size_t arity() const { return v.size(); }
};

// Typed views used by the criterion formulas.
struct VarianceTriple {
  double c = 0, s = 0, q = 0;
};

struct GradPair {
  double h = 0;  // sum of hessians
  double g = 0;  // sum of gradients
};

struct ClassCounts {
  double c = 0;
  std::vector<double> per_class;
};

class SemiRing {
 public:
  static SemiRing count_ring() { return SemiRing(SemiRingKind::count, 0); }
  static SemiRing variance() { return SemiRing(SemiRingKind::variance, 0); }
  static SemiRing class_count(int k) { return SemiRing(SemiRingKind::class_count, k); }
  static SemiRing gradient() { return SemiRing(SemiRingKind::gradient, 0); }
  static SemiRing gradient_vector(int k) { return SemiRing(SemiRingKind::gradient_vector, k); }

  SemiRingKind kind() const { return kind_; }
  int num_classes() const { return num_classes_; }
  size_t arity() const { return arity_; }

  AnnotationValue zero() const { return AnnotationValue{std::vector<double>(arity_, 0.0)}; }

  AnnotationValue one() const {
    AnnotationValue v = zero();
    switch (kind_) {
      case SemiRingKind::count:
      case SemiRingKind::variance:
      case SemiRingKind::class_count:
        v[0] = 1.0;
        break;
      case SemiRingKind::gradient:
        v[0] = 1.0;
        v[1] = 1.0;
        break;
      case SemiRingKind::gradient_vector:
        v[0] = 1.0;
        for (int k = 0; k < num_classes_; ++k) v[1 + 2 * k] = 1.0;
        break;
    }
    return v;
  }

  AnnotationValue add(const AnnotationValue& a, const AnnotationValue& b) const {
    check_arity(a);
    check_arity(b);
    AnnotationValue out = a;
    for (size_t i = 0; i < arity_; ++i) out[i] += b[i];
    return out;
  }

  AnnotationValue mul(const AnnotationValue& a, const AnnotationValue& b) const {
    check_arity(a);
    check_arity(b);
    AnnotationValue out = zero();
    mul_into(a.v.data(), b.v.data(), out.v.data());
    return out;
  }

  // Row-level kernels used by the engine (no allocation).
  void add_rows(const double* a, const double* b, double* out) const {
    for (size_t i = 0; i < arity_; ++i) out[i] = a[i] + b[i];
  }

  void accumulate(double* acc, const double* x) const {
    for (size_t i = 0; i < arity_; ++i) acc[i] += x[i];
  }

  void mul_into(const double* a, const double* b, double* out) const {
    switch (kind_) {
      case SemiRingKind::count:
        out[0] = a[0] * b[0];
        break;
      case SemiRingKind::variance:
        out[0] = a[0] * b[0];
        out[1] = a[1] * b[0] + b[1] * a[0];
        out[2] = a[2] * b[0] + b[2] * a[0] + 2.0 * a[1] * b[1];
        break;
      case SemiRingKind::class_count: {
        double c1 = a[0], c2 = b[0];
        out[0] = c1 * c2;
        for (int k = 1; k <= num_classes_; ++k) out[k] = a[k] * c2 + c1 * b[k];
        break;
      }
      case SemiRingKind::gradient:
        out[0] = a[0] * b[0];
        out[1] = a[1] * b[1];
        out[2] = a[2] * b[1] + b[2] * a[1];
        break;
      case SemiRingKind::gradient_vector: {
        out[0] = a[0] * b[0];
        for (int k = 0; k < num_classes_; ++k) {
          const double h1 = a[1 + 2 * k], g1 = a[2 + 2 * k];
          const double h2 = b[1 + 2 * k], g2 = b[2 + 2 * k];
          out[1 + 2 * k] = h1 * h2;
          out[2 + 2 * k] = g1 * h2 + g2 * h1;
        }
        break;
      }
    }
  }

  // In-place out = out (x) b.
  void mul_accumulate(double* out, const double* b) const {
    double tmp[2];
    switch (kind_) {
      case SemiRingKind::count:
        out[0] *= b[0];
        break;
      case SemiRingKind::variance: {
        double c1 = out[0], s1 = out[1], q1 = out[2];
        out[0] = c1 * b[0];
        out[1] = s1 * b[0] + b[1] * c1;
        out[2] = q1 * b[0] + b[2] * c1 + 2.0 * s1 * b[1];
        break;
      }
      case SemiRingKind::class_count: {
        double c1 = out[0], c2 = b[0];
        out[0] = c1 * c2;
        for (int k = 1; k <= num_classes_; ++k) out[k] = out[k] * c2 + c1 * b[k];
        break;
      }
      case SemiRingKind::gradient:
        tmp[0] = out[1] * b[1];
        tmp[1] = out[2] * b[1] + b[2] * out[1];
        out[0] *= b[0];
        out[1] = tmp[0];
        out[2] = tmp[1];
        break;
      case SemiRingKind::gradient_vector:
        out[0] *= b[0];
        for (int k = 0; k < num_classes_; ++k) {
          double h1 = out[1 + 2 * k], g1 = out[2 + 2 * k];
          out[1 + 2 * k] = h1 * b[1 + 2 * k];
          out[2 + 2 * k] = g1 * b[1 + 2 * k] + b[2 + 2 * k] * h1;
        }
        break;
    }
  }

  // Lift of a target tuple. Weighted tuples are lifted and then scaled by the
  // weight, which is the same as multiplying by a (w, 0, ..., 0) element.
  AnnotationValue lift_target(double y, double weight = 1.0) const {
    AnnotationValue v = zero();
    switch (kind_) {
      case SemiRingKind::count:
        v[0] = weight;
        break;
      case SemiRingKind::variance:
        v[0] = weight;
        v[1] = y * weight;
        v[2] = y * y * weight;
        break;
      default:
        fail("lift_target with a plain value requires the count or variance semi-ring");
    }
    return v;
  }

  AnnotationValue lift_class(uint32_t class_code, double weight = 1.0) const {
    check(kind_ == SemiRingKind::class_count, "lift_class requires the class-count semi-ring");
    check(static_cast<int>(class_code) < num_classes_, "class code out of range");
    AnnotationValue v = zero();
    v[0] = weight;
    v[1 + class_code] = weight;
    return v;
  }

  AnnotationValue lift_gradient(double g, double h, double weight = 1.0) const {
    check(kind_ == SemiRingKind::gradient, "lift_gradient requires the gradient semi-ring");
    AnnotationValue v = zero();
    v[0] = weight;
    v[1] = h * weight;
    v[2] = g * weight;
    return v;
  }

  // The non-target lift: the one element, optionally weighted.
  AnnotationValue lift_one(double weight = 1.0) const {
    AnnotationValue v = one();
    for (size_t i = 0; i < arity_; ++i) v[i] *= weight;
    return v;
  }

  VarianceTriple as_variance(const AnnotationValue& a) const {
    check(kind_ == SemiRingKind::variance, "annotation is not a variance triple");
    return VarianceTriple{a[0], a[1], a.arity() > 2 ? a[2] : 0.0};
  }

  GradPair as_grad(const AnnotationValue& a) const {
    check(kind_ == SemiRingKind::gradient, "annotation is not a gradient pair");
    return GradPair{a[1], a[2]};
  }

  ClassCounts as_class_counts(const AnnotationValue& a) const {
    check(kind_ == SemiRingKind::class_count, "annotation is not a class-count vector");
    ClassCounts cc;
    cc.c = a[0];
    cc.per_class.assign(a.v.begin() + 1, a.v.end());
    return cc;
  }

 private:
  SemiRing(SemiRingKind kind, int k) : kind_(kind), num_classes_(k) {
    switch (kind) {
      case SemiRingKind::count: arity_ = 1; break;
      case SemiRingKind::variance: arity_ = 3; break;
      case SemiRingKind::class_count: arity_ = 1 + static_cast<size_t>(k); break;
      case SemiRingKind::gradient: arity_ = 3; break;
      case SemiRingKind::gradient_vector: arity_ = 1 + 2 * static_cast<size_t>(k); break;
    }
  }

  void check_arity(const AnnotationValue& a) const {
    check(a.arity() == arity_, "annotation arity mismatch");
  }

  SemiRingKind kind_;
  int num_classes_;
  size_t arity_ = 0;
};

// ---- criterion formulas ----------------------------------------------------

// Sum of squared deviations from the mean, Q - S^2/C, evaluated as
// Q - (S/C)*S to limit overflow. Requires c > 0.
inline double variance_stat(const VarianceTriple& agg) {
  check(agg.c > 0, "variance of an empty aggregate is undefined");
  return agg.q - (agg.s / agg.c) * agg.s;
}

// Reduction in the variance criterion for a binary split. The Q component
// cancels, so only (C, S) pairs are consulted. Returns nullopt when a side is
// empty (split invalid), never throws for that case.
inline std::optional<double> reduction_in_variance(double c_total, double s_total, double c_left,
                                                   double s_left) {
  if (!(c_left > 0) || !(c_total - c_left > 0)) return std::nullopt;
  double s_right = s_total - s_left;
  double c_right = c_total - c_left;
  return -(s_total / c_total) * s_total + (s_left / c_left) * s_left + (s_right / c_right) * s_right;
}

enum class ClassificationCriterion { entropy, gini, chi_square };

// Node-level impurity: entropy (base-2) or gini. Requires c > 0.
double classification_impurity(const ClassCounts& agg, ClassificationCriterion kind);

// Chi-square statistic of a binary split; both sides must be non-empty.
double chi_square_split(const ClassCounts& total, const ClassCounts& left);

// Split score used by the trainer: weighted impurity decrease for
// entropy/gini, the chi-square statistic for chi_square. Returns nullopt for
// an empty side.
std::optional<double> classification_split_score(const ClassCounts& total, const ClassCounts& left,
                                                 ClassificationCriterion kind);

// ---- boosting formulas -----------------------------------------------------

// Optimal leaf prediction p* = -G / (H + beta); requires H + beta > 0.
inline double optimal_leaf_prediction(const GradPair& agg, double beta) {
  check(agg.h + beta > 0, "optimal leaf prediction requires positive hessian sum");
  return -agg.g / (agg.h + beta);
}

// Loss reduction of a split: Ltilde(parent) - (Ltilde(left) + Ltilde(right) + alpha)
// with Ltilde = -0.5 G^2 / (H + beta). Callers treat gain <= 0 as "do not split".
inline double boosting_gain(const GradPair& parent, const GradPair& left, double alpha, double beta) {
  GradPair right{parent.h - left.h, parent.g - left.g};
  check(left.h + beta > 0 && right.h + beta > 0, "boosting gain requires non-empty children");
  auto score = [beta](const GradPair& p) { return -0.5 * (p.g * p.g) / (p.h + beta); };
  return score(parent) - (score(left) + score(right) + alpha);
}

}  // namespace factorboost
