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

#include "factorboost/engine.hpp"
#include "factorboost/messages.hpp"
#include "factorboost/model.hpp"

namespace factorboost {

inline std::string qualified_column_name(const FeatureRef& ref) { return ref.qualified(); }

// Fills one annotation column per semi-ring component for every row of `rel`
// under the lift spec.
std::vector<std::vector<double>> lift_rows(const Relation& rel, const LiftSpec& spec, const SemiRing& sr);

// GROUP BY `attrs` over the non-materialized join, evaluated by message
// passing along the rooted join tree (aggregate early, join small). Output
// columns are the qualified attribute names.
AnnotatedRelation groupby_over_join(const Database& db, const std::vector<FeatureRef>& attrs,
                                    const SemiRing& sr, const std::map<std::string, LiftSpec>& lifts);

// Histogram cuboid: numeric features binned equi-width over their observed
// range (ties at bin edges go to the lower bin; each bin reports its max
// observed value), categoricals identity-binned (error beyond `bins`
// values). The result is a weighted single-table training input.
AnnotatedRelation build_cuboid(const Database& db, const std::vector<FeatureRef>& features, int bins,
                               const SemiRing& sr, const std::map<std::string, LiftSpec>& lifts);

// Single-relation database wrapping a cuboid, with pre-lifted annotation
// columns (bag semantics) ready for the factorized trainer.
struct CuboidDataset {
  Database db;
  SemiRing sr = SemiRing::count_ring();
  std::map<std::string, LiftSpec> lifts;
  std::vector<FeatureInfo> features;
};

CuboidDataset cuboid_dataset(const AnnotatedRelation& cuboid, const std::vector<FeatureRef>& features);

// The naive baseline: materializes the full join as a single flat relation
// (qualified feature columns plus the target) wrapped in a one-relation
// database. Intermediate sizes are reported to ExecStats, so the
// no-materialization instrumentation sees the full join size.
Database materialize_join_flat(const Database& db);

}  // namespace factorboost
