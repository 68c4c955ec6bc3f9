/*
 * Copyright 2026 The mcf Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MCF_MFITR_HPP
#define MCF_MFITR_HPP

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "mcf/factor_model.hpp"
#include "mcf/neighborhood.hpp"
#include "mcf/taxonomy.hpp"

namespace mcf {

/// Factor model with artist bias and artist factor. Artist parameters are
/// stored by item id; rows of ids that are not artists stay zero.
struct MfitrModel {
  FactorModel base;
  std::vector<double> artist_bias;
  FactorMatrix artist_factor;

  /// `num_items` must cover every taxonomy id. Artist factors start like the
  /// other factors, from their own seeded stream.
  static MfitrModel create(ModelKind kind, std::size_t num_users, std::size_t num_items,
                           const HyperParams& h, const TimeBinner& binner, double mu,
                           const TaxonomyGraph& g);

  MfitrModel zeros_like() const;

  friend bool operator==(const MfitrModel&, const MfitrModel&) = default;
};

std::vector<ParamBlock> parameter_blocks(MfitrModel& m);
bool all_finite(const MfitrModel& m);

/// One weight per taxonomy edge, parallel to `g.edges()`.
struct TaxonomyEdgeWeights {
  std::vector<TaxonomyEdge> edges;
  std::vector<double> weight;

  /// Weight of the edge (child, parent); 0 if there is no such edge.
  double of(ItemId child, ItemId parent) const;
};

/// max(0, adjusted cosine) for every edge.
TaxonomyEdgeWeights edge_weights(const TaxonomyGraph& g, const Dataset& train,
                                 const UserMeanTable& means);

/// Same weight on every edge (tests, ablations).
TaxonomyEdgeWeights uniform_edge_weights(const TaxonomyGraph& g, double w);

void write_edge_weights(std::ostream& out, const TaxonomyEdgeWeights& ew);

double predict_mfitr(const MfitrModel& m, UserId u, ItemId i, const TaxonomyGraph& g);
double predict_time_mfitr(const MfitrModel& m, UserId u, ItemId i, Timestamp t,
                          const TaxonomyGraph& g);

/// Squared error plus per-observation lambda1/lambda2 terms (and lambda5 time
/// terms when the model is time-aware), plus lambda3 over parent sets and
/// lambda4 over child sets, each edge summed once.
double loss_mfitr(const MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                  const TaxonomyEdgeWeights& ew, const HyperParams& h);
MfitrModel loss_gradient_mfitr(const MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                               const TaxonomyEdgeWeights& ew, const HyperParams& h);

/// Rating pass, then one pass over the taxonomy edges.
void sgd_epoch_mfitr(MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                     const TaxonomyEdgeWeights& ew, const HyperParams& h, EpochState& st);
void sgd_epoch_time_mfitr(MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                          const TaxonomyEdgeWeights& ew, const HyperParams& h, EpochState& st);

/// The edge pass alone: for edge (c, p) with weight w,
/// q_c -= gamma (lambda3 + lambda4) w (q_c - q_p) and q_p gets the opposite step.
void graph_pass(MfitrModel& m, const TaxonomyEdgeWeights& ew, const HyperParams& h,
                const EpochState& st);

struct MfitrTrainResult {
  MfitrModel model;
  std::vector<EpochReport> report;
};

MfitrModel initial_mfitr(ModelKind kind, const Dataset& train, const TaxonomyGraph& g,
                         const HyperParams& h, const TrainOptions& opts);

/// Runs `h.iters` epochs of mfitr or time-mfitr; edge weights come from the
/// adjusted cosine on `train`.
MfitrTrainResult train_mfitr(ModelKind kind, const Dataset& train, const Dataset* validation,
                             const TaxonomyGraph& g, const HyperParams& h,
                             const TrainOptions& opts = {});

/// Batch prediction with the same fallbacks as `predict_all`.
std::vector<double> predict_all_mfitr(const MfitrModel& m, const TaxonomyGraph& g,
                                      const Dataset& points);

}  // namespace mcf

#endif  // MCF_MFITR_HPP
