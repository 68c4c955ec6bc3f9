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

#ifndef MCF_FACTOR_MODEL_HPP
#define MCF_FACTOR_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcf/dataset.hpp"
#include "mcf/factor_matrix.hpp"

namespace mcf {

enum class ModelKind { Knn, TimeKnn, Als, Wals, Sgd, Svdpp, TimeSvd, TimeSvdpp, Mfitr, TimeMfitr };

std::string_view to_string(ModelKind k) noexcept;
/// Accepts the CLI names (knn, time-knn, als, wals, sgd, svdpp, time-svd,
/// time-svdpp, mfitr, time-mfitr) and `mf-sgd` as an alias of `sgd`.
ModelKind model_kind_from_string(std::string_view name);

bool uses_implicit(ModelKind k) noexcept;
bool uses_time(ModelKind k) noexcept;
bool uses_taxonomy(ModelKind k) noexcept;
bool is_neighborhood(ModelKind k) noexcept;
bool is_als(ModelKind k) noexcept;

/// Training knobs shared by every model family. Which lambdas are read
/// depends on the kind (see `reg_weights`).
struct HyperParams {
  double gamma = 5e-4;   ///< learning rate
  double decay = 0.95;   ///< multiplier applied to gamma after every epoch
  double lambda = 1e-4;  ///< single regularizer of sgd/svdpp/als/wals
  double lambda1 = 0.0;  ///< biases (time and taxonomy models)
  double lambda2 = 0.0;  ///< latent factors
  double lambda3 = 0.0;  ///< time factors (time-svd*) / parent similarity (mfitr)
  double lambda4 = 0.0;  ///< child similarity (mfitr)
  double lambda5 = 0.0;  ///< time factors (time-mfitr)
  int iters = 50;
  std::size_t dim = 50;
  std::size_t time_dim = 4;
  std::size_t num_bins = 30;
  std::uint64_t seed = 1;

  std::size_t knn_k = 50;
  std::size_t knn_parts = 300;
  double knn_beta = 0.08;

  /// Reference settings for each algorithm, tuned at full data scale.
  static HyperParams defaults_for(ModelKind kind);
  /// Throws ConfigError on out-of-range settings.
  void validate() const;
};

/// Regularization weight of each parameter group for one objective.
struct RegWeights {
  double bias = 0.0;      ///< b_u, b_i, b_a, b_{i,bin}
  double factor = 0.0;    ///< p_u, q_i, q_a
  double implicit = 0.0;  ///< y_j
  double time = 0.0;      ///< x_u, z_bin
  double parent = 0.0;    ///< graph term over parent sets
  double child = 0.0;     ///< graph term over child sets
};

RegWeights reg_weights(ModelKind kind, const HyperParams& h) noexcept;

/// Latent state of every factor model. Groups a kind does not use are kept
/// with zero columns.
struct FactorModel {
  ModelKind kind = ModelKind::Sgd;
  std::size_t dim = 0;
  std::size_t time_dim = 0;
  bool implicit_on = false;
  bool time_on = false;
  std::uint64_t seed = 0;
  double mu = 0.0;
  TimeBinner binner;

  std::vector<double> user_bias;
  std::vector<double> item_bias;
  FactorMatrix p;              ///< users x dim
  FactorMatrix q;              ///< items x dim
  FactorMatrix y;              ///< items x dim when implicit_on
  FactorMatrix x;              ///< users x time_dim when time_on
  FactorMatrix z;              ///< bins x time_dim when time_on
  FactorMatrix item_bin_bias;  ///< items x bins when time_on

  std::size_t num_users() const noexcept { return user_bias.size(); }
  std::size_t num_items() const noexcept { return item_bias.size(); }

  /// Seeded initialization: biases zero, factor entries uniform in
  /// [-0.005, 0.005] / sqrt(dim).
  static FactorModel create(ModelKind kind, std::size_t num_users, std::size_t num_items,
                            const HyperParams& h, const TimeBinner& binner, double mu);

  /// Same shape, every parameter zero.
  FactorModel zeros_like() const;

  friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

struct ParamBlock {
  std::string name;
  std::span<double> values;
};

std::vector<ParamBlock> parameter_blocks(FactorModel& m);
bool all_finite(const FactorModel& m);

/// Parameter groups held fixed during an epoch.
struct FrozenGroups {
  bool implicit = false;
  bool time = false;
  bool artist = false;
};

/// Mutable training state carried across epochs.
struct EpochState {
  double gamma = 0.0;
  int epoch = 0;  ///< completed epochs
  std::uint64_t seed = 1;
  unsigned threads = 1;
  FrozenGroups frozen;

  static EpochState start(const HyperParams& h, unsigned threads = 1);
};

/// Distinct items each user rated, ascending. R_u of the implicit models.
class RatedSets {
 public:
  RatedSets() = default;
  explicit RatedSets(const Dataset& data);
  std::span<const ItemId> of(UserId u) const;
  std::size_t num_users() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<ItemId> items_;
};

// ---- predictions (unclipped; ids must be within the model) ----

double predict_mf(const FactorModel& m, UserId u, ItemId i);
double predict_svdpp(const FactorModel& m, UserId u, ItemId i, std::span<const ItemId> rated);
/// Time-aware rule; `rated` is ignored when implicit_on is false (time-SVD).
double predict_time(const FactorModel& m, UserId u, ItemId i, Timestamp t,
                    std::span<const ItemId> rated);
double predict_als(const FactorModel& m, UserId u, ItemId i);

// ---- objectives ----

/// Squared error plus lambda * (b_i^2 + b_u^2 + |q_i|^2 + |p_u|^2), with the
/// regularizer summed once per observation.
double loss_mf(const FactorModel& m, const Dataset& data, double lambda);
/// General per-observation objective of the bias/implicit/time family.
double loss(const FactorModel& m, const Dataset& data, const RegWeights& reg);
/// Analytic gradient of `loss`, returned in a model-shaped container.
FactorModel loss_gradient(const FactorModel& m, const Dataset& data, const RegWeights& reg);

// ---- SGD epochs ----

void sgd_epoch(FactorModel& m, const Dataset& train, const HyperParams& h, EpochState& st);
void sgd_epoch_svdpp(FactorModel& m, const Dataset& train, const HyperParams& h, EpochState& st);
void sgd_epoch_time(FactorModel& m, const Dataset& train, const HyperParams& h, EpochState& st);

// ---- ALS ----

enum class AlsSide { Users, Items };

/// Solves (sum w q q^T + lambda I) p = sum w r q for every row of `side`.
/// `weights` is empty (all ones) or holds one entry per training record.
void als_half_step(FactorModel& m, const Dataset& train, AlsSide side, double lambda,
                   std::span<const double> weights = {}, unsigned threads = 1);
double als_objective(const FactorModel& m, const Dataset& train, double lambda,
                     std::span<const double> weights = {});

// ---- driver ----

struct EpochReport {
  int epoch = 0;
  double objective = 0.0;
  double valid_rmse = 0.0;  ///< NaN without a validation set
  double gamma = 0.0;
  double seconds = 0.0;
};

struct TrainOptions {
  std::size_t num_users = 0;  ///< 0: take from the data
  std::size_t num_items = 0;
  std::optional<TimeBinner> binner;
  unsigned threads = 1;
  std::span<const double> weights;  ///< wals observation weights
  FrozenGroups frozen;
};

struct TrainResult {
  FactorModel model;
  std::vector<EpochReport> report;
};

/// Runs `h.iters` epochs of kind in {sgd, svdpp, time-svd, time-svdpp, als,
/// wals}. An ALS iteration solves items, then users.
TrainResult train(ModelKind kind, const Dataset& train, const Dataset* validation,
                  const HyperParams& h, const TrainOptions& opts = {});

/// Builds the initial model `train` would start from.
FactorModel initial_model(ModelKind kind, const Dataset& train, const HyperParams& h,
                          const TrainOptions& opts);

/// Batch prediction with cold-start fallbacks: unknown users/items fall back
/// to mu plus the known biases, timestamps are clamped into the binner range.
std::vector<double> predict_all(const FactorModel& m, const Dataset& rated_by,
                                const Dataset& points);

}  // namespace mcf

#endif  // MCF_FACTOR_MODEL_HPP
