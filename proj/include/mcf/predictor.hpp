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

#ifndef MCF_PREDICTOR_HPP
#define MCF_PREDICTOR_HPP

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcf/factor_model.hpp"
#include "mcf/taxonomy.hpp"

namespace mcf {

/// A named model configuration; retraining from the same spec reproduces
/// the same initialization.
struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::Sgd;
  HyperParams hyper;
};

/// Spec with the defaults of `kind`, named after it.
ModelSpec default_spec(ModelKind kind);

struct TrainInputs {
  const Dataset* train = nullptr;
  const Dataset* validation = nullptr;  ///< optional, for the epoch report
  const TaxonomyGraph* taxonomy = nullptr;  ///< required by mfitr kinds
  unsigned threads = 1;
  std::span<const double> weights;  ///< wals observation weights
};

/// A trained model of any family behind one prediction interface.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual ModelKind kind() const noexcept = 0;
  /// Unclipped scores for every point, with cold-start fallbacks.
  virtual std::vector<double> predict(const Dataset& points) const = 0;
  /// Model dump, or the neighbor table for kNN kinds.
  virtual void save(const std::filesystem::path& path) const = 0;

  const std::vector<EpochReport>& report() const noexcept { return report_; }

 protected:
  std::vector<EpochReport> report_;
};

/// Trains `spec` on `in.train`. Throws ConfigError if an mfitr kind has no
/// taxonomy.
std::unique_ptr<TrainedModel> train_model(const ModelSpec& spec, const TrainInputs& in);

/// Reopens a saved model. kNN kinds need `train` (the ratings the table was
/// built from); svdpp kinds need it for R_u; mfitr kinds need the taxonomy.
std::unique_ptr<TrainedModel> load_trained(ModelKind kind, const std::filesystem::path& path,
                                           const Dataset* train, const TaxonomyGraph* taxonomy,
                                           double knn_beta = 0.08);

}  // namespace mcf

#endif  // MCF_PREDICTOR_HPP
