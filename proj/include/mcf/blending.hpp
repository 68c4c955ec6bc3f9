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

#ifndef MCF_BLENDING_HPP
#define MCF_BLENDING_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcf/evaluation.hpp"
#include "mcf/predictor.hpp"

namespace mcf {

/// Model predictions as columns over one shared list of points.
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  explicit PredictionMatrix(std::vector<PointKey> keys);

  /// Throws ShapeError when the column length differs from the key count.
  void add(std::string name, std::vector<double> column);
  /// Appends a column of ones named "intercept".
  void add_intercept();

  std::size_t rows() const noexcept { return keys_.size(); }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<PointKey>& keys() const noexcept { return keys_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::span<const double> column(std::size_t k) const { return columns_.at(k); }

  /// Rows `idx` of every column.
  PredictionMatrix select(std::span<const std::size_t> idx) const;

 private:
  std::vector<PointKey> keys_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

struct BlendWeights {
  std::vector<std::string> names;
  std::vector<double> w;
  double lambda = 0.0;
};

/// Solves (X^T X + lambda I) w = X^T y. SingularSystemError if the system is
/// rank deficient (only possible with lambda = 0).
BlendWeights ridge_weights(const PredictionMatrix& x, std::span<const double> y, double lambda);

/// Per-row weighted sum (unclipped).
std::vector<double> blend_predict(const PredictionMatrix& x, const BlendWeights& w);

/// 1e-6, 1e-5, ..., 1e2.
std::vector<double> default_lambda_grid();

/// Grid value with the smallest k-fold cross-validated squared error; folds
/// come from a seeded shuffle of the rows.
double cross_validate_lambda(const PredictionMatrix& x, std::span<const double> y,
                             std::span<const double> grid, std::size_t folds = 5,
                             std::uint64_t seed = 1);

/// Predictions computed elsewhere, one file per phase.
struct ExternalColumn {
  std::string name;
  PredictionSet validation;
  PredictionSet test;
};

struct PipelineOptions {
  std::optional<double> lambda;  ///< unset: cross-validate over the grid
  bool intercept = false;
  unsigned threads = 1;
  const TaxonomyGraph* taxonomy = nullptr;
  std::uint64_t cv_seed = 1;
};

struct ModelScore {
  std::string name;
  double valid_rmse = 0.0;  ///< on clipped predictions
};

struct PipelineResult {
  BlendWeights weights;
  std::vector<ModelScore> models;
  double blend_valid_rmse = 0.0;  ///< in-sample, clipped
  PredictionMatrix validation;    ///< phase-1 columns (unclipped)
  PredictionMatrix test;          ///< phase-2 columns (unclipped)
  std::vector<double> test_blend;  ///< unclipped
};

/// Phase 1 trains every spec on `train`, predicts `validation` and fits the
/// ridge weights; phase 2 retrains the same specs on train + validation and
/// blends their `test` predictions with those weights.
PipelineResult two_phase_pipeline(std::span<const ModelSpec> specs, const Dataset& train,
                                  const Dataset& validation, const Dataset& test,
                                  const PipelineOptions& opts,
                                  std::span<const ExternalColumn> external = {});

/// `model<TAB>weight<TAB>valid_rmse` lines, then the blend row and lambda.
void write_weights_report(std::ostream& out, const PipelineResult& r);

}  // namespace mcf

#endif  // MCF_BLENDING_HPP
