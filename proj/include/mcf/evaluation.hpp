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

#ifndef MCF_EVALUATION_HPP
#define MCF_EVALUATION_HPP

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcf/dataset.hpp"

namespace mcf {

/// sqrt(mean((pred - truth)^2)). ShapeError on length mismatch, NumericError
/// on empty input.
double rmse(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, const Dataset& truth);

struct PointKey {
  UserId user = 0;
  ItemId item = 0;
  Timestamp time = 0;

  friend auto operator<=>(const PointKey&, const PointKey&) = default;
};

std::string to_string(const PointKey& k);

/// One column of predictions keyed by (user, item, time).
struct PredictionSet {
  std::vector<PointKey> keys;
  std::vector<double> scores;

  std::size_t size() const noexcept { return keys.size(); }
};

PredictionSet make_predictions(const Dataset& points, std::vector<double> scores);
/// The dataset's own scores as a prediction column (the truth).
PredictionSet truth_of(const Dataset& data);

/// `user<TAB>item<TAB>time<TAB>score` lines.
PredictionSet parse_predictions(std::istream& in);
PredictionSet load_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, const PredictionSet& p);
void write_predictions(const std::filesystem::path& path, const PredictionSet& p);

/// Reorders `p` to follow `keys`. Throws AlignmentError naming the first key
/// that is missing, duplicated, or extra.
std::vector<double> align(const PredictionSet& p, std::span<const PointKey> keys);

struct EvalRow {
  std::string model;
  double rmse = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  ///< ascending rmse; ties keep name order
};

struct NamedPredictions {
  std::string name;
  PredictionSet predictions;
};

/// Key-aligned RMSE of every model against `truth`.
EvalReport compare(std::span<const NamedPredictions> models, const PredictionSet& truth);

/// `model<TAB>rmse<TAB>count` with a header line.
void write_report(std::ostream& out, const EvalReport& report);

}  // namespace mcf

#endif  // MCF_EVALUATION_HPP
