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

#include "mcf/blending.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <Eigen/Core>
#include <Eigen/QR>
#include <fmt/format.h>

#include "mcf/errors.hpp"

namespace mcf {

PredictionMatrix::PredictionMatrix(std::vector<PointKey> keys) : keys_(std::move(keys)) {
  auto sorted = keys_;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw AlignmentError(fmt::format("duplicate key {} in prediction matrix", to_string(*dup)));
  }
}

void PredictionMatrix::add(std::string name, std::vector<double> column) {
  if (column.size() != keys_.size()) {
    throw ShapeError(fmt::format("column '{}' has {} rows, expected {}", name, column.size(),
                                 keys_.size()));
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(column));
}

void PredictionMatrix::add_intercept() { add("intercept", std::vector<double>(rows(), 1.0)); }

PredictionMatrix PredictionMatrix::select(std::span<const std::size_t> idx) const {
  PredictionMatrix out;
  out.keys_.reserve(idx.size());
  for (auto k : idx) out.keys_.push_back(keys_.at(k));
  out.names_ = names_;
  for (const auto& col : columns_) {
    std::vector<double> c;
    c.reserve(idx.size());
    for (auto k : idx) c.push_back(col[k]);
    out.columns_.push_back(std::move(c));
  }
  return out;
}

BlendWeights ridge_weights(const PredictionMatrix& x, std::span<const double> y, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("ridge lambda must be >= 0");
  if (y.size() != x.rows()) {
    throw ShapeError(fmt::format("{} targets for {} prediction rows", y.size(), x.rows()));
  }
  const auto m = static_cast<Eigen::Index>(x.cols());
  const auto n = static_cast<Eigen::Index>(x.rows());
  Eigen::MatrixXd xm(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto col = x.column(static_cast<std::size_t>(c));
    for (Eigen::Index r = 0; r < n; ++r) xm(r, c) = col[static_cast<std::size_t>(r)];
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::MatrixXd a = xm.transpose() * xm;
  a.diagonal().array() += lambda;
  const Eigen::VectorXd b = xm.transpose() * yv;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < m) {
    throw SingularSystemError(fmt::format(
        "blend normal equations are singular (rank {} of {}); use lambda > 0", qr.rank(), m));
  }
  const Eigen::VectorXd w = qr.solve(b);
  BlendWeights out;
  out.names = x.names();
  out.w.assign(w.data(), w.data() + m);
  out.lambda = lambda;
  return out;
}

std::vector<double> blend_predict(const PredictionMatrix& x, const BlendWeights& w) {
  if (w.w.size() != x.cols()) {
    throw ShapeError(fmt::format("{} weights for {} columns", w.w.size(), x.cols()));
  }
  std::vector<double> out(x.rows(), 0.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const auto col = x.column(c);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] += w.w[c] * col[r];
  }
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int e = -6; e <= 2; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

double cross_validate_lambda(const PredictionMatrix& x, std::span<const double> y,
                             std::span<const double> grid, std::size_t folds,
                             std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("empty lambda grid");
  if (y.size() != x.rows()) throw ShapeError("targets and prediction rows differ in length");
  folds = std::clamp<std::size_t>(folds, 2, std::max<std::size_t>(x.rows(), 2));
  if (x.rows() < folds) return grid.back();

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  double best = grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double err = 0.0;
    for (std::size_t f = 0; f < folds && std::isfinite(err); ++f) {
      std::vector<std::size_t> fit_idx, held_idx;
      for (std::size_t k = 0; k < order.size(); ++k) {
        (k % folds == f ? held_idx : fit_idx).push_back(order[k]);
      }
      std::vector<double> fit_y;
      for (auto k : fit_idx) fit_y.push_back(y[k]);
      try {
        const auto w = ridge_weights(x.select(fit_idx), fit_y, lambda);
        const auto pred = blend_predict(x.select(held_idx), w);
        for (std::size_t k = 0; k < held_idx.size(); ++k) {
          const double d = pred[k] - y[held_idx[k]];
          err += d * d;
        }
      } catch (const SingularSystemError&) {
        err = std::numeric_limits<double>::infinity();
      }
    }
    if (err < best_err) {
      best_err = err;
      best = lambda;
    }
  }
  return best;
}

namespace {

std::vector<double> clipped(std::vector<double> v, const ScoreScale& scale) {
  for (auto& s : v) s = scale.clip(s);
  return v;
}

}  // namespace

PipelineResult two_phase_pipeline(std::span<const ModelSpec> specs, const Dataset& train,
                                  const Dataset& validation, const Dataset& test,
                                  const PipelineOptions& opts,
                                  std::span<const ExternalColumn> external) {
  if (validation.empty()) throw PipelineError("blend needs a non-empty validation set");
  if (specs.empty() && external.empty()) throw PipelineError("blend needs at least one model");

  const auto valid_keys = make_predictions(validation, std::vector<double>(validation.size())).keys;
  const auto test_keys = make_predictions(test, std::vector<double>(test.size())).keys;
  PipelineResult res;
  res.validation = PredictionMatrix(valid_keys);
  res.test = PredictionMatrix(test_keys);
  std::vector<double> truth;
  for (const auto& r : validation.records()) truth.push_back(r.score);

  // phase 1
  for (const auto& spec : specs) {
    TrainInputs in;
    in.train = &train;
    in.taxonomy = opts.taxonomy;
    in.threads = opts.threads;
    auto model = train_model(spec, in);
    auto col = model->predict(validation);
    res.models.push_back({spec.name, rmse(clipped(col, validation.scale()), truth)});
    res.validation.add(spec.name, std::move(col));
  }
  for (const auto& ext : external) {
    auto col = align(ext.validation, valid_keys);
    res.models.push_back({ext.name, rmse(clipped(col, validation.scale()), truth)});
    res.validation.add(ext.name, std::move(col));
  }
  if (opts.intercept) res.validation.add_intercept();

  const double lambda = opts.lambda ? *opts.lambda
                                    : cross_validate_lambda(res.validation, truth,
                                                            default_lambda_grid(), 5, opts.cv_seed);
  res.weights = ridge_weights(res.validation, truth, lambda);
  res.blend_valid_rmse =
      rmse(clipped(blend_predict(res.validation, res.weights), validation.scale()), truth);

  // phase 2: same specs and seeds on train + validation
  const Dataset full = Dataset::concat(train, validation, Split::Train);
  for (const auto& spec : specs) {
    TrainInputs in;
    in.train = &full;
    in.taxonomy = opts.taxonomy;
    in.threads = opts.threads;
    auto model = train_model(spec, in);
    res.test.add(spec.name, model->predict(test));
  }
  for (const auto& ext : external) res.test.add(ext.name, align(ext.test, test_keys));
  if (opts.intercept) res.test.add_intercept();
  res.test_blend = blend_predict(res.test, res.weights);
  return res;
}

void write_weights_report(std::ostream& out, const PipelineResult& r) {
  out << "model\tweight\tvalid_rmse\n";
  for (std::size_t k = 0; k < r.weights.w.size(); ++k) {
    const auto& name = r.weights.names[k];
    std::string score = "NA";
    for (const auto& m : r.models) {
      if (m.name == name) score = format_real(m.valid_rmse);
    }
    out << name << '\t' << format_real(r.weights.w[k]) << '\t' << score << '\n';
  }
  out << "blend\tNA\t" << format_real(r.blend_valid_rmse) << '\n';
  out << "# lambda " << format_real(r.weights.lambda) << '\n';
}

}  // namespace mcf
