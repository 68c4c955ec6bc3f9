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

#include "mcf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "text_util.hpp"

namespace mcf {

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError(fmt::format("rmse: {} predictions for {} targets", pred.size(),
                                 truth.size()));
  }
  if (pred.empty()) throw NumericError("rmse of an empty column is undefined");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - truth[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

double rmse(std::span<const double> pred, const Dataset& truth) {
  std::vector<double> t;
  t.reserve(truth.size());
  for (const auto& r : truth.records()) t.push_back(r.score);
  return rmse(pred, t);
}

std::string to_string(const PointKey& k) {
  return fmt::format("({}, {}, {})", k.user, k.item, k.time);
}

PredictionSet make_predictions(const Dataset& points, std::vector<double> scores) {
  if (scores.size() != points.size()) {
    throw ShapeError(fmt::format("{} scores for {} points", scores.size(), points.size()));
  }
  PredictionSet p;
  p.keys.reserve(points.size());
  for (const auto& r : points.records()) p.keys.push_back({r.user, r.item, r.time});
  p.scores = std::move(scores);
  return p;
}

PredictionSet truth_of(const Dataset& data) {
  std::vector<double> scores;
  scores.reserve(data.size());
  for (const auto& r : data.records()) scores.push_back(r.score);
  return make_predictions(data, std::move(scores));
}

PredictionSet parse_predictions(std::istream& in) {
  PredictionSet p;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto f = detail::split(view, '\t');
    if (f.size() != 4) {
      throw ParseError(fmt::format("expected 4 tab-separated fields, got {}", f.size()), lineno);
    }
    p.keys.push_back({detail::parse_number<UserId>(f[0], "user id", lineno),
                      detail::parse_number<ItemId>(f[1], "item id", lineno),
                      detail::parse_number<Timestamp>(f[2], "time", lineno)});
    p.scores.push_back(detail::parse_number<double>(f[3], "score", lineno));
  }
  return p;
}

PredictionSet load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open prediction file '{}'", path.string()));
  return parse_predictions(in);
}

void write_predictions(std::ostream& out, const PredictionSet& p) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& key = p.keys[k];
    out << key.user << '\t' << key.item << '\t' << key.time << '\t' << format_real(p.scores[k])
        << '\n';
  }
}

void write_predictions(const std::filesystem::path& path, const PredictionSet& p) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  write_predictions(out, p);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

std::vector<double> align(const PredictionSet& p, std::span<const PointKey> keys) {
  std::map<PointKey, double> by_key;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!by_key.emplace(p.keys[k], p.scores[k]).second) {
      throw AlignmentError(fmt::format("duplicate key {}", to_string(p.keys[k])));
    }
  }
  std::vector<double> out;
  out.reserve(keys.size());
  for (const auto& key : keys) {
    auto it = by_key.find(key);
    if (it == by_key.end()) throw AlignmentError(fmt::format("missing key {}", to_string(key)));
    out.push_back(it->second);
    by_key.erase(it);
  }
  if (!by_key.empty()) {
    throw AlignmentError(fmt::format("unexpected key {}", to_string(by_key.begin()->first)));
  }
  return out;
}

EvalReport compare(std::span<const NamedPredictions> models, const PredictionSet& truth) {
  EvalReport report;
  for (const auto& m : models) {
    const auto pred = align(m.predictions, truth.keys);
    report.rows.push_back({m.name, rmse(pred, truth.scores), pred.size()});
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.rmse != b.rmse) return a.rmse < b.rmse;
    return a.model < b.model;
  });
  return report;
}

void write_report(std::ostream& out, const EvalReport& report) {
  out << "model\trmse\tcount\n";
  for (const auto& row : report.rows) {
    out << row.model << '\t' << format_real(row.rmse) << '\t' << row.count << '\n';
  }
}

}  // namespace mcf
