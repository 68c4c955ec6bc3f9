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

#include "mcf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "text_util.hpp"

namespace mcf {

ScoreScale::ScoreScale(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo < hi)) {
    throw ConfigError(fmt::format("score scale needs lo < hi, got [{}, {}]", lo, hi));
  }
}

double ScoreScale::clip(double s) const noexcept { return std::clamp(s, lo, hi); }

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation" || s == "valid") return Split::Validation;
  if (s == "test") return Split::Test;
  throw ConfigError(fmt::format("unknown split '{}'", s));
}

TimeBinner::TimeBinner(Timestamp t_min, Timestamp t_max, std::size_t num_bins)
    : t_min_(t_min), t_max_(t_max), num_bins_(num_bins) {
  if (num_bins == 0) throw ConfigError("time binner needs at least one bin");
  if (t_max < t_min) {
    throw ConfigError(fmt::format("time binner bounds reversed: [{}, {}]", t_min, t_max));
  }
}

std::size_t TimeBinner::bin(Timestamp t) const {
  if (t < t_min_ || t > t_max_) {
    throw RangeError(fmt::format("timestamp {} outside [{}, {}]", t, t_min_, t_max_));
  }
  return bin_clamped(t);
}

std::size_t TimeBinner::bin_clamped(Timestamp t) const noexcept {
  t = std::clamp(t, t_min_, t_max_);
  // 128-bit product: day spans times bin counts can exceed 2^63 in principle.
  const auto offset = static_cast<unsigned __int128>(t - t_min_);
  const auto width = static_cast<unsigned __int128>(t_max_ - t_min_) + 1;
  return static_cast<std::size_t>(offset * num_bins_ / width);
}

namespace {

DatasetShape infer_shape(std::span<const RatingRecord> records) {
  DatasetShape shape;
  if (records.empty()) return shape;
  shape.t_min = records.front().time;
  shape.t_max = records.front().time;
  for (const auto& r : records) {
    shape.num_users = std::max<std::size_t>(shape.num_users, std::size_t{r.user} + 1);
    shape.num_items = std::max<std::size_t>(shape.num_items, std::size_t{r.item} + 1);
    shape.t_min = std::min(shape.t_min, r.time);
    shape.t_max = std::max(shape.t_max, r.time);
  }
  return shape;
}

void counting_index(std::size_t buckets, std::span<const RatingRecord> records,
                    auto key, std::vector<std::uint32_t>& offsets,
                    std::vector<std::uint32_t>& order) {
  offsets.assign(buckets + 1, 0);
  for (const auto& r : records) ++offsets[key(r) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  order.resize(records.size());
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::uint32_t k = 0; k < records.size(); ++k) {
    order[cursor[key(records[k])]++] = k;
  }
}

}  // namespace

DatasetShape unite(const DatasetShape& a, const DatasetShape& b) {
  const bool a_empty = a.num_users == 0 && a.num_items == 0;
  const bool b_empty = b.num_users == 0 && b.num_items == 0;
  if (a_empty) return b;
  if (b_empty) return a;
  return {std::max(a.num_users, b.num_users), std::max(a.num_items, b.num_items),
          std::min(a.t_min, b.t_min), std::max(a.t_max, b.t_max)};
}

Dataset::Dataset(std::vector<RatingRecord> records, Split split, ScoreScale scale)
    : records_(std::move(records)), split_(split), scale_(scale) {
  shape_ = infer_shape(records_);
  for (std::size_t k = 0; k < records_.size(); ++k) {
    if (!scale_.contains(records_[k].score)) {
      throw RangeError(fmt::format("record {}: score {} outside [{}, {}]", k + 1,
                                   records_[k].score, scale_.lo, scale_.hi));
    }
  }
  build_index();
}

Dataset::Dataset(std::vector<RatingRecord> records, Split split, ScoreScale scale,
                 DatasetShape shape)
    : records_(std::move(records)), split_(split), scale_(scale), shape_(shape) {
  if (shape_.t_max < shape_.t_min) throw RangeError("dataset time bounds reversed");
  for (std::size_t k = 0; k < records_.size(); ++k) {
    const auto& r = records_[k];
    if (r.user >= shape_.num_users || r.item >= shape_.num_items) {
      throw RangeError(fmt::format("record {}: id ({}, {}) outside {} users x {} items",
                                   k + 1, r.user, r.item, shape_.num_users,
                                   shape_.num_items));
    }
    if (r.time < shape_.t_min || r.time > shape_.t_max) {
      throw RangeError(fmt::format("record {}: time {} outside [{}, {}]", k + 1, r.time,
                                   shape_.t_min, shape_.t_max));
    }
    if (!scale_.contains(r.score)) {
      throw RangeError(fmt::format("record {}: score {} outside [{}, {}]", k + 1, r.score,
                                   scale_.lo, scale_.hi));
    }
  }
  build_index();
}

void Dataset::build_index() {
  counting_index(shape_.num_users, records_, [](const RatingRecord& r) { return r.user; },
                 user_offsets_, by_user_);
  // Item lists visit records in user order so per-item scans see users ascending.
  item_offsets_.assign(shape_.num_items + 1, 0);
  for (const auto& r : records_) ++item_offsets_[r.item + 1];
  std::partial_sum(item_offsets_.begin(), item_offsets_.end(), item_offsets_.begin());
  by_item_.resize(records_.size());
  std::vector<std::uint32_t> cursor(item_offsets_.begin(), item_offsets_.end() - 1);
  for (std::uint32_t k : by_user_) by_item_[cursor[records_[k].item]++] = k;
}

std::span<const std::uint32_t> Dataset::user_records(UserId u) const {
  if (u >= shape_.num_users) return {};
  return std::span(by_user_).subspan(user_offsets_[u], user_offsets_[u + 1] - user_offsets_[u]);
}

std::span<const std::uint32_t> Dataset::item_records(ItemId i) const {
  if (i >= shape_.num_items) return {};
  return std::span(by_item_).subspan(item_offsets_[i], item_offsets_[i + 1] - item_offsets_[i]);
}

double Dataset::mean_score() const noexcept {
  if (records_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records_) sum += r.score;
  return sum / static_cast<double>(records_.size());
}

Dataset Dataset::widened(const DatasetShape& shape) const {
  return Dataset(records_, split_, scale_, unite(shape_, shape));
}

Dataset Dataset::with_split(Split s) const {
  Dataset copy = *this;
  copy.split_ = s;
  return copy;
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b, Split split) {
  std::vector<RatingRecord> all(a.records_.begin(), a.records_.end());
  all.insert(all.end(), b.records_.begin(), b.records_.end());
  return Dataset(std::move(all), split, a.scale_, unite(a.shape_, b.shape_));
}

Dataset parse_ratings(std::istream& in, Split split, ScoreScale scale) {
  std::vector<RatingRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = detail::split(view, '\t');
    if (fields.size() != 4) {
      throw ParseError(fmt::format("expected 4 tab-separated fields, got {}", fields.size()),
                       lineno);
    }
    RatingRecord r;
    r.user = detail::parse_number<UserId>(fields[0], "user id", lineno);
    r.item = detail::parse_number<ItemId>(fields[1], "item id", lineno);
    r.score = detail::parse_number<double>(fields[2], "score", lineno);
    r.time = detail::parse_number<Timestamp>(fields[3], "time", lineno);
    if (!scale.contains(r.score)) {
      throw RangeError(fmt::format("line {}: score {} outside [{}, {}]", lineno, r.score,
                                   scale.lo, scale.hi));
    }
    records.push_back(r);
  }
  return Dataset(std::move(records), split, scale);
}

Dataset load_ratings(const std::filesystem::path& path, Split split, ScoreScale scale) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open rating file '{}'", path.string()));
  return parse_ratings(in, split, scale);
}

std::string format_real(double v) { return fmt::format("{}", v); }

void write_ratings(std::ostream& out, const Dataset& data) {
  for (const auto& r : data.records()) {
    out << r.user << '\t' << r.item << '\t' << format_real(r.score) << '\t' << r.time << '\n';
  }
}

void write_ratings(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  write_ratings(out, data);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace mcf
