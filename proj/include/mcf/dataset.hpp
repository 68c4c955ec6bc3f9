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

#ifndef MCF_DATASET_HPP
#define MCF_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcf {

using UserId = std::uint32_t;
using ItemId = std::uint32_t;
using Timestamp = std::int64_t;

struct ScoreScale {
  double lo = 0.0;
  double hi = 100.0;

  ScoreScale() = default;
  ScoreScale(double lo_, double hi_);

  bool contains(double s) const noexcept { return s >= lo && s <= hi; }
  double clip(double s) const noexcept;
};

struct RatingRecord {
  UserId user = 0;
  ItemId item = 0;
  double score = 0.0;
  Timestamp time = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

enum class Split { Train, Validation, Test };

std::string_view to_string(Split s) noexcept;
Split split_from_string(std::string_view s);

/// Maps timestamps in [t_min, t_max] onto `num_bins` near-equal bins.
class TimeBinner {
 public:
  TimeBinner() = default;
  TimeBinner(Timestamp t_min, Timestamp t_max, std::size_t num_bins);

  /// floor((t - t_min) * N / (t_max - t_min + 1)); throws RangeError outside
  /// the bounds.
  std::size_t bin(Timestamp t) const;
  /// Same mapping with t clamped into the bounds first.
  std::size_t bin_clamped(Timestamp t) const noexcept;

  Timestamp t_min() const noexcept { return t_min_; }
  Timestamp t_max() const noexcept { return t_max_; }
  std::size_t num_bins() const noexcept { return num_bins_; }

  friend bool operator==(const TimeBinner&, const TimeBinner&) = default;

 private:
  Timestamp t_min_ = 0;
  Timestamp t_max_ = 0;
  std::size_t num_bins_ = 1;
};

/// Declared extents of a dataset. Records must lie inside them.
struct DatasetShape {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  Timestamp t_min = 0;
  Timestamp t_max = 0;
};

/// Immutable set of observed ratings (one split) with a per-user and a
/// per-item index over the records.
class Dataset {
 public:
  Dataset() = default;

  /// Extents are inferred: 1 + max ids, observed time extremes.
  Dataset(std::vector<RatingRecord> records, Split split, ScoreScale scale);

  /// Extents are declared; every record is validated against them.
  Dataset(std::vector<RatingRecord> records, Split split, ScoreScale scale,
          DatasetShape shape);

  std::span<const RatingRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const RatingRecord& operator[](std::size_t k) const { return records_[k]; }

  Split split() const noexcept { return split_; }
  const ScoreScale& scale() const noexcept { return scale_; }
  const DatasetShape& shape() const noexcept { return shape_; }
  std::size_t num_users() const noexcept { return shape_.num_users; }
  std::size_t num_items() const noexcept { return shape_.num_items; }
  Timestamp t_min() const noexcept { return shape_.t_min; }
  Timestamp t_max() const noexcept { return shape_.t_max; }

  /// Record indices of user `u`, in file order.
  std::span<const std::uint32_t> user_records(UserId u) const;
  /// Record indices of item `i`, ordered by user id then file order.
  std::span<const std::uint32_t> item_records(ItemId i) const;

  double mean_score() const noexcept;

  /// Copy with extents widened to cover `shape` as well as the current ones.
  Dataset widened(const DatasetShape& shape) const;
  Dataset with_split(Split s) const;

  /// Records of `a` followed by records of `b`, extents united.
  static Dataset concat(const Dataset& a, const Dataset& b, Split split);

 private:
  void build_index();

  std::vector<RatingRecord> records_;
  Split split_ = Split::Train;
  ScoreScale scale_;
  DatasetShape shape_;
  std::vector<std::uint32_t> user_offsets_;
  std::vector<std::uint32_t> by_user_;
  std::vector<std::uint32_t> item_offsets_;
  std::vector<std::uint32_t> by_item_;
};

/// Smallest shape covering both.
DatasetShape unite(const DatasetShape& a, const DatasetShape& b);

/// Reads `user<TAB>item<TAB>score<TAB>time` lines; `#` lines and blank lines
/// are skipped.
Dataset load_ratings(const std::filesystem::path& path, Split split,
                     ScoreScale scale = {});
Dataset parse_ratings(std::istream& in, Split split, ScoreScale scale = {});

void write_ratings(std::ostream& out, const Dataset& data);
void write_ratings(const std::filesystem::path& path, const Dataset& data);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

}  // namespace mcf

#endif  // MCF_DATASET_HPP
