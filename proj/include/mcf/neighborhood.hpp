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

#ifndef MCF_NEIGHBORHOOD_HPP
#define MCF_NEIGHBORHOOD_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mcf/dataset.hpp"

namespace mcf {

/// r-bar_u: mean of all of a user's training ratings.
class UserMeanTable {
 public:
  UserMeanTable() = default;
  explicit UserMeanTable(const Dataset& train);

  std::optional<double> mean(UserId u) const noexcept;
  /// Users with at least one rating.
  std::size_t size() const noexcept { return known_; }

 private:
  std::vector<double> mean_;
  std::vector<bool> has_;
  std::size_t known_ = 0;
};

inline UserMeanTable user_means(const Dataset& train) { return UserMeanTable(train); }

/// One user's rating of one item. When a user rated an item more than once
/// the last record in file order is used.
struct UserRating {
  ItemId item = 0;
  double score = 0.0;
  Timestamp time = 0;
};

/// Per-user ratings sorted by item id, duplicates resolved.
class UserRatings {
 public:
  UserRatings() = default;
  explicit UserRatings(const Dataset& train);

  std::span<const UserRating> of(UserId u) const;
  const UserRating* find(UserId u, ItemId i) const;
  std::size_t num_users() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<UserRating> ratings_;
};

/// Adjusted cosine over the users who rated both items; 0 without co-raters
/// or when either deviation vector vanishes.
double adjusted_cosine(ItemId i, ItemId j, const Dataset& train, const UserMeanTable& means);

struct Neighbor {
  ItemId item = 0;
  double weight = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Top-K neighbors per item, sorted by |w| descending, ties by smaller id.
class NeighborTable {
 public:
  NeighborTable() = default;
  NeighborTable(std::size_t k, std::vector<std::vector<Neighbor>> lists);

  std::size_t k() const noexcept { return k_; }
  std::size_t num_items() const noexcept { return lists_.size(); }
  /// Empty for items outside the table.
  std::span<const Neighbor> neighbors(ItemId i) const;

  friend bool operator==(const NeighborTable&, const NeighborTable&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::vector<Neighbor>> lists_;
};

/// Orders candidates by |w| descending (ties: smaller id) and keeps `k`.
void keep_top_k(std::vector<Neighbor>& candidates, std::size_t k);

/// Similarities of every item against every other, computed `num_parts`
/// item blocks at a time (blocks run in parallel). The result does not
/// depend on `num_parts` or `threads`.
NeighborTable build_neighbors(const Dataset& train, std::size_t k, std::size_t num_parts,
                              unsigned threads = 1);

/// Training-side state the kNN predictors read.
struct KnnContext {
  UserMeanTable means;
  UserRatings ratings;
  double global_mean = 0.0;

  explicit KnnContext(const Dataset& train)
      : means(train), ratings(train), global_mean(train.mean_score()) {}
};

/// sum w_ij r_uj / sum |w_ij| over j in R_u and N_i; falls back to r-bar_u
/// and then to the global mean.
double predict_knn(UserId u, ItemId i, const NeighborTable& table, const KnnContext& ctx);

/// As predict_knn with every term weighted by exp(-beta |t - t_uj|).
double predict_knn_time(UserId u, ItemId i, Timestamp t, double beta, const NeighborTable& table,
                        const KnnContext& ctx);

/// `i<TAB>j<TAB>w` lines after a `# knn k=K items=N` header.
void write_neighbors(std::ostream& out, const NeighborTable& table);
void write_neighbors(const std::filesystem::path& path, const NeighborTable& table);
NeighborTable parse_neighbors(std::istream& in);
NeighborTable load_neighbors(const std::filesystem::path& path);

}  // namespace mcf

#endif  // MCF_NEIGHBORHOOD_HPP
