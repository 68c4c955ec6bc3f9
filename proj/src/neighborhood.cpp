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

#include "mcf/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "mcf/parallel.hpp"
#include "text_util.hpp"

namespace mcf {

UserMeanTable::UserMeanTable(const Dataset& train)
    : mean_(train.num_users(), 0.0), has_(train.num_users(), false) {
  for (UserId u = 0; u < train.num_users(); ++u) {
    const auto recs = train.user_records(u);
    if (recs.empty()) continue;
    double sum = 0.0;
    for (auto k : recs) sum += train[k].score;
    mean_[u] = sum / static_cast<double>(recs.size());
    has_[u] = true;
    ++known_;
  }
}

std::optional<double> UserMeanTable::mean(UserId u) const noexcept {
  if (u >= has_.size() || !has_[u]) return std::nullopt;
  return mean_[u];
}

UserRatings::UserRatings(const Dataset& train) {
  offsets_.assign(train.num_users() + 1, 0);
  std::vector<UserRating> row;
  for (UserId u = 0; u < train.num_users(); ++u) {
    row.clear();
    for (auto k : train.user_records(u)) {
      const auto& r = train[k];
      row.push_back({r.item, r.score, r.time});
    }
    // stable sort keeps file order among duplicates; keep the last of each run
    std::stable_sort(row.begin(), row.end(),
                     [](const auto& a, const auto& b) { return a.item < b.item; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k + 1 < row.size() && row[k + 1].item == row[k].item) continue;
      ratings_.push_back(row[k]);
    }
    offsets_[u + 1] = ratings_.size();
  }
}

std::span<const UserRating> UserRatings::of(UserId u) const {
  if (std::size_t{u} + 1 >= offsets_.size()) return {};
  return std::span(ratings_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
}

const UserRating* UserRatings::find(UserId u, ItemId i) const {
  const auto row = of(u);
  auto it = std::lower_bound(row.begin(), row.end(), i,
                             [](const UserRating& r, ItemId id) { return r.item < id; });
  if (it == row.end() || it->item != i) return nullptr;
  return &*it;
}

namespace {

struct Deviation {
  UserId user;
  double d;
};

// One deviation per user who rated i (last record wins), ascending users.
std::vector<Deviation> item_deviations(ItemId i, const Dataset& train,
                                       const UserMeanTable& means) {
  std::vector<Deviation> out;
  const auto recs = train.item_records(i);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = train[recs[k]];
    if (k + 1 < recs.size() && train[recs[k + 1]].user == r.user) continue;
    out.push_back({r.user, r.score - *means.mean(r.user)});
  }
  return out;
}

double finish_similarity(double num, double si, double sj) {
  if (si == 0.0 || sj == 0.0) return 0.0;
  return std::clamp(num / std::sqrt(si * sj), -1.0, 1.0);
}

}  // namespace

double adjusted_cosine(ItemId i, ItemId j, const Dataset& train, const UserMeanTable& means) {
  const auto a = item_deviations(i, train, means);
  const auto b = item_deviations(j, train, means);
  double num = 0.0, si = 0.0, sj = 0.0;
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x].user < b[y].user) {
      ++x;
    } else if (b[y].user < a[x].user) {
      ++y;
    } else {
      num += a[x].d * b[y].d;
      si += a[x].d * a[x].d;
      sj += b[y].d * b[y].d;
      ++x;
      ++y;
    }
  }
  return finish_similarity(num, si, sj);
}

NeighborTable::NeighborTable(std::size_t k, std::vector<std::vector<Neighbor>> lists)
    : k_(k), lists_(std::move(lists)) {}

std::span<const Neighbor> NeighborTable::neighbors(ItemId i) const {
  if (i >= lists_.size()) return {};
  return lists_[i];
}

void keep_top_k(std::vector<Neighbor>& candidates, std::size_t k) {
  auto better = [](const Neighbor& a, const Neighbor& b) {
    const double wa = std::abs(a.weight);
    const double wb = std::abs(b.weight);
    if (wa != wb) return wa > wb;
    return a.item < b.item;
  };
  if (candidates.size() > k) {
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), better);
    candidates.resize(k);
  } else {
    std::sort(candidates.begin(), candidates.end(), better);
  }
}

NeighborTable build_neighbors(const Dataset& train, std::size_t k, std::size_t num_parts,
                              unsigned threads) {
  if (k == 0) throw ConfigError("knn-k must be >= 1");
  if (num_parts == 0) throw ConfigError("knn-parts must be >= 1");
  const std::size_t items = train.num_items();
  const UserMeanTable means(train);
  const UserRatings ratings(train);
  std::vector<std::vector<Neighbor>> lists(items);
  const std::size_t parts = std::min(num_parts, std::max<std::size_t>(items, 1));

  parallel_map_rows(parts, threads, [&](std::size_t part) {
    const std::size_t lo = part * items / parts;
    const std::size_t hi = (part + 1) * items / parts;
    const std::size_t width = hi - lo;
    if (width == 0) return;
    std::vector<double> num(width * items, 0.0), si(width * items, 0.0), sj(width * items, 0.0);

    for (UserId u = 0; u < ratings.num_users(); ++u) {
      const auto row = ratings.of(u);
      if (row.empty()) continue;
      const double mean = *means.mean(u);
      auto first = std::lower_bound(row.begin(), row.end(), lo,
                                    [](const UserRating& r, std::size_t id) { return r.item < id; });
      for (auto a = first; a != row.end() && a->item < hi; ++a) {
        const double da = a->score - mean;
        const std::size_t base = (a->item - lo) * items;
        for (const auto& b : row) {
          if (b.item == a->item) continue;
          const double db = b.score - mean;
          num[base + b.item] += da * db;
          si[base + b.item] += da * da;
          sj[base + b.item] += db * db;
        }
      }
    }

    std::vector<Neighbor> candidates;
    for (std::size_t i = lo; i < hi; ++i) {
      candidates.clear();
      const std::size_t base = (i - lo) * items;
      for (std::size_t j = 0; j < items; ++j) {
        if (j == i) continue;
        const double w = finish_similarity(num[base + j], si[base + j], sj[base + j]);
        if (w != 0.0) candidates.push_back({static_cast<ItemId>(j), w});
      }
      keep_top_k(candidates, k);
      lists[i] = candidates;
    }
  });
  return NeighborTable(k, std::move(lists));
}

namespace {

double fallback(UserId u, const KnnContext& ctx) {
  if (auto m = ctx.means.mean(u)) return *m;
  return ctx.global_mean;
}

}  // namespace

double predict_knn(UserId u, ItemId i, const NeighborTable& table, const KnnContext& ctx) {
  double num = 0.0, den = 0.0;
  for (const auto& nb : table.neighbors(i)) {
    const UserRating* r = ctx.ratings.find(u, nb.item);
    if (!r) continue;
    num += nb.weight * r->score;
    den += std::abs(nb.weight);
  }
  if (den == 0.0) return fallback(u, ctx);
  return num / den;
}

double predict_knn_time(UserId u, ItemId i, Timestamp t, double beta, const NeighborTable& table,
                        const KnnContext& ctx) {
  if (!(beta >= 0.0)) throw ConfigError("knn-beta must be >= 0");
  struct Term {
    double w, r, age;
  };
  std::vector<Term> terms;
  double youngest = std::numeric_limits<double>::infinity();
  for (const auto& nb : table.neighbors(i)) {
    const UserRating* r = ctx.ratings.find(u, nb.item);
    if (!r) continue;
    const double age = std::abs(static_cast<double>(t - r->time));
    youngest = std::min(youngest, age);
    terms.push_back({nb.weight, r->score, age});
  }
  // Shifting every age by the smallest one rescales numerator and
  // denominator alike and keeps exp() away from underflow.
  double num = 0.0, den = 0.0;
  for (const auto& term : terms) {
    const double f = std::exp(-beta * (term.age - youngest));
    num += f * (term.w * term.r);
    den += f * std::abs(term.w);
  }
  if (den == 0.0) return fallback(u, ctx);
  return num / den;
}

void write_neighbors(std::ostream& out, const NeighborTable& table) {
  out << "# knn k=" << table.k() << " items=" << table.num_items() << '\n';
  for (ItemId i = 0; i < table.num_items(); ++i) {
    for (const auto& nb : table.neighbors(i)) {
      out << i << '\t' << nb.item << '\t' << format_real(nb.weight) << '\n';
    }
  }
}

void write_neighbors(const std::filesystem::path& path, const NeighborTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  write_neighbors(out, table);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

NeighborTable parse_neighbors(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t k = 0;
  std::size_t items = 0;
  bool header = false;
  std::vector<std::vector<Neighbor>> lists;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (!header && view.starts_with("# knn ")) {
        for (auto field : detail::split(view.substr(6), ' ')) {
          if (field.starts_with("k=")) k = detail::parse_number<std::size_t>(field.substr(2), "k", lineno);
          if (field.starts_with("items=")) {
            items = detail::parse_number<std::size_t>(field.substr(6), "items", lineno);
          }
        }
        lists.assign(items, {});
        header = true;
      }
      continue;
    }
    if (!header) throw ParseError("missing '# knn k=K items=N' header", lineno);
    const auto f = detail::split(view, '\t');
    if (f.size() != 3) {
      throw ParseError(fmt::format("expected 3 tab-separated fields, got {}", f.size()), lineno);
    }
    const auto i = detail::parse_number<ItemId>(f[0], "item id", lineno);
    const auto j = detail::parse_number<ItemId>(f[1], "item id", lineno);
    const auto w = detail::parse_number<double>(f[2], "weight", lineno);
    if (i >= items || j >= items) {
      throw ParseError(fmt::format("pair ({}, {}) outside table of {} items", i, j, items), lineno);
    }
    if (i == j || !(std::abs(w) <= 1.0)) {
      throw ParseError(fmt::format("invalid neighbor ({}, {}, {})", i, j, f[2]), lineno);
    }
    lists[i].push_back({j, w});
  }
  if (!header) throw ParseError("missing '# knn k=K items=N' header", lineno);
  return NeighborTable(k, std::move(lists));
}

NeighborTable load_neighbors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open neighbor file '{}'", path.string()));
  return parse_neighbors(in);
}

}  // namespace mcf
