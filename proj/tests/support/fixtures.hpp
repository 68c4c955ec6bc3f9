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

// Seeded instances and oracles shared by the test binaries.

#ifndef MCF_TESTS_FIXTURES_HPP
#define MCF_TESTS_FIXTURES_HPP

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mcf/dataset.hpp"
#include "mcf/factor_model.hpp"
#include "mcf/mfitr.hpp"
#include "mcf/taxonomy.hpp"

namespace mcf::testing {

/// `count` ratings with random users, items and times; unit-scale scores.
inline Dataset random_ratings(std::mt19937_64& rng, std::size_t users, std::size_t items,
                              std::size_t count, double lo = 0.0, double hi = 5.0,
                              Timestamp t_max = 20) {
  std::uniform_int_distribution<UserId> user(0, static_cast<UserId>(users - 1));
  std::uniform_int_distribution<ItemId> item(0, static_cast<ItemId>(items - 1));
  std::uniform_real_distribution<double> score(lo, hi);
  std::uniform_int_distribution<Timestamp> time(0, t_max);
  std::vector<RatingRecord> recs;
  for (std::size_t k = 0; k < count; ++k) recs.push_back({user(rng), item(rng), score(rng), time(rng)});
  return Dataset(std::move(recs), Split::Train, ScoreScale{},
                 DatasetShape{users, items, 0, t_max});
}

/// Integer-valued 0-100 ratings where every user rates `per_user` distinct items.
inline Dataset random_dense_ratings(std::mt19937_64& rng, std::size_t users, std::size_t items,
                                    std::size_t per_user) {
  std::uniform_int_distribution<int> score(0, 100);
  std::vector<RatingRecord> recs;
  std::vector<ItemId> ids(items);
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t i = 0; i < items; ++i) ids[i] = static_cast<ItemId>(i);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t k = 0; k < per_user; ++k) {
      recs.push_back({static_cast<UserId>(u), ids[k], static_cast<double>(score(rng)),
                      static_cast<Timestamp>(k)});
    }
  }
  return Dataset(std::move(recs), Split::Train, ScoreScale{});
}

/// Fills every parameter block with N(0, sd) values.
inline void randomize(std::span<double> values, std::mt19937_64& rng, double sd = 0.5) {
  std::normal_distribution<double> n(0.0, sd);
  for (auto& v : values) v = n(rng);
}

inline void randomize(FactorModel& m, std::mt19937_64& rng, double sd = 0.5) {
  for (auto& b : parameter_blocks(m)) randomize(b.values, rng, sd);
  m.mu = 2.5;
}

/// One artist (0), two albums (1, 2) and seven tracks (3..9); track 9 has
/// the artist as its only parent.
inline TaxonomyGraph small_taxonomy() {
  std::vector<TaxonomyEntry> e;
  e.push_back({ItemKind::Artist, 0, std::nullopt, std::nullopt, {}});
  e.push_back({ItemKind::Album, 1, std::nullopt, 0, {}});
  e.push_back({ItemKind::Album, 2, std::nullopt, 0, {}});
  for (ItemId t = 3; t <= 5; ++t) e.push_back({ItemKind::Track, t, 1, 0, {}});
  for (ItemId t = 6; t <= 8; ++t) e.push_back({ItemKind::Track, t, 2, 0, {}});
  e.push_back({ItemKind::Track, 9, std::nullopt, 0, {}});
  return TaxonomyGraph::build(std::move(e));
}

struct GradientCheck {
  double relative = 0.0;   ///< |a - n| / |n| over all coordinates
  double worst = 0.0;      ///< max |a - n| / max(1, |n|)
  std::size_t coords = 0;
};

/// Central differences of `loss` over every coordinate of `blocks`,
/// compared with `analytic` (same layout).
inline GradientCheck check_gradient(std::vector<ParamBlock> blocks,
                                    const std::vector<ParamBlock>& analytic,
                                    const std::function<double()>& loss, double h = 1e-5) {
  GradientCheck out;
  double diff2 = 0.0, norm2 = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto values = blocks[b].values;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + h;
      const double up = loss();
      values[k] = saved - h;
      const double down = loss();
      values[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[b].values[k];
      diff2 += (a - numeric) * (a - numeric);
      norm2 += numeric * numeric;
      out.worst = std::max(out.worst, std::abs(a - numeric) / std::max(1.0, std::abs(numeric)));
      ++out.coords;
    }
  }
  out.relative = norm2 > 0.0 ? std::sqrt(diff2 / norm2) : std::sqrt(diff2);
  return out;
}

}  // namespace mcf::testing

#endif  // MCF_TESTS_FIXTURES_HPP
