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

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "knn_oracle.hpp"
#include "mcf/errors.hpp"
#include "mcf/neighborhood.hpp"

using namespace mcf;

namespace {

Dataset make(std::vector<RatingRecord> recs) {
  return Dataset(std::move(recs), Split::Train, ScoreScale{});
}

}  // namespace

TEST_CASE("user means") {
  const auto d = make({{0, 0, 80, 0}, {0, 1, 60, 0}, {0, 2, 70, 0}, {2, 0, 100, 0}});
  const auto m = user_means(d);
  CHECK(m.mean(0) == 70.0);
  CHECK(m.mean(2) == 100.0);
  CHECK_FALSE(m.mean(1).has_value());
  CHECK_FALSE(m.mean(50).has_value());
  CHECK(m.size() == 2);
  CHECK(user_means(Dataset{}).size() == 0);
}

TEST_CASE("adjusted cosine examples") {
  // u0: i=80 j=60 k=70 (mean 70); u1: i=90 j=30 (mean 60).
  const auto d = make({{0, 0, 80, 0}, {0, 1, 60, 0}, {0, 2, 70, 0}, {1, 0, 90, 0}, {1, 1, 30, 0}});
  const auto m = user_means(d);
  CHECK(adjusted_cosine(0, 1, d, m) == -1.0);
  CHECK(adjusted_cosine(0, 0, d, m) == doctest::Approx(1.0).epsilon(1e-15));
  // Item 2's only rater sits exactly at the mean: no usable deviation.
  CHECK(adjusted_cosine(0, 2, d, m) == 0.0);
  CHECK(adjusted_cosine(0, 7, d, m) == 0.0);  // no co-raters
}

TEST_CASE("repeated ratings use the last record") {
  const auto d = make({{0, 0, 10, 0}, {0, 1, 90, 0}, {0, 0, 90, 1}, {1, 0, 20, 0}, {1, 1, 80, 0}});
  const auto m = user_means(d);
  const auto oracle = testing::densify(d);
  CHECK(oracle.at(0, 0) == 90.0);
  CHECK(adjusted_cosine(0, 1, d, m) == testing::oracle_similarity(oracle, 0, 1));
  const UserRatings r(d);
  REQUIRE(r.of(0).size() == 2);
  CHECK(r.find(0, 0)->score == 90.0);
  CHECK(r.find(0, 5) == nullptr);
}

TEST_CASE("similarities are symmetric and bounded") {
  std::mt19937_64 rng(3);
  const auto d = testing::random_dense_ratings(rng, 30, 25, 12);
  const auto m = user_means(d);
  for (ItemId i = 0; i < 25; ++i) {
    for (ItemId j = 0; j < 25; ++j) {
      const double a = adjusted_cosine(i, j, d, m);
      CHECK(std::abs(a - adjusted_cosine(j, i, d, m)) <= 1e-12);
      CHECK(a >= -1.0);
      CHECK(a <= 1.0);
    }
  }
}

TEST_CASE("small tables respect K and ordering") {
  const auto d = make({{0, 0, 80, 0}, {0, 1, 60, 0}, {0, 2, 75, 0}, {1, 0, 90, 0},
                       {1, 1, 30, 0}, {1, 2, 50, 0}, {2, 1, 40, 0}, {2, 2, 90, 0}});
  const auto t = build_neighbors(d, 2, 1);
  REQUIRE(t.num_items() == 3);
  for (ItemId i = 0; i < 3; ++i) {
    const auto n = t.neighbors(i);
    CHECK(n.size() <= 2);
    for (std::size_t k = 0; k < n.size(); ++k) {
      CHECK(n[k].item != i);
      if (k) CHECK(std::abs(n[k - 1].weight) >= std::abs(n[k].weight));
    }
  }
}

TEST_CASE("top-K ties break toward smaller ids") {
  std::vector<Neighbor> c{{9, 0.5}, {3, -0.5}, {4, 0.9}, {1, 0.5}};
  keep_top_k(c, 3);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == Neighbor{4, 0.9});
  CHECK(c[1] == Neighbor{1, 0.5});
  CHECK(c[2] == Neighbor{3, -0.5});
}

TEST_CASE("blocked build equals the brute-force oracle") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    const auto d = testing::random_dense_ratings(rng, 30, 50, 15);
    const auto oracle = testing::oracle_neighbors(d, 10);
    for (std::size_t parts : {1u, 3u, 7u, 50u, 80u}) {
      CHECK(build_neighbors(d, 10, parts) == oracle);
    }
    CHECK(build_neighbors(d, 10, 7, 4) == oracle);
    CHECK(build_neighbors(d, 100, 3) == testing::oracle_neighbors(d, 100));
  }
}

TEST_CASE("kNN prediction examples") {
  // u0 rated item 1 (100, t=5) and item 2 (20, t=15); item 0 is the target.
  const auto d = make({{0, 1, 100, 5}, {0, 2, 20, 15}, {1, 0, 70, 0}});
  const KnnContext ctx(d);
  const NeighborTable mixed(2, {{{1, 0.5}, {2, -0.5}}, {}, {}});
  CHECK(predict_knn(0, 0, mixed, ctx) == doctest::Approx(40.0).epsilon(1e-15));

  const NeighborTable single(1, {{{1, 0.8}}, {}, {}});
  CHECK(predict_knn(0, 0, single, ctx) == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(predict_knn_time(0, 0, 25, 0.08, single, ctx) == doctest::Approx(100.0).epsilon(1e-15));

  const NeighborTable none(1, {{}, {}, {}});
  CHECK(predict_knn(0, 0, none, ctx) == 60.0);  // user mean
  CHECK(predict_knn(1, 1, none, ctx) == 70.0);
  CHECK(predict_knn(9, 0, none, ctx) == doctest::Approx((100.0 + 20.0 + 70.0) / 3.0));
}

TEST_CASE("time decay examples") {
  const auto d = make({{0, 1, 100, 5}, {0, 2, 0, 15}});
  const KnnContext ctx(d);
  const NeighborTable both(2, {{{1, 1.0}, {2, 1.0}}, {}, {}});
  const double expected = 100.0 / (1.0 + std::exp(-0.8));
  CHECK(predict_knn_time(0, 0, 5, 0.08, both, ctx) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(expected - 68.99) < 0.01);
  CHECK(predict_knn_time(0, 0, 5, 0.0, both, ctx) == predict_knn(0, 0, both, ctx));
  CHECK_THROWS_AS(predict_knn_time(0, 0, 5, -1.0, both, ctx), ConfigError);
}

TEST_CASE("zero decay reproduces kNN and predictions stay bounded") {
  std::mt19937_64 rng(5);
  const auto d = testing::random_dense_ratings(rng, 40, 30, 10);
  const auto t = build_neighbors(d, 8, 3);
  const KnnContext ctx(d);
  const UserRatings ratings(d);
  for (UserId u = 0; u < 40; ++u) {
    for (ItemId i = 0; i < 30; ++i) {
      const double p = predict_knn(u, i, t, ctx);
      CHECK(predict_knn_time(u, i, 7, 0.0, t, ctx) == p);
      double bound = -1.0;
      for (const auto& n : t.neighbors(i)) {
        if (const auto* r = ratings.find(u, n.item)) bound = std::max(bound, std::abs(r->score));
      }
      if (bound >= 0.0) CHECK(std::abs(p) <= bound + 1e-9);
    }
  }
}

TEST_CASE("neighbor files round-trip") {
  std::mt19937_64 rng(8);
  const auto d = testing::random_dense_ratings(rng, 20, 15, 8);
  const auto t = build_neighbors(d, 5, 2);
  std::stringstream buf;
  write_neighbors(buf, t);
  CHECK(parse_neighbors(buf) == t);
  std::istringstream bad("# knn k=2 items=3\n0\t7\t0.5\n");
  CHECK_THROWS_AS(parse_neighbors(bad), ParseError);
  std::istringstream self("# knn k=2 items=3\n1\t1\t0.5\n");
  CHECK_THROWS_AS(parse_neighbors(self), ParseError);
  std::istringstream headless("0\t1\t0.5\n");
  CHECK_THROWS_AS(parse_neighbors(headless), ParseError);
}
