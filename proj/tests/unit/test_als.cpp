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

#include <random>

#include "fixtures.hpp"
#include "mcf/errors.hpp"
#include "mcf/factor_model.hpp"

using namespace mcf;

namespace {

FactorModel scalar_model(double q) {
  HyperParams h = HyperParams::defaults_for(ModelKind::Als);
  h.dim = 1;
  auto m = FactorModel::create(ModelKind::Als, 1, 1, h, TimeBinner(0, 0, 1), 0.0);
  m.q(0, 0) = q;
  return m;
}

const Dataset one_rating({{0, 0, 8.0, 0}}, Split::Train, ScoreScale{});

}  // namespace

TEST_CASE("scalar normal equations") {
  auto m = scalar_model(2.0);
  als_half_step(m, one_rating, AlsSide::Users, 0.0);
  CHECK(m.p(0, 0) == doctest::Approx(4.0).epsilon(1e-15));

  m = scalar_model(2.0);
  als_half_step(m, one_rating, AlsSide::Users, 1.0);
  CHECK(m.p(0, 0) == doctest::Approx(3.2).epsilon(1e-15));

  m = scalar_model(2.0);
  const std::vector<double> zero{0.0};
  als_half_step(m, one_rating, AlsSide::Users, 1.0, zero);
  CHECK(m.p(0, 0) == 0.0);
}

TEST_CASE("singular systems ask for a positive lambda") {
  auto m = scalar_model(0.0);
  try {
    als_half_step(m, one_rating, AlsSide::Users, 0.0);
    FAIL("expected a singular system");
  } catch (const SingularSystemError& e) {
    CHECK(std::string(e.what()).find("lambda > 0") != std::string::npos);
    CHECK(std::string(e.what()).find("user 0") != std::string::npos);
    CHECK(e.exit_code() == 3);
  }
  // Two ratings along one direction cannot pin down a 2-d factor.
  HyperParams h = HyperParams::defaults_for(ModelKind::Als);
  h.dim = 2;
  const Dataset d({{0, 0, 1.0, 0}, {0, 1, 2.0, 0}}, Split::Train, ScoreScale{});
  auto m2 = FactorModel::create(ModelKind::Als, 1, 2, h, TimeBinner(0, 0, 1), 0.0);
  m2.q(0, 0) = 1.0;
  m2.q(0, 1) = 1.0;
  m2.q(1, 0) = 2.0;
  m2.q(1, 1) = 2.0;
  CHECK_THROWS_AS(als_half_step(m2, d, AlsSide::Users, 0.0), SingularSystemError);
  CHECK_NOTHROW(als_half_step(m2, d, AlsSide::Users, 1e-3));
}

TEST_CASE("bad weights and lambda") {
  auto m = scalar_model(2.0);
  const std::vector<double> two{1.0, 1.0};
  CHECK_THROWS_AS(als_half_step(m, one_rating, AlsSide::Users, 1.0, two), ShapeError);
  const std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(als_half_step(m, one_rating, AlsSide::Users, 1.0, negative), ConfigError);
  CHECK_THROWS_AS(als_half_step(m, one_rating, AlsSide::Users, -1.0), ConfigError);
}

TEST_CASE("every half-step is the exact row minimizer") {
  std::mt19937_64 rng(17);
  const auto d = testing::random_dense_ratings(rng, 12, 10, 5);
  HyperParams h = HyperParams::defaults_for(ModelKind::Als);
  h.dim = 3;
  auto m = initial_model(ModelKind::Als, d, h, {});
  testing::randomize(m.q.values(), rng, 1.0);
  als_half_step(m, d, AlsSide::Users, 1.0);
  const double best = als_objective(m, d, 1.0);
  // Perturbing any solved coordinate can only increase the objective.
  std::normal_distribution<double> n(0.0, 1e-3);
  for (int trial = 0; trial < 50; ++trial) {
    auto moved = m;
    for (auto& v : moved.p.values()) v += n(rng);
    CHECK(als_objective(moved, d, 1.0) >= best);
  }
}

TEST_CASE("ALS objective never increases") {
  std::mt19937_64 rng(20);
  const auto d = testing::random_dense_ratings(rng, 20, 30, 9);  // 30% observed
  HyperParams h = HyperParams::defaults_for(ModelKind::Als);
  h.dim = 5;
  auto m = initial_model(ModelKind::Als, d, h, {});
  double prev = als_objective(m, d, 1.0);
  for (int it = 0; it < 25; ++it) {
    for (auto side : {AlsSide::Items, AlsSide::Users}) {
      als_half_step(m, d, side, 1.0);
      const double now = als_objective(m, d, 1.0);
      CHECK(now <= prev + 1e-9 * std::max(1.0, prev));
      prev = now;
    }
  }
}

TEST_CASE("ALS half-steps do not depend on the thread count") {
  std::mt19937_64 rng(4);
  const auto d = testing::random_dense_ratings(rng, 20, 30, 9);
  HyperParams h = HyperParams::defaults_for(ModelKind::Als);
  h.dim = 5;
  h.iters = 3;
  TrainOptions one;
  const auto ref = train(ModelKind::Als, d, nullptr, h, one).model;
  for (unsigned t : {2u, 8u, 64u}) {
    TrainOptions opts;
    opts.threads = t;
    CHECK(train(ModelKind::Als, d, nullptr, h, opts).model == ref);
  }
}

TEST_CASE("train driver basics") {
  std::mt19937_64 rng(6);
  const auto d = testing::random_dense_ratings(rng, 15, 12, 6);
  HyperParams h = HyperParams::defaults_for(ModelKind::Als);
  h.dim = 4;
  h.iters = 0;
  const auto r0 = train(ModelKind::Als, d, nullptr, h);
  CHECK(r0.report.empty());
  CHECK(r0.model == initial_model(ModelKind::Als, d, h, {}));

  h.iters = 7;
  const auto r = train(ModelKind::Wals, d, &d, h);
  CHECK(r.report.size() == 7);
  for (std::size_t k = 0; k < r.report.size(); ++k) CHECK(r.report[k].epoch == int(k) + 1);

  // wALS with unit weights is plain ALS.
  std::vector<double> ones(d.size(), 1.0);
  TrainOptions opts;
  opts.weights = ones;
  CHECK(train(ModelKind::Wals, d, nullptr, h, opts).model.p ==
        train(ModelKind::Als, d, nullptr, h).model.p);
}
