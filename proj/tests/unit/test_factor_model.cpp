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

#include <chrono>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mcf/errors.hpp"
#include "mcf/factor_model.hpp"
#include "mcf/synthetic.hpp"

using namespace mcf;
using mcf::testing::check_gradient;
using mcf::testing::randomize;

namespace {

HyperParams small_hyper(std::size_t dim = 3) {
  HyperParams h;
  h.dim = dim;
  h.time_dim = 2;
  h.num_bins = 4;
  h.gamma = 0.01;
  h.decay = 0.9;
  h.lambda = 0.05;
  h.lambda1 = 0.03;
  h.lambda2 = 0.07;
  h.lambda3 = 0.11;
  h.seed = 7;
  return h;
}

FactorModel model_with(ModelKind kind, std::size_t users, std::size_t items, const HyperParams& h) {
  return FactorModel::create(kind, users, items, h, TimeBinner(0, 20, h.num_bins), 0.0);
}

FactorModel single_rating_model(std::size_t dim) {
  HyperParams h;
  h.dim = dim;
  auto m = model_with(ModelKind::Sgd, 1, 1, h);
  for (auto& b : parameter_blocks(m)) std::fill(b.values.begin(), b.values.end(), 0.0);
  return m;
}

Dataset one_rating(double r, Timestamp t = 0) {
  return Dataset({{0, 0, r, t}}, Split::Train, ScoreScale{});
}

}  // namespace

TEST_CASE("model kinds round-trip through their names") {
  for (auto k : {ModelKind::Knn, ModelKind::TimeKnn, ModelKind::Als, ModelKind::Wals,
                 ModelKind::Sgd, ModelKind::Svdpp, ModelKind::TimeSvd, ModelKind::TimeSvdpp,
                 ModelKind::Mfitr, ModelKind::TimeMfitr}) {
    CHECK(model_kind_from_string(to_string(k)) == k);
  }
  CHECK(model_kind_from_string("mf-sgd") == ModelKind::Sgd);
  CHECK_THROWS_AS(model_kind_from_string("bptf"), ConfigError);
}

TEST_CASE("defaults match the reference tuning") {
  const auto sgd = HyperParams::defaults_for(ModelKind::Sgd);
  CHECK(sgd.gamma == 5e-4);
  CHECK(sgd.lambda == 1e-4);
  CHECK(sgd.decay == 0.95);
  const auto tsvdpp = HyperParams::defaults_for(ModelKind::TimeSvdpp);
  CHECK(tsvdpp.gamma == 5e-5);
  CHECK(tsvdpp.lambda1 == 1e-5);
  CHECK(tsvdpp.lambda2 == 1e-4);
  CHECK(tsvdpp.lambda3 == 3e-4);
  const auto als = HyperParams::defaults_for(ModelKind::Als);
  CHECK(als.lambda == 1.0);
  CHECK(als.dim == 120);
  CHECK(als.iters == 50);
  const auto mfitr = HyperParams::defaults_for(ModelKind::Mfitr);
  CHECK(mfitr.gamma == 8e-5);
  CHECK(mfitr.lambda3 == 1e-3);
  CHECK(mfitr.lambda4 == 1e-3);

  HyperParams bad;
  bad.decay = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = HyperParams{};
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("initialization is seeded, small and leaves unused groups empty") {
  HyperParams h = small_hyper(10);
  const auto a = model_with(ModelKind::Sgd, 5, 6, h);
  const auto b = model_with(ModelKind::Sgd, 5, 6, h);
  CHECK(a == b);
  h.seed = 8;
  CHECK_FALSE(a == model_with(ModelKind::Sgd, 5, 6, h));
  const double bound = 0.005 / std::sqrt(10.0);
  for (double v : a.p.values()) CHECK(std::abs(v) <= bound);
  for (double v : a.user_bias) CHECK(v == 0.0);
  CHECK(a.y.empty());
  CHECK(a.x.empty());
  CHECK(a.item_bin_bias.empty());
  const auto t = model_with(ModelKind::TimeSvdpp, 5, 6, small_hyper());
  CHECK(t.y.rows() == 6);
  CHECK(t.z.rows() == 4);
  CHECK(t.item_bin_bias.cols() == 4);
}

TEST_CASE("predict_mf evaluates the biased dot product") {
  auto m = single_rating_model(2);
  m.mu = 50.0;
  CHECK(predict_mf(m, 0, 0) == 50.0);
  m.item_bias[0] = 2.0;
  m.user_bias[0] = -1.0;
  m.q(0, 0) = 1.0;
  m.q(0, 1) = 2.0;
  m.p(0, 0) = 3.0;
  m.p(0, 1) = -1.0;
  CHECK(predict_mf(m, 0, 0) == 52.0);
  m.p(0, 0) = 2.0;  // orthogonal to q
  CHECK(predict_mf(m, 0, 0) == 51.0);
  CHECK_THROWS_AS(predict_mf(m, 1, 0), LookupError);
}

TEST_CASE("loss_mf sums the regularizer per observation") {
  auto m = single_rating_model(0);
  CHECK(loss_mf(m, one_rating(10.0), 0.0) == 100.0);
  m.user_bias[0] = 1.0;
  m.item_bias[0] = 1.0;
  m.mu = -2.0;
  CHECK(loss_mf(m, one_rating(0.0), 0.5) == doctest::Approx(1.0));
  m.mu = 8.0;
  CHECK(loss_mf(m, one_rating(10.0), 0.0) == 0.0);
}

TEST_CASE("sgd_epoch on one rating moves both biases by gamma * e") {
  auto m = single_rating_model(0);
  HyperParams h;
  h.dim = 0;
  h.gamma = 0.1;
  h.lambda = 0.0;
  auto st = EpochState::start(h);
  sgd_epoch(m, one_rating(10.0), h, st);
  CHECK(m.user_bias[0] == doctest::Approx(1.0));
  CHECK(m.item_bias[0] == doctest::Approx(1.0));
  CHECK(st.epoch == 1);
  CHECK(st.gamma == doctest::Approx(0.1 * h.decay));
}

TEST_CASE("sgd_epoch leaves a zero-residual model unchanged") {
  std::mt19937_64 rng(3);
  HyperParams h = small_hyper();
  h.lambda = 0.0;
  auto m = model_with(ModelKind::Sgd, 4, 5, h);
  randomize(m, rng);
  std::vector<RatingRecord> recs;
  for (UserId u = 0; u < 4; ++u) {
    for (ItemId i = 0; i < 5; i += 2) recs.push_back({u, i, predict_mf(m, u, i), 0});
  }
  const Dataset exact(recs, Split::Train, ScoreScale{-100.0, 100.0});
  const auto before = m;
  auto st = EpochState::start(h);
  sgd_epoch(m, exact, h, st);
  CHECK(m == before);
}

TEST_CASE("sgd_epoch is bit-reproducible single-threaded and divergence is reported") {
  std::mt19937_64 rng(5);
  const auto data = mcf::testing::random_ratings(rng, 8, 10, 60);
  HyperParams h = small_hyper();
  auto a = model_with(ModelKind::Sgd, 8, 10, h);
  auto b = a;
  auto sa = EpochState::start(h);
  auto sb = EpochState::start(h);
  for (int e = 0; e < 3; ++e) {
    sgd_epoch(a, data, h, sa);
    sgd_epoch(b, data, h, sb);
  }
  CHECK(a == b);

  h.gamma = 1e6;
  auto c = model_with(ModelKind::Sgd, 8, 10, h);
  auto sc = EpochState::start(h);
  bool diverged = false;
  try {
    for (int e = 0; e < 20; ++e) sgd_epoch(c, data, h, sc);
  } catch (const DivergenceError& err) {
    diverged = true;
    CHECK(err.epoch() >= 1);
    CHECK(err.exit_code() == 3);
  }
  CHECK(diverged);
}

TEST_CASE("predict_svdpp adds the normalized implicit sum") {
  HyperParams h;
  h.dim = 2;
  auto m = model_with(ModelKind::Svdpp, 1, 4, h);
  for (auto& b : parameter_blocks(m)) std::fill(b.values.begin(), b.values.end(), 0.0);
  m.mu = 0.0;
  m.p(0, 0) = 1.0;
  m.q(0, 0) = 1.0;
  const std::vector<ItemId> rated{0, 1, 2, 3};
  m.y(1, 0) = 2.0;  // sum y = (2, 0)
  CHECK(predict_svdpp(m, 0, 0, rated) == 2.0);
  CHECK(predict_svdpp(m, 0, 0, {}) == predict_mf(m, 0, 0));
  m.y(1, 0) = 0.0;
  CHECK(predict_svdpp(m, 0, 0, rated) == predict_mf(m, 0, 0));
}

TEST_CASE("predict_time adds the factorized user drift and item-bin bias") {
  HyperParams h = small_hyper(2);
  auto m = model_with(ModelKind::TimeSvd, 1, 1, h);
  for (auto& b : parameter_blocks(m)) std::fill(b.values.begin(), b.values.end(), 0.0);
  const std::size_t bin = m.binner.bin(10);
  m.x(0, 0) = 1.0;
  m.x(0, 1) = 1.0;
  m.z(bin, 0) = 2.0;
  m.z(bin, 1) = -1.0;
  m.item_bin_bias(0, bin) = 3.0;
  CHECK(predict_time(m, 0, 0, 10, {}) == 4.0);
  CHECK(predict_time(m, 0, 0, 6, {}) == 4.0);  // same bin as t = 10
  CHECK_THROWS_AS(predict_time(m, 0, 0, 21, {}), RangeError);
}

TEST_CASE("reduction chain holds bit for bit on random models") {
  std::mt19937_64 rng(11);
  HyperParams h = small_hyper(4);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int rep = 0; rep < 100; ++rep) {
    auto full = model_with(ModelKind::TimeSvdpp, 6, 6, h);
    randomize(full, rng);
    std::vector<ItemId> rated;
    for (ItemId j = 0; j < 6; ++j) {
      if (pick(rng) < 3) rated.push_back(j);
    }
    const UserId u = static_cast<UserId>(pick(rng));
    const ItemId i = static_cast<ItemId>(pick(rng));
    const Timestamp t = pick(rng) * 3;

    auto svdpp = full;
    svdpp.time_on = false;
    auto no_time = full;
    for (auto* f : {&no_time.x, &no_time.z, &no_time.item_bin_bias}) {
      std::fill(f->values().begin(), f->values().end(), 0.0);
    }
    CHECK(predict_time(no_time, u, i, t, rated) == predict_svdpp(svdpp, u, i, rated));

    auto no_y = svdpp;
    std::fill(no_y.y.values().begin(), no_y.y.values().end(), 0.0);
    CHECK(predict_svdpp(no_y, u, i, rated) == predict_mf(no_y, u, i));
  }
}

namespace {

void check_family_gradient(ModelKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto data = mcf::testing::random_ratings(rng, 6, 8, 40);
  HyperParams h = small_hyper();
  auto m = model_with(kind, 6, 8, h);
  randomize(m, rng);
  const auto reg = reg_weights(kind, h);
  auto g = loss_gradient(m, data, reg);
  const auto result = check_gradient(parameter_blocks(m), parameter_blocks(g),
                                     [&] { return loss(m, data, reg); });
  INFO(to_string(kind) << " relative " << result.relative << " worst " << result.worst);
  CHECK(result.relative < 1e-4);
  CHECK(result.worst < 1e-4);
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed : {1, 2, 3}) {
    check_family_gradient(ModelKind::Sgd, seed);
    check_family_gradient(ModelKind::Svdpp, seed);
    check_family_gradient(ModelKind::TimeSvd, seed);
    check_family_gradient(ModelKind::TimeSvdpp, seed);
  }
}

TEST_CASE("the general objective reduces to loss_mf for bias-MF") {
  std::mt19937_64 rng(4);
  const auto data = mcf::testing::random_ratings(rng, 5, 8, 30);
  HyperParams h = small_hyper();
  auto m = model_with(ModelKind::Sgd, 5, 8, h);
  randomize(m, rng);
  CHECK(loss(m, data, reg_weights(ModelKind::Sgd, h)) ==
        doctest::Approx(loss_mf(m, data, h.lambda)).epsilon(1e-12));
}

TEST_CASE("svdpp with frozen zero y follows the sgd trajectory exactly") {
  std::mt19937_64 rng(9);
  const auto data = mcf::testing::random_ratings(rng, 6, 8, 50);
  HyperParams h = small_hyper();
  auto svdpp = model_with(ModelKind::Svdpp, 6, 8, h);
  std::fill(svdpp.y.values().begin(), svdpp.y.values().end(), 0.0);
  auto base = svdpp;
  base.kind = ModelKind::Sgd;
  base.implicit_on = false;
  base.y = FactorMatrix(8, 0);
  auto s1 = EpochState::start(h);
  s1.frozen.implicit = true;
  auto s2 = EpochState::start(h);
  for (int e = 0; e < 3; ++e) {
    sgd_epoch_svdpp(svdpp, data, h, s1);
    sgd_epoch(base, data, h, s2);
  }
  CHECK(svdpp.p == base.p);
  CHECK(svdpp.q == base.q);
  CHECK(svdpp.user_bias == base.user_bias);
  CHECK(svdpp.item_bias == base.item_bias);
}

TEST_CASE("time-svd with frozen zero time terms follows the sgd trajectory exactly") {
  std::mt19937_64 rng(10);
  const auto data = mcf::testing::random_ratings(rng, 6, 8, 50);
  HyperParams h = small_hyper();
  h.lambda1 = h.lambda2 = h.lambda;
  auto timed = model_with(ModelKind::TimeSvd, 6, 8, h);
  for (auto* f : {&timed.x, &timed.z, &timed.item_bin_bias}) {
    std::fill(f->values().begin(), f->values().end(), 0.0);
  }
  auto base = timed;
  base.kind = ModelKind::Sgd;
  base.time_on = false;
  auto s1 = EpochState::start(h);
  s1.frozen.time = true;
  auto s2 = EpochState::start(h);
  for (int e = 0; e < 3; ++e) {
    sgd_epoch_time(timed, data, h, s1);
    sgd_epoch(base, data, h, s2);
  }
  CHECK(timed.p == base.p);
  CHECK(timed.q == base.q);
  CHECK(timed.user_bias == base.user_bias);
  CHECK(timed.item_bias == base.item_bias);
}

TEST_CASE("lazy implicit updates match eager per-rating updates") {
  // Eager reference on a single-user instance (the visiting order is forced):
  // after each rating every y_j of R_u takes its step and the implicit sum is
  // recomputed from scratch.
  std::mt19937_64 rng(12);
  const auto data = mcf::testing::random_ratings(rng, 5, 7, 40);
  const UserId u = data[0].user;
  std::vector<RatingRecord> one;
  for (auto k : data.user_records(u)) one.push_back(data[k]);
  const Dataset single(one, Split::Train, ScoreScale{}, DatasetShape{5, 7, 0, 20});

  HyperParams h = small_hyper();
  auto lazy = model_with(ModelKind::Svdpp, 5, 7, h);
  randomize(lazy, rng, 0.2);
  auto eager = lazy;
  auto st = EpochState::start(h);
  sgd_epoch_svdpp(lazy, single, h, st);

  const RatedSets rated(single);
  const auto items = rated.of(u);
  const double norm = 1.0 / std::sqrt(static_cast<double>(items.size()));
  for (const auto& r : one) {
    std::vector<double> s(h.dim, 0.0);
    for (ItemId j : items) {
      for (std::size_t d = 0; d < h.dim; ++d) s[d] += eager.y(j, d);
    }
    for (auto& v : s) v *= norm;
    double pred = eager.mu + eager.user_bias[u] + eager.item_bias[r.item];
    for (std::size_t d = 0; d < h.dim; ++d) pred += eager.q(r.item, d) * (eager.p(u, d) + s[d]);
    const double e = r.score - pred;
    std::vector<double> q_old(h.dim);
    for (std::size_t d = 0; d < h.dim; ++d) {
      const double qk = eager.q(r.item, d), pk = eager.p(u, d);
      q_old[d] = qk;
      eager.q(r.item, d) += h.gamma * (e * (pk + s[d]) - h.lambda * qk);
      eager.p(u, d) += h.gamma * (e * qk - h.lambda * pk);
    }
    eager.user_bias[u] += h.gamma * (e - h.lambda * eager.user_bias[u]);
    eager.item_bias[r.item] += h.gamma * (e - h.lambda * eager.item_bias[r.item]);
    for (ItemId j : items) {
      for (std::size_t d = 0; d < h.dim; ++d) {
        eager.y(j, d) += h.gamma * (e * norm * q_old[d] - h.lambda * eager.y(j, d));
      }
    }
  }
  for (std::size_t k = 0; k < lazy.y.values().size(); ++k) {
    CHECK(lazy.y.values()[k] == doctest::Approx(eager.y.values()[k]).epsilon(1e-12));
  }
  for (std::size_t k = 0; k < lazy.p.values().size(); ++k) {
    CHECK(lazy.p.values()[k] == doctest::Approx(eager.p.values()[k]).epsilon(1e-12));
  }
  for (std::size_t k = 0; k < lazy.q.values().size(); ++k) {
    CHECK(lazy.q.values()[k] == doctest::Approx(eager.q.values()[k]).epsilon(1e-12));
  }
}
