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

#include "fixtures.hpp"
#include "mcf/errors.hpp"
#include "mcf/mfitr.hpp"
#include "mcf/synthetic.hpp"

using namespace mcf;
using mcf::testing::check_gradient;
using mcf::testing::randomize;
using mcf::testing::small_taxonomy;

namespace {

HyperParams small_hyper() {
  HyperParams h;
  h.dim = 3;
  h.time_dim = 2;
  h.num_bins = 4;
  h.gamma = 0.01;
  h.decay = 0.9;
  h.lambda1 = 0.03;
  h.lambda2 = 0.07;
  h.lambda3 = 0.2;
  h.lambda4 = 0.3;
  h.lambda5 = 0.05;
  h.seed = 3;
  return h;
}

MfitrModel zero_model(ModelKind kind, std::size_t users, const TaxonomyGraph& g,
                      std::size_t dim = 1) {
  HyperParams h = small_hyper();
  h.dim = dim;
  auto m = MfitrModel::create(kind, users, g.id_bound(), h, TimeBinner(0, 20, 4), 0.0, g);
  for (auto& b : parameter_blocks(m)) std::fill(b.values.begin(), b.values.end(), 0.0);
  return m;
}

void randomize(MfitrModel& m, std::mt19937_64& rng) {
  for (auto& b : parameter_blocks(m)) mcf::testing::randomize(b.values, rng, 0.5);
  m.base.mu = 2.5;
}

// Ratings on tracks only (ids 3..9 of the small taxonomy).
Dataset track_ratings(std::mt19937_64& rng, std::size_t users, std::size_t count) {
  std::uniform_int_distribution<UserId> user(0, static_cast<UserId>(users - 1));
  std::uniform_int_distribution<ItemId> item(3, 9);
  std::uniform_real_distribution<double> score(0.0, 5.0);
  std::uniform_int_distribution<Timestamp> time(0, 20);
  std::vector<RatingRecord> recs;
  for (std::size_t k = 0; k < count; ++k) recs.push_back({user(rng), item(rng), score(rng), time(rng)});
  return Dataset(std::move(recs), Split::Train, ScoreScale{}, DatasetShape{users, 10, 0, 20});
}

}  // namespace

TEST_CASE("artist terms enter the prediction") {
  const auto g = small_taxonomy();
  auto m = zero_model(ModelKind::Mfitr, 1, g);
  m.base.mu = 50.0;
  m.artist_bias[0] = 5.0;
  CHECK(predict_mfitr(m, 0, 4, g) == 55.0);

  m = zero_model(ModelKind::Mfitr, 1, g);
  m.base.q(4, 0) = 1.0;
  m.artist_factor(0, 0) = 1.0;
  m.base.p(0, 0) = 2.0;
  CHECK(predict_mfitr(m, 0, 4, g) == 4.0);
}

TEST_CASE("items without an artist predict like bias-MF") {
  std::vector<TaxonomyEntry> e{{ItemKind::Artist, 0, std::nullopt, std::nullopt, {}},
                               {ItemKind::Track, 1, std::nullopt, std::nullopt, {}},
                               {ItemKind::Track, 2, std::nullopt, 0, {}}};
  const auto g = TaxonomyGraph::build(e);
  std::mt19937_64 rng(2);
  auto m = zero_model(ModelKind::Mfitr, 3, g, 3);
  randomize(m, rng);
  CHECK(predict_mfitr(m, 1, 1, g) == predict_mf(m.base, 1, 1));
  CHECK(predict_mfitr(m, 1, 2, g) != predict_mf(m.base, 1, 2));
  // Item 5 is outside the taxonomy and the model: cold start.
  CHECK(predict_mfitr(m, 1, 5, g) == m.base.mu + m.base.user_bias[1]);
}

TEST_CASE("time-MFITR adds drift and bin bias") {
  const auto g = small_taxonomy();
  auto m = zero_model(ModelKind::TimeMfitr, 1, g);
  m.artist_bias[0] = 1.0;
  m.base.x(0, 0) = 1.0;
  m.base.z(m.base.binner.bin(10), 0) = 2.0;
  m.base.item_bin_bias(4, m.base.binner.bin(10)) = 3.0;
  CHECK(predict_time_mfitr(m, 0, 4, 10, g) == 6.0);
  CHECK(predict_time_mfitr(m, 0, 4, 6, g) == 6.0);  // same bin
  CHECK_THROWS_AS(predict_time_mfitr(m, 0, 4, 21, g), RangeError);
  CHECK_THROWS_AS(predict_mfitr(m, 0, 4, g), ConfigError);

  std::mt19937_64 rng(4);
  auto full = zero_model(ModelKind::TimeMfitr, 2, g, 3);
  randomize(full, rng);
  for (auto* f : {&full.base.x, &full.base.z, &full.base.item_bin_bias}) {
    std::fill(f->values().begin(), f->values().end(), 0.0);
  }
  auto plain = full;
  plain.base.time_on = false;
  for (ItemId i = 0; i < 10; ++i) {
    CHECK(predict_time_mfitr(full, 1, i, 13, g) == predict_mfitr(plain, 1, i, g));
  }
}

TEST_CASE("edge weights clamp and default to zero") {
  // Artist 0, album 1, tracks 2 and 3 on album 1.
  std::vector<TaxonomyEntry> e{{ItemKind::Artist, 0, std::nullopt, std::nullopt, {}},
                               {ItemKind::Album, 1, std::nullopt, 0, {}},
                               {ItemKind::Track, 2, 1, 0, {}},
                               {ItemKind::Track, 3, 1, 0, {}}};
  const auto g = TaxonomyGraph::build(e);
  // Track 2 and album 1 disagree perfectly; track 3 tracks the album; the
  // artist is never rated.
  const Dataset d({{0, 1, 80, 0}, {0, 2, 60, 0}, {0, 3, 85, 0}, {0, 4, 70, 0},
                   {1, 1, 90, 0}, {1, 2, 30, 0}, {1, 3, 75, 0}, {1, 4, 45, 0}},
                  Split::Train, ScoreScale{});
  const UserMeanTable means(d);
  const auto ew = edge_weights(g, d, means);
  CHECK(adjusted_cosine(2, 1, d, means) < 0.0);
  CHECK(ew.of(2, 1) == 0.0);
  CHECK(ew.of(3, 1) == doctest::Approx(adjusted_cosine(3, 1, d, means)).epsilon(1e-15));
  CHECK(ew.of(3, 1) > 0.0);
  CHECK(ew.of(2, 0) == 0.0);  // artist never rated
  CHECK(ew.of(1, 3) == 0.0);  // not an edge in this direction
  for (double w : ew.weight) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("graph term examples") {
  std::vector<TaxonomyEntry> e{{ItemKind::Track, 0, std::nullopt, 1, {}},
                               {ItemKind::Artist, 1, std::nullopt, std::nullopt, {}}};
  const auto g = TaxonomyGraph::build(e);
  auto m = zero_model(ModelKind::Mfitr, 1, g, 2);
  m.base.q(0, 0) = 1.0;
  m.base.q(1, 1) = 1.0;
  HyperParams h = small_hyper();
  h.lambda3 = 0.5;
  h.lambda4 = 0.0;
  const Dataset none({}, Split::Train, ScoreScale{}, DatasetShape{1, 2, 0, 0});
  CHECK(loss_mfitr(m, none, g, uniform_edge_weights(g, 1.0), h) == 1.0);

  // Antisymmetric step, pulling the pair together.
  auto st = EpochState::start(h);
  st.gamma = 0.1;
  auto moved = m;
  graph_pass(moved, uniform_edge_weights(g, 1.0), h, st);
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(moved.base.q(0, d) - m.base.q(0, d) ==
          doctest::Approx(m.base.q(1, d) - moved.base.q(1, d)).epsilon(1e-15));
  }
  CHECK(loss_mfitr(moved, none, g, uniform_edge_weights(g, 1.0), h) < 1.0);
}

TEST_CASE("graph term is non-negative and vanishes on equal factors") {
  const auto g = small_taxonomy();
  std::mt19937_64 rng(6);
  HyperParams h = small_hyper();
  h.lambda1 = h.lambda2 = 0.0;
  const Dataset none({}, Split::Train, ScoreScale{}, DatasetShape{1, 10, 0, 20});
  const auto ew = uniform_edge_weights(g, 0.7);
  for (int rep = 0; rep < 20; ++rep) {
    auto m = zero_model(ModelKind::Mfitr, 1, g, 3);
    randomize(m, rng);
    CHECK(loss_mfitr(m, none, g, ew, h) >= 0.0);
    for (ItemId i = 1; i < 10; ++i) {
      for (std::size_t d = 0; d < 3; ++d) m.base.q(i, d) = m.base.q(0, d);
    }
    CHECK(loss_mfitr(m, none, g, ew, h) == 0.0);
  }
}

TEST_CASE("without graph and artist terms the objective is loss_mf") {
  const auto g = small_taxonomy();
  std::mt19937_64 rng(8);
  const auto d = track_ratings(rng, 4, 30);
  auto m = zero_model(ModelKind::Mfitr, 4, g, 3);
  randomize(m, rng);
  std::fill(m.artist_bias.begin(), m.artist_bias.end(), 0.0);
  std::fill(m.artist_factor.values().begin(), m.artist_factor.values().end(), 0.0);
  HyperParams h = small_hyper();
  h.lambda1 = h.lambda2 = 0.05;
  h.lambda3 = h.lambda4 = 0.0;
  CHECK(loss_mfitr(m, d, g, uniform_edge_weights(g, 1.0), h) ==
        doctest::Approx(loss_mf(m.base, d, 0.05)).epsilon(1e-13));
  for (const auto& r : d.records()) {
    CHECK(predict_mfitr(m, r.user, r.item, g) == predict_mf(m.base, r.user, r.item));
  }
}

TEST_CASE("MFITR gradients match central differences") {
  const auto g = small_taxonomy();
  for (auto kind : {ModelKind::Mfitr, ModelKind::TimeMfitr}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      std::mt19937_64 rng(seed);
      const auto d = track_ratings(rng, 4, 30);
      auto m = zero_model(kind, 4, g, 3);
      randomize(m, rng);
      const HyperParams h = small_hyper();
      std::uniform_real_distribution<double> w(0.0, 1.0);
      auto ew = uniform_edge_weights(g, 0.0);
      for (auto& v : ew.weight) v = w(rng);
      auto grad = loss_gradient_mfitr(m, d, g, ew, h);
      const auto r = check_gradient(parameter_blocks(m), parameter_blocks(grad),
                                    [&] { return loss_mfitr(m, d, g, ew, h); });
      INFO(to_string(kind) << " seed " << seed << " relative " << r.relative);
      CHECK(r.relative < 1e-4);
      CHECK(r.worst < 1e-4);
    }
  }
}

TEST_CASE("MFITR without graph or artist updates follows the SGD trajectory") {
  const auto g = small_taxonomy();
  std::mt19937_64 rng(10);
  const auto d = track_ratings(rng, 5, 60);
  HyperParams h = small_hyper();
  h.lambda1 = h.lambda2 = h.lambda = 0.05;
  h.lambda3 = h.lambda4 = 0.0;
  auto m = zero_model(ModelKind::Mfitr, 5, g, 3);
  randomize(m, rng);
  std::fill(m.artist_bias.begin(), m.artist_bias.end(), 0.0);
  std::fill(m.artist_factor.values().begin(), m.artist_factor.values().end(), 0.0);
  auto base = m.base;
  base.kind = ModelKind::Sgd;

  const auto ew = uniform_edge_weights(g, 1.0);
  auto s1 = EpochState::start(h);
  s1.frozen.artist = true;
  auto s2 = EpochState::start(h);
  sgd_epoch_mfitr(m, d, g, ew, h, s1);
  sgd_epoch(base, d, h, s2);
  CHECK(m.base.p == base.p);
  CHECK(m.base.q == base.q);
  CHECK(m.base.user_bias == base.user_bias);
  CHECK(m.base.item_bias == base.item_bias);
  for (const auto& r : d.records()) {
    CHECK(predict_mfitr(m, r.user, r.item, g) == predict_mf(base, r.user, r.item));
  }

  // A taxonomy without artists needs no freezing at all.
  std::vector<TaxonomyEntry> flat;
  for (ItemId i = 0; i < 10; ++i) flat.push_back({ItemKind::Track, i, std::nullopt, std::nullopt, {}});
  const auto none = TaxonomyGraph::build(flat);
  auto m2 = zero_model(ModelKind::Mfitr, 5, none, 3);
  randomize(m2, rng);
  auto base2 = m2.base;
  base2.kind = ModelKind::Sgd;
  auto s3 = EpochState::start(h);
  auto s4 = EpochState::start(h);
  for (int e = 0; e < 3; ++e) {
    sgd_epoch_mfitr(m2, d, none, uniform_edge_weights(none, 1.0), h, s3);
    sgd_epoch(base2, d, h, s4);
  }
  CHECK(m2.base.p == base2.p);
  CHECK(m2.base.q == base2.q);
}

TEST_CASE("time-MFITR with frozen zero time terms follows MFITR") {
  const auto g = small_taxonomy();
  std::mt19937_64 rng(12);
  const auto d = track_ratings(rng, 5, 60);
  const HyperParams h = small_hyper();
  auto t = zero_model(ModelKind::TimeMfitr, 5, g, 3);
  randomize(t, rng);
  for (auto* f : {&t.base.x, &t.base.z, &t.base.item_bin_bias}) {
    std::fill(f->values().begin(), f->values().end(), 0.0);
  }
  auto plain = t;
  plain.base.time_on = false;
  plain.base.kind = ModelKind::Mfitr;
  const auto ew = uniform_edge_weights(g, 0.6);
  auto s1 = EpochState::start(h);
  s1.frozen.time = true;
  auto s2 = EpochState::start(h);
  for (int e = 0; e < 3; ++e) {
    sgd_epoch_time_mfitr(t, d, g, ew, h, s1);
    sgd_epoch_mfitr(plain, d, g, ew, h, s2);
  }
  CHECK(t.base.p == plain.base.p);
  CHECK(t.base.q == plain.base.q);
  CHECK(t.artist_factor == plain.artist_factor);
  CHECK(t.artist_bias == plain.artist_bias);
  CHECK_THROWS_AS(sgd_epoch_mfitr(t, d, g, ew, h, s2), ConfigError);
  CHECK_THROWS_AS(sgd_epoch_time_mfitr(plain, d, g, ew, h, s2), ConfigError);
}

TEST_CASE("graph terms pull sibling tracks together") {
  // Tracks 3 and 4 and their album 1 share one planted factor; everything
  // else is random. Every node is rated so the edges carry evidence.
  const auto g = small_taxonomy();
  int closer = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    constexpr std::size_t users = 60, dim = 3;
    std::vector<double> p(users * dim), q(10 * dim);
    for (auto& v : p) v = n(rng);
    for (auto& v : q) v = n(rng);
    for (std::size_t k = 0; k < dim; ++k) q[4 * dim + k] = q[1 * dim + k] = q[3 * dim + k];
    std::vector<RatingRecord> recs;
    std::uniform_int_distribution<ItemId> item(0, 9);
    for (UserId u = 0; u < users; ++u) {
      for (int k = 0; k < 4; ++k) {
        const ItemId i = item(rng);
        double s = 50.0;
        for (std::size_t d = 0; d < dim; ++d) s += 10.0 * p[u * dim + d] * q[i * dim + d];
        recs.push_back({u, i, std::clamp(s + 5.0 * n(rng), 0.0, 100.0), 0});
      }
    }
    const Dataset d(recs, Split::Train, ScoreScale{}, DatasetShape{users, 10, 0, 0});
    HyperParams h = small_hyper();
    h.dim = dim;
    h.gamma = 0.005;
    h.lambda1 = h.lambda2 = 0.1;
    h.iters = 20;
    h.seed = seed;
    auto distance = [&](const MfitrModel& m) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += std::pow(m.base.q(3, k) - m.base.q(4, k), 2);
      return std::sqrt(s);
    };
    h.lambda3 = h.lambda4 = 0.0;
    const auto loose = train_mfitr(ModelKind::Mfitr, d, nullptr, g, h).model;
    h.lambda3 = h.lambda4 = 20.0;
    const auto tied = train_mfitr(ModelKind::Mfitr, d, nullptr, g, h).model;
    if (distance(tied) < distance(loose)) ++closer;
  }
  CHECK(closer >= 3);
}

TEST_CASE("training is seeded and reports every epoch") {
  SynthConfig c;
  c.users = 200;
  c.artists = 10;
  c.ratings_per_user = 15;
  const auto data = generate_synthetic(c, 3);
  HyperParams h = HyperParams::defaults_for(ModelKind::Mfitr);
  h.dim = 5;
  h.gamma = 0.002;
  h.lambda1 = 1.0;
  h.lambda2 = 3.0;
  h.lambda3 = h.lambda4 = 50.0;
  h.iters = 4;
  const auto a = train_mfitr(ModelKind::Mfitr, data.train, &data.validation, data.taxonomy, h);
  const auto b = train_mfitr(ModelKind::Mfitr, data.train, &data.validation, data.taxonomy, h);
  CHECK(a.model == b.model);
  CHECK(a.report.size() == 4);
  CHECK(all_finite(a.model));
  CHECK(std::isfinite(a.report.back().valid_rmse));
  h.iters = 0;
  CHECK(train_mfitr(ModelKind::Mfitr, data.train, nullptr, data.taxonomy, h).model ==
        initial_mfitr(ModelKind::Mfitr, data.train, data.taxonomy, h, {}));
  CHECK_THROWS_AS(train_mfitr(ModelKind::Sgd, data.train, nullptr, data.taxonomy, h), ConfigError);

  h.iters = 3;
  h.gamma = 5.0;
  CHECK_THROWS_AS(train_mfitr(ModelKind::Mfitr, data.train, nullptr, data.taxonomy, h),
                  DivergenceError);
}
