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

#include "mcf/factor_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "mcf/evaluation.hpp"
#include "mcf/parallel.hpp"
#include "rating_pass.hpp"
#include "sgd_kernel.hpp"

namespace mcf {

namespace {

struct KindName {
  ModelKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {ModelKind::Knn, "knn"},           {ModelKind::TimeKnn, "time-knn"},
    {ModelKind::Als, "als"},           {ModelKind::Wals, "wals"},
    {ModelKind::Sgd, "sgd"},           {ModelKind::Svdpp, "svdpp"},
    {ModelKind::TimeSvd, "time-svd"},  {ModelKind::TimeSvdpp, "time-svdpp"},
    {ModelKind::Mfitr, "mfitr"},       {ModelKind::TimeMfitr, "time-mfitr"},
};

}  // namespace

std::string_view to_string(ModelKind k) noexcept {
  for (const auto& kn : kKindNames) {
    if (kn.kind == k) return kn.name;
  }
  return "sgd";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "mf-sgd") return ModelKind::Sgd;
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  throw ConfigError(fmt::format("unknown model kind '{}'", name));
}

bool uses_implicit(ModelKind k) noexcept {
  return k == ModelKind::Svdpp || k == ModelKind::TimeSvdpp;
}

bool uses_time(ModelKind k) noexcept {
  return k == ModelKind::TimeSvd || k == ModelKind::TimeSvdpp || k == ModelKind::TimeMfitr;
}

bool uses_taxonomy(ModelKind k) noexcept {
  return k == ModelKind::Mfitr || k == ModelKind::TimeMfitr;
}

bool is_neighborhood(ModelKind k) noexcept {
  return k == ModelKind::Knn || k == ModelKind::TimeKnn;
}

bool is_als(ModelKind k) noexcept { return k == ModelKind::Als || k == ModelKind::Wals; }

HyperParams HyperParams::defaults_for(ModelKind kind) {
  HyperParams h;
  switch (kind) {
    case ModelKind::Knn:
    case ModelKind::TimeKnn:
      break;
    case ModelKind::Als:
    case ModelKind::Wals:
      h.lambda = 1.0;
      h.dim = 120;
      h.iters = 50;
      break;
    case ModelKind::Sgd:
    case ModelKind::Svdpp:
      h.gamma = 5e-4;
      h.decay = 0.95;
      h.lambda = 1e-4;
      h.dim = 50;
      h.iters = 50;
      break;
    case ModelKind::TimeSvd:
      h.gamma = 1e-4;
      h.decay = 0.95;
      h.lambda1 = 1e-4;
      h.lambda2 = 5e-4;
      h.lambda3 = 5e-4;
      h.dim = 50;
      break;
    case ModelKind::TimeSvdpp:
      h.gamma = 5e-5;
      h.decay = 0.95;
      h.lambda1 = 1e-5;
      h.lambda2 = 1e-4;
      h.lambda3 = 3e-4;
      h.dim = 50;
      break;
    case ModelKind::Mfitr:
    case ModelKind::TimeMfitr:
      h.gamma = 8e-5;
      h.decay = 0.95;
      h.lambda1 = 1e-5;
      h.lambda2 = 1e-4;
      h.lambda3 = 1e-3;
      h.lambda4 = 1e-3;
      h.lambda5 = kind == ModelKind::TimeMfitr ? 1e-3 : 0.0;
      h.dim = 50;
      break;
  }
  return h;
}

void HyperParams::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
  for (double l : {lambda, lambda1, lambda2, lambda3, lambda4, lambda5}) {
    if (!(l >= 0.0)) throw ConfigError("regularization weights must be >= 0");
  }
  if (iters < 0) throw ConfigError("iters must be >= 0");
  if (num_bins == 0) throw ConfigError("bins must be >= 1");
  if (knn_k == 0) throw ConfigError("knn-k must be >= 1");
  if (knn_parts == 0) throw ConfigError("knn-parts must be >= 1");
  if (!(knn_beta >= 0.0)) throw ConfigError("knn-beta must be >= 0");
}

RegWeights reg_weights(ModelKind kind, const HyperParams& h) noexcept {
  RegWeights r;
  switch (kind) {
    case ModelKind::TimeSvd:
    case ModelKind::TimeSvdpp:
      r.bias = h.lambda1;
      r.factor = h.lambda2;
      r.implicit = h.lambda2;
      r.time = h.lambda3;
      break;
    case ModelKind::Mfitr:
    case ModelKind::TimeMfitr:
      r.bias = h.lambda1;
      r.factor = h.lambda2;
      r.parent = h.lambda3;
      r.child = h.lambda4;
      r.time = h.lambda5;
      break;
    default:
      r.bias = r.factor = r.implicit = r.time = h.lambda;
      break;
  }
  return r;
}

FactorModel FactorModel::create(ModelKind kind, std::size_t num_users, std::size_t num_items,
                                const HyperParams& h, const TimeBinner& binner, double mu) {
  if (is_neighborhood(kind)) throw ConfigError("neighborhood models have no latent factors");
  FactorModel m;
  m.kind = kind;
  m.dim = h.dim;
  m.implicit_on = uses_implicit(kind);
  m.time_on = uses_time(kind);
  m.time_dim = m.time_on ? h.time_dim : 0;
  m.seed = h.seed;
  m.mu = mu;
  m.binner = binner;
  m.user_bias.assign(num_users, 0.0);
  m.item_bias.assign(num_items, 0.0);
  m.p = FactorMatrix(num_users, h.dim);
  m.q = FactorMatrix(num_items, h.dim);
  m.y = FactorMatrix(num_items, m.implicit_on ? h.dim : 0);
  const std::size_t bins = m.time_on ? binner.num_bins() : 0;
  m.x = FactorMatrix(num_users, m.time_dim);
  m.z = FactorMatrix(bins, m.time_dim);
  m.item_bin_bias = FactorMatrix(num_items, bins);

  std::mt19937_64 rng(h.seed);
  auto fill = [&rng](FactorMatrix& f, std::size_t width) {
    if (width == 0) return;
    const double half = 0.005 / std::sqrt(static_cast<double>(width));
    std::uniform_real_distribution<double> dist(-half, half);
    for (auto& v : f.values()) v = dist(rng);
  };
  fill(m.p, h.dim);
  fill(m.q, h.dim);
  fill(m.y, h.dim);
  fill(m.x, m.time_dim);
  fill(m.z, m.time_dim);
  return m;
}

FactorModel FactorModel::zeros_like() const {
  FactorModel g = *this;
  for (auto& b : parameter_blocks(g)) std::fill(b.values.begin(), b.values.end(), 0.0);
  g.mu = 0.0;
  return g;
}

std::vector<ParamBlock> parameter_blocks(FactorModel& m) {
  std::vector<ParamBlock> out;
  out.push_back({"user_bias", m.user_bias});
  out.push_back({"item_bias", m.item_bias});
  out.push_back({"p", m.p.values()});
  out.push_back({"q", m.q.values()});
  out.push_back({"y", m.y.values()});
  out.push_back({"x", m.x.values()});
  out.push_back({"z", m.z.values()});
  out.push_back({"item_bin_bias", m.item_bin_bias.values()});
  return out;
}

bool all_finite(const FactorModel& m) {
  auto& mm = const_cast<FactorModel&>(m);
  for (const auto& b : parameter_blocks(mm)) {
    for (double v : b.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return std::isfinite(m.mu);
}

EpochState EpochState::start(const HyperParams& h, unsigned threads) {
  EpochState st;
  st.gamma = h.gamma;
  st.seed = h.seed;
  st.threads = threads;
  return st;
}

RatedSets::RatedSets(const Dataset& data) {
  offsets_.assign(data.num_users() + 1, 0);
  for (UserId u = 0; u < data.num_users(); ++u) {
    const auto recs = data.user_records(u);
    std::vector<ItemId> items;
    items.reserve(recs.size());
    for (auto k : recs) items.push_back(data[k].item);
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    items_.insert(items_.end(), items.begin(), items.end());
    offsets_[u + 1] = items_.size();
  }
}

std::span<const ItemId> RatedSets::of(UserId u) const {
  if (std::size_t{u} + 1 >= offsets_.size()) return {};
  return std::span(items_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
}

namespace {

void check_ids(const FactorModel& m, UserId u, ItemId i) {
  if (u >= m.num_users() || i >= m.num_items()) {
    throw LookupError(fmt::format("({}, {}) outside model of {} users x {} items", u, i,
                                  m.num_users(), m.num_items()));
  }
}

void require_implicit(const FactorModel& m) {
  if (!m.implicit_on) throw ConfigError("model has no implicit factors");
}

}  // namespace

double predict_mf(const FactorModel& m, UserId u, ItemId i) {
  check_ids(m, u, i);
  const double pred = m.mu + m.item_bias[i] + m.user_bias[u];
  return pred + dot(m.q.row(i), m.p.row(u));
}

double predict_svdpp(const FactorModel& m, UserId u, ItemId i, std::span<const ItemId> rated) {
  check_ids(m, u, i);
  require_implicit(m);
  std::vector<double> s(m.dim);
  detail::implicit_sum(m, rated, s);
  double pred = m.mu + m.item_bias[i] + m.user_bias[u];
  double inter = 0.0;
  for (std::size_t k = 0; k < m.dim; ++k) inter += m.q(i, k) * (m.p(u, k) + s[k]);
  return pred + inter;
}

double predict_time(const FactorModel& m, UserId u, ItemId i, Timestamp t,
                    std::span<const ItemId> rated) {
  check_ids(m, u, i);
  if (!m.time_on) throw ConfigError("model has no time factors");
  const std::size_t bin = m.binner.bin(t);
  std::vector<double> s;
  if (m.implicit_on) {
    s.resize(m.dim);
    detail::implicit_sum(m, rated, s);
  }
  return detail::predict_point(m, {}, std::nullopt, u, i, bin, s);
}

double predict_als(const FactorModel& m, UserId u, ItemId i) {
  check_ids(m, u, i);
  return dot(m.p.row(u), m.q.row(i));
}

double loss(const FactorModel& m, const Dataset& data, const RegWeights& reg) {
  std::optional<RatedSets> rated;
  if (m.implicit_on) rated.emplace(data);
  return detail::rating_loss(m, {}, data, rated ? &*rated : nullptr, reg);
}

double loss_mf(const FactorModel& m, const Dataset& data, double lambda) {
  double total = 0.0;
  for (const auto& r : data.records()) {
    const double e = r.score - predict_mf(m, r.user, r.item);
    const double reg = m.item_bias[r.item] * m.item_bias[r.item] +
                       m.user_bias[r.user] * m.user_bias[r.user] + squared_norm(m.q.row(r.item)) +
                       squared_norm(m.p.row(r.user));
    total += e * e + lambda * reg;
  }
  return total;
}

FactorModel loss_gradient(const FactorModel& m, const Dataset& data, const RegWeights& reg) {
  FactorModel g = m.zeros_like();
  std::optional<RatedSets> rated;
  if (m.implicit_on) rated.emplace(data);
  detail::add_rating_gradient(m, {}, data, rated ? &*rated : nullptr, reg, g, {});
  return g;
}

namespace detail {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<UserId> epoch_user_order(const Dataset& train, const EpochState& st) {
  std::vector<UserId> order;
  order.reserve(train.num_users());
  for (UserId u = 0; u < train.num_users(); ++u) {
    if (!train.user_records(u).empty()) order.push_back(u);
  }
  std::mt19937_64 rng(mix_seed(st.seed, static_cast<std::uint64_t>(st.epoch)));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void rating_pass(FactorModel& m, const MutArtistRef& art, const Dataset& train,
                 const RegWeights& reg, bool implicit, const EpochState& st) {
  if (train.num_users() > m.num_users() || train.num_items() > m.num_items()) {
    throw ShapeError(fmt::format("training data ({} users x {} items) exceeds model ({} x {})",
                                 train.num_users(), train.num_items(), m.num_users(),
                                 m.num_items()));
  }
  const auto order = epoch_user_order(train, st);
  const std::size_t bin_base = m.num_items();
  LockTable locks(m.num_items() + (m.time_on ? m.binner.num_bins() : 0));
  std::optional<RatedSets> rated;
  if (implicit) rated.emplace(train);
  const double gamma = st.gamma;
  const FrozenGroups frozen = st.frozen;

  parallel_for_users(order, st.threads, locks, [&](UserId u, LockTable& lk) {
    const auto recs = train.user_records(u);
    std::vector<double> s;
    std::vector<double> qeff(m.dim);
    std::vector<double> shift;
    std::vector<std::size_t> rated_slots;
    double scale = 1.0;
    double norm = 0.0;
    if (implicit) {
      const auto items = rated->of(u);
      rated_slots.assign(items.begin(), items.end());
      s.resize(m.dim);
      {
        auto guard = lk.acquire(rated_slots);
        implicit_sum(m, items, s);
      }
      norm = 1.0 / std::sqrt(static_cast<double>(items.size()));
      shift.assign(m.dim, 0.0);
    }

    for (auto k : recs) {
      const auto& rec = train[k];
      const auto a = art.of(rec.item);
      const std::size_t bin = m.time_on ? m.binner.bin(rec.time) : 0;
      double e = 0.0;
      {
        auto guard = lk.acquire({std::size_t{rec.item}, a ? std::size_t{*a} : std::size_t{rec.item},
                                 m.time_on ? bin_base + bin : std::size_t{rec.item}});
        e = sgd_step(m, art, a, u, rec.item, bin, rec.score, s, qeff, gamma, reg, frozen);
      }
      if (implicit && !frozen.implicit) {
        // Every y_j (j in R_u) takes the same affine step
        // y_j <- (1 - gamma*reg) y_j + gamma*e*norm*qeff; keep the composed map
        // and the matching running implicit sum instead of touching each y_j.
        const double shrink = 1.0 - gamma * reg.implicit;
        scale *= shrink;
        for (std::size_t d = 0; d < m.dim; ++d) {
          shift[d] = shrink * shift[d] + gamma * e * norm * qeff[d];
          s[d] = shrink * s[d] + gamma * e * qeff[d];
        }
      }
    }

    if (implicit && !frozen.implicit) {
      auto guard = lk.acquire(rated_slots);
      for (ItemId j : rated->of(u)) {
        auto yj = m.y.row(j);
        for (std::size_t d = 0; d < m.dim; ++d) yj[d] = scale * yj[d] + shift[d];
      }
    }
  });
}

void finish_epoch(const FactorModel& m, const HyperParams& h, EpochState& st) {
  ++st.epoch;
  st.gamma *= h.decay;
  if (!all_finite(m)) throw DivergenceError(st.epoch);
}

}  // namespace detail

void sgd_epoch(FactorModel& m, const Dataset& train, const HyperParams& h, EpochState& st) {
  if (m.time_on) throw ConfigError("sgd_epoch: model is time-aware, use sgd_epoch_time");
  detail::rating_pass(m, {}, train, reg_weights(ModelKind::Sgd, h), false, st);
  detail::finish_epoch(m, h, st);
}

void sgd_epoch_svdpp(FactorModel& m, const Dataset& train, const HyperParams& h, EpochState& st) {
  require_implicit(m);
  if (m.time_on) throw ConfigError("sgd_epoch_svdpp: model is time-aware, use sgd_epoch_time");
  detail::rating_pass(m, {}, train, reg_weights(ModelKind::Svdpp, h), true, st);
  detail::finish_epoch(m, h, st);
}

void sgd_epoch_time(FactorModel& m, const Dataset& train, const HyperParams& h, EpochState& st) {
  if (!m.time_on) throw ConfigError("sgd_epoch_time: model has no time factors");
  detail::rating_pass(m, {}, train, reg_weights(ModelKind::TimeSvdpp, h), m.implicit_on, st);
  detail::finish_epoch(m, h, st);
}

// ---------------------------------------------------------------------------
// ALS

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace

void als_half_step(FactorModel& m, const Dataset& train, AlsSide side, double lambda,
                   std::span<const double> weights, unsigned threads) {
  if (m.dim == 0) throw ConfigError("ALS needs dim >= 1");
  if (lambda < 0.0) throw ConfigError("ALS lambda must be >= 0");
  if (!weights.empty() && weights.size() != train.size()) {
    throw ShapeError(fmt::format("{} observation weights for {} ratings", weights.size(),
                                 train.size()));
  }
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("observation weights must be >= 0");
  }
  const bool users = side == AlsSide::Users;
  FactorMatrix& out = users ? m.p : m.q;
  const FactorMatrix& fixed = users ? m.q : m.p;
  const std::size_t rows = out.rows();
  const std::size_t dim = m.dim;

  parallel_map_rows(rows, threads, [&](std::size_t row) {
    const auto recs = users ? train.user_records(static_cast<UserId>(row))
                            : train.item_records(static_cast<ItemId>(row));
    Mat a = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Vec b = Vec::Zero(static_cast<Eigen::Index>(dim));
    bool any = false;
    for (auto k : recs) {
      const auto& rec = train[k];
      const double w = weights.empty() ? 1.0 : weights[k];
      if (w == 0.0) continue;
      any = true;
      const auto other = fixed.row(users ? rec.item : rec.user);
      Eigen::Map<const Vec> v(other.data(), static_cast<Eigen::Index>(dim));
      a.selfadjointView<Eigen::Lower>().rankUpdate(v, w);
      b.noalias() += (w * rec.score) * v;
    }
    auto target = out.row(row);
    if (!any && lambda > 0.0) {
      std::fill(target.begin(), target.end(), 0.0);
      return;
    }
    a.diagonal().array() += lambda;
    Eigen::LLT<Mat> llt(a.selfadjointView<Eigen::Lower>());
    const double scale = std::max(1.0, a.diagonal().maxCoeff());
    const double pivot = llt.info() == Eigen::Success
                             ? llt.matrixLLT().diagonal().array().square().minCoeff()
                             : 0.0;
    if (llt.info() != Eigen::Success || pivot <= 1e-12 * scale) {
      throw SingularSystemError(fmt::format(
          "{} {}: normal equations are singular; use lambda > 0", users ? "user" : "item", row));
    }
    const Vec sol = llt.solve(b);
    std::copy(sol.data(), sol.data() + dim, target.begin());
  });
}

double als_objective(const FactorModel& m, const Dataset& train, double lambda,
                     std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t k = 0; k < train.size(); ++k) {
    const auto& r = train[k];
    const double w = weights.empty() ? 1.0 : weights[k];
    const double e = r.score - dot(m.p.row(r.user), m.q.row(r.item));
    total += w * e * e;
  }
  return total + lambda * (squared_norm(m.p.values()) + squared_norm(m.q.values()));
}

// ---------------------------------------------------------------------------
// Driver and batch prediction

FactorModel initial_model(ModelKind kind, const Dataset& train, const HyperParams& h,
                          const TrainOptions& opts) {
  const std::size_t users = std::max(opts.num_users, train.num_users());
  const std::size_t items = std::max(opts.num_items, train.num_items());
  TimeBinner binner = opts.binner ? *opts.binner
                                  : TimeBinner(train.t_min(), train.t_max(), h.num_bins);
  return FactorModel::create(kind, users, items, h, binner, train.mean_score());
}

std::vector<double> predict_all(const FactorModel& m, const Dataset& rated_by,
                                const Dataset& points) {
  std::vector<double> out;
  out.reserve(points.size());
  std::optional<RatedSets> rated;
  if (m.implicit_on) rated.emplace(rated_by);
  const bool als = is_als(m.kind);

  std::vector<double> s(m.implicit_on ? m.dim : 0);
  std::optional<UserId> cached_user;
  for (const auto& r : points.records()) {
    const bool known_u = r.user < m.num_users();
    const bool known_i = r.item < m.num_items();
    if (!known_u || !known_i) {
      double pred = m.mu;
      if (!als && known_u) pred += m.user_bias[r.user];
      if (!als && known_i) pred += m.item_bias[r.item];
      out.push_back(pred);
      continue;
    }
    if (als) {
      out.push_back(dot(m.p.row(r.user), m.q.row(r.item)));
      continue;
    }
    if (m.implicit_on && cached_user != r.user) {
      detail::implicit_sum(m, rated->of(r.user), s);
      cached_user = r.user;
    }
    const std::size_t bin = m.time_on ? m.binner.bin_clamped(r.time) : 0;
    out.push_back(detail::predict_point(m, {}, std::nullopt, r.user, r.item, bin, s));
  }
  return out;
}

namespace {

double objective_of(ModelKind kind, const FactorModel& m, const Dataset& train,
                    const HyperParams& h, std::span<const double> weights) {
  if (is_als(kind)) return als_objective(m, train, h.lambda, weights);
  return loss(m, train, reg_weights(kind, h));
}

}  // namespace

TrainResult train(ModelKind kind, const Dataset& train, const Dataset* validation,
                  const HyperParams& h, const TrainOptions& opts) {
  if (is_neighborhood(kind) || uses_taxonomy(kind)) {
    throw ConfigError(fmt::format("train(): '{}' is not a plain factor model", to_string(kind)));
  }
  h.validate();
  TrainResult result{initial_model(kind, train, h, opts), {}};
  FactorModel& m = result.model;
  EpochState st = EpochState::start(h, opts.threads);
  st.frozen = opts.frozen;
  const auto weights = kind == ModelKind::Wals ? opts.weights : std::span<const double>{};

  for (int it = 0; it < h.iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const double gamma_used = st.gamma;
    switch (kind) {
      case ModelKind::Als:
      case ModelKind::Wals:
        als_half_step(m, train, AlsSide::Items, h.lambda, weights, opts.threads);
        als_half_step(m, train, AlsSide::Users, h.lambda, weights, opts.threads);
        if (!all_finite(m)) throw DivergenceError(it + 1);
        break;
      case ModelKind::Sgd:
        sgd_epoch(m, train, h, st);
        break;
      case ModelKind::Svdpp:
        sgd_epoch_svdpp(m, train, h, st);
        break;
      default:
        sgd_epoch_time(m, train, h, st);
        break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    EpochReport row;
    row.epoch = it + 1;
    row.gamma = is_als(kind) ? 0.0 : gamma_used;
    row.seconds = std::chrono::duration<double>(t1 - t0).count();
    row.objective = objective_of(kind, m, train, h, weights);
    row.valid_rmse = std::numeric_limits<double>::quiet_NaN();
    if (validation && !validation->empty()) {
      auto pred = predict_all(m, train, *validation);
      for (auto& v : pred) v = validation->scale().clip(v);
      row.valid_rmse = rmse(pred, *validation);
    }
    result.report.push_back(row);
  }
  return result;
}

}  // namespace mcf
