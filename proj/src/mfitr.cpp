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

#include "mcf/mfitr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "mcf/evaluation.hpp"
#include "mcf/parallel.hpp"
#include "rating_pass.hpp"
#include "sgd_kernel.hpp"

namespace mcf {

namespace {

constexpr std::uint64_t kArtistStream = 0xa7;

detail::ArtistRef artist_view(const MfitrModel& m, const TaxonomyGraph& g) {
  return {&g, m.artist_bias, &m.artist_factor};
}

detail::MutArtistRef artist_mut(MfitrModel& m, const TaxonomyGraph& g) {
  return {&g, m.artist_bias, &m.artist_factor};
}

void check_model_covers(const MfitrModel& m, const TaxonomyGraph& g) {
  if (g.id_bound() > m.base.num_items()) {
    throw ShapeError(fmt::format("taxonomy ids reach {} but the model has {} items", g.id_bound(),
                                 m.base.num_items()));
  }
}

}  // namespace

MfitrModel MfitrModel::create(ModelKind kind, std::size_t num_users, std::size_t num_items,
                              const HyperParams& h, const TimeBinner& binner, double mu,
                              const TaxonomyGraph& g) {
  if (!uses_taxonomy(kind)) throw ConfigError("MfitrModel needs kind mfitr or time-mfitr");
  num_items = std::max(num_items, g.id_bound());
  MfitrModel m;
  m.base = FactorModel::create(kind, num_users, num_items, h, binner, mu);
  m.artist_bias.assign(num_items, 0.0);
  m.artist_factor = FactorMatrix(num_items, h.dim);
  if (h.dim > 0) {
    std::mt19937_64 rng(detail::mix_seed(h.seed, kArtistStream));
    const double half = 0.005 / std::sqrt(static_cast<double>(h.dim));
    std::uniform_real_distribution<double> dist(-half, half);
    for (ItemId a = 0; a < g.id_bound(); ++a) {
      if (!g.contains(a) || g.kind(a) != ItemKind::Artist) continue;
      for (auto& v : m.artist_factor.row(a)) v = dist(rng);
    }
  }
  return m;
}

MfitrModel MfitrModel::zeros_like() const {
  MfitrModel g;
  g.base = base.zeros_like();
  g.artist_bias.assign(artist_bias.size(), 0.0);
  g.artist_factor = FactorMatrix(artist_factor.rows(), artist_factor.cols());
  return g;
}

std::vector<ParamBlock> parameter_blocks(MfitrModel& m) {
  auto out = parameter_blocks(m.base);
  out.push_back({"artist_bias", m.artist_bias});
  out.push_back({"artist_factor", m.artist_factor.values()});
  return out;
}

bool all_finite(const MfitrModel& m) {
  if (!all_finite(m.base)) return false;
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(m.artist_bias.begin(), m.artist_bias.end(), finite) &&
         std::all_of(m.artist_factor.values().begin(), m.artist_factor.values().end(), finite);
}

double TaxonomyEdgeWeights::of(ItemId child, ItemId parent) const {
  const TaxonomyEdge key{child, parent};
  auto it = std::lower_bound(edges.begin(), edges.end(), key, [](const auto& a, const auto& b) {
    return a.child != b.child ? a.child < b.child : a.parent < b.parent;
  });
  if (it == edges.end() || !(*it == key)) return 0.0;
  return weight[static_cast<std::size_t>(it - edges.begin())];
}

TaxonomyEdgeWeights edge_weights(const TaxonomyGraph& g, const Dataset& train,
                                 const UserMeanTable& means) {
  TaxonomyEdgeWeights ew;
  ew.edges.assign(g.edges().begin(), g.edges().end());
  ew.weight.reserve(ew.edges.size());
  for (const auto& e : ew.edges) {
    ew.weight.push_back(std::max(0.0, adjusted_cosine(e.child, e.parent, train, means)));
  }
  return ew;
}

TaxonomyEdgeWeights uniform_edge_weights(const TaxonomyGraph& g, double w) {
  TaxonomyEdgeWeights ew;
  ew.edges.assign(g.edges().begin(), g.edges().end());
  ew.weight.assign(ew.edges.size(), w);
  return ew;
}

void write_edge_weights(std::ostream& out, const TaxonomyEdgeWeights& ew) {
  for (std::size_t k = 0; k < ew.edges.size(); ++k) {
    out << ew.edges[k].child << '\t' << ew.edges[k].parent << '\t' << format_real(ew.weight[k])
        << '\n';
  }
}

double predict_mfitr(const MfitrModel& m, UserId u, ItemId i, const TaxonomyGraph& g) {
  const FactorModel& b = m.base;
  const bool known_u = u < b.num_users();
  const bool known_i = i < b.num_items();
  const auto art = artist_view(m, g);
  if (!known_u || !known_i) {
    double pred = b.mu;
    if (known_u) pred += b.user_bias[u];
    if (known_i) {
      pred += b.item_bias[i];
      if (auto a = art.of(i)) pred += m.artist_bias[*a];
    }
    return pred;
  }
  if (b.time_on) throw ConfigError("time-aware model needs a timestamp");
  return detail::predict_point(b, art, art.of(i), u, i, 0, {});
}

double predict_time_mfitr(const MfitrModel& m, UserId u, ItemId i, Timestamp t,
                          const TaxonomyGraph& g) {
  const FactorModel& b = m.base;
  if (!b.time_on) throw ConfigError("model has no time factors");
  if (u >= b.num_users() || i >= b.num_items()) {
    throw LookupError(fmt::format("({}, {}) outside model of {} users x {} items", u, i,
                                  b.num_users(), b.num_items()));
  }
  const auto art = artist_view(m, g);
  return detail::predict_point(b, art, art.of(i), u, i, b.binner.bin(t), {});
}

namespace {

double graph_weight(const HyperParams& h) { return h.lambda3 + h.lambda4; }

}  // namespace

double loss_mfitr(const MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                  const TaxonomyEdgeWeights& ew, const HyperParams& h) {
  check_model_covers(m, g);
  const auto reg = reg_weights(ModelKind::TimeMfitr, h);
  double total = detail::rating_loss(m.base, artist_view(m, g), train, nullptr, reg);
  double graph = 0.0;
  for (std::size_t k = 0; k < ew.edges.size(); ++k) {
    const auto qc = m.base.q.row(ew.edges[k].child);
    const auto qp = m.base.q.row(ew.edges[k].parent);
    double dist = 0.0;
    for (std::size_t d = 0; d < qc.size(); ++d) dist += (qc[d] - qp[d]) * (qc[d] - qp[d]);
    graph += ew.weight[k] * dist;
  }
  return total + graph_weight(h) * graph;
}

MfitrModel loss_gradient_mfitr(const MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                               const TaxonomyEdgeWeights& ew, const HyperParams& h) {
  check_model_covers(m, g);
  MfitrModel grad = m.zeros_like();
  const auto reg = reg_weights(ModelKind::TimeMfitr, h);
  detail::add_rating_gradient(m.base, artist_view(m, g), train, nullptr, reg, grad.base,
                              artist_mut(grad, g));
  const double lam = graph_weight(h);
  for (std::size_t k = 0; k < ew.edges.size(); ++k) {
    const ItemId c = ew.edges[k].child;
    const ItemId p = ew.edges[k].parent;
    for (std::size_t d = 0; d < m.base.dim; ++d) {
      const double v = 2.0 * lam * ew.weight[k] * (m.base.q(c, d) - m.base.q(p, d));
      grad.base.q(c, d) += v;
      grad.base.q(p, d) -= v;
    }
  }
  return grad;
}

void graph_pass(MfitrModel& m, const TaxonomyEdgeWeights& ew, const HyperParams& h,
                const EpochState& st) {
  const double lam = graph_weight(h);
  if (ew.edges.empty()) return;
  for (const auto& e : ew.edges) {
    if (std::max(e.child, e.parent) >= m.base.num_items()) {
      throw ShapeError(fmt::format("edge ({}, {}) outside model of {} items", e.child, e.parent,
                                   m.base.num_items()));
    }
  }
  LockTable locks(m.base.num_items());
  const double gamma = st.gamma;
  parallel_map_rows(ew.edges.size(), st.threads, [&](std::size_t k) {
    const ItemId c = ew.edges[k].child;
    const ItemId p = ew.edges[k].parent;
    const double step = gamma * lam * ew.weight[k];
    auto guard = locks.acquire({std::size_t{c}, std::size_t{p}});
    auto qc = m.base.q.row(c);
    auto qp = m.base.q.row(p);
    for (std::size_t d = 0; d < qc.size(); ++d) {
      const double delta = step * (qc[d] - qp[d]);
      qc[d] -= delta;
      qp[d] += delta;
    }
  });
}

namespace {

void mfitr_epoch(MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                 const TaxonomyEdgeWeights& ew, const HyperParams& h, EpochState& st) {
  check_model_covers(m, g);
  detail::rating_pass(m.base, artist_mut(m, g), train, reg_weights(ModelKind::TimeMfitr, h), false,
                      st);
  graph_pass(m, ew, h, st);
  ++st.epoch;
  st.gamma *= h.decay;
  if (!all_finite(m)) throw DivergenceError(st.epoch);
}

}  // namespace

void sgd_epoch_mfitr(MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                     const TaxonomyEdgeWeights& ew, const HyperParams& h, EpochState& st) {
  if (m.base.time_on) throw ConfigError("sgd_epoch_mfitr: model is time-aware");
  mfitr_epoch(m, train, g, ew, h, st);
}

void sgd_epoch_time_mfitr(MfitrModel& m, const Dataset& train, const TaxonomyGraph& g,
                          const TaxonomyEdgeWeights& ew, const HyperParams& h, EpochState& st) {
  if (!m.base.time_on) throw ConfigError("sgd_epoch_time_mfitr: model has no time factors");
  mfitr_epoch(m, train, g, ew, h, st);
}

std::vector<double> predict_all_mfitr(const MfitrModel& m, const TaxonomyGraph& g,
                                      const Dataset& points) {
  const FactorModel& b = m.base;
  const auto art = artist_view(m, g);
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& r : points.records()) {
    if (r.user >= b.num_users() || r.item >= b.num_items()) {
      out.push_back(predict_mfitr(m, r.user, r.item, g));
      continue;
    }
    const std::size_t bin = b.time_on ? b.binner.bin_clamped(r.time) : 0;
    out.push_back(detail::predict_point(b, art, art.of(r.item), r.user, r.item, bin, {}));
  }
  return out;
}

MfitrModel initial_mfitr(ModelKind kind, const Dataset& train, const TaxonomyGraph& g,
                         const HyperParams& h, const TrainOptions& opts) {
  const std::size_t users = std::max(opts.num_users, train.num_users());
  const std::size_t items = std::max({opts.num_items, train.num_items(), g.id_bound()});
  TimeBinner binner = opts.binner ? *opts.binner
                                  : TimeBinner(train.t_min(), train.t_max(), h.num_bins);
  return MfitrModel::create(kind, users, items, h, binner, train.mean_score(), g);
}

MfitrTrainResult train_mfitr(ModelKind kind, const Dataset& train, const Dataset* validation,
                             const TaxonomyGraph& g, const HyperParams& h,
                             const TrainOptions& opts) {
  if (!uses_taxonomy(kind)) {
    throw ConfigError(fmt::format("train_mfitr(): '{}' is not a taxonomy model", to_string(kind)));
  }
  h.validate();
  MfitrTrainResult result{initial_mfitr(kind, train, g, h, opts), {}};
  MfitrModel& m = result.model;
  const auto ew = edge_weights(g, train, UserMeanTable(train));
  EpochState st = EpochState::start(h, opts.threads);
  st.frozen = opts.frozen;

  for (int it = 0; it < h.iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const double gamma_used = st.gamma;
    if (kind == ModelKind::TimeMfitr) {
      sgd_epoch_time_mfitr(m, train, g, ew, h, st);
    } else {
      sgd_epoch_mfitr(m, train, g, ew, h, st);
    }
    const auto t1 = std::chrono::steady_clock::now();
    EpochReport row;
    row.epoch = it + 1;
    row.gamma = gamma_used;
    row.seconds = std::chrono::duration<double>(t1 - t0).count();
    row.objective = loss_mfitr(m, train, g, ew, h);
    row.valid_rmse = std::numeric_limits<double>::quiet_NaN();
    if (validation && !validation->empty()) {
      auto pred = predict_all_mfitr(m, g, *validation);
      for (auto& v : pred) v = validation->scale().clip(v);
      row.valid_rmse = rmse(pred, *validation);
    }
    result.report.push_back(row);
  }
  return result;
}

}  // namespace mcf
