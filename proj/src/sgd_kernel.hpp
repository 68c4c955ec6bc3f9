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

// Per-rating prediction, objective, gradient and SGD step shared by every
// biased factor model (bias-MF, SVD++, time-SVD(++), MFITR, time-MFITR).
//
// One observation (u, i, t, r) with artist a = artist(i) and bin b = Bin(t):
//
//   r^ = mu + b_i + b_u [+ b_a] [+ x_u.z_b + b_{i,b}]
//        + (q_i [+ q_a]) . (p_u [+ |R_u|^-1/2 sum_{j in R_u} y_j])
//
//   loss = (r - r^)^2 + reg.bias   (b_i^2 + b_u^2 [+ b_a^2] [+ b_{i,b}^2])
//                     + reg.factor (|q_i|^2 + |p_u|^2 [+ |q_a|^2])
//                     + reg.implicit sum_{j in R_u} |y_j|^2
//                     + reg.time   (|x_u|^2 + |z_b|^2)
//
// The SGD step moves every parameter by gamma times its "direction", which
// is minus one half of the per-observation gradient, e.g.
// b_u += gamma * (e - reg.bias * b_u) with e = r - r^.
// Bracketed groups drop out when disabled; zero-valued groups add exact
// zeros, so reduced models reproduce the base model bit for bit.

#ifndef MCF_SRC_SGD_KERNEL_HPP
#define MCF_SRC_SGD_KERNEL_HPP

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "mcf/factor_model.hpp"
#include "mcf/taxonomy.hpp"

namespace mcf::detail {

/// Artist parameters indexed by item id; only artist rows are used.
struct ArtistRef {
  const TaxonomyGraph* graph = nullptr;
  std::span<const double> bias;
  const FactorMatrix* factor = nullptr;

  std::optional<ItemId> of(ItemId i) const noexcept {
    if (!graph) return std::nullopt;
    auto a = graph->artist_or_none(i);
    if (a && *a < bias.size()) return a;
    return std::nullopt;
  }
};

struct MutArtistRef {
  const TaxonomyGraph* graph = nullptr;
  std::span<double> bias;
  FactorMatrix* factor = nullptr;

  std::optional<ItemId> of(ItemId i) const noexcept { return view().of(i); }
  ArtistRef view() const noexcept { return {graph, bias, factor}; }
};

/// s_u = |R_u|^-1/2 sum_{j in R_u} y_j into `out`.
inline void implicit_sum(const FactorModel& m, std::span<const ItemId> rated,
                         std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (rated.empty()) return;
  for (ItemId j : rated) {
    const auto yj = m.y.row(j);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += yj[k];
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(rated.size()));
  for (auto& v : out) v *= norm;
}

/// Prediction for one point. `s` is the implicit sum (empty: no implicit
/// term); `bin` is ignored unless the model is time-aware.
inline double predict_point(const FactorModel& m, const ArtistRef& art, std::optional<ItemId> a,
                            UserId u, ItemId i, std::size_t bin, std::span<const double> s) {
  double pred = m.mu + m.item_bias[i] + m.user_bias[u];
  if (a) pred += art.bias[*a];
  if (m.time_on) {
    pred += dot(m.x.row(u), m.z.row(bin));
    pred += m.item_bin_bias(i, bin);
  }
  const auto q = m.q.row(i);
  const auto p = m.p.row(u);
  double inter = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    double qk = q[k];
    if (a) qk += (*art.factor)(*a, k);
    double pk = p[k];
    if (!s.empty()) pk += s[k];
    inter += qk * pk;
  }
  return pred + inter;
}

/// Regularization of one observation, excluding the implicit group (which
/// depends on R_u and is added by the caller).
inline double point_regularizer(const FactorModel& m, const ArtistRef& art,
                                std::optional<ItemId> a, UserId u, ItemId i, std::size_t bin,
                                const RegWeights& reg) {
  double bias = m.item_bias[i] * m.item_bias[i] + m.user_bias[u] * m.user_bias[u];
  double factor = squared_norm(m.q.row(i)) + squared_norm(m.p.row(u));
  if (a) {
    bias += art.bias[*a] * art.bias[*a];
    factor += squared_norm(art.factor->row(*a));
  }
  double total = reg.bias * bias + reg.factor * factor;
  if (m.time_on) {
    const double bib = m.item_bin_bias(i, bin);
    total += reg.bias * bib * bib;
    total += reg.time * (squared_norm(m.x.row(u)) + squared_norm(m.z.row(bin)));
  }
  return total;
}

/// One SGD step on observation (u, i, bin, r). Every direction is formed from
/// pre-update values. Writes the effective item vector (q_i [+ q_a]) used by
/// the step into `qeff` and returns the residual e.
inline double sgd_step(FactorModel& m, const MutArtistRef& art, std::optional<ItemId> a,
                       UserId u, ItemId i, std::size_t bin, double r, std::span<const double> s,
                       std::span<double> qeff, double gamma, const RegWeights& reg,
                       const FrozenGroups& frozen) {
  const double e = r - predict_point(m, art.view(), a, u, i, bin, s);

  auto q = m.q.row(i);
  auto p = m.p.row(u);
  const bool move_artist = a && !frozen.artist;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double qk = q[k];
    const double pk = p[k];
    const double qak = a ? (*art.factor)(*a, k) : 0.0;
    const double qe = a ? qk + qak : qk;
    const double pe = s.empty() ? pk : pk + s[k];
    q[k] += gamma * (e * pe - reg.factor * qk);
    p[k] += gamma * (e * qe - reg.factor * pk);
    if (move_artist) (*art.factor)(*a, k) += gamma * (e * pe - reg.factor * qak);
    qeff[k] = qe;
  }

  double& bu = m.user_bias[u];
  double& bi = m.item_bias[i];
  bu += gamma * (e - reg.bias * bu);
  bi += gamma * (e - reg.bias * bi);
  if (move_artist) {
    double& ba = art.bias[*a];
    ba += gamma * (e - reg.bias * ba);
  }

  if (m.time_on && !frozen.time) {
    auto x = m.x.row(u);
    auto z = m.z.row(bin);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double xk = x[k];
      const double zk = z[k];
      x[k] += gamma * (e * zk - reg.time * xk);
      z[k] += gamma * (e * xk - reg.time * zk);
    }
    double& bib = m.item_bin_bias(i, bin);
    bib += gamma * (e - reg.bias * bib);
  }
  return e;
}

/// Objective over `data` (no graph terms).
inline double rating_loss(const FactorModel& m, const ArtistRef& art, const Dataset& data,
                          const RatedSets* rated, const RegWeights& reg) {
  double total = 0.0;
  std::vector<double> s(m.implicit_on ? m.dim : 0);
  for (UserId u = 0; u < data.num_users(); ++u) {
    const auto recs = data.user_records(u);
    if (recs.empty()) continue;
    double implicit_reg = 0.0;
    if (m.implicit_on) {
      const auto items = rated->of(u);
      implicit_sum(m, items, s);
      for (ItemId j : items) implicit_reg += squared_norm(m.y.row(j));
    }
    for (auto k : recs) {
      const auto& rec = data[k];
      const auto a = art.of(rec.item);
      const std::size_t bin = m.time_on ? m.binner.bin(rec.time) : 0;
      const double e = rec.score - predict_point(m, art, a, u, rec.item, bin, s);
      total += e * e + point_regularizer(m, art, a, u, rec.item, bin, reg) +
               reg.implicit * implicit_reg;
    }
  }
  return total;
}

/// Adds the gradient of `rating_loss` into `g` (and `gart` for artist rows).
inline void add_rating_gradient(const FactorModel& m, const ArtistRef& art, const Dataset& data,
                                const RatedSets* rated, const RegWeights& reg, FactorModel& g,
                                const MutArtistRef& gart) {
  std::vector<double> s(m.implicit_on ? m.dim : 0);
  std::vector<double> ysum(m.implicit_on ? m.dim : 0);
  for (UserId u = 0; u < data.num_users(); ++u) {
    const auto recs = data.user_records(u);
    if (recs.empty()) continue;
    std::span<const ItemId> items;
    double norm = 0.0;
    if (m.implicit_on) {
      items = rated->of(u);
      implicit_sum(m, items, s);
      norm = items.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(items.size()));
      std::fill(ysum.begin(), ysum.end(), 0.0);
    }
    for (auto k : recs) {
      const auto& rec = data[k];
      const ItemId i = rec.item;
      const auto a = art.of(i);
      const std::size_t bin = m.time_on ? m.binner.bin(rec.time) : 0;
      const double e = rec.score - predict_point(m, art, a, u, i, bin, s);

      g.user_bias[u] += -2.0 * (e - reg.bias * m.user_bias[u]);
      g.item_bias[i] += -2.0 * (e - reg.bias * m.item_bias[i]);
      if (a) gart.bias[*a] += -2.0 * (e - reg.bias * art.bias[*a]);
      for (std::size_t d = 0; d < m.dim; ++d) {
        const double qk = m.q(i, d);
        const double pk = m.p(u, d);
        const double qak = a ? (*art.factor)(*a, d) : 0.0;
        const double qe = qk + qak;
        const double pe = s.empty() ? pk : pk + s[d];
        g.q(i, d) += -2.0 * (e * pe - reg.factor * qk);
        g.p(u, d) += -2.0 * (e * qe - reg.factor * pk);
        if (a) (*gart.factor)(*a, d) += -2.0 * (e * pe - reg.factor * qak);
        if (m.implicit_on) ysum[d] += e * norm * qe;
      }
      if (m.time_on) {
        for (std::size_t d = 0; d < m.time_dim; ++d) {
          g.x(u, d) += -2.0 * (e * m.z(bin, d) - reg.time * m.x(u, d));
          g.z(bin, d) += -2.0 * (e * m.x(u, d) - reg.time * m.z(bin, d));
        }
        g.item_bin_bias(i, bin) += -2.0 * (e - reg.bias * m.item_bin_bias(i, bin));
      }
    }
    if (m.implicit_on) {
      const double count = static_cast<double>(recs.size());
      for (ItemId j : items) {
        for (std::size_t d = 0; d < m.dim; ++d) {
          g.y(j, d) += -2.0 * (ysum[d] - count * reg.implicit * m.y(j, d));
        }
      }
    }
  }
}

}  // namespace mcf::detail

#endif  // MCF_SRC_SGD_KERNEL_HPP
