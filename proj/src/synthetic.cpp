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

#include "mcf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "text_util.hpp"

namespace mcf {

void SynthConfig::validate() const {
  if (users == 0) throw ConfigError("synthetic config: users must be >= 1");
  if (artists == 0) throw ConfigError("synthetic config: artists must be >= 1");
  if (ratings_per_user == 0) throw ConfigError("synthetic config: ratings_per_user must be >= 1");
  if (ratings_per_user > num_items()) {
    throw ConfigError(fmt::format("synthetic config: {} ratings per user but only {} items",
                                  ratings_per_user, num_items()));
  }
  for (double f : {split_train, split_valid, split_test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("synthetic config: split fractions must lie in [0, 1]");
  }
  if (std::abs(split_train + split_valid + split_test - 1.0) > 1e-9) {
    throw ConfigError(fmt::format("synthetic config: split fractions sum to {}, not 1",
                                  split_train + split_valid + split_test));
  }
  if (!(noise >= 0.0)) throw ConfigError("synthetic config: noise must be >= 0");
  if (days < 1) throw ConfigError("synthetic config: days must be >= 1");
  if (sessions == 0) throw ConfigError("synthetic config: sessions must be >= 1");
}

namespace {

bool parse_flag(std::string_view v, std::string_view key, std::size_t line) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ParseError(fmt::format("invalid boolean '{}' for {}", v, key), line);
}

}  // namespace

SynthConfig parse_synth_config(std::istream& in) {
  SynthConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno);
    const auto key = detail::trim(view.substr(0, eq));
    const auto val = detail::trim(view.substr(eq + 1));
    auto size = [&] { return detail::parse_number<std::size_t>(val, key, lineno); };
    auto real = [&] { return detail::parse_number<double>(val, key, lineno); };
    if (key == "users") c.users = size();
    else if (key == "artists") c.artists = size();
    else if (key == "albums_per_artist") c.albums_per_artist = size();
    else if (key == "tracks_per_album") c.tracks_per_album = size();
    else if (key == "ratings_per_user") c.ratings_per_user = size();
    else if (key == "dim") c.dim = size();
    else if (key == "noise") c.noise = real();
    else if (key == "drift") c.drift = parse_flag(val, key, lineno);
    else if (key == "coherent_taxonomy") c.coherent_taxonomy = parse_flag(val, key, lineno);
    else if (key == "split_train") c.split_train = real();
    else if (key == "split_valid") c.split_valid = real();
    else if (key == "split_test") c.split_test = real();
    else if (key == "seed") c.seed = detail::parse_number<std::uint64_t>(val, key, lineno);
    else if (key == "days") c.days = detail::parse_number<std::int64_t>(val, key, lineno);
    else if (key == "sessions") c.sessions = size();
    else if (key == "favorite_artists") c.favorite_artists = size();
    else throw ConfigError(fmt::format("line {}: unknown synthetic config key '{}'", lineno, key));
  }
  return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  return parse_synth_config(in);
}

void write_synth_config(std::ostream& out, const SynthConfig& c) {
  out << "users=" << c.users << '\n'
      << "artists=" << c.artists << '\n'
      << "albums_per_artist=" << c.albums_per_artist << '\n'
      << "tracks_per_album=" << c.tracks_per_album << '\n'
      << "ratings_per_user=" << c.ratings_per_user << '\n'
      << "dim=" << c.dim << '\n'
      << "noise=" << format_real(c.noise) << '\n'
      << "drift=" << (c.drift ? "true" : "false") << '\n'
      << "coherent_taxonomy=" << (c.coherent_taxonomy ? "true" : "false") << '\n'
      << "split_train=" << format_real(c.split_train) << '\n'
      << "split_valid=" << format_real(c.split_valid) << '\n'
      << "split_test=" << format_real(c.split_test) << '\n'
      << "seed=" << c.seed << '\n'
      << "days=" << c.days << '\n'
      << "sessions=" << c.sessions << '\n'
      << "favorite_artists=" << c.favorite_artists << '\n';
}

namespace {

// Scales of the planted model on the 0-100 score range.
constexpr double kMu = 55.0;
constexpr double kUserBias = 8.0;
constexpr double kItemBias = 6.0;
constexpr double kArtistBias = 8.0;
constexpr double kInteraction = 10.0;  // std of (q_i + q_a) . p_u
constexpr double kChildSpread = 0.35;  // child's offset from parent, relative
constexpr double kUserDrift = 4.0;
constexpr double kItemDrift = 3.0;
constexpr std::size_t kDriftDim = 2;
constexpr std::size_t kDriftBins = 30;

}  // namespace

SyntheticData generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gauss = [&](double sd) { return sd * normal(rng); };

  const std::size_t block = cfg.items_per_artist();
  const std::size_t items = cfg.num_items();
  const std::size_t users = cfg.users;
  const std::size_t dim = cfg.dim;

  // Catalog: artist a owns ids [a * block, (a + 1) * block) laid out as
  // artist, album, its tracks, album, its tracks, ...
  std::vector<TaxonomyEntry> entries;
  std::vector<ItemId> artist_of(items);
  std::vector<ItemId> parent_of(items);  // album for tracks, artist for albums, self for artists
  entries.reserve(items);
  for (std::size_t a = 0; a < cfg.artists; ++a) {
    const auto artist = static_cast<ItemId>(a * block);
    entries.push_back({ItemKind::Artist, artist, std::nullopt, std::nullopt, {}});
    artist_of[artist] = parent_of[artist] = artist;
    ItemId id = artist + 1;
    for (std::size_t b = 0; b < cfg.albums_per_artist; ++b) {
      const ItemId album = id++;
      entries.push_back({ItemKind::Album, album, std::nullopt, artist, {}});
      artist_of[album] = artist;
      parent_of[album] = artist;
      for (std::size_t t = 0; t < cfg.tracks_per_album; ++t) {
        const ItemId track = id++;
        entries.push_back({ItemKind::Track, track, album, artist, {}});
        artist_of[track] = artist;
        parent_of[track] = album;
      }
    }
  }

  PlantedModel pm;
  pm.mu = kMu;
  pm.binner = TimeBinner(0, cfg.days - 1, kDriftBins);
  const double spread = dim ? kInteraction / std::sqrt(2.0 * static_cast<double>(dim)) : 0.0;

  pm.user_bias.resize(users);
  for (auto& v : pm.user_bias) v = gauss(kUserBias);
  pm.item_bias.resize(items);
  for (auto& v : pm.item_bias) v = gauss(kItemBias);
  pm.artist_bias.assign(items, 0.0);
  pm.p = FactorMatrix(users, dim);
  for (auto& v : pm.p.values()) v = gauss(1.0);
  pm.q = FactorMatrix(items, dim);
  pm.q_artist = FactorMatrix(items, dim);
  // Ids ascend parent-before-child, so a child's parent row is already drawn.
  for (ItemId i = 0; i < items; ++i) {
    const bool root = parent_of[i] == i;
    if (root) {
      pm.artist_bias[i] = gauss(kArtistBias);
      for (auto& v : pm.q_artist.row(i)) v = gauss(spread);
    }
    for (std::size_t d = 0; d < dim; ++d) {
      if (cfg.coherent_taxonomy && !root) {
        pm.q(i, d) = pm.q(parent_of[i], d) + gauss(kChildSpread * spread);
      } else {
        pm.q(i, d) = gauss(spread);
      }
    }
  }
  pm.x = FactorMatrix(users, kDriftDim);
  pm.z = FactorMatrix(kDriftBins, kDriftDim);
  pm.item_bin_bias = FactorMatrix(items, kDriftBins);
  if (cfg.drift) {
    for (auto& v : pm.x.values()) v = gauss(kUserDrift);
    for (auto& v : pm.z.values()) v = gauss(1.0);
    for (auto& v : pm.item_bin_bias.values()) v = gauss(kItemDrift);
  }

  // Ratings: each user draws from the catalogs of a few favorite artists, on
  // a few session days.
  const std::size_t favorites =
      std::min(cfg.artists, std::max(cfg.favorite_artists, (cfg.ratings_per_user + block - 1) / block));
  std::vector<std::size_t> artist_ids(cfg.artists);
  std::vector<ItemId> pool;
  std::vector<Timestamp> session_days(cfg.sessions);
  std::uniform_int_distribution<Timestamp> day_dist(0, cfg.days - 1);
  std::uniform_int_distribution<std::size_t> session_dist(0, cfg.sessions - 1);
  std::vector<RatingRecord> all;
  all.reserve(users * cfg.ratings_per_user);

  for (std::size_t u = 0; u < users; ++u) {
    std::iota(artist_ids.begin(), artist_ids.end(), std::size_t{0});
    for (std::size_t k = 0; k < favorites; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, cfg.artists - 1);
      std::swap(artist_ids[k], artist_ids[pick(rng)]);
    }
    pool.clear();
    for (std::size_t k = 0; k < favorites; ++k) {
      const auto first = static_cast<ItemId>(artist_ids[k] * block);
      for (std::size_t j = 0; j < block; ++j) pool.push_back(first + static_cast<ItemId>(j));
    }
    for (auto& day : session_days) day = day_dist(rng);

    for (std::size_t k = 0; k < cfg.ratings_per_user; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
      const ItemId i = pool[k];
      const ItemId a = artist_of[i];
      const Timestamp t = session_days[session_dist(rng)];
      const std::size_t bin = pm.binner.bin(t);
      double r = pm.mu + pm.user_bias[u] + pm.item_bias[i] + pm.artist_bias[a];
      for (std::size_t d = 0; d < dim; ++d) r += (pm.q(i, d) + pm.q_artist(a, d)) * pm.p(u, d);
      r += dot(pm.x.row(u), pm.z.row(bin)) + pm.item_bin_bias(i, bin);
      r += gauss(cfg.noise);
      r = std::clamp(std::round(r), 0.0, 100.0);
      all.push_back({static_cast<UserId>(u), i, r, t});
    }
  }

  // Split by a seeded shuffle; each split keeps generation order.
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(all.size());
  const auto n_train = static_cast<std::size_t>(std::llround(n * cfg.split_train));
  const auto n_valid =
      std::min(all.size() - n_train, static_cast<std::size_t>(std::llround(n * cfg.split_valid)));
  auto take = [&](std::size_t from, std::size_t to, Split split) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(from),
                                 order.begin() + static_cast<std::ptrdiff_t>(to));
    std::sort(idx.begin(), idx.end());
    std::vector<RatingRecord> recs;
    recs.reserve(idx.size());
    for (auto k : idx) recs.push_back(all[k]);
    return Dataset(std::move(recs), split, ScoreScale{},
                   DatasetShape{users, items, 0, cfg.days - 1});
  };

  SyntheticData out;
  out.train = take(0, n_train, Split::Train);
  out.validation = take(n_train, n_train + n_valid, Split::Validation);
  out.test = take(n_train + n_valid, all.size(), Split::Test);
  out.taxonomy = TaxonomyGraph::build(std::move(entries));
  out.planted = std::move(pm);
  return out;
}

}  // namespace mcf
