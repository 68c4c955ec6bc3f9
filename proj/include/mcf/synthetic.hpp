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

#ifndef MCF_SYNTHETIC_HPP
#define MCF_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "mcf/dataset.hpp"
#include "mcf/factor_matrix.hpp"
#include "mcf/taxonomy.hpp"

namespace mcf {

/// Generator knobs. The key=value file uses the member names.
struct SynthConfig {
  std::size_t users = 1000;
  std::size_t artists = 50;
  std::size_t albums_per_artist = 3;
  std::size_t tracks_per_album = 5;
  std::size_t ratings_per_user = 20;
  std::size_t dim = 8;            ///< planted D*
  double noise = 15.0;            ///< sigma of the Gaussian rating noise
  bool drift = true;              ///< time-varying user and item offsets
  bool coherent_taxonomy = true;  ///< children's factors drawn near their parent's
  double split_train = 0.8;
  double split_valid = 0.1;
  double split_test = 0.1;
  std::uint64_t seed = 1;

  // Not part of the documented key set; defaults suit the experiments.
  std::int64_t days = 6649;           ///< timestamps fall in [0, days - 1]
  std::size_t sessions = 4;           ///< rating days per user
  std::size_t favorite_artists = 3;   ///< artists a user draws ratings from

  /// Throws ConfigError on empty catalogs, bad fractions, or impossible
  /// ratings_per_user.
  void validate() const;
  std::size_t items_per_artist() const noexcept {
    return 1 + albums_per_artist * (1 + tracks_per_album);
  }
  std::size_t num_items() const noexcept { return artists * items_per_artist(); }
};

SynthConfig parse_synth_config(std::istream& in);
SynthConfig load_synth_config(const std::filesystem::path& path);
void write_synth_config(std::ostream& out, const SynthConfig& c);

/// The generating parameters. Artist-level rows are stored by item id.
struct PlantedModel {
  double mu = 0.0;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> artist_bias;  ///< nonzero on artist ids only
  FactorMatrix p;                   ///< users x dim
  FactorMatrix q;                   ///< items x dim
  FactorMatrix q_artist;            ///< items x dim, nonzero on artist ids only
  FactorMatrix x;                   ///< users x 2 (zero without drift)
  FactorMatrix z;                   ///< bins x 2
  FactorMatrix item_bin_bias;       ///< items x bins
  TimeBinner binner;
};

struct SyntheticData {
  Dataset train;
  Dataset validation;
  Dataset test;
  TaxonomyGraph taxonomy;
  PlantedModel planted;
};

/// Pure function of (config, seed): ratings from the planted model, rounded
/// to integers and clipped to [0, 100], then split by a seeded shuffle. All
/// three splits share the catalog shape and time range.
SyntheticData generate_synthetic(const SynthConfig& config, std::uint64_t seed);
inline SyntheticData generate_synthetic(const SynthConfig& config) {
  return generate_synthetic(config, config.seed);
}

}  // namespace mcf

#endif  // MCF_SYNTHETIC_HPP
