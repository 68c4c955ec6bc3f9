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

#ifndef MCF_MODEL_IO_HPP
#define MCF_MODEL_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "mcf/factor_model.hpp"
#include "mcf/mfitr.hpp"

namespace mcf {

// Text dump, stable across versions:
//
//   mcf-model 1
//   kind <name>
//   dim <D>  time_dim <Dt>  users <U>  items <I>  bins <N>     (one per line)
//   t_min <t>  t_max <t>  implicit <0|1>  time <0|1>  seed <s>
//   mu <hexfloat>
//   block <name> <rows> <cols>
//   <rows lines of cols hexfloats>
//   ...
//   end
//
// Blocks appear in the order user_bias, item_bias, p, q, y, x, z,
// item_bin_bias, then artist_bias and artist_factor for taxonomy kinds.
// Values are C99 hexfloats so a reload is bit-exact.

void write_model(std::ostream& out, const FactorModel& m);
void write_model(std::ostream& out, const MfitrModel& m);
void save_model(const std::filesystem::path& path, const FactorModel& m);
void save_model(const std::filesystem::path& path, const MfitrModel& m);

/// Reads either layout. For kinds without a taxonomy the artist blocks come
/// back empty.
MfitrModel read_model(std::istream& in);
MfitrModel load_model(const std::filesystem::path& path);

}  // namespace mcf

#endif  // MCF_MODEL_IO_HPP
