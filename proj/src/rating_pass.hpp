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

// Epoch plumbing shared by the factor-model and MFITR trainers.

#ifndef MCF_SRC_RATING_PASS_HPP
#define MCF_SRC_RATING_PASS_HPP

#include <cstdint>
#include <vector>

#include "mcf/factor_model.hpp"
#include "sgd_kernel.hpp"

namespace mcf::detail {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// Users with at least one rating, shuffled by (seed, epoch).
std::vector<UserId> epoch_user_order(const Dataset& train, const EpochState& st);

/// One rating-driven SGD pass, parallel over users. Each rating locks its
/// item, its artist and its time bin; the implicit factors of R_u are locked
/// as one set when the user's task starts and again when it ends.
void rating_pass(FactorModel& m, const MutArtistRef& art, const Dataset& train,
                 const RegWeights& reg, bool implicit, const EpochState& st);

/// Advances the epoch counter and learning rate; throws DivergenceError on
/// any non-finite parameter.
void finish_epoch(const FactorModel& m, const HyperParams& h, EpochState& st);

}  // namespace mcf::detail

#endif  // MCF_SRC_RATING_PASS_HPP
