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

#ifndef MCF_BENCH_HPP
#define MCF_BENCH_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcf/factor_model.hpp"
#include "mcf/taxonomy.hpp"

namespace mcf {

struct BenchConfig {
  std::vector<ModelKind> algos{ModelKind::Als, ModelKind::Sgd};
  std::vector<unsigned> threads{1};
  std::vector<std::size_t> dims{20};
  std::size_t repeats = 3;  ///< timed iterations after one warm-up
  /// Per-kind hyperparameters; dim is overridden by `dims`.
  HyperParams (*hyper_for)(ModelKind) = &HyperParams::defaults_for;
};

struct BenchRow {
  std::string algo;
  unsigned threads = 1;
  std::size_t dim = 0;
  double iter_ms = 0.0;  ///< median of the timed iterations
  double speedup = 1.0;  ///< iter_ms at one thread / iter_ms
  double rmse = 0.0;     ///< validation RMSE after the timed iterations; NaN without one
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

/// Times one training iteration per (algo, dim, threads). For kNN kinds an
/// iteration is one neighbor-table build; mfitr kinds need `taxonomy`.
BenchReport bench(const BenchConfig& cfg, const Dataset& train, const Dataset* validation,
                  const TaxonomyGraph* taxonomy = nullptr);

/// `algo threads D iter_ms speedup rmse`, tab separated, with a header.
void write_bench(std::ostream& out, const BenchReport& report);

}  // namespace mcf

#endif  // MCF_BENCH_HPP
