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

#include "mcf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "mcf/evaluation.hpp"
#include "mcf/mfitr.hpp"
#include "mcf/neighborhood.hpp"

namespace mcf {

namespace {

struct Timing {
  double iter_ms = 0.0;
  double rmse = std::numeric_limits<double>::quiet_NaN();
};

double score(std::vector<double> pred, const Dataset* validation) {
  if (!validation || validation->empty()) return std::numeric_limits<double>::quiet_NaN();
  for (auto& v : pred) v = validation->scale().clip(v);
  return rmse(pred, *validation);
}

Timing time_iterations(std::size_t repeats, const std::function<void()>& step,
                       const std::function<double()>& evaluate) {
  step();  // warm-up, discarded
  std::vector<double> ms;
  for (std::size_t k = 0; k < repeats; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    step();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  Timing t;
  t.iter_ms = ms[ms.size() / 2];
  t.rmse = evaluate();
  return t;
}

Timing run_one(ModelKind kind, HyperParams h, unsigned threads, std::size_t repeats,
               const Dataset& train, const Dataset* validation, const TaxonomyGraph* taxonomy) {
  TrainOptions opts;
  opts.threads = threads;

  if (is_neighborhood(kind)) {
    NeighborTable table;
    return time_iterations(
        repeats, [&] { table = build_neighbors(train, h.knn_k, h.knn_parts, threads); },
        [&] {
          if (!validation) return std::numeric_limits<double>::quiet_NaN();
          KnnContext ctx(train);
          std::vector<double> pred;
          for (const auto& r : validation->records()) {
            pred.push_back(kind == ModelKind::TimeKnn
                               ? predict_knn_time(r.user, r.item, r.time, h.knn_beta, table, ctx)
                               : predict_knn(r.user, r.item, table, ctx));
          }
          return score(std::move(pred), validation);
        });
  }

  if (uses_taxonomy(kind)) {
    if (!taxonomy) throw ConfigError("bench: mfitr kinds need a taxonomy");
    MfitrModel m = initial_mfitr(kind, train, *taxonomy, h, opts);
    const auto ew = edge_weights(*taxonomy, train, UserMeanTable(train));
    EpochState st = EpochState::start(h, threads);
    return time_iterations(
        repeats,
        [&] {
          if (kind == ModelKind::TimeMfitr) sgd_epoch_time_mfitr(m, train, *taxonomy, ew, h, st);
          else sgd_epoch_mfitr(m, train, *taxonomy, ew, h, st);
        },
        [&] { return score(predict_all_mfitr(m, *taxonomy, validation ? *validation : train), validation); });
  }

  FactorModel m = initial_model(kind, train, h, opts);
  EpochState st = EpochState::start(h, threads);
  auto step = [&] {
    switch (kind) {
      case ModelKind::Als:
      case ModelKind::Wals:
        als_half_step(m, train, AlsSide::Items, h.lambda, {}, threads);
        als_half_step(m, train, AlsSide::Users, h.lambda, {}, threads);
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
  };
  return time_iterations(repeats, step, [&] {
    return score(predict_all(m, train, validation ? *validation : train), validation);
  });
}

}  // namespace

BenchReport bench(const BenchConfig& cfg, const Dataset& train, const Dataset* validation,
                  const TaxonomyGraph* taxonomy) {
  if (cfg.repeats == 0) throw ConfigError("bench: repeats must be >= 1");
  BenchReport report;
  for (ModelKind kind : cfg.algos) {
    for (std::size_t dim : cfg.dims) {
      HyperParams h = cfg.hyper_for(kind);
      h.dim = dim;
      std::map<unsigned, Timing> timings;
      for (unsigned t : cfg.threads) {
        if (t == 0) throw ConfigError("bench: thread counts must be >= 1");
        timings[t] = run_one(kind, h, t, cfg.repeats, train, validation, taxonomy);
      }
      if (!timings.count(1)) timings[1] = run_one(kind, h, 1, cfg.repeats, train, validation, taxonomy);
      const double base = timings[1].iter_ms;
      for (unsigned t : cfg.threads) {
        BenchRow row;
        row.algo = std::string(to_string(kind));
        row.threads = t;
        row.dim = dim;
        row.iter_ms = timings[t].iter_ms;
        row.speedup = t == 1 ? 1.0 : base / row.iter_ms;
        row.rmse = timings[t].rmse;
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

void write_bench(std::ostream& out, const BenchReport& report) {
  out << "algo\tthreads\tD\titer_ms\tspeedup\trmse\n";
  for (const auto& r : report.rows) {
    out << r.algo << '\t' << r.threads << '\t' << r.dim << '\t' << fmt::format("{:.3f}", r.iter_ms)
        << '\t' << fmt::format("{:.3f}", r.speedup) << '\t'
        << (std::isnan(r.rmse) ? std::string("NA") : fmt::format("{:.4f}", r.rmse)) << '\n';
  }
}

}  // namespace mcf
