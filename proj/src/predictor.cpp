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

#include "mcf/predictor.hpp"

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "mcf/mfitr.hpp"
#include "mcf/model_io.hpp"
#include "mcf/neighborhood.hpp"

namespace mcf {

namespace {

class FactorPredictor final : public TrainedModel {
 public:
  FactorPredictor(FactorModel m, Dataset rated_by, std::vector<EpochReport> report)
      : model_(std::move(m)), rated_by_(std::move(rated_by)) {
    report_ = std::move(report);
  }
  ModelKind kind() const noexcept override { return model_.kind; }
  std::vector<double> predict(const Dataset& points) const override {
    return predict_all(model_, rated_by_, points);
  }
  void save(const std::filesystem::path& path) const override { save_model(path, model_); }

 private:
  FactorModel model_;
  Dataset rated_by_;  // R_u for the implicit kinds
};

class MfitrPredictor final : public TrainedModel {
 public:
  MfitrPredictor(MfitrModel m, TaxonomyGraph g, std::vector<EpochReport> report)
      : model_(std::move(m)), graph_(std::move(g)) {
    report_ = std::move(report);
  }
  ModelKind kind() const noexcept override { return model_.base.kind; }
  std::vector<double> predict(const Dataset& points) const override {
    return predict_all_mfitr(model_, graph_, points);
  }
  void save(const std::filesystem::path& path) const override { save_model(path, model_); }

 private:
  MfitrModel model_;
  TaxonomyGraph graph_;
};

class KnnPredictor final : public TrainedModel {
 public:
  KnnPredictor(ModelKind kind, NeighborTable table, const Dataset& train, double beta)
      : kind_(kind), table_(std::move(table)), ctx_(train), beta_(beta) {}
  ModelKind kind() const noexcept override { return kind_; }
  std::vector<double> predict(const Dataset& points) const override {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& r : points.records()) {
      out.push_back(kind_ == ModelKind::TimeKnn
                        ? predict_knn_time(r.user, r.item, r.time, beta_, table_, ctx_)
                        : predict_knn(r.user, r.item, table_, ctx_));
    }
    return out;
  }
  void save(const std::filesystem::path& path) const override { write_neighbors(path, table_); }

 private:
  ModelKind kind_;
  NeighborTable table_;
  KnnContext ctx_;
  double beta_;
};

}  // namespace

ModelSpec default_spec(ModelKind kind) {
  return {std::string(to_string(kind)), kind, HyperParams::defaults_for(kind)};
}

std::unique_ptr<TrainedModel> train_model(const ModelSpec& spec, const TrainInputs& in) {
  if (!in.train) throw ConfigError("train_model: no training data");
  const Dataset& train = *in.train;
  spec.hyper.validate();
  if (is_neighborhood(spec.kind)) {
    auto table = build_neighbors(train, spec.hyper.knn_k, spec.hyper.knn_parts, in.threads);
    return std::make_unique<KnnPredictor>(spec.kind, std::move(table), train,
                                          spec.hyper.knn_beta);
  }
  TrainOptions opts;
  opts.threads = in.threads;
  opts.weights = in.weights;
  if (uses_taxonomy(spec.kind)) {
    if (!in.taxonomy) {
      throw ConfigError(fmt::format("model '{}' ({}) needs a taxonomy", spec.name,
                                    to_string(spec.kind)));
    }
    auto res = train_mfitr(spec.kind, train, in.validation, *in.taxonomy, spec.hyper, opts);
    return std::make_unique<MfitrPredictor>(std::move(res.model), *in.taxonomy,
                                            std::move(res.report));
  }
  auto res = mcf::train(spec.kind, train, in.validation, spec.hyper, opts);
  return std::make_unique<FactorPredictor>(std::move(res.model), train, std::move(res.report));
}

std::unique_ptr<TrainedModel> load_trained(ModelKind kind, const std::filesystem::path& path,
                                           const Dataset* train, const TaxonomyGraph* taxonomy,
                                           double knn_beta) {
  if (is_neighborhood(kind)) {
    if (!train) throw ConfigError("kNN prediction needs the training ratings");
    return std::make_unique<KnnPredictor>(kind, load_neighbors(path), *train, knn_beta);
  }
  MfitrModel m = load_model(path);
  if (m.base.kind != kind) {
    throw ConfigError(fmt::format("model file holds '{}', not '{}'", to_string(m.base.kind),
                                  to_string(kind)));
  }
  if (uses_taxonomy(kind)) {
    if (!taxonomy) throw ConfigError("mfitr prediction needs the taxonomy");
    return std::make_unique<MfitrPredictor>(std::move(m), *taxonomy, std::vector<EpochReport>{});
  }
  if (uses_implicit(kind) && !train) throw ConfigError("svdpp prediction needs the training ratings");
  return std::make_unique<FactorPredictor>(std::move(m.base), train ? *train : Dataset{},
                                           std::vector<EpochReport>{});
}

}  // namespace mcf
