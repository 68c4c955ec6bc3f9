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

// Every command reads its parameters from three layers: built-in defaults,
// an optional key=value file (--config), and explicit flags, later layers
// winning. The resolved set is written back as <outdir>/resolved.cfg, which
// can be passed to --config to repeat the run.

#include "mcf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mcf/bench.hpp"
#include "mcf/blending.hpp"
#include "mcf/errors.hpp"
#include "mcf/evaluation.hpp"
#include "mcf/predictor.hpp"
#include "mcf/synthetic.hpp"
#include "text_util.hpp"

namespace mcf {

namespace {

namespace fs = std::filesystem;

struct Param {
  std::string key;
  std::string help;
  bool list = false;  // repeatable; each occurrence adds one entry
};

const std::vector<Param> kGlobal = {
    {"threads", "worker threads (0: all cores)"},
    {"seed", "random seed"},
    {"outdir", "directory for every output file"},
};

const std::vector<Param> kSynth = {
    {"users", "number of users"},
    {"artists", "number of artists"},
    {"albums_per_artist", "albums per artist"},
    {"tracks_per_album", "tracks per album"},
    {"ratings_per_user", "ratings per user"},
    {"dim", "planted factor dimension"},
    {"noise", "rating noise sigma"},
    {"drift", "time drift on/off"},
    {"coherent_taxonomy", "children's factors near their parent's"},
    {"split_train", "training fraction"},
    {"split_valid", "validation fraction"},
    {"split_test", "test fraction"},
    {"days", "timestamps span [0, days - 1]"},
    {"sessions", "rating days per user"},
    {"favorite_artists", "artists each user draws from"},
};

const std::vector<Param> kHyper = {
    {"gamma", "learning rate"},
    {"decay", "learning-rate decay per epoch"},
    {"lambda", "regularization (sgd, svdpp, als, wals)"},
    {"lambda1", "bias regularization (time and taxonomy models)"},
    {"lambda2", "factor regularization (time and taxonomy models)"},
    {"lambda3", "time factors (time-svd*) or parent similarity (mfitr)"},
    {"lambda4", "child similarity (mfitr)"},
    {"lambda5", "time factors (time-mfitr)"},
    {"iters", "epochs / ALS iterations"},
    {"dim", "latent dimension"},
    {"time_dim", "dimension of the user drift factors"},
    {"bins", "number of time bins"},
    {"knn_k", "neighbors kept per item"},
    {"knn_parts", "item blocks for the similarity build"},
    {"knn_beta", "time-decay rate of time-knn"},
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Param> params;
  std::vector<std::string> flag_only;  // boolean flags, stored as "true"
};

std::vector<Param> concat(std::vector<Param> a, const std::vector<Param>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<Command> commands() {
  return {
      {"gen", "generate a synthetic dataset", kSynth, {}},
      {"train", "train one model",
       concat({{"kind", "model kind"},
               {"train", "training ratings"},
               {"validation", "validation ratings (per-epoch RMSE)"},
               {"taxonomy", "taxonomy file (mfitr kinds)"},
               {"weights", "per-rating weights for wals, one per line"},
               {"model_out", "model file (default <outdir>/model.txt)"}},
              kHyper),
       {}},
      {"predict", "score points with a saved model",
       {{"kind", "model kind (read from the model file when omitted)"},
        {"model", "model file"},
        {"points", "ratings file with the points to score"},
        {"train", "training ratings (knn and svdpp kinds)"},
        {"taxonomy", "taxonomy file (mfitr kinds)"},
        {"knn_beta", "time-decay rate of time-knn"},
        {"out", "prediction file (default <outdir>/predictions.tsv)"}},
       {}},
      {"eval", "RMSE of prediction files against a ratings file",
       {{"truth", "ratings file with the true scores"},
        {"pred", "prediction file, optionally NAME=PATH", true}},
       {}},
      {"blend", "two-phase training and ridge blend",
       {{"train", "training ratings"},
        {"validation", "validation ratings (blend fit)"},
        {"test", "test points"},
        {"taxonomy", "taxonomy file (mfitr kinds)"},
        {"model", "KIND[:key=value,...] model spec", true},
        {"external", "NAME=VALID_PRED,TEST_PRED precomputed columns", true},
        {"lambda", "ridge lambda (cross-validated when omitted)"},
        {"intercept", "append a constant column"},
        {"cv_seed", "fold shuffle seed for the lambda search"}},
       {"intercept"}},
      {"bench", "time training iterations",
       {{"train", "training ratings"},
        {"validation", "validation ratings"},
        {"taxonomy", "taxonomy file (mfitr kinds)"},
        {"algos", "comma-separated model kinds"},
        {"bench_threads", "comma-separated thread counts"},
        {"bench_dims", "comma-separated latent dimensions"},
        {"repeats", "timed iterations per configuration"}},
       {}},
  };
}

std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (auto& c : f) {
    if (c == '_') c = '-';
  }
  return f;
}

// Resolved parameters of one invocation.
class Settings {
 public:
  explicit Settings(std::vector<Param> params) : params_(std::move(params)) {}

  const Param* find(const std::string& key) const {
    for (const auto& p : params_) {
      if (p.key == key) return &p;
    }
    return nullptr;
  }

  void set(const std::string& key, std::string value) { scalars_[key] = std::move(value); }
  void set_default(const std::string& key, std::string value) {
    if (!has(key)) scalars_[key] = std::move(value);
  }
  void set_list(const std::string& key, std::vector<std::string> values) {
    lists_[key] = std::move(values);
  }
  void append(const std::string& key, std::string value) { lists_[key].push_back(std::move(value)); }

  bool has(const std::string& key) const {
    auto it = scalars_.find(key);
    return it != scalars_.end() && !it->second.empty();
  }
  std::string str(const std::string& key) const {
    auto it = scalars_.find(key);
    return it == scalars_.end() ? std::string() : it->second;
  }
  std::string required(const std::string& key) const {
    if (!has(key)) {
      throw ConfigError(fmt::format("missing required parameter {} (or '{}=' in --config)",
                                    flag_name(key), key));
    }
    return str(key);
  }
  const std::vector<std::string>& list(const std::string& key) const {
    static const std::vector<std::string> empty;
    auto it = lists_.find(key);
    return it == lists_.end() ? empty : it->second;
  }

  template <typename T>
  T number(const std::string& key) const {
    try {
      return detail::parse_number<T>(required(key), key, 0);
    } catch (const ParseError&) {
      throw ConfigError(fmt::format("invalid value '{}' for {}", str(key), key));
    }
  }

  bool flag(const std::string& key) const {
    const auto v = str(key);
    if (v.empty() || v == "0" || v == "false" || v == "off" || v == "no") return false;
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    throw ConfigError(fmt::format("invalid boolean '{}' for {}", v, key));
  }

  /// Key=value lines; '#' comments. Unknown keys are usage errors.
  void read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto view = detail::trim(line);
      if (view.empty() || view.front() == '#') continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("{}:{}: expected key=value", path.string(), lineno));
      }
      const std::string key(detail::trim(view.substr(0, eq)));
      const std::string value(detail::trim(view.substr(eq + 1)));
      const Param* p = find(key);
      if (!p) {
        throw ConfigError(fmt::format("{}:{}: unknown key '{}'", path.string(), lineno, key));
      }
      if (p->list) {
        append(key, value);
      } else {
        set(key, value);
      }
    }
  }

  void write(std::ostream& out) const {
    for (const auto& p : params_) {
      if (p.list) {
        for (const auto& v : list(p.key)) out << p.key << '=' << v << '\n';
      } else if (scalars_.count(p.key)) {
        out << p.key << '=' << str(p.key) << '\n';
      }
    }
  }

 private:
  std::vector<Param> params_;
  std::map<std::string, std::string> scalars_;
  std::map<std::string, std::vector<std::string>> lists_;
};

// ---- shared helpers ----

fs::path outdir(const Settings& s) {
  const fs::path dir = s.has("outdir") ? fs::path(s.str("outdir")) : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
  }
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void echo_config(const Settings& s, const fs::path& dir) {
  auto out = open_out(dir / "resolved.cfg");
  s.write(out);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : detail::split(text, ',')) {
    const auto t = detail::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::optional<TaxonomyGraph> maybe_taxonomy(const Settings& s) {
  if (!s.has("taxonomy")) return std::nullopt;
  return load_taxonomy(s.str("taxonomy"));
}

std::optional<Dataset> maybe_ratings(const Settings& s, const std::string& key, Split split) {
  if (!s.has(key)) return std::nullopt;
  return load_ratings(s.str(key), split);
}

// Every hyperparameter key, filled from the kind's defaults where unset.
void default_hyper(Settings& s, ModelKind kind) {
  const auto h = HyperParams::defaults_for(kind);
  s.set_default("gamma", format_real(h.gamma));
  s.set_default("decay", format_real(h.decay));
  s.set_default("lambda", format_real(h.lambda));
  s.set_default("lambda1", format_real(h.lambda1));
  s.set_default("lambda2", format_real(h.lambda2));
  s.set_default("lambda3", format_real(h.lambda3));
  s.set_default("lambda4", format_real(h.lambda4));
  s.set_default("lambda5", format_real(h.lambda5));
  s.set_default("iters", std::to_string(h.iters));
  s.set_default("dim", std::to_string(h.dim));
  s.set_default("time_dim", std::to_string(h.time_dim));
  s.set_default("bins", std::to_string(h.num_bins));
  s.set_default("knn_k", std::to_string(h.knn_k));
  s.set_default("knn_parts", std::to_string(h.knn_parts));
  s.set_default("knn_beta", format_real(h.knn_beta));
}

HyperParams hyper_from(const Settings& s) {
  HyperParams h;
  h.gamma = s.number<double>("gamma");
  h.decay = s.number<double>("decay");
  h.lambda = s.number<double>("lambda");
  h.lambda1 = s.number<double>("lambda1");
  h.lambda2 = s.number<double>("lambda2");
  h.lambda3 = s.number<double>("lambda3");
  h.lambda4 = s.number<double>("lambda4");
  h.lambda5 = s.number<double>("lambda5");
  h.iters = s.number<int>("iters");
  h.dim = s.number<std::size_t>("dim");
  h.time_dim = s.number<std::size_t>("time_dim");
  h.num_bins = s.number<std::size_t>("bins");
  h.knn_k = s.number<std::size_t>("knn_k");
  h.knn_parts = s.number<std::size_t>("knn_parts");
  h.knn_beta = s.number<double>("knn_beta");
  h.seed = s.number<std::uint64_t>("seed");
  h.validate();
  return h;
}

unsigned threads_of(const Settings& s) { return s.number<unsigned>("threads"); }

void write_clipped(const fs::path& path, const Dataset& points, std::vector<double> scores) {
  for (auto& v : scores) v = points.scale().clip(v);
  write_predictions(path, make_predictions(points, std::move(scores)));
}

// "kind[:key=value,...]"; keys are the hyperparameter names plus `name`.
ModelSpec parse_model_spec(const std::string& text, std::uint64_t seed) {
  const auto colon = text.find(':');
  const auto kind = model_kind_from_string(detail::trim(text.substr(0, colon)));
  Settings s(concat(kHyper, {{"name", ""}, {"seed", ""}}));
  s.set("seed", std::to_string(seed));
  if (colon != std::string::npos) {
    for (const auto& kv : split_list(text.substr(colon + 1))) {
      const auto eq = kv.find('=');
      const std::string key(detail::trim(std::string_view(kv).substr(0, eq)));
      if (eq == std::string::npos || !s.find(key)) {
        throw ConfigError(fmt::format("model spec '{}': bad setting '{}'", text, kv));
      }
      s.set(key, std::string(detail::trim(std::string_view(kv).substr(eq + 1))));
    }
  }
  default_hyper(s, kind);
  ModelSpec spec{s.has("name") ? s.str("name") : std::string(to_string(kind)), kind,
                 hyper_from(s)};
  return spec;
}

// ---- commands ----

int cmd_gen(const Settings& s, std::ostream& out) {
  s.required("outdir");
  std::ostringstream cfg;
  for (const auto& p : kSynth) {
    if (s.has(p.key)) cfg << p.key << '=' << s.str(p.key) << '\n';
  }
  cfg << "seed=" << s.str("seed") << '\n';
  std::istringstream in(cfg.str());
  SynthConfig c;
  try {
    c = parse_synth_config(in);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  const auto data = generate_synthetic(c, c.seed);
  const auto dir = outdir(s);
  write_ratings(dir / "train.tsv", data.train);
  write_ratings(dir / "validation.tsv", data.validation);
  write_ratings(dir / "test.tsv", data.test);
  {
    auto tax = open_out(dir / "taxonomy.txt");
    write_taxonomy(tax, data.taxonomy);
  }
  {
    auto manifest = open_out(dir / "manifest.tsv");
    manifest << "file\trecords\n"
             << "train.tsv\t" << data.train.size() << '\n'
             << "validation.tsv\t" << data.validation.size() << '\n'
             << "test.tsv\t" << data.test.size() << '\n'
             << "taxonomy.txt\t" << data.taxonomy.size() << '\n';
  }
  echo_config(s, dir);
  out << fmt::format("generated {} / {} / {} ratings over {} users and {} items in {}\n",
                     data.train.size(), data.validation.size(), data.test.size(), c.users,
                     c.num_items(), dir.string());
  return 0;
}

int cmd_train(Settings& s, std::ostream& out) {
  const auto kind = model_kind_from_string(s.required("kind"));
  default_hyper(s, kind);
  const auto h = hyper_from(s);
  const auto train = load_ratings(s.required("train"), Split::Train);
  const auto validation = maybe_ratings(s, "validation", Split::Validation);
  const auto taxonomy = maybe_taxonomy(s);
  if (uses_taxonomy(kind) && !taxonomy) {
    throw ConfigError(fmt::format("{} needs a taxonomy file (--taxonomy)", to_string(kind)));
  }
  std::vector<double> weights;
  if (s.has("weights")) {
    std::ifstream in(s.str("weights"));
    if (!in) throw IoError(fmt::format("cannot open weights '{}'", s.str("weights")));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      weights.push_back(detail::parse_number<double>(line, "weight", lineno));
    }
  }

  const auto dir = outdir(s);
  echo_config(s, dir);
  const fs::path model_out = s.has("model_out") ? fs::path(s.str("model_out")) : dir / "model.txt";

  TrainInputs in;
  in.train = &train;
  in.validation = validation ? &*validation : nullptr;
  in.taxonomy = taxonomy ? &*taxonomy : nullptr;
  in.threads = threads_of(s);
  in.weights = weights;
  ModelSpec spec{std::string(to_string(kind)), kind, h};
  const auto model = train_model(spec, in);
  model->save(model_out);

  if (!model->report().empty()) {
    auto rep = open_out(dir / "report.tsv");
    rep << "epoch\tobjective\tvalid_rmse\tgamma\tseconds\n";
    for (const auto& r : model->report()) {
      rep << r.epoch << '\t' << format_real(r.objective) << '\t'
          << (std::isnan(r.valid_rmse) ? std::string("NA") : format_real(r.valid_rmse)) << '\t'
          << format_real(r.gamma) << '\t' << fmt::format("{:.6f}", r.seconds) << '\n';
    }
  }
  out << fmt::format("trained {} on {} ratings -> {}\n", to_string(kind), train.size(),
                     model_out.string());
  if (validation && !validation->empty()) {
    auto pred = model->predict(*validation);
    for (auto& v : pred) v = validation->scale().clip(v);
    out << fmt::format("validation rmse {:.4f} over {} points\n", rmse(pred, *validation),
                       validation->size());
  }
  return 0;
}

ModelKind kind_of_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open model '{}'", path.string()));
  std::string first, second;
  std::getline(in, first);
  if (first.rfind("# knn", 0) == 0) return ModelKind::Knn;
  std::getline(in, second);
  if (first.rfind("mcf-model", 0) != 0 || second.rfind("kind ", 0) != 0) {
    throw ParseError(fmt::format("'{}' is neither a model nor a neighbor file", path.string()), 1);
  }
  return model_kind_from_string(detail::trim(std::string_view(second).substr(5)));
}

int cmd_predict(Settings& s, std::ostream& out) {
  const fs::path model_path = s.required("model");
  const auto kind = s.has("kind") ? model_kind_from_string(s.str("kind")) : kind_of_file(model_path);
  s.set("kind", std::string(to_string(kind)));
  s.set_default("knn_beta", format_real(HyperParams{}.knn_beta));
  const auto points = load_ratings(s.required("points"), Split::Test);
  const auto train = maybe_ratings(s, "train", Split::Train);
  const auto taxonomy = maybe_taxonomy(s);
  const auto dir = outdir(s);
  echo_config(s, dir);
  const fs::path dest = s.has("out") ? fs::path(s.str("out")) : dir / "predictions.tsv";

  const auto model = load_trained(kind, model_path, train ? &*train : nullptr,
                                  taxonomy ? &*taxonomy : nullptr, s.number<double>("knn_beta"));
  write_clipped(dest, points, model->predict(points));
  out << fmt::format("scored {} points with {} -> {}\n", points.size(), to_string(kind),
                     dest.string());
  return 0;
}

int cmd_eval(Settings& s, std::ostream& out) {
  const auto truth = load_ratings(s.required("truth"), Split::Test);
  if (s.list("pred").empty()) throw ConfigError("eval needs at least one --pred file");
  std::vector<NamedPredictions> models;
  for (const auto& entry : s.list("pred")) {
    const auto eq = entry.find('=');
    const fs::path path = eq == std::string::npos ? entry : entry.substr(eq + 1);
    const std::string name = eq == std::string::npos ? path.stem().string() : entry.substr(0, eq);
    models.push_back({name, load_predictions(path)});
  }
  const auto report = compare(models, truth_of(truth));
  const auto dir = outdir(s);
  echo_config(s, dir);
  {
    auto file = open_out(dir / "eval.tsv");
    write_report(file, report);
  }
  write_report(out, report);
  return 0;
}

int cmd_blend(Settings& s, std::ostream& out) {
  const auto train = load_ratings(s.required("train"), Split::Train);
  const auto validation = load_ratings(s.required("validation"), Split::Validation);
  const auto test = load_ratings(s.required("test"), Split::Test);
  const auto taxonomy = maybe_taxonomy(s);
  const auto seed = s.number<std::uint64_t>("seed");

  std::vector<ModelSpec> specs;
  for (const auto& m : s.list("model")) specs.push_back(parse_model_spec(m, seed));
  std::vector<ExternalColumn> external;
  for (const auto& e : s.list("external")) {
    const auto eq = e.find('=');
    const auto paths = split_list(eq == std::string::npos ? std::string() : e.substr(eq + 1));
    if (eq == std::string::npos || paths.size() != 2) {
      throw ConfigError(fmt::format("--external '{}': expected NAME=VALID_PRED,TEST_PRED", e));
    }
    external.push_back({e.substr(0, eq), load_predictions(paths[0]), load_predictions(paths[1])});
  }
  if (specs.empty() && external.empty()) throw ConfigError("blend needs --model or --external");

  PipelineOptions opts;
  if (s.has("lambda")) opts.lambda = s.number<double>("lambda");
  opts.intercept = s.flag("intercept");
  opts.threads = threads_of(s);
  opts.taxonomy = taxonomy ? &*taxonomy : nullptr;
  opts.cv_seed = s.number<std::uint64_t>("cv_seed");

  const auto dir = outdir(s);
  echo_config(s, dir);
  const auto r = two_phase_pipeline(specs, train, validation, test, opts, external);
  {
    auto file = open_out(dir / "weights.tsv");
    write_weights_report(file, r);
  }
  write_clipped(dir / "blend_test.tsv", test, r.test_blend);
  for (std::size_t c = 0; c < r.validation.cols(); ++c) {
    const auto& name = r.validation.names()[c];
    if (name == "intercept") continue;
    const auto vcol = r.validation.column(c);
    const auto tcol = r.test.column(c);
    write_clipped(dir / ("valid_" + name + ".tsv"), validation, {vcol.begin(), vcol.end()});
    write_clipped(dir / ("test_" + name + ".tsv"), test, {tcol.begin(), tcol.end()});
  }
  write_weights_report(out, r);
  out << fmt::format("blend validation rmse {:.4f} (lambda {})\n", r.blend_valid_rmse,
                     format_real(r.weights.lambda));
  return 0;
}

int cmd_bench(const Settings& s, std::ostream& out) {
  const auto train = load_ratings(s.required("train"), Split::Train);
  const auto validation = maybe_ratings(s, "validation", Split::Validation);
  const auto taxonomy = maybe_taxonomy(s);
  BenchConfig cfg;
  cfg.algos.clear();
  for (const auto& a : split_list(s.str("algos"))) cfg.algos.push_back(model_kind_from_string(a));
  auto numbers = [&](const std::string& key) {
    std::vector<std::size_t> v;
    for (const auto& t : split_list(s.str(key))) {
      try {
        v.push_back(detail::parse_number<std::size_t>(t, key, 0));
      } catch (const ParseError&) {
        throw ConfigError(fmt::format("invalid entry '{}' in {}", t, key));
      }
    }
    if (v.empty()) throw ConfigError(fmt::format("{} is empty", key));
    return v;
  };
  cfg.threads.clear();
  for (auto t : numbers("bench_threads")) cfg.threads.push_back(static_cast<unsigned>(t));
  cfg.dims = numbers("bench_dims");
  cfg.repeats = s.number<std::size_t>("repeats");
  for (auto k : cfg.algos) {
    if (uses_taxonomy(k) && !taxonomy) {
      throw ConfigError(fmt::format("{} needs a taxonomy file (--taxonomy)", to_string(k)));
    }
  }
  const auto dir = outdir(s);
  echo_config(s, dir);
  const auto report = bench(cfg, train, validation ? &*validation : nullptr,
                            taxonomy ? &*taxonomy : nullptr);
  {
    auto file = open_out(dir / "bench.tsv");
    write_bench(file, report);
  }
  write_bench(out, report);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mcf: collaborative filtering with item-taxonomy regularization"};
  app.require_subcommand(1);
  app.fallthrough();

  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<std::string>> list_values;
  std::map<std::string, bool> flag_values;
  std::string config_path;
  app.add_option("--config", config_path, "key=value parameter file");
  for (const auto& p : kGlobal) app.add_option(flag_name(p.key), values[p.key], p.help);

  const auto table = commands();
  std::vector<CLI::App*> subs;
  for (const auto& c : table) {
    auto* sub = app.add_subcommand(c.name, c.help);
    for (const auto& p : c.params) {
      const bool is_flag =
          std::find(c.flag_only.begin(), c.flag_only.end(), p.key) != c.flag_only.end();
      const std::string id = c.name + "." + p.key;
      if (is_flag) {
        sub->add_flag(flag_name(p.key), flag_values[id], p.help);
      } else if (p.list) {
        sub->add_option(flag_name(p.key), list_values[id], p.help);
      } else {
        sub->add_option(flag_name(p.key), values[id], p.help);
      }
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    for (std::size_t k = 0; k < table.size(); ++k) {
      auto* sub = subs[k];
      if (!sub->parsed()) continue;
      const auto& c = table[k];
      Settings s(concat(kGlobal, c.params));
      s.set("threads", "1");
      s.set("seed", "1");
      if (c.name == "blend") s.set("cv_seed", "1");
      if (c.name == "bench") {
        s.set("algos", "als,sgd");
        s.set("bench_threads", "1");
        s.set("bench_dims", "20");
        s.set("repeats", "3");
      }
      if (!config_path.empty()) s.read_config(config_path);
      for (const auto& p : kGlobal) {
        if (app.get_option(flag_name(p.key))->count() > 0) s.set(p.key, values[p.key]);
      }
      for (const auto& p : c.params) {
        auto* opt = sub->get_option(flag_name(p.key));
        if (opt->count() == 0) continue;
        const std::string id = c.name + "." + p.key;
        if (p.list) {
          s.set_list(p.key, list_values[id]);
        } else if (flag_values.count(id)) {
          s.set(p.key, flag_values[id] ? "true" : "false");
        } else {
          s.set(p.key, values[id]);
        }
      }
      if (c.name == "gen") return cmd_gen(s, out);
      if (c.name == "train") return cmd_train(s, out);
      if (c.name == "predict") return cmd_predict(s, out);
      if (c.name == "eval") return cmd_eval(s, out);
      if (c.name == "blend") return cmd_blend(s, out);
      if (c.name == "bench") return cmd_bench(s, out);
    }
  } catch (const Error& e) {
    err << "mcf: error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "mcf: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace mcf
