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

#include "mcf/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "text_util.hpp"

namespace mcf {

namespace {

constexpr std::string_view kMagic = "mcf-model 1";

void write_block(std::ostream& out, std::string_view name, std::span<const double> values,
                 std::size_t rows, std::size_t cols) {
  out << "block " << name << ' ' << rows << ' ' << cols << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ' ';
      out << fmt::format("{:a}", values[r * cols + c]);
    }
    out << '\n';
  }
}

void write_header(std::ostream& out, const FactorModel& m) {
  out << kMagic << '\n';
  out << "kind " << to_string(m.kind) << '\n';
  out << "dim " << m.dim << '\n';
  out << "time_dim " << m.time_dim << '\n';
  out << "users " << m.num_users() << '\n';
  out << "items " << m.num_items() << '\n';
  out << "bins " << m.binner.num_bins() << '\n';
  out << "t_min " << m.binner.t_min() << '\n';
  out << "t_max " << m.binner.t_max() << '\n';
  out << "implicit " << (m.implicit_on ? 1 : 0) << '\n';
  out << "time " << (m.time_on ? 1 : 0) << '\n';
  out << "seed " << m.seed << '\n';
  out << "mu " << fmt::format("{:a}", m.mu) << '\n';
}

void write_base_blocks(std::ostream& out, const FactorModel& m) {
  write_block(out, "user_bias", m.user_bias, m.user_bias.size(), 1);
  write_block(out, "item_bias", m.item_bias, m.item_bias.size(), 1);
  auto mat = [&](std::string_view name, const FactorMatrix& f) {
    write_block(out, name, f.values(), f.rows(), f.cols());
  };
  mat("p", m.p);
  mat("q", m.q);
  mat("y", m.y);
  mat("x", m.x);
  mat("z", m.z);
  mat("item_bin_bias", m.item_bin_bias);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string_view next_line() {
    while (std::getline(in_, line_)) {
      ++lineno_;
      auto view = detail::trim(line_);
      if (!view.empty()) return view;
    }
    throw ParseError("unexpected end of model file", lineno_);
  }

  template <typename T>
  T field(std::string_view key) {
    const auto view = next_line();
    const auto parts = detail::split(view, ' ');
    if (parts.size() != 2 || parts[0] != key) {
      throw ParseError(fmt::format("expected '{} <value>'", key), lineno_);
    }
    return detail::parse_number<T>(parts[1], key, lineno_);
  }

  double hexfloat(std::string_view token) {
    const std::string text(token);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || text.empty()) {
      throw ParseError(fmt::format("invalid value '{}'", token), lineno_);
    }
    return v;
  }

  void block(std::string_view name, std::span<double> values, std::size_t rows, std::size_t cols) {
    const auto head = detail::split(next_line(), ' ');
    if (head.size() != 4 || head[0] != "block" || head[1] != name) {
      throw ParseError(fmt::format("expected 'block {} {} {}'", name, rows, cols), lineno_);
    }
    const auto r = detail::parse_number<std::size_t>(head[2], "rows", lineno_);
    const auto c = detail::parse_number<std::size_t>(head[3], "cols", lineno_);
    if (r != rows || c != cols) {
      throw ParseError(fmt::format("block {} is {}x{}, header implies {}x{}", name, r, c, rows,
                                   cols),
                       lineno_);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      if (cols == 0) continue;
      const auto tokens = detail::split(next_line(), ' ');
      if (tokens.size() != cols) {
        throw ParseError(fmt::format("block {} row {}: {} values, expected {}", name, i,
                                     tokens.size(), cols),
                         lineno_);
      }
      for (std::size_t j = 0; j < cols; ++j) values[i * cols + j] = hexfloat(tokens[j]);
    }
  }

  std::size_t line() const noexcept { return lineno_; }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t lineno_ = 0;
};

}  // namespace

void write_model(std::ostream& out, const FactorModel& m) {
  write_header(out, m);
  write_base_blocks(out, m);
  out << "end\n";
}

void write_model(std::ostream& out, const MfitrModel& m) {
  write_header(out, m.base);
  write_base_blocks(out, m.base);
  write_block(out, "artist_bias", m.artist_bias, m.artist_bias.size(), 1);
  write_block(out, "artist_factor", m.artist_factor.values(), m.artist_factor.rows(),
              m.artist_factor.cols());
  out << "end\n";
}

namespace {

template <typename Model>
void save_to(const std::filesystem::path& path, const Model& m) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  write_model(out, m);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace

void save_model(const std::filesystem::path& path, const FactorModel& m) { save_to(path, m); }
void save_model(const std::filesystem::path& path, const MfitrModel& m) { save_to(path, m); }

MfitrModel read_model(std::istream& in) {
  Reader rd(in);
  if (rd.next_line() != kMagic) throw ParseError("not an mcf model file", rd.line());
  const auto kind_line = detail::split(rd.next_line(), ' ');
  if (kind_line.size() != 2 || kind_line[0] != "kind") throw ParseError("expected 'kind'", rd.line());
  const ModelKind kind = model_kind_from_string(kind_line[1]);
  if (is_neighborhood(kind)) throw ParseError("neighborhood models are stored as tables", rd.line());

  MfitrModel out;
  FactorModel& m = out.base;
  m.kind = kind;
  m.dim = rd.field<std::size_t>("dim");
  m.time_dim = rd.field<std::size_t>("time_dim");
  const auto users = rd.field<std::size_t>("users");
  const auto items = rd.field<std::size_t>("items");
  const auto bins = rd.field<std::size_t>("bins");
  const auto t_min = rd.field<Timestamp>("t_min");
  const auto t_max = rd.field<Timestamp>("t_max");
  m.implicit_on = rd.field<int>("implicit") != 0;
  m.time_on = rd.field<int>("time") != 0;
  m.seed = rd.field<std::uint64_t>("seed");
  {
    const auto mu = detail::split(rd.next_line(), ' ');
    if (mu.size() != 2 || mu[0] != "mu") throw ParseError("expected 'mu <value>'", rd.line());
    m.mu = rd.hexfloat(mu[1]);
  }
  m.binner = TimeBinner(t_min, t_max, bins);

  const std::size_t tb = m.time_on ? bins : 0;
  m.user_bias.assign(users, 0.0);
  m.item_bias.assign(items, 0.0);
  m.p = FactorMatrix(users, m.dim);
  m.q = FactorMatrix(items, m.dim);
  m.y = FactorMatrix(items, m.implicit_on ? m.dim : 0);
  m.x = FactorMatrix(users, m.time_dim);
  m.z = FactorMatrix(tb, m.time_dim);
  m.item_bin_bias = FactorMatrix(items, tb);

  rd.block("user_bias", m.user_bias, users, 1);
  rd.block("item_bias", m.item_bias, items, 1);
  rd.block("p", m.p.values(), users, m.dim);
  rd.block("q", m.q.values(), items, m.dim);
  rd.block("y", m.y.values(), m.y.rows(), m.y.cols());
  rd.block("x", m.x.values(), m.x.rows(), m.x.cols());
  rd.block("z", m.z.values(), m.z.rows(), m.z.cols());
  rd.block("item_bin_bias", m.item_bin_bias.values(), items, tb);
  if (uses_taxonomy(kind)) {
    out.artist_bias.assign(items, 0.0);
    out.artist_factor = FactorMatrix(items, m.dim);
    rd.block("artist_bias", out.artist_bias, items, 1);
    rd.block("artist_factor", out.artist_factor.values(), items, m.dim);
  }
  if (rd.next_line() != "end") throw ParseError("expected 'end'", rd.line());
  return out;
}

MfitrModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open model file '{}'", path.string()));
  return read_model(in);
}

}  // namespace mcf
