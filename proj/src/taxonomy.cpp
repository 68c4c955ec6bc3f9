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

#include "mcf/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "mcf/errors.hpp"
#include "text_util.hpp"

namespace mcf {

std::string_view to_string(ItemKind k) noexcept {
  switch (k) {
    case ItemKind::Track: return "track";
    case ItemKind::Album: return "album";
    case ItemKind::Artist: return "artist";
    case ItemKind::Genre: return "genre";
  }
  return "track";
}

TaxonomyGraph TaxonomyGraph::build(std::vector<TaxonomyEntry> entries, bool strict) {
  TaxonomyGraph g;
  ItemId bound = 0;
  for (const auto& e : entries) bound = std::max<ItemId>(bound, e.id + 1);
  g.kind_.assign(bound, std::nullopt);
  g.album_.assign(bound, std::nullopt);
  g.artist_.assign(bound, std::nullopt);
  g.genres_.assign(bound, {});
  g.parents_.assign(bound, {});
  g.children_.assign(bound, {});

  for (const auto& e : entries) {
    if (e.kind == ItemKind::Genre) {
      throw StructureError(fmt::format("item {}: genre nodes cannot be declared", e.id));
    }
    if (g.kind_[e.id]) throw StructureError(fmt::format("item {} declared twice", e.id));
    g.kind_[e.id] = e.kind;
    g.genres_[e.id] = e.genres;
    ++g.count_;
  }

  auto resolve = [&](ItemId owner, std::optional<ItemId> ref, ItemKind want,
                     std::string_view role) -> std::optional<ItemId> {
    if (!ref) return std::nullopt;
    if (*ref >= bound || !g.kind_[*ref]) {
      if (strict) {
        throw DanglingReferenceError(
            fmt::format("item {} references undeclared {} {}", owner, role, *ref));
      }
      ++g.dropped_links_;
      return std::nullopt;
    }
    if (*g.kind_[*ref] != want) {
      throw StructureError(fmt::format("item {}: {} reference {} is a {}", owner, role, *ref,
                                       to_string(*g.kind_[*ref])));
    }
    return ref;
  };

  // Albums first so tracks without an explicit artist can inherit one.
  for (const auto& e : entries) {
    if (e.kind == ItemKind::Album) {
      if (e.album) throw StructureError(fmt::format("album {} cannot have an album", e.id));
      g.artist_[e.id] = resolve(e.id, e.artist, ItemKind::Artist, "artist");
    } else if (e.kind == ItemKind::Artist) {
      if (e.album || e.artist) {
        throw StructureError(fmt::format("artist {} cannot have parents", e.id));
      }
    }
  }
  for (const auto& e : entries) {
    if (e.kind != ItemKind::Track) continue;
    g.album_[e.id] = resolve(e.id, e.album, ItemKind::Album, "album");
    auto artist = resolve(e.id, e.artist, ItemKind::Artist, "artist");
    const auto& album = g.album_[e.id];
    if (album && g.artist_[*album]) {
      if (artist && *artist != *g.artist_[*album]) {
        throw StructureError(fmt::format("track {} names artist {} but album {} belongs to {}",
                                         e.id, *artist, *album, *g.artist_[*album]));
      }
      artist = g.artist_[*album];
    }
    g.artist_[e.id] = artist;
  }

  for (ItemId i = 0; i < bound; ++i) {
    if (!g.kind_[i]) continue;
    if (g.album_[i]) g.parents_[i].push_back(*g.album_[i]);
    if (g.artist_[i]) g.parents_[i].push_back(*g.artist_[i]);
    std::sort(g.parents_[i].begin(), g.parents_[i].end());
    for (ItemId p : g.parents_[i]) {
      g.children_[p].push_back(i);
      g.edges_.push_back({i, p});
    }
  }
  for (auto& c : g.children_) std::sort(c.begin(), c.end());

  if (!g.is_acyclic()) throw StructureError("taxonomy contains a cycle");
  return g;
}

void TaxonomyGraph::require(ItemId i) const {
  if (!contains(i)) throw LookupError(fmt::format("item {} is not in the taxonomy", i));
}

ItemKind TaxonomyGraph::kind(ItemId i) const {
  require(i);
  return *kind_[i];
}

std::optional<ItemId> TaxonomyGraph::album_of(ItemId i) const {
  require(i);
  return album_[i];
}

std::optional<ItemId> TaxonomyGraph::artist_of(ItemId i) const {
  require(i);
  return artist_or_none(i);
}

std::optional<ItemId> TaxonomyGraph::artist_or_none(ItemId i) const noexcept {
  if (!contains(i)) return std::nullopt;
  if (*kind_[i] == ItemKind::Artist) return i;
  return artist_[i];
}

std::span<const ItemId> TaxonomyGraph::parents(ItemId i) const {
  require(i);
  return parents_[i];
}

std::span<const ItemId> TaxonomyGraph::children(ItemId i) const {
  require(i);
  return children_[i];
}

std::span<const std::uint32_t> TaxonomyGraph::genres(ItemId i) const {
  require(i);
  return genres_[i];
}

std::vector<ItemId> TaxonomyGraph::items() const {
  std::vector<ItemId> out;
  out.reserve(count_);
  for (ItemId i = 0; i < kind_.size(); ++i) {
    if (kind_[i]) out.push_back(i);
  }
  return out;
}

bool TaxonomyGraph::is_symmetric() const {
  for (ItemId i = 0; i < kind_.size(); ++i) {
    for (ItemId p : parents_[i]) {
      if (!std::binary_search(children_[p].begin(), children_[p].end(), i)) return false;
    }
    for (ItemId c : children_[i]) {
      if (!std::binary_search(parents_[c].begin(), parents_[c].end(), i)) return false;
    }
  }
  return true;
}

bool TaxonomyGraph::is_acyclic() const {
  // Kahn's algorithm over child -> parent links.
  std::vector<std::size_t> pending(kind_.size(), 0);
  for (ItemId i = 0; i < kind_.size(); ++i) pending[i] = children_[i].size();
  std::vector<ItemId> ready;
  for (ItemId i = 0; i < kind_.size(); ++i) {
    if (kind_[i] && pending[i] == 0) ready.push_back(i);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const ItemId i = ready.back();
    ready.pop_back();
    ++visited;
    for (ItemId p : parents_[i]) {
      if (--pending[p] == 0) ready.push_back(p);
    }
  }
  return visited == count_;
}

std::size_t TaxonomyGraph::max_depth() const {
  std::vector<std::size_t> depth(kind_.size(), 0);
  std::size_t deepest = 0;
  // Parents always carry a kind ranked above their children, so resolving
  // artists, then albums, then tracks visits parents first.
  for (ItemKind pass : {ItemKind::Artist, ItemKind::Album, ItemKind::Track}) {
    for (ItemId i = 0; i < kind_.size(); ++i) {
      if (!kind_[i] || *kind_[i] != pass) continue;
      for (ItemId p : parents_[i]) depth[i] = std::max(depth[i], depth[p] + 1);
      deepest = std::max(deepest, depth[i]);
    }
  }
  return deepest;
}

namespace {

std::optional<ItemId> parse_ref(std::string_view field, std::size_t line) {
  field = detail::trim(field);
  if (field == "NA" || field.empty()) return std::nullopt;
  return detail::parse_number<ItemId>(field, "item reference", line);
}

}  // namespace

TaxonomyGraph parse_taxonomy(std::istream& in, bool strict) {
  std::vector<TaxonomyEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = detail::split(view, '|');
    if (fields.size() != 5) {
      throw ParseError(fmt::format("expected 5 '|'-separated fields, got {}", fields.size()),
                       lineno);
    }
    TaxonomyEntry e;
    const auto kind = detail::trim(fields[0]);
    if (kind == "track") {
      e.kind = ItemKind::Track;
    } else if (kind == "album") {
      e.kind = ItemKind::Album;
    } else if (kind == "artist") {
      e.kind = ItemKind::Artist;
    } else {
      throw ParseError(fmt::format("unknown item kind '{}'", kind), lineno);
    }
    e.id = detail::parse_number<ItemId>(fields[1], "item id", lineno);
    e.album = parse_ref(fields[2], lineno);
    e.artist = parse_ref(fields[3], lineno);
    const auto genre_field = detail::trim(fields[4]);
    if (!genre_field.empty()) {
      for (auto g : detail::split(genre_field, ',')) {
        if (detail::trim(g).empty()) continue;
        e.genres.push_back(detail::parse_number<std::uint32_t>(g, "genre id", lineno));
      }
    }
    entries.push_back(std::move(e));
  }
  return TaxonomyGraph::build(std::move(entries), strict);
}

TaxonomyGraph load_taxonomy(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open taxonomy file '{}'", path.string()));
  return parse_taxonomy(in, strict);
}

void write_taxonomy(std::ostream& out, const TaxonomyGraph& g) {
  auto ref = [](std::optional<ItemId> v) { return v ? std::to_string(*v) : std::string("NA"); };
  // Declarations in kind order so every reference precedes its use.
  for (ItemKind pass : {ItemKind::Artist, ItemKind::Album, ItemKind::Track}) {
    for (ItemId i : g.items()) {
      if (g.kind(i) != pass) continue;
      std::optional<ItemId> artist = pass == ItemKind::Artist ? std::nullopt : g.artist_of(i);
      out << to_string(pass) << '|' << i << '|' << ref(g.album_of(i)) << '|' << ref(artist) << '|'
          << fmt::format("{}", fmt::join(g.genres(i), ",")) << '\n';
    }
  }
}

}  // namespace mcf
