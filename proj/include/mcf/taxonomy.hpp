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

#ifndef MCF_TAXONOMY_HPP
#define MCF_TAXONOMY_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcf/dataset.hpp"

namespace mcf {

enum class ItemKind { Track, Album, Artist, Genre };

std::string_view to_string(ItemKind k) noexcept;

/// One taxonomy declaration as it appears in the file.
struct TaxonomyEntry {
  ItemKind kind = ItemKind::Track;
  ItemId id = 0;
  std::optional<ItemId> album;
  std::optional<ItemId> artist;
  std::vector<std::uint32_t> genres;
};

/// A parent/child link; `parent` is in P_child and `child` in C_parent.
struct TaxonomyEdge {
  ItemId child = 0;
  ItemId parent = 0;
  friend bool operator==(const TaxonomyEdge&, const TaxonomyEdge&) = default;
};

/// Track -> album -> artist forest. Parent sets: a track's album and artist,
/// an album's artist. Artists are roots. Genres are recorded but unused.
class TaxonomyGraph {
 public:
  TaxonomyGraph() = default;

  /// Validates kinds and references. In lenient mode dangling album/artist
  /// references are dropped and counted instead of raising.
  static TaxonomyGraph build(std::vector<TaxonomyEntry> entries, bool strict = true);

  bool contains(ItemId i) const noexcept { return i < kind_.size() && kind_[i].has_value(); }
  /// One past the largest declared id.
  std::size_t id_bound() const noexcept { return kind_.size(); }
  std::size_t size() const noexcept { return count_; }

  ItemKind kind(ItemId i) const;
  std::optional<ItemId> album_of(ItemId i) const;
  /// Owning artist of a track/album, the artist itself for an artist.
  std::optional<ItemId> artist_of(ItemId i) const;
  /// Like artist_of, but absent (not an error) for undeclared ids.
  std::optional<ItemId> artist_or_none(ItemId i) const noexcept;

  std::span<const ItemId> parents(ItemId i) const;
  std::span<const ItemId> children(ItemId i) const;
  std::span<const std::uint32_t> genres(ItemId i) const;

  /// Every child->parent link, ordered by child then parent id.
  std::span<const TaxonomyEdge> edges() const noexcept { return edges_; }
  std::vector<ItemId> items() const;

  std::size_t dropped_links() const noexcept { return dropped_links_; }

  bool is_symmetric() const;
  bool is_acyclic() const;
  std::size_t max_depth() const;

 private:
  void require(ItemId i) const;

  std::vector<std::optional<ItemKind>> kind_;
  std::vector<std::optional<ItemId>> album_;
  std::vector<std::optional<ItemId>> artist_;
  std::vector<std::vector<std::uint32_t>> genres_;
  std::vector<std::vector<ItemId>> parents_;
  std::vector<std::vector<ItemId>> children_;
  std::vector<TaxonomyEdge> edges_;
  std::size_t count_ = 0;
  std::size_t dropped_links_ = 0;
};

/// Reads `kind|item_id|album_id_or_NA|artist_id_or_NA|genre_id,...` lines.
TaxonomyGraph load_taxonomy(const std::filesystem::path& path, bool strict = true);
TaxonomyGraph parse_taxonomy(std::istream& in, bool strict = true);
void write_taxonomy(std::ostream& out, const TaxonomyGraph& g);

}  // namespace mcf

#endif  // MCF_TAXONOMY_HPP
