#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace signdict {

enum class Movement { unidirectional, bidirectional, repeated, circular, none };
enum class Hands { one, two };
enum class Location { torso, neck, face, in_space };

std::string_view to_string(Movement m);
std::string_view to_string(Hands h);
std::string_view to_string(Location l);

// Parsing throws Error{unknown_token} for anything outside the closed sets.
Movement parse_movement(std::string_view token);
Hands parse_hands(std::string_view token);
Location parse_location(std::string_view token);

struct SignMetadata {
  Movement movement = Movement::none;
  Hands hands = Hands::one;
  Location location = Location::torso;
  // Absent when the handshape is ambiguous.
  std::optional<std::string> handshape;

  bool operator==(const SignMetadata&) const = default;
};

// True iff the two signs share the number of hands, the movement, or a
// (present) handshape. Location does not count, and an absent handshape
// never matches anything, including another absent one.
bool shares_attribute(const SignMetadata& a, const SignMetadata& b);

struct GlossEntry {
  std::string rendition_id;
  std::string gloss;
  SignMetadata metadata;
  std::string example_media;

  bool operator==(const GlossEntry&) const = default;
};

using ClassIndex = std::size_t;

// Closed vocabulary. Each rendition is one classifier class; the class index
// is the entry's position in file order. Immutable after construction.
class VocabularyCatalog {
 public:
  VocabularyCatalog() = default;
  // Validates ids and glosses; throws on empty input or duplicate ids.
  explicit VocabularyCatalog(std::vector<GlossEntry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<GlossEntry>& entries() const { return entries_; }
  const GlossEntry& entry(ClassIndex index) const { return entries_.at(index); }

  ClassIndex class_of(std::string_view rendition_id) const;
  std::optional<ClassIndex> find(std::string_view rendition_id) const;
  const std::string& rendition_of(ClassIndex index) const { return entries_.at(index).rendition_id; }

  std::size_t unique_gloss_count() const;
  // Number of glosses that have two or more renditions.
  std::size_t multi_rendition_gloss_count() const;

  // Canonical TSV text (no comments), as written by save_catalog.
  std::string serialize() const;
  // FNV-1a over the canonical text; binds trained models to this vocabulary.
  std::uint64_t fingerprint() const;

 private:
  std::vector<GlossEntry> entries_;
  std::unordered_map<std::string, ClassIndex> index_;
};

// Tab-separated: rendition_id gloss movement hands location handshape
// example_media. `-` marks an absent handshape; `#` starts a comment line.
VocabularyCatalog parse_catalog(std::string_view text);
VocabularyCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const VocabularyCatalog& catalog, const std::filesystem::path& path);

std::string fingerprint_hex(std::uint64_t fingerprint);

}  // namespace signdict
