#include "signdict/catalog.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "signdict/error.hpp"
#include "signdict/rng.hpp"
#include "signdict/text.hpp"

namespace signdict {

namespace {

constexpr std::array<std::string_view, 5> kMovementNames = {"unidirectional", "bidirectional", "repeated",
                                                            "circular", "none"};
constexpr std::array<std::string_view, 2> kHandsNames = {"one", "two"};
constexpr std::array<std::string_view, 4> kLocationNames = {"torso", "neck", "face", "in_space"};

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view token, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == token) return static_cast<Enum>(i);
  }
  throw Error(ErrorCode::unknown_token, "unknown " + std::string(what) + " '" + std::string(token) + "'");
}

}  // namespace

std::string_view to_string(Movement m) { return kMovementNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(Hands h) { return kHandsNames[static_cast<std::size_t>(h)]; }
std::string_view to_string(Location l) { return kLocationNames[static_cast<std::size_t>(l)]; }

Movement parse_movement(std::string_view token) { return parse_enum<Movement>(token, kMovementNames, "movement"); }
Hands parse_hands(std::string_view token) { return parse_enum<Hands>(token, kHandsNames, "hands"); }
Location parse_location(std::string_view token) { return parse_enum<Location>(token, kLocationNames, "location"); }

bool shares_attribute(const SignMetadata& a, const SignMetadata& b) {
  if (a.hands == b.hands || a.movement == b.movement) return true;
  return a.handshape && b.handshape && *a.handshape == *b.handshape;
}

VocabularyCatalog::VocabularyCatalog(std::vector<GlossEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::empty_catalog, "empty catalog");
  index_.reserve(entries_.size());
  for (ClassIndex i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.rendition_id.empty()) {
      throw Error(ErrorCode::invalid_argument, "entry " + std::to_string(i) + ": empty rendition_id");
    }
    if (e.gloss.empty()) throw Error(ErrorCode::invalid_argument, "entry '" + e.rendition_id + "': empty gloss");
    if (!index_.emplace(e.rendition_id, i).second) {
      throw Error(ErrorCode::duplicate_id, "duplicate rendition_id '" + e.rendition_id + "'");
    }
  }
}

ClassIndex VocabularyCatalog::class_of(std::string_view rendition_id) const {
  auto found = find(rendition_id);
  if (!found) throw Error(ErrorCode::not_found, "unknown rendition_id '" + std::string(rendition_id) + "'");
  return *found;
}

std::optional<ClassIndex> VocabularyCatalog::find(std::string_view rendition_id) const {
  auto it = index_.find(std::string(rendition_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t VocabularyCatalog::unique_gloss_count() const {
  std::unordered_set<std::string> glosses;
  for (const auto& e : entries_) glosses.insert(e.gloss);
  return glosses.size();
}

std::size_t VocabularyCatalog::multi_rendition_gloss_count() const {
  std::unordered_map<std::string, int> counts;
  for (const auto& e : entries_) ++counts[e.gloss];
  std::size_t n = 0;
  for (const auto& [gloss, count] : counts) n += count >= 2 ? 1 : 0;
  return n;
}

std::string VocabularyCatalog::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.rendition_id;
    out += '\t';
    out += e.gloss;
    out += '\t';
    out += to_string(e.metadata.movement);
    out += '\t';
    out += to_string(e.metadata.hands);
    out += '\t';
    out += to_string(e.metadata.location);
    out += '\t';
    out += e.metadata.handshape ? *e.metadata.handshape : "-";
    out += '\t';
    out += e.example_media;
    out += '\n';
  }
  return out;
}

std::uint64_t VocabularyCatalog::fingerprint() const {
  const std::string text = serialize();
  return fnv1a(text.data(), text.size());
}

VocabularyCatalog parse_catalog(std::string_view text) {
  std::vector<GlossEntry> entries;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    line = trim_right(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    const auto locus = "catalog line " + std::to_string(line_no) + ": ";
    if (fields.size() != 7) {
      throw Error(ErrorCode::parse, locus + "expected 7 tab-separated fields, got " + std::to_string(fields.size()));
    }
    GlossEntry e;
    e.rendition_id = std::string(fields[0]);
    e.gloss = std::string(fields[1]);
    try {
      e.metadata.movement = parse_movement(fields[2]);
      e.metadata.hands = parse_hands(fields[3]);
      e.metadata.location = parse_location(fields[4]);
    } catch (const Error& err) {
      throw Error(err.code(), locus + err.what());
    }
    if (fields[5] != "-") e.metadata.handshape = std::string(fields[5]);
    e.example_media = std::string(fields[6]);
    entries.push_back(std::move(e));
  }
  return VocabularyCatalog(std::move(entries));
}

VocabularyCatalog load_catalog(const std::filesystem::path& path) {
  return parse_catalog(read_text_file(path));
}

void save_catalog(const VocabularyCatalog& catalog, const std::filesystem::path& path) {
  write_text_file(path, catalog.serialize());
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint));
  return buf;
}

}  // namespace signdict
