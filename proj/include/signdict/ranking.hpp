#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signdict/catalog.hpp"
#include "signdict/recognizer/model.hpp"

namespace signdict {

enum class Confidence { unlikely, possibly, probably };

std::string_view to_string(Confidence c);

// Bands are lower-inclusive: [0, 1/3) unlikely, [1/3, 2/3) possibly,
// [2/3, 1] probably. Throws Error{invalid_argument} outside [0, 1].
Confidence confidence_label(double probability);

struct RankedResult {
  std::size_t rank = 0;           // 1-based position in this list
  std::size_t original_rank = 0;  // position in the unfiltered ranking
  ClassIndex class_index = 0;
  std::string rendition_id;
  std::string gloss;
  double probability = 0.0;
  Confidence confidence = Confidence::unlikely;
  SignMetadata metadata;
  std::string example_media;

  bool operator==(const RankedResult&) const = default;
};

// Every class, probability-descending; ties go to the lower class index.
std::vector<RankedResult> rank(const recognizer::Distribution& dist, const VocabularyCatalog& catalog);

enum class ViewKind { compact, detailed };

std::string_view to_string(ViewKind kind);
ViewKind parse_view_kind(std::string_view token);

inline constexpr std::size_t kCompactViewSize = 7;
inline constexpr std::size_t kDetailedViewSize = 20;

struct ResultView {
  ViewKind kind = ViewKind::compact;
  std::optional<RankedResult> primary;  // compact only
  std::vector<RankedResult> grid;
};

// compact: results[0] as primary and results[1..7) as the grid.
// detailed: results[0..20) as the grid. Short inputs give short views.
ResultView compose_view(const std::vector<RankedResult>& results, ViewKind kind);

struct FilterCriteria {
  std::optional<Movement> movement;
  std::optional<Hands> hands;
  std::optional<Location> location;
  std::optional<std::string> handshape;

  bool empty() const { return !movement && !hands && !location && !handshape; }
  // "None" when empty, otherwise e.g. "hands=one, location=face".
  std::string describe() const;
};

// Tokens come from the closed enums; empty strings mean "no constraint".
FilterCriteria parse_filter(std::string_view movement, std::string_view hands, std::string_view location,
                            std::string_view handshape);

// Conjunctive filter. Keeps relative order and original_rank; renumbers rank.
std::vector<RankedResult> filter_results(const std::vector<RankedResult>& results, const FilterCriteria& criteria);

}  // namespace signdict
