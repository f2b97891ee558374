#include "signdict/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "signdict/error.hpp"

namespace signdict {

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::unlikely: return "unlikely";
    case Confidence::possibly: return "possibly";
    case Confidence::probably: return "probably";
  }
  return "unlikely";
}

Confidence confidence_label(double probability) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "probability outside [0, 1]");
  }
  if (probability >= 2.0 / 3.0) return Confidence::probably;
  if (probability >= 1.0 / 3.0) return Confidence::possibly;
  return Confidence::unlikely;
}

std::vector<RankedResult> rank(const recognizer::Distribution& dist, const VocabularyCatalog& catalog) {
  if (dist.size() != catalog.size()) {
    throw Error(ErrorCode::invalid_argument, "distribution has " + std::to_string(dist.size()) +
                                                 " classes but the catalog has " + std::to_string(catalog.size()));
  }
  std::vector<ClassIndex> order(dist.size());
  std::iota(order.begin(), order.end(), ClassIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ClassIndex a, ClassIndex b) { return dist.probabilities[a] > dist.probabilities[b]; });
  std::vector<RankedResult> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& e = catalog.entry(order[i]);
    // Softmax output can exceed 1 by an ulp; labels need [0, 1].
    const double p = std::clamp(dist.probabilities[order[i]], 0.0, 1.0);
    out.push_back({i + 1, i + 1, order[i], e.rendition_id, e.gloss, p, confidence_label(p), e.metadata,
                   e.example_media});
  }
  return out;
}

std::string_view to_string(ViewKind kind) { return kind == ViewKind::compact ? "compact" : "detailed"; }

ViewKind parse_view_kind(std::string_view token) {
  if (token == "compact") return ViewKind::compact;
  if (token == "detailed") return ViewKind::detailed;
  throw Error(ErrorCode::unknown_token, "unknown view '" + std::string(token) + "'");
}

ResultView compose_view(const std::vector<RankedResult>& results, ViewKind kind) {
  if (results.empty()) throw Error(ErrorCode::invalid_argument, "no results to show");
  ResultView view;
  view.kind = kind;
  if (kind == ViewKind::compact) {
    view.primary = results.front();
    const std::size_t end = std::min(results.size(), kCompactViewSize);
    view.grid.assign(results.begin() + 1, results.begin() + static_cast<std::ptrdiff_t>(end));
  } else {
    const std::size_t end = std::min(results.size(), kDetailedViewSize);
    view.grid.assign(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return view;
}

std::string FilterCriteria::describe() const {
  if (empty()) return "None";
  std::vector<std::string> parts;
  if (movement) parts.push_back("movement=" + std::string(to_string(*movement)));
  if (hands) parts.push_back("hands=" + std::string(to_string(*hands)));
  if (location) parts.push_back("location=" + std::string(to_string(*location)));
  if (handshape) parts.push_back("handshape=" + *handshape);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

FilterCriteria parse_filter(std::string_view movement, std::string_view hands, std::string_view location,
                            std::string_view handshape) {
  FilterCriteria c;
  if (!movement.empty()) c.movement = parse_movement(movement);
  if (!hands.empty()) c.hands = parse_hands(hands);
  if (!location.empty()) c.location = parse_location(location);
  if (!handshape.empty()) c.handshape = std::string(handshape);
  return c;
}

std::vector<RankedResult> filter_results(const std::vector<RankedResult>& results, const FilterCriteria& criteria) {
  std::vector<RankedResult> out;
  for (const auto& r : results) {
    if (criteria.movement && r.metadata.movement != *criteria.movement) continue;
    if (criteria.hands && r.metadata.hands != *criteria.hands) continue;
    if (criteria.location && r.metadata.location != *criteria.location) continue;
    if (criteria.handshape && r.metadata.handshape != criteria.handshape) continue;
    out.push_back(r);
    out.back().rank = out.size();
  }
  return out;
}

}  // namespace signdict
