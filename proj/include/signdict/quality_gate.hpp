#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "signdict/estimator.hpp"
#include "signdict/pose.hpp"

namespace signdict {

enum class IssueCode {
  incomplete_upload,
  undecodable,
  low_resolution,
  multiple_people,
  off_center,
  hands_not_visible,
  torso_not_visible,
  face_not_visible,
};

enum class Severity { error, warning };
enum class Verdict { proceed, proceed_with_warnings, reject };

std::string_view to_string(IssueCode code);
std::string_view to_string(Severity severity);
std::string_view to_string(Verdict verdict);

// incomplete_upload and undecodable are errors; everything else is a warning.
Severity severity_of(IssueCode code);

struct Issue {
  IssueCode code;
  Severity severity;
  std::string summary;
  std::vector<std::string> suggestions;

  bool operator==(const Issue&) const = default;
};

// Builds an issue with its canned summary and fix suggestions.
Issue make_issue(IssueCode code);

struct SubmissionReport {
  std::vector<Issue> issues;
  Verdict verdict = Verdict::proceed;

  bool operator==(const SubmissionReport&) const = default;
};

struct GateThresholds {
  int min_width = 192;
  int min_height = 144;
  // Width of the band around the horizontal center, as a fraction of the
  // frame width, that the torso midpoint must fall in.
  double center_band = 0.30;
  double visibility_floor = 0.5;
  // Fraction of a region's landmarks that must reach visibility_floor.
  double min_visible_fraction = 0.6;

  // Throws Error{invalid_argument} unless all positive and center_band <= 1.
  void validate() const;
};

std::vector<Issue> check_technical(Resolution resolution, ByteStatus status, const GateThresholds& t = {});

// `people` holds one pose track per detected person. Region checks use
// frame-averaged visibility fractions and the frame-averaged torso midpoint.
std::vector<Issue> check_visibility(const std::vector<PoseSequence>& people, const GateThresholds& t = {});

SubmissionReport gate(std::vector<Issue> technical, std::vector<Issue> visibility);

// Message-box text: bold summary line, then one bullet per suggestion.
std::string render_message(const Issue& issue);

}  // namespace signdict
