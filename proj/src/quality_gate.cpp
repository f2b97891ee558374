#include "signdict/quality_gate.hpp"

#include <algorithm>
#include <span>

#include "signdict/error.hpp"

namespace signdict {

std::string_view to_string(IssueCode code) {
  switch (code) {
    case IssueCode::incomplete_upload: return "incomplete_upload";
    case IssueCode::undecodable: return "undecodable";
    case IssueCode::low_resolution: return "low_resolution";
    case IssueCode::multiple_people: return "multiple_people";
    case IssueCode::off_center: return "off_center";
    case IssueCode::hands_not_visible: return "hands_not_visible";
    case IssueCode::torso_not_visible: return "torso_not_visible";
    case IssueCode::face_not_visible: return "face_not_visible";
  }
  return "undecodable";
}

std::string_view to_string(Severity severity) { return severity == Severity::error ? "error" : "warning"; }

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::proceed: return "proceed";
    case Verdict::proceed_with_warnings: return "proceed_with_warnings";
    case Verdict::reject: return "reject";
  }
  return "reject";
}

Severity severity_of(IssueCode code) {
  return code == IssueCode::incomplete_upload || code == IssueCode::undecodable ? Severity::error : Severity::warning;
}

Issue make_issue(IssueCode code) {
  Issue issue{code, severity_of(code), {}, {}};
  switch (code) {
    case IssueCode::incomplete_upload:
      issue.summary = "The video upload did not complete.";
      issue.suggestions = {"Check your internet connection and submit the video again.",
                           "If the file is large, trim it to just the sign before uploading."};
      break;
    case IssueCode::undecodable:
      issue.summary = "The video could not be read.";
      issue.suggestions = {"Record the sign again with the built-in webcam recorder.",
                           "Upload a common video format such as MP4 or WebM."};
      break;
    case IssueCode::low_resolution:
      issue.summary = "The video resolution is low, which could lead to worse results.";
      issue.suggestions = {"Use a camera with a higher resolution if available.",
                           "Move closer to the camera so your signing space fills more of the frame."};
      break;
    case IssueCode::multiple_people:
      issue.summary = "More than one person is visible in the video.";
      issue.suggestions = {"Make sure only the signer is in the frame.",
                           "Ask others to step out of view or find a spot with an empty background."};
      break;
    case IssueCode::off_center:
      issue.summary = "The signer is not centered in the frame.";
      issue.suggestions = {"Move to the middle of the frame.", "Adjust the camera so it points straight at you."};
      break;
    case IssueCode::hands_not_visible:
      issue.summary = "Your hands are not clearly visible.";
      issue.suggestions = {"Keep both hands inside the frame while signing.",
                           "Step back from the camera so your full signing space is visible."};
      break;
    case IssueCode::torso_not_visible:
      issue.summary = "Your upper body is not clearly visible.";
      issue.suggestions = {"Step back so your shoulders and waist are in the frame.",
                           "Lower or tilt the camera to show your torso."};
      break;
    case IssueCode::face_not_visible:
      issue.summary = "Your face is not clearly visible.";
      issue.suggestions = {"Keep your face inside the frame and unobstructed.",
                           "Improve the lighting in front of you."};
      break;
  }
  return issue;
}

void GateThresholds::validate() const {
  if (min_width <= 0 || min_height <= 0 || !(center_band > 0.0) || center_band > 1.0 || !(visibility_floor > 0.0) ||
      !(min_visible_fraction > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "gate thresholds must be positive and center_band <= 1");
  }
}

std::vector<Issue> check_technical(Resolution resolution, ByteStatus status, const GateThresholds& t) {
  t.validate();
  switch (status) {
    case ByteStatus::truncated: return {make_issue(IssueCode::incomplete_upload)};
    case ByteStatus::undecodable: return {make_issue(IssueCode::undecodable)};
    case ByteStatus::complete: break;
  }
  if (resolution.width < t.min_width || resolution.height < t.min_height) {
    return {make_issue(IssueCode::low_resolution)};
  }
  return {};
}

namespace {

// Mean over frames of the fraction of `indices` at or above the floor.
double visible_fraction(const PoseSequence& seq, std::span<const std::size_t> indices, double floor) {
  double total = 0.0;
  for (const auto& frame : seq.frames()) {
    std::size_t visible = 0;
    for (auto i : indices) visible += frame[i].visibility >= floor ? 1 : 0;
    total += static_cast<double>(visible) / static_cast<double>(indices.size());
  }
  return total / static_cast<double>(seq.frame_count());
}

double mean_torso_x(const PoseSequence& seq) {
  double total = 0.0;
  for (const auto& frame : seq.frames()) {
    double x = 0.0;
    for (auto i : landmarks::kTorso) x += frame[i].x;
    total += x / static_cast<double>(landmarks::kTorso.size());
  }
  return total / static_cast<double>(seq.frame_count());
}

}  // namespace

std::vector<Issue> check_visibility(const std::vector<PoseSequence>& people, const GateThresholds& t) {
  t.validate();
  if (people.empty()) throw Error(ErrorCode::invalid_argument, "no pose tracks to check");
  if (people.size() > 1) return {make_issue(IssueCode::multiple_people)};

  const PoseSequence& seq = people.front();
  std::vector<Issue> issues;
  const double cx = mean_torso_x(seq);
  if (cx < 0.5 - t.center_band / 2.0 || cx > 0.5 + t.center_band / 2.0) {
    issues.push_back(make_issue(IssueCode::off_center));
  }

  std::vector<std::size_t> hands;
  for (std::size_t i = landmarks::kLeftHandBegin; i < landmarks::kCount; ++i) hands.push_back(i);
  if (visible_fraction(seq, hands, t.visibility_floor) < t.min_visible_fraction) {
    issues.push_back(make_issue(IssueCode::hands_not_visible));
  }
  if (visible_fraction(seq, landmarks::kTorso, t.visibility_floor) < t.min_visible_fraction) {
    issues.push_back(make_issue(IssueCode::torso_not_visible));
  }
  if (visible_fraction(seq, landmarks::kFace, t.visibility_floor) < t.min_visible_fraction) {
    issues.push_back(make_issue(IssueCode::face_not_visible));
  }
  return issues;
}

SubmissionReport gate(std::vector<Issue> technical, std::vector<Issue> visibility) {
  SubmissionReport report;
  report.issues = std::move(technical);
  report.issues.insert(report.issues.end(), std::make_move_iterator(visibility.begin()),
                       std::make_move_iterator(visibility.end()));
  const bool any_error = std::any_of(report.issues.begin(), report.issues.end(),
                                     [](const Issue& i) { return i.severity == Severity::error; });
  if (any_error) {
    report.verdict = Verdict::reject;
  } else if (!report.issues.empty()) {
    report.verdict = Verdict::proceed_with_warnings;
  } else {
    report.verdict = Verdict::proceed;
  }
  return report;
}

std::string render_message(const Issue& issue) {
  std::string out = "**" + issue.summary + "**\n";
  for (const auto& s : issue.suggestions) out += "- " + s + "\n";
  return out;
}

}  // namespace signdict
