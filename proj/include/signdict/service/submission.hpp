#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "signdict/estimator.hpp"
#include "signdict/quality_gate.hpp"
#include "signdict/ranking.hpp"

namespace signdict::service {

enum class SubmissionState { received, checking, rejected, predicting, done, failed };

std::string_view to_string(SubmissionState s);
SubmissionState parse_state(std::string_view token);

// received->checking->(rejected|predicting)->(done|failed).
bool legal_transition(SubmissionState from, SubmissionState to);
bool is_terminal(SubmissionState s);

struct TrimBounds {
  double start_s = 0.0;
  double end_s = 0.0;
};

// Wall-clock times are seconds since the Unix epoch.
struct Submission {
  std::string id;
  SubmissionState state = SubmissionState::received;
  double created_at = 0.0;
  double updated_at = 0.0;
  std::optional<TrimBounds> trim;
  std::optional<ByteStatus> byte_status;
  std::optional<Resolution> resolution;
  double input_duration_s = 0.0;
  SubmissionReport report;
  double predicted_total_s = 0.0;
  std::optional<double> predicting_since;
  std::optional<double> finished_at;
  std::optional<std::vector<RankedResult>> results;
  bool media_retained = false;
  std::optional<double> media_purged_at;
  std::string error;

  // Moves to `to`; throws Error{conflict} on an illegal transition.
  void advance(SubmissionState to, double now);
};

struct Progress {
  double progress = 0.0;
  double eta_s = 0.0;
  double elapsed_s = 0.0;
  double predicted_total_s = 0.0;
};

// While predicting: min(elapsed / predicted_total, 0.99). Done: 1. Failed
// keeps the value reached when it stopped. Earlier states: 0.
Progress progress_of(const Submission& s, double now);

// "6.4/7.0s"
std::string time_label(double elapsed_s, double predicted_total_s);

nlohmann::json issue_json(const Issue& issue);
nlohmann::json report_json(const SubmissionReport& report);
nlohmann::json result_json(const RankedResult& r);
nlohmann::json status_json(const Submission& s, double now);
nlohmann::json view_json(const std::string& id, const ResultView& view, const FilterCriteria& filter,
                         std::size_t matches);

// Storage form; round-trips every field.
nlohmann::json to_record(const Submission& s);
Submission from_record(const nlohmann::json& j);

}  // namespace signdict::service
