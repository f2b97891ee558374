#include "signdict/service/submission.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "signdict/error.hpp"

namespace signdict::service {

std::string_view to_string(SubmissionState s) {
  switch (s) {
    case SubmissionState::received: return "received";
    case SubmissionState::checking: return "checking";
    case SubmissionState::rejected: return "rejected";
    case SubmissionState::predicting: return "predicting";
    case SubmissionState::done: return "done";
    case SubmissionState::failed: return "failed";
  }
  return "received";
}

SubmissionState parse_state(std::string_view token) {
  for (auto s : {SubmissionState::received, SubmissionState::checking, SubmissionState::rejected,
                 SubmissionState::predicting, SubmissionState::done, SubmissionState::failed}) {
    if (to_string(s) == token) return s;
  }
  throw Error(ErrorCode::unknown_token, "unknown submission state '" + std::string(token) + "'");
}

bool legal_transition(SubmissionState from, SubmissionState to) {
  using S = SubmissionState;
  switch (from) {
    case S::received: return to == S::checking;
    case S::checking: return to == S::rejected || to == S::predicting;
    case S::predicting: return to == S::done || to == S::failed;
    default: return false;
  }
}

bool is_terminal(SubmissionState s) {
  return s == SubmissionState::rejected || s == SubmissionState::done || s == SubmissionState::failed;
}

void Submission::advance(SubmissionState to, double now) {
  if (!legal_transition(state, to)) {
    throw Error(ErrorCode::conflict, "illegal transition " + std::string(to_string(state)) + " -> " +
                                         std::string(to_string(to)));
  }
  state = to;
  updated_at = now;
  if (to == SubmissionState::predicting) predicting_since = now;
  if (is_terminal(to)) finished_at = now;
}

Progress progress_of(const Submission& s, double now) {
  Progress p;
  p.predicted_total_s = s.predicted_total_s;
  switch (s.state) {
    case SubmissionState::done:
      p.progress = 1.0;
      p.elapsed_s = s.finished_at && s.predicting_since ? *s.finished_at - *s.predicting_since : 0.0;
      return p;
    case SubmissionState::predicting:
    case SubmissionState::failed: {
      if (!s.predicting_since) return p;
      const double end = s.state == SubmissionState::failed && s.finished_at ? *s.finished_at : now;
      p.elapsed_s = std::max(0.0, end - *s.predicting_since);
      p.progress = s.predicted_total_s > 0.0 ? std::min(p.elapsed_s / s.predicted_total_s, 0.99) : 0.99;
      p.eta_s = s.state == SubmissionState::failed ? 0.0 : std::max(s.predicted_total_s - p.elapsed_s, 0.0);
      return p;
    }
    default: return p;
  }
}

std::string time_label(double elapsed_s, double predicted_total_s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f/%.1fs", elapsed_s, predicted_total_s);
  return buf;
}

namespace {

IssueCode parse_issue_code(std::string_view token) {
  for (auto c : {IssueCode::incomplete_upload, IssueCode::undecodable, IssueCode::low_resolution,
                 IssueCode::multiple_people, IssueCode::off_center, IssueCode::hands_not_visible,
                 IssueCode::torso_not_visible, IssueCode::face_not_visible}) {
    if (to_string(c) == token) return c;
  }
  throw Error(ErrorCode::unknown_token, "unknown issue code '" + std::string(token) + "'");
}

ByteStatus parse_byte_status(std::string_view token) {
  for (auto b : {ByteStatus::complete, ByteStatus::truncated, ByteStatus::undecodable}) {
    if (to_string(b) == token) return b;
  }
  throw Error(ErrorCode::unknown_token, "unknown byte status '" + std::string(token) + "'");
}

Verdict parse_verdict(std::string_view token) {
  for (auto v : {Verdict::proceed, Verdict::proceed_with_warnings, Verdict::reject}) {
    if (to_string(v) == token) return v;
  }
  throw Error(ErrorCode::unknown_token, "unknown verdict '" + std::string(token) + "'");
}

Confidence parse_confidence(std::string_view token) {
  for (auto c : {Confidence::unlikely, Confidence::possibly, Confidence::probably}) {
    if (to_string(c) == token) return c;
  }
  throw Error(ErrorCode::unknown_token, "unknown confidence '" + std::string(token) + "'");
}

nlohmann::json metadata_json(const SignMetadata& m) {
  return {{"movement", to_string(m.movement)},
          {"hands", to_string(m.hands)},
          {"location", to_string(m.location)},
          {"handshape", m.handshape ? nlohmann::json(*m.handshape) : nlohmann::json(nullptr)}};
}

SignMetadata metadata_from(const nlohmann::json& j) {
  SignMetadata m;
  m.movement = parse_movement(j.at("movement").get<std::string>());
  m.hands = parse_hands(j.at("hands").get<std::string>());
  m.location = parse_location(j.at("location").get<std::string>());
  if (!j.at("handshape").is_null()) m.handshape = j.at("handshape").get<std::string>();
  return m;
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

nlohmann::json issue_json(const Issue& issue) {
  return {{"code", to_string(issue.code)},
          {"severity", to_string(issue.severity)},
          {"summary", issue.summary},
          {"suggestions", issue.suggestions},
          {"message", render_message(issue)}};
}

nlohmann::json report_json(const SubmissionReport& report) {
  nlohmann::json issues = nlohmann::json::array();
  for (const auto& i : report.issues) issues.push_back(issue_json(i));
  return {{"verdict", to_string(report.verdict)}, {"issues", issues}};
}

nlohmann::json result_json(const RankedResult& r) {
  return {{"rank", r.rank},
          {"original_rank", r.original_rank},
          {"class_index", r.class_index},
          {"rendition_id", r.rendition_id},
          {"gloss", r.gloss},
          {"probability", r.probability},
          {"confidence", to_string(r.confidence)},
          {"metadata", metadata_json(r.metadata)},
          {"example_media", r.example_media}};
}

nlohmann::json status_json(const Submission& s, double now) {
  const Progress p = progress_of(s, now);
  nlohmann::json j = {{"id", s.id},
                      {"state", to_string(s.state)},
                      {"progress", p.progress},
                      {"progress_percent", std::round(p.progress * 1000.0) / 10.0},
                      {"eta_s", p.eta_s},
                      {"elapsed_s", p.elapsed_s},
                      {"predicted_total_s", p.predicted_total_s},
                      {"time_label", time_label(p.elapsed_s, p.predicted_total_s)},
                      {"input_duration_s", s.input_duration_s},
                      {"media_retained", s.media_retained},
                      {"media_purged", s.media_purged_at.has_value()}};
  if (s.state != SubmissionState::received && s.state != SubmissionState::checking) {
    j["report"] = report_json(s.report);
  }
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

nlohmann::json view_json(const std::string& id, const ResultView& view, const FilterCriteria& filter,
                         std::size_t matches) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& r : view.grid) grid.push_back(result_json(r));
  return {{"id", id},
          {"view", to_string(view.kind)},
          {"applied_filter", filter.describe()},
          {"matches", matches},
          {"primary", view.primary ? result_json(*view.primary) : nlohmann::json(nullptr)},
          {"grid", grid}};
}

nlohmann::json to_record(const Submission& s) {
  nlohmann::json issues = nlohmann::json::array();
  for (const auto& i : s.report.issues) issues.push_back(to_string(i.code));
  nlohmann::json j = {{"id", s.id},
                      {"state", to_string(s.state)},
                      {"created_at", s.created_at},
                      {"updated_at", s.updated_at},
                      {"input_duration_s", s.input_duration_s},
                      {"issues", issues},
                      {"verdict", to_string(s.report.verdict)},
                      {"predicted_total_s", s.predicted_total_s},
                      {"predicting_since", opt(s.predicting_since)},
                      {"finished_at", opt(s.finished_at)},
                      {"media_retained", s.media_retained},
                      {"media_purged_at", opt(s.media_purged_at)},
                      {"error", s.error}};
  j["trim"] = s.trim ? nlohmann::json{s.trim->start_s, s.trim->end_s} : nlohmann::json(nullptr);
  j["byte_status"] = s.byte_status ? nlohmann::json(to_string(*s.byte_status)) : nlohmann::json(nullptr);
  j["resolution"] =
      s.resolution ? nlohmann::json{s.resolution->width, s.resolution->height} : nlohmann::json(nullptr);
  if (s.results) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : *s.results) results.push_back(result_json(r));
    j["results"] = results;
  } else {
    j["results"] = nullptr;
  }
  return j;
}

Submission from_record(const nlohmann::json& j) {
  try {
    Submission s;
    s.id = j.at("id").get<std::string>();
    s.state = parse_state(j.at("state").get<std::string>());
    s.created_at = j.at("created_at").get<double>();
    s.updated_at = j.at("updated_at").get<double>();
    s.input_duration_s = j.at("input_duration_s").get<double>();
    for (const auto& code : j.at("issues")) s.report.issues.push_back(make_issue(parse_issue_code(code.get<std::string>())));
    s.report.verdict = parse_verdict(j.at("verdict").get<std::string>());
    s.predicted_total_s = j.at("predicted_total_s").get<double>();
    s.predicting_since = opt_from<double>(j, "predicting_since");
    s.finished_at = opt_from<double>(j, "finished_at");
    s.media_retained = j.at("media_retained").get<bool>();
    s.media_purged_at = opt_from<double>(j, "media_purged_at");
    s.error = j.at("error").get<std::string>();
    if (!j.at("trim").is_null()) s.trim = TrimBounds{j["trim"][0].get<double>(), j["trim"][1].get<double>()};
    if (!j.at("byte_status").is_null()) s.byte_status = parse_byte_status(j["byte_status"].get<std::string>());
    if (!j.at("resolution").is_null()) s.resolution = Resolution{j["resolution"][0].get<int>(), j["resolution"][1].get<int>()};
    if (!j.at("results").is_null()) {
      std::vector<RankedResult> results;
      for (const auto& r : j["results"]) {
        RankedResult x;
        x.rank = r.at("rank").get<std::size_t>();
        x.original_rank = r.at("original_rank").get<std::size_t>();
        x.class_index = r.at("class_index").get<std::size_t>();
        x.rendition_id = r.at("rendition_id").get<std::string>();
        x.gloss = r.at("gloss").get<std::string>();
        x.probability = r.at("probability").get<double>();
        x.confidence = parse_confidence(r.at("confidence").get<std::string>());
        x.metadata = metadata_from(r.at("metadata"));
        x.example_media = r.at("example_media").get<std::string>();
        results.push_back(std::move(x));
      }
      s.results = std::move(results);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_file, std::string("submission record: ") + e.what());
  }
}

}  // namespace signdict::service
