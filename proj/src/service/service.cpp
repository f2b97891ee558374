#include "signdict/service/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "signdict/error.hpp"
#include "signdict/text.hpp"

namespace signdict::service {

namespace fs = std::filesystem;

namespace {

double system_now() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace

bool parse_bool_flag(std::string_view token) {
  std::string t(token);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off" || t.empty()) return false;
  throw Error(ErrorCode::invalid_argument, "expected a boolean, got '" + std::string(token) + "'");
}

ServiceConfig ServiceConfig::from_env(ServiceConfig base) {
  if (auto v = env("PORT")) {
    long long port = 0;
    if (!parse_int(*v, port) || port < 0 || port > 65535) {
      throw Error(ErrorCode::invalid_argument, "PORT must be 0..65535, got '" + *v + "'");
    }
    base.port = static_cast<int>(port);
  }
  if (auto v = env("MODEL_PATH")) base.model_path = *v;
  if (auto v = env("CATALOG_PATH")) base.catalog_path = fs::path(*v);
  if (auto v = env("RETAIN_MEDIA")) base.retain_media = parse_bool_flag(*v);
  if (auto v = env("LATENCY_CALIBRATION_PATH")) base.latency_calibration_path = fs::path(*v);
  if (auto v = env("STORAGE_DIR")) base.storage_dir = *v;
  if (auto v = env("WEB_ROOT")) base.web_root = *v;
  return base;
}

double LatencyEstimator::predict(double input_seconds) const {
  return std::max(0.0, current().predict(input_seconds));
}

void LatencyEstimator::observe(double input_seconds, double prediction_seconds) {
  if (fixed_) return;
  std::lock_guard lock(mutex_);
  observations_.emplace_back(input_seconds, prediction_seconds);
  std::set<double> xs;
  for (const auto& o : observations_) xs.insert(o.first);
  if (xs.size() >= 2) fitted_ = eval::latency_fit(observations_);
}

eval::LatencyModel LatencyEstimator::current() const {
  if (fixed_) return *fixed_;
  std::lock_guard lock(mutex_);
  if (fitted_) return *fitted_;
  return eval::LatencyModel{1.0, 0.0, 0.0};
}

SubmissionService::SubmissionService(std::shared_ptr<const recognizer::TrainedModel> model,
                                     const VocabularyCatalog& active, std::shared_ptr<const PoseEstimator> estimator,
                                     std::shared_ptr<LatencyEstimator> latency, fs::path storage_dir,
                                     Options options)
    : model_(std::move(model)),
      estimator_(std::move(estimator)),
      latency_(std::move(latency)),
      store_(std::move(storage_dir)),
      options_(std::move(options)),
      id_rng_(std::random_device{}()) {
  if (!model_ || !estimator_ || !latency_) throw Error(ErrorCode::invalid_argument, "service needs a model, an estimator and a latency source");
  if (active.fingerprint() != model_->fingerprint()) {
    throw Error(ErrorCode::fingerprint_mismatch, "model was trained on catalog " +
                                                     fingerprint_hex(model_->fingerprint()) +
                                                     " but the active catalog is " + fingerprint_hex(active.fingerprint()));
  }
  options_.thresholds.validate();
  if (!options_.clock) options_.clock = system_now;
  for (auto& s : store_.all()) submissions_.emplace(s.id, std::move(s));
  resume_pending();
  const std::size_t n = options_.workers ? options_.workers : std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
}

SubmissionService::~SubmissionService() {
  for (auto& w : workers_) w.request_stop();
  work_cv_.notify_all();
  workers_.clear();
}

void SubmissionService::resume_pending() {
  for (const auto& [id, s] : submissions_) {
    if (!is_terminal(s.state)) queue_.push_back(id);
  }
}

std::string SubmissionService::new_id() {
  std::lock_guard lock(mutex_);
  for (;;) {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(id_rng_()),
                  static_cast<unsigned long long>(id_rng_()));
    if (!submissions_.contains(buf)) return buf;
  }
}

std::string SubmissionService::create(Upload upload) {
  if (upload.bytes.empty()) throw Error(ErrorCode::invalid_argument, "empty upload");
  if (upload.bytes.size() > options_.max_upload_bytes) {
    throw Error(ErrorCode::invalid_argument, "upload of " + std::to_string(upload.bytes.size()) +
                                                 " bytes exceeds the limit of " +
                                                 std::to_string(options_.max_upload_bytes));
  }
  if (upload.trim) {
    const auto& t = *upload.trim;
    if (!std::isfinite(t.start_s) || !std::isfinite(t.end_s) || t.start_s < 0.0 || t.start_s >= t.end_s) {
      throw Error(ErrorCode::invalid_argument, "trim bounds must satisfy 0 <= start < end");
    }
  }
  Submission s;
  s.id = new_id();
  s.created_at = s.updated_at = now();
  s.trim = upload.trim;
  s.media_retained = options_.retain_media;
  store_.write_media(s.id, upload.bytes);
  store_.put(s);
  {
    std::lock_guard lock(mutex_);
    submissions_.emplace(s.id, s);
    queue_.push_back(s.id);
  }
  work_cv_.notify_one();
  return s.id;
}

Submission SubmissionService::snapshot(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = submissions_.find(id);
  if (it == submissions_.end()) throw Error(ErrorCode::not_found, "unknown submission '" + id + "'");
  return it->second;
}

nlohmann::json SubmissionService::status(const std::string& id) const { return status_json(snapshot(id), now()); }

ResultView SubmissionService::results(const std::string& id, ViewKind kind, const FilterCriteria& filter,
                                      std::size_t* matches) const {
  const Submission s = snapshot(id);
  if (s.state != SubmissionState::done || !s.results) {
    throw Error(ErrorCode::conflict, "submission is " + std::string(to_string(s.state)) + ", not done");
  }
  if (kind == ViewKind::compact) {
    if (matches) *matches = s.results->size();
    return compose_view(*s.results, kind);
  }
  const auto filtered = filter_results(*s.results, filter);
  if (matches) *matches = filtered.size();
  if (filtered.empty()) return ResultView{kind, std::nullopt, {}};
  return compose_view(filtered, kind);
}

void SubmissionService::purge_media(const std::string& id) {
  snapshot(id);
  const bool removed = store_.remove_media(id);
  std::lock_guard lock(mutex_);
  auto& s = submissions_.at(id);
  if (removed || !s.media_purged_at) {
    s.media_purged_at = now();
    store_.put(s);
  }
}

void SubmissionService::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && in_flight_ == 0; });
}

void SubmissionService::worker_loop(std::stop_token stop) {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mutex_);
      if (!work_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      id = queue_.front();
      queue_.pop_front();
      ++in_flight_;
    }
    process(id);
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
    }
    idle_cv_.notify_all();
  }
}

void SubmissionService::commit(const Submission& s) {
  std::lock_guard lock(mutex_);
  Submission merged = s;
  // A purge request may have landed while the pipeline held its copy.
  const auto& current = submissions_.at(s.id);
  if (!merged.media_purged_at && current.media_purged_at) merged.media_purged_at = current.media_purged_at;
  store_.put(merged);
  submissions_[s.id] = std::move(merged);
}

void SubmissionService::process(const std::string& id) {
  Submission s = snapshot(id);
  std::vector<PoseSequence> tracks;
  try {
    if (s.state == SubmissionState::received) {
      s.advance(SubmissionState::checking, now());
      commit(s);
    }
    if (s.state == SubmissionState::checking) check(s, tracks);
    if (s.state == SubmissionState::predicting) recognize(s, tracks);
  } catch (const std::exception& e) {
    // Only reachable from predicting; earlier failures become gate issues.
    s.error = e.what();
    if (s.state == SubmissionState::predicting) s.advance(SubmissionState::failed, now());
    commit(s);
  }
  if (is_terminal(s.state) && !s.media_retained && store_.remove_media(id)) {
    s.media_purged_at = now();
    commit(s);
  }
}

void SubmissionService::check(Submission& s, std::vector<PoseSequence>& tracks) {
  std::vector<Issue> technical;
  std::vector<Issue> visibility;
  const auto media = store_.read_media(s.id);
  if (auto stored = store_.read_poses(s.id); stored && !stored->empty()) {
    // Resumed after extraction already happened.
    tracks = std::move(*stored);
    technical = check_technical(s.resolution.value_or(kStandardResolution),
                                s.byte_status.value_or(ByteStatus::complete), options_.thresholds);
  } else if (!media) {
    technical.push_back(make_issue(IssueCode::undecodable));
  } else {
    const MediaProbe probe = estimator_->probe(*media);
    s.byte_status = probe.status;
    s.resolution = probe.resolution;
    technical = check_technical(probe.resolution.value_or(kStandardResolution), probe.status, options_.thresholds);
    const bool blocked = std::any_of(technical.begin(), technical.end(),
                                     [](const Issue& i) { return i.severity == Severity::error; });
    if (!blocked) {
      try {
        tracks = estimator_->estimate(*media);
      } catch (const Error&) {
        tracks.clear();
      }
      if (tracks.empty()) {
        technical.push_back(make_issue(IssueCode::undecodable));
      } else {
        store_.write_poses(s.id, tracks);
      }
    }
  }
  if (!s.media_retained && store_.remove_media(s.id)) s.media_purged_at = now();
  if (!tracks.empty()) visibility = check_visibility(tracks, options_.thresholds);
  s.report = gate(std::move(technical), std::move(visibility));
  if (s.report.verdict == Verdict::reject) {
    s.advance(SubmissionState::rejected, now());
    commit(s);
    return;
  }
  // Clamp the declared end to the recording; trim failures surface as failed.
  std::optional<PoseSequence> input;
  std::string trim_error;
  try {
    input = tracks.front();
    if (s.trim) input = trim(*input, s.trim->start_s, std::min(s.trim->end_s, input->duration_s()));
  } catch (const Error& e) {
    trim_error = e.what();
  }
  s.input_duration_s = input ? input->duration_s() : 0.0;
  s.predicted_total_s = latency_->predict(s.input_duration_s);
  s.advance(SubmissionState::predicting, now());
  commit(s);
  if (!trim_error.empty()) throw Error(ErrorCode::invalid_argument, "trim: " + trim_error);
}

void SubmissionService::recognize(Submission& s, const std::vector<PoseSequence>& given) {
  std::vector<PoseSequence> tracks = given;
  if (tracks.empty()) {
    auto stored = store_.read_poses(s.id);
    if (!stored || stored->empty()) throw Error(ErrorCode::not_found, "pose sequence missing");
    tracks = std::move(*stored);
  }
  PoseSequence input = tracks.front();
  if (s.trim) input = trim(input, s.trim->start_s, std::min(s.trim->end_s, input.duration_s()));
  const double started = now();
  const auto dist = recognizer::predict(*model_, model_->catalog(), input);
  s.results = rank(dist, model_->catalog());
  const double elapsed = now() - started;
  s.advance(SubmissionState::done, now());
  commit(s);
  latency_->observe(s.input_duration_s, elapsed);
}

}  // namespace signdict::service
