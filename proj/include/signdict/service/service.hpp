#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "signdict/eval.hpp"
#include "signdict/quality_gate.hpp"
#include "signdict/ranking.hpp"
#include "signdict/recognizer/model.hpp"
#include "signdict/service/store.hpp"
#include "signdict/service/submission.hpp"

namespace signdict::service {

inline constexpr std::size_t kDefaultMaxUploadBytes = 100u * 1024u * 1024u;

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path model_path;
  std::optional<std::filesystem::path> catalog_path;
  bool retain_media = false;
  // Fixed fit from a calibration file; without one the fit updates live.
  std::optional<std::filesystem::path> latency_calibration_path;
  std::filesystem::path storage_dir = "signdict-data";
  std::filesystem::path web_root;
  std::size_t max_upload_bytes = kDefaultMaxUploadBytes;
  std::size_t workers = 0;  // 0: hardware concurrency
  GateThresholds thresholds;

  // PORT, MODEL_PATH, CATALOG_PATH, RETAIN_MEDIA, LATENCY_CALIBRATION_PATH,
  // STORAGE_DIR and WEB_ROOT override the matching fields of `base`.
  static ServiceConfig from_env(ServiceConfig base);
};

bool parse_bool_flag(std::string_view token);

// Duration-to-inference-time mapping behind progress and ETA.
class LatencyEstimator {
 public:
  // Live: starts at one second per input second and refits from completed
  // predictions once two distinct input lengths have been seen.
  LatencyEstimator() = default;
  explicit LatencyEstimator(eval::LatencyModel fixed) : fixed_(fixed) {}

  double predict(double input_seconds) const;
  void observe(double input_seconds, double prediction_seconds);
  eval::LatencyModel current() const;
  bool live() const { return !fixed_.has_value(); }

 private:
  std::optional<eval::LatencyModel> fixed_;
  std::optional<eval::LatencyModel> fitted_;
  std::vector<eval::LatencyObservation> observations_;
  mutable std::mutex mutex_;
};

struct Upload {
  std::string bytes;
  std::optional<TrimBounds> trim;
};

class SubmissionService {
 public:
  using Clock = std::function<double()>;

  struct Options {
    bool retain_media = false;
    std::size_t max_upload_bytes = kDefaultMaxUploadBytes;
    std::size_t workers = 0;
    GateThresholds thresholds;
    Clock clock;  // defaults to the system clock
  };

  // `active` must be the model's training vocabulary.
  SubmissionService(std::shared_ptr<const recognizer::TrainedModel> model, const VocabularyCatalog& active,
                    std::shared_ptr<const PoseEstimator> estimator, std::shared_ptr<LatencyEstimator> latency,
                    std::filesystem::path storage_dir, Options options);
  ~SubmissionService();
  SubmissionService(const SubmissionService&) = delete;
  SubmissionService& operator=(const SubmissionService&) = delete;

  // Stores the upload and queues it; returns the new id.
  std::string create(Upload upload);
  Submission snapshot(const std::string& id) const;
  nlohmann::json status(const std::string& id) const;
  // Throws Error{conflict} unless the submission is done. Compact views
  // ignore the filter.
  ResultView results(const std::string& id, ViewKind kind, const FilterCriteria& filter,
                     std::size_t* matches = nullptr) const;
  // Idempotent.
  void purge_media(const std::string& id);
  // Blocks until the queue is drained.
  void wait_idle();

  const recognizer::TrainedModel& model() const { return *model_; }
  const VocabularyCatalog& catalog() const { return model_->catalog(); }
  const LatencyEstimator& latency() const { return *latency_; }
  const SubmissionStore& store() const { return store_; }
  std::size_t max_upload_bytes() const { return options_.max_upload_bytes; }
  double now() const { return options_.clock(); }

 private:
  void worker_loop(std::stop_token stop);
  void process(const std::string& id);
  void check(Submission& s, std::vector<PoseSequence>& tracks);
  void recognize(Submission& s, const std::vector<PoseSequence>& tracks);
  void commit(const Submission& s);
  void resume_pending();
  std::string new_id();

  std::shared_ptr<const recognizer::TrainedModel> model_;
  std::shared_ptr<const PoseEstimator> estimator_;
  std::shared_ptr<LatencyEstimator> latency_;
  SubmissionStore store_;
  Options options_;

  mutable std::mutex mutex_;
  std::map<std::string, Submission> submissions_;
  std::deque<std::string> queue_;
  std::size_t in_flight_ = 0;
  std::condition_variable_any work_cv_;
  std::condition_variable idle_cv_;
  std::mt19937_64 id_rng_;
  std::vector<std::jthread> workers_;
};

}  // namespace signdict::service
