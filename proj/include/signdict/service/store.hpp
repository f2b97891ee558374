#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "signdict/pose.hpp"
#include "signdict/service/submission.hpp"

struct sqlite3;

namespace signdict::service {

// Submission records live in an SQLite key-value table under `root`;
// raw uploads go to root/media and extracted poses to root/poses.
class SubmissionStore {
 public:
  explicit SubmissionStore(std::filesystem::path root);
  ~SubmissionStore();
  SubmissionStore(const SubmissionStore&) = delete;
  SubmissionStore& operator=(const SubmissionStore&) = delete;

  void put(const Submission& s);
  std::optional<Submission> get(const std::string& id) const;
  std::vector<Submission> all() const;

  void write_media(const std::string& id, std::string_view bytes);
  std::optional<std::string> read_media(const std::string& id) const;
  // Returns whether a file was removed.
  bool remove_media(const std::string& id);
  bool has_media(const std::string& id) const;

  void write_poses(const std::string& id, const std::vector<PoseSequence>& tracks);
  std::optional<std::vector<PoseSequence>> read_poses(const std::string& id) const;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path media_dir() const { return root_ / "media"; }
  std::filesystem::path pose_dir() const { return root_ / "poses"; }

 private:
  std::filesystem::path media_path(const std::string& id) const;
  std::filesystem::path pose_path(const std::string& id) const;

  std::filesystem::path root_;
  sqlite3* db_ = nullptr;
  mutable std::mutex mutex_;
};

}  // namespace signdict::service
