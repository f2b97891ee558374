#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signdict/pose.hpp"
#include "signdict/synth.hpp"

namespace signdict {

enum class ByteStatus { complete, truncated, undecodable };

std::string_view to_string(ByteStatus status);

// What a media prober (ffprobe in a real deployment) reports about an upload.
struct MediaProbe {
  ByteStatus status = ByteStatus::undecodable;
  std::optional<Resolution> resolution;
  std::string detail;
};

struct EstimatorCapabilities {
  Resolution max_resolution{3840, 2160};
  std::vector<std::string> containers;
};

// Boundary to a pose-estimation tool. Implementations must be deterministic
// for identical input bytes. `estimate` returns one track per detected
// person, the signer first; it throws Error{parse} on undecodable media.
class PoseEstimator {
 public:
  virtual ~PoseEstimator() = default;
  virtual EstimatorCapabilities capabilities() const = 0;
  virtual MediaProbe probe(std::string_view media) const = 0;
  virtual std::vector<PoseSequence> estimate(std::string_view media) const = 0;
};

// Media bytes are a pose file (possibly with several tracks).
class FilePoseEstimator final : public PoseEstimator {
 public:
  EstimatorCapabilities capabilities() const override;
  // A file whose header parses but whose last frame line is short or lacks
  // its terminating newline is reported as truncated.
  MediaProbe probe(std::string_view media) const override;
  std::vector<PoseSequence> estimate(std::string_view media) const override;
};

// Media bytes are a generator description, e.g. "class=3,seed=9". Keys:
// class (required), seed, index, classes, frames, noise, fps, w, h,
// people (adds bystander tracks), hide (comma-free list of regions joined by
// '+': hands, face, torso; zeroes their visibility).
class SyntheticPoseEstimator final : public PoseEstimator {
 public:
  struct Request {
    SynthSpec spec;
    ClassIndex label = 0;
    std::size_t index = 0;
    std::size_t people = 1;
    Resolution resolution = kStandardResolution;
    bool hide_hands = false;
    bool hide_face = false;
    bool hide_torso = false;
  };

  static Request parse_request(std::string_view media);

  EstimatorCapabilities capabilities() const override;
  MediaProbe probe(std::string_view media) const override;
  std::vector<PoseSequence> estimate(std::string_view media) const override;
};

// Dispatches on content: "POSE" headers go to the file-backed estimator,
// anything else is tried as a synthetic request.
class AutoPoseEstimator final : public PoseEstimator {
 public:
  EstimatorCapabilities capabilities() const override;
  MediaProbe probe(std::string_view media) const override;
  std::vector<PoseSequence> estimate(std::string_view media) const override;

 private:
  const PoseEstimator& route(std::string_view media) const;
  FilePoseEstimator file_;
  SyntheticPoseEstimator synthetic_;
};

// The signer's track (first person) from the estimator.
PoseSequence estimate(const PoseEstimator& estimator, std::string_view media);

}  // namespace signdict
