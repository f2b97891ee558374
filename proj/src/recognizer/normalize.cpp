#include "signdict/recognizer/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "signdict/error.hpp"

namespace signdict::recognizer {

void validate_subset(std::span<const std::size_t> subset) {
  if (subset.empty()) throw Error(ErrorCode::invalid_argument, "landmark subset is empty");
  std::vector<bool> seen(landmarks::kCount, false);
  for (auto i : subset) {
    if (i >= landmarks::kCount) {
      throw Error(ErrorCode::invalid_argument, "landmark index " + std::to_string(i) + " outside the schema");
    }
    if (seen[i]) throw Error(ErrorCode::invalid_argument, "landmark index " + std::to_string(i) + " repeated");
    seen[i] = true;
  }
}

FeatureFrames normalize_frames(std::span<const PoseFrame> frames, std::span<const std::size_t> subset) {
  validate_subset(subset);
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no frames to normalize");

  double n = 0.0, sum_x = 0.0, sum_y = 0.0;
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const auto& frame : frames) {
    for (auto i : landmarks::kTorso) {
      const auto& lm = frame[i];
      if (lm.visibility <= 0.0) continue;
      n += 1.0;
      sum_x += lm.x;
      sum_y += lm.y;
      min_x = std::min(min_x, lm.x);
      max_x = std::max(max_x, lm.x);
      min_y = std::min(min_y, lm.y);
      max_y = std::max(max_y, lm.y);
    }
  }
  if (n == 0.0) throw Error(ErrorCode::degenerate_pose, "degenerate pose: no visible torso landmarks");
  const double diag = std::hypot(max_x - min_x, max_y - min_y);
  if (!(diag > 0.0)) throw Error(ErrorCode::degenerate_pose, "degenerate pose: torso has zero extent");

  const double denom = n * diag;
  FeatureFrames out;
  out.values.setZero(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(2 * subset.size()));
  out.mask.setConstant(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(subset.size()), false);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto row = static_cast<Eigen::Index>(f);
    for (std::size_t j = 0; j < subset.size(); ++j) {
      const auto& lm = frames[f][subset[j]];
      if (lm.visibility <= 0.0) continue;
      const auto col = static_cast<Eigen::Index>(j);
      out.mask(row, col) = true;
      out.values(row, 2 * col) = (n * lm.x - sum_x) / denom;
      out.values(row, 2 * col + 1) = (n * lm.y - sum_y) / denom;
    }
  }
  return out;
}

FeatureFrames normalize(const PoseSequence& seq, std::span<const std::size_t> subset) {
  return normalize_frames(seq.frames(), subset);
}

FeatureFrames limit_frames(FeatureFrames features, std::size_t max_frames) {
  const std::size_t t = features.frames();
  if (max_frames == 0 || t <= max_frames) return features;
  FeatureFrames out;
  out.values.resize(static_cast<Eigen::Index>(max_frames), features.values.cols());
  out.mask.resize(static_cast<Eigen::Index>(max_frames), features.mask.cols());
  for (std::size_t i = 0; i < max_frames; ++i) {
    const double pos = max_frames == 1 ? 0.0
                                       : static_cast<double>(i) * static_cast<double>(t - 1) /
                                             static_cast<double>(max_frames - 1);
    const auto src = static_cast<Eigen::Index>(std::lround(pos));
    out.values.row(static_cast<Eigen::Index>(i)) = features.values.row(src);
    out.mask.row(static_cast<Eigen::Index>(i)) = features.mask.row(src);
  }
  return out;
}

}  // namespace signdict::recognizer
