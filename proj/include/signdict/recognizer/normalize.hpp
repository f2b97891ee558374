#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "signdict/pose.hpp"

namespace signdict::recognizer {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// T x 2L feature rows (x0 y0 x1 y1 ...) plus a T x L visibility mask.
struct FeatureFrames {
  Matrix values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> mask;

  std::size_t frames() const { return static_cast<std::size_t>(values.rows()); }
};

// Torso-anchored normalization over the whole sequence: subtracts the mean
// position of the visible torso landmarks and divides by the diagonal of
// their bounding box. Landmarks with zero visibility become (0, 0) with a
// false mask bit. The centering is evaluated as (n*x - sum) / (n*diag), which
// is exactly shift-invariant whenever the shift itself is exact.
// Throws Error{degenerate_pose} if no torso landmark is visible or the box
// has zero diagonal.
FeatureFrames normalize_frames(std::span<const PoseFrame> frames, std::span<const std::size_t> subset);
FeatureFrames normalize(const PoseSequence& seq, std::span<const std::size_t> subset);

// Uniformly subsamples to at most max_frames rows (indices round(i*(T-1)/(M-1))).
FeatureFrames limit_frames(FeatureFrames features, std::size_t max_frames);

// Throws unless every index addresses the 75-point schema and none repeats.
void validate_subset(std::span<const std::size_t> subset);

}  // namespace signdict::recognizer
