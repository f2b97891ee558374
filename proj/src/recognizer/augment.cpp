#include "signdict/recognizer/augment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

namespace signdict::recognizer {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void rotate_about(Landmark& lm, double cx, double cy, double c, double s) {
  const double dx = lm.x - cx;
  const double dy = lm.y - cy;
  lm.x = cx + c * dx - s * dy;
  lm.y = cy + s * dx + c * dy;
}

// Elbow, wrist, body hand points and the full hand landmark block.
void rotate_arm(std::vector<PoseFrame>& frames, bool left, double angle_rad) {
  const std::size_t shoulder = left ? landmarks::kLeftShoulder : landmarks::kRightShoulder;
  const auto& body = left ? landmarks::kLeftArmBody : landmarks::kRightArmBody;
  const std::size_t hand_begin = left ? landmarks::kLeftHandBegin : landmarks::kRightHandBegin;
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  for (auto& frame : frames) {
    const double cx = frame[shoulder].x, cy = frame[shoulder].y;
    for (auto i : body) rotate_about(frame[i], cx, cy, c, s);
    for (std::size_t i = hand_begin; i < hand_begin + landmarks::kHandCount; ++i) rotate_about(frame[i], cx, cy, c, s);
  }
}

void rotate_global(std::vector<PoseFrame>& frames, double angle_rad) {
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  for (auto& frame : frames) {
    for (auto& lm : frame) rotate_about(lm, 0.5, 0.5, c, s);
  }
}

void squeeze(std::vector<PoseFrame>& frames, double factor) {
  for (auto& frame : frames) {
    for (auto& lm : frame) lm.x = 0.5 + (lm.x - 0.5) * factor;
  }
}

// Homography taking the unit square onto a trapezoid whose top corners are
// pulled inward by `left` and `right`.
Eigen::Matrix3d perspective_homography(double left, double right) {
  const double src[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const double dst[4][2] = {{left, 0}, {1 - right, 0}, {1, 1}, {0, 1}};
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int k = 0; k < 4; ++k) {
    const double x = src[k][0], y = src[k][1], u = dst[k][0], v = dst[k][1];
    a.row(2 * k) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * k + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * k) = u;
    b(2 * k + 1) = v;
  }
  const Eigen::Matrix<double, 8, 1> h = a.fullPivLu().solve(b);
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return m;
}

void warp(std::vector<PoseFrame>& frames, const Eigen::Matrix3d& m) {
  for (auto& frame : frames) {
    for (auto& lm : frame) {
      const Eigen::Vector3d p = m * Eigen::Vector3d(lm.x, lm.y, 1.0);
      lm.x = p.x() / p.z();
      lm.y = p.y() / p.z();
    }
  }
}

}  // namespace

PoseSequence augment(const PoseSequence& seq, const AugmentationConfig& cfg, Rng& rng) {
  cfg.validate();
  // Fixed draw order keeps seeded runs reproducible regardless of branches.
  const bool apply = rng.bernoulli(cfg.apply_probability);
  const bool left_arm = rng.bernoulli(cfg.arm_joint_rotate_probability);
  const double left_angle = rng.uniform(-cfg.max_arm_joint_rotate_deg, cfg.max_arm_joint_rotate_deg);
  const bool right_arm = rng.bernoulli(cfg.arm_joint_rotate_probability);
  const double right_angle = rng.uniform(-cfg.max_arm_joint_rotate_deg, cfg.max_arm_joint_rotate_deg);
  const double global_angle = rng.uniform(-cfg.max_global_rotate_deg, cfg.max_global_rotate_deg);
  const double squeeze_factor = rng.uniform(1.0 - cfg.max_squeeze_ratio, 1.0);
  const double persp_left = rng.uniform(0.0, cfg.max_perspective_ratio);
  const double persp_right = rng.uniform(0.0, cfg.max_perspective_ratio);
  if (!apply) return seq;

  std::vector<PoseFrame> frames = seq.frames();
  if (left_arm && left_angle != 0.0) rotate_arm(frames, true, left_angle * kDegToRad);
  if (right_arm && right_angle != 0.0) rotate_arm(frames, false, right_angle * kDegToRad);
  if (global_angle != 0.0) rotate_global(frames, global_angle * kDegToRad);
  if (squeeze_factor != 1.0) squeeze(frames, squeeze_factor);
  if (persp_left != 0.0 || persp_right != 0.0) warp(frames, perspective_homography(persp_left, persp_right));

  for (auto& frame : frames) {
    for (auto& lm : frame) {
      lm.x = std::clamp(lm.x, 0.0, 1.0);
      lm.y = std::clamp(lm.y, 0.0, 1.0);
    }
  }
  return PoseSequence(std::move(frames), seq.fps(), seq.resolution());
}

}  // namespace signdict::recognizer
