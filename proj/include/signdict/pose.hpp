#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace signdict {

// 75-point schema: 33 body landmarks (MediaPipe pose order), then 21 left-hand
// and 21 right-hand landmarks (MediaPipe hand order).
namespace landmarks {
inline constexpr std::size_t kBodyCount = 33;
inline constexpr std::size_t kHandCount = 21;
inline constexpr std::size_t kCount = kBodyCount + 2 * kHandCount;
inline constexpr std::size_t kLeftHandBegin = 33;
inline constexpr std::size_t kRightHandBegin = 54;

inline constexpr std::size_t kNose = 0;
inline constexpr std::size_t kLeftShoulder = 11;
inline constexpr std::size_t kRightShoulder = 12;
inline constexpr std::size_t kLeftElbow = 13;
inline constexpr std::size_t kRightElbow = 14;
inline constexpr std::size_t kLeftWrist = 15;
inline constexpr std::size_t kRightWrist = 16;
inline constexpr std::size_t kLeftHip = 23;
inline constexpr std::size_t kRightHip = 24;

// Region membership used by the quality gate and by normalization.
inline constexpr std::array<std::size_t, 11> kFace = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
inline constexpr std::array<std::size_t, 4> kTorso = {kLeftShoulder, kRightShoulder, kLeftHip, kRightHip};

// Body points that move rigidly with each arm below the shoulder.
inline constexpr std::array<std::size_t, 5> kLeftArmBody = {13, 15, 17, 19, 21};
inline constexpr std::array<std::size_t, 5> kRightArmBody = {14, 16, 18, 20, 22};

// Every index of the schema.
std::vector<std::size_t> all_indices();
// Compact subset: nose, shoulders, elbows, wrists, and per hand the wrist,
// thumb tip, index tip, middle tip and pinky tip.
std::vector<std::size_t> compact_subset();
// 12 upper-body points (eyes, ears, mouth corners, shoulders, elbows,
// wrists) plus both full hands: the 54-point body-and-hands layout.
std::vector<std::size_t> body_hands_subset();
}  // namespace landmarks

struct Landmark {
  double x = 0.0;
  double y = 0.0;
  double visibility = 0.0;

  bool operator==(const Landmark&) const = default;
};

using PoseFrame = std::array<Landmark, landmarks::kCount>;

struct Resolution {
  int width = 640;
  int height = 480;

  bool operator==(const Resolution&) const = default;
};

inline constexpr Resolution kStandardResolution{640, 480};

// Immutable sequence of frames. The constructor validates every invariant:
// at least one frame, fps > 0, resolution >= 1x1, every value finite in [0,1].
class PoseSequence {
 public:
  PoseSequence(std::vector<PoseFrame> frames, double fps, Resolution resolution);

  const std::vector<PoseFrame>& frames() const { return frames_; }
  std::size_t frame_count() const { return frames_.size(); }
  const PoseFrame& frame(std::size_t i) const { return frames_.at(i); }
  double fps() const { return fps_; }
  Resolution resolution() const { return resolution_; }
  double duration_s() const { return static_cast<double>(frames_.size()) / fps_; }

  bool operator==(const PoseSequence&) const = default;

 private:
  std::vector<PoseFrame> frames_;
  double fps_;
  Resolution resolution_;
};

// Text format:
//   POSE v1 fps=<float> w=<int> h=<int> n=75
//   <225 space-separated decimals per frame: x y v for each landmark>
// A file may hold several tracks (one per detected person), each introduced
// by its own header line.
std::string format_pose(const PoseSequence& seq);
std::string format_pose_tracks(const std::vector<PoseSequence>& tracks);
std::vector<PoseSequence> parse_pose_tracks(std::string_view text);
// Exactly one track required.
PoseSequence parse_pose(std::string_view text);

PoseSequence parse_pose_file(const std::filesystem::path& path);
std::vector<PoseSequence> parse_pose_tracks_file(const std::filesystem::path& path);
void write_pose_file(const PoseSequence& seq, const std::filesystem::path& path);

// Frames floor(start_s*fps) .. ceil(end_s*fps)-1 inclusive. Requires
// 0 <= start_s < end_s <= duration.
PoseSequence trim(const PoseSequence& seq, double start_s, double end_s);

// Snaps coordinates to the pixel grid of a (640*ratio)x(480*ratio) capture.
PoseSequence quantize_resolution(const PoseSequence& seq, double ratio);
Resolution scaled_resolution(double ratio);

// Adds (dx, dy) to every coordinate; throws if a landmark leaves [0,1].
PoseSequence translate(const PoseSequence& seq, double dx, double dy);

}  // namespace signdict
