#include "signdict/pose.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>

#include "signdict/error.hpp"
#include "signdict/text.hpp"

namespace signdict {

namespace landmarks {

std::vector<std::size_t> all_indices() {
  std::vector<std::size_t> out(kCount);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

std::vector<std::size_t> compact_subset() {
  std::vector<std::size_t> out = {kNose, kLeftShoulder, kRightShoulder, kLeftElbow, kRightElbow, kLeftWrist, kRightWrist};
  for (std::size_t base : {kLeftHandBegin, kRightHandBegin}) {
    for (std::size_t tip : {0, 4, 8, 12, 20}) out.push_back(base + tip);
  }
  return out;
}

std::vector<std::size_t> body_hands_subset() {
  std::vector<std::size_t> out = {2, 5, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  for (std::size_t i = kLeftHandBegin; i < kCount; ++i) out.push_back(i);
  return out;
}

}  // namespace landmarks

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// Tolerant floor/ceil so that bounds computed as k/fps map back to frame k.
long long snap_floor(double v) { return static_cast<long long>(std::floor(v + 1e-9)); }
long long snap_ceil(double v) { return static_cast<long long>(std::ceil(v - 1e-9)); }

void append_fixed6(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  out.append(buf, ptr);
}

std::string format_fps(double fps) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, fps);
  return std::string(buf, ptr);
}

struct Header {
  double fps = 0.0;
  Resolution resolution;
};

Header parse_header(std::string_view line, std::size_t line_no) {
  const auto tokens = split_ws(line);
  const auto fail = [&](const std::string& why) {
    return Error(ErrorCode::parse, "pose line " + std::to_string(line_no) + ": malformed header: " + why);
  };
  if (tokens.size() != 6 || tokens[0] != "POSE") throw fail("expected 'POSE v1 fps=<f> w=<i> h=<i> n=75'");
  if (tokens[1] != "v1") throw fail("unsupported version '" + std::string(tokens[1]) + "'");
  Header h;
  long long w = 0, hh = 0, n = 0;
  auto value_of = [&](std::string_view tok, std::string_view key) -> std::string_view {
    if (tok.substr(0, key.size()) != key) throw fail("expected " + std::string(key));
    return tok.substr(key.size());
  };
  if (!parse_double(value_of(tokens[2], "fps="), h.fps) || !(h.fps > 0.0) || !std::isfinite(h.fps)) {
    throw fail("fps must be a positive number");
  }
  if (!parse_int(value_of(tokens[3], "w="), w) || w < 1) throw fail("w must be a positive integer");
  if (!parse_int(value_of(tokens[4], "h="), hh) || hh < 1) throw fail("h must be a positive integer");
  if (!parse_int(value_of(tokens[5], "n="), n) || n != static_cast<long long>(landmarks::kCount)) {
    throw fail("n must be 75");
  }
  h.resolution = {static_cast<int>(w), static_cast<int>(hh)};
  return h;
}

}  // namespace

PoseSequence::PoseSequence(std::vector<PoseFrame> frames, double fps, Resolution resolution)
    : frames_(std::move(frames)), fps_(fps), resolution_(resolution) {
  if (frames_.empty()) throw Error(ErrorCode::invalid_argument, "pose sequence needs at least one frame");
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) throw Error(ErrorCode::invalid_argument, "fps must be positive");
  if (resolution_.width < 1 || resolution_.height < 1) {
    throw Error(ErrorCode::invalid_argument, "resolution must be at least 1x1");
  }
  for (std::size_t f = 0; f < frames_.size(); ++f) {
    for (std::size_t i = 0; i < landmarks::kCount; ++i) {
      const auto& lm = frames_[f][i];
      if (!in_unit(lm.x) || !in_unit(lm.y) || !in_unit(lm.visibility)) {
        throw Error(ErrorCode::invalid_argument,
                    "frame " + std::to_string(f) + " landmark " + std::to_string(i) + ": value outside [0,1]");
      }
    }
  }
}

std::string format_pose(const PoseSequence& seq) {
  std::string out;
  out.reserve(64 + seq.frame_count() * landmarks::kCount * 3 * 9);
  out += "POSE v1 fps=" + format_fps(seq.fps()) + " w=" + std::to_string(seq.resolution().width) +
         " h=" + std::to_string(seq.resolution().height) + " n=" + std::to_string(landmarks::kCount) + "\n";
  for (const auto& frame : seq.frames()) {
    bool first = true;
    for (const auto& lm : frame) {
      for (double v : {lm.x, lm.y, lm.visibility}) {
        if (!first) out += ' ';
        first = false;
        append_fixed6(out, v);
      }
    }
    out += '\n';
  }
  return out;
}

std::string format_pose_tracks(const std::vector<PoseSequence>& tracks) {
  std::string out;
  for (const auto& t : tracks) out += format_pose(t);
  return out;
}

std::vector<PoseSequence> parse_pose_tracks(std::string_view text) {
  std::vector<PoseSequence> tracks;
  std::optional<Header> header;
  std::vector<PoseFrame> frames;
  auto flush = [&] {
    if (!header) return;
    if (frames.empty()) throw Error(ErrorCode::parse, "pose track without frames");
    tracks.emplace_back(std::move(frames), header->fps, header->resolution);
    frames.clear();
  };

  constexpr std::size_t kValues = landmarks::kCount * 3;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.substr(0, 4) == "POSE") {
      flush();
      header = parse_header(line, line_no);
      continue;
    }
    if (!header) throw Error(ErrorCode::parse, "pose line " + std::to_string(line_no) + ": malformed header");
    const auto tokens = split_ws(line);
    const std::size_t frame_index = frames.size();
    if (tokens.size() != kValues) {
      throw Error(ErrorCode::parse, "frame " + std::to_string(frame_index) + ": expected " +
                                        std::to_string(landmarks::kCount) + " landmarks, got " +
                                        std::to_string(tokens.size() / 3) + " (" + std::to_string(tokens.size()) +
                                        " values)");
    }
    PoseFrame frame;
    for (std::size_t i = 0; i < landmarks::kCount; ++i) {
      double v[3];
      for (std::size_t c = 0; c < 3; ++c) {
        if (!parse_double(tokens[3 * i + c], v[c])) {
          throw Error(ErrorCode::parse, "frame " + std::to_string(frame_index) + ": bad number '" +
                                            std::string(tokens[3 * i + c]) + "'");
        }
        if (!in_unit(v[c])) {
          throw Error(ErrorCode::parse, "frame " + std::to_string(frame_index) + " landmark " + std::to_string(i) +
                                            ": value " + std::string(tokens[3 * i + c]) + " outside [0,1]");
        }
      }
      frame[i] = {v[0], v[1], v[2]};
    }
    frames.push_back(frame);
  }
  flush();
  if (tracks.empty()) throw Error(ErrorCode::parse, "malformed header: no POSE header found");
  return tracks;
}

PoseSequence parse_pose(std::string_view text) {
  auto tracks = parse_pose_tracks(text);
  if (tracks.size() != 1) {
    throw Error(ErrorCode::parse, "expected a single pose track, found " + std::to_string(tracks.size()));
  }
  return std::move(tracks.front());
}

PoseSequence parse_pose_file(const std::filesystem::path& path) { return parse_pose(read_text_file(path)); }

std::vector<PoseSequence> parse_pose_tracks_file(const std::filesystem::path& path) {
  return parse_pose_tracks(read_text_file(path));
}

void write_pose_file(const PoseSequence& seq, const std::filesystem::path& path) {
  write_text_file(path, format_pose(seq));
}

PoseSequence trim(const PoseSequence& seq, double start_s, double end_s) {
  if (!std::isfinite(start_s) || !std::isfinite(end_s)) throw Error(ErrorCode::invalid_argument, "non-finite trim bounds");
  if (start_s >= end_s) throw Error(ErrorCode::invalid_argument, "start after end");
  if (start_s < 0.0 || end_s > seq.duration_s() + 1e-9) {
    throw Error(ErrorCode::invalid_argument, "trim bounds outside [0, duration]");
  }
  const auto n = static_cast<long long>(seq.frame_count());
  const long long first = std::clamp(snap_floor(start_s * seq.fps()), 0LL, n - 1);
  const long long last = std::clamp(snap_ceil(end_s * seq.fps()) - 1, first, n - 1);
  std::vector<PoseFrame> frames(seq.frames().begin() + first, seq.frames().begin() + last + 1);
  return PoseSequence(std::move(frames), seq.fps(), seq.resolution());
}

Resolution scaled_resolution(double ratio) {
  const int w = std::max(2, static_cast<int>(std::lround(kStandardResolution.width * ratio)));
  const int h = std::max(2, static_cast<int>(std::lround(kStandardResolution.height * ratio)));
  return {w, h};
}

PoseSequence quantize_resolution(const PoseSequence& seq, double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0) throw Error(ErrorCode::invalid_argument, "resolution ratio must be in (0, 1]");
  const Resolution res = scaled_resolution(ratio);
  const double sx = res.width - 1;
  const double sy = res.height - 1;
  std::vector<PoseFrame> frames = seq.frames();
  for (auto& frame : frames) {
    for (auto& lm : frame) {
      lm.x = std::round(lm.x * sx) / sx;
      lm.y = std::round(lm.y * sy) / sy;
    }
  }
  return PoseSequence(std::move(frames), seq.fps(), res);
}

PoseSequence translate(const PoseSequence& seq, double dx, double dy) {
  std::vector<PoseFrame> frames = seq.frames();
  for (auto& frame : frames) {
    for (auto& lm : frame) {
      lm.x += dx;
      lm.y += dy;
    }
  }
  return PoseSequence(std::move(frames), seq.fps(), seq.resolution());
}

}  // namespace signdict
