#include "signdict/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "signdict/error.hpp"
#include "signdict/rng.hpp"

namespace signdict {

namespace {

using std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

constexpr std::array<Movement, 5> kMovements = {Movement::unidirectional, Movement::bidirectional, Movement::repeated,
                                                Movement::circular, Movement::none};
constexpr std::array<Location, 4> kLocations = {Location::torso, Location::neck, Location::face, Location::in_space};
constexpr std::array<const char*, 8> kHandshapes = {"5", "B", "A", "1", "C", "O", "V", "Y"};

// Resting body in normalized image coordinates (subject's left = image right).
constexpr std::array<Vec2, landmarks::kBodyCount> kBody = {{
    {0.500, 0.280},                                   // nose
    {0.515, 0.258}, {0.525, 0.257}, {0.535, 0.258},   // left eye inner/center/outer
    {0.485, 0.258}, {0.475, 0.257}, {0.465, 0.258},   // right eye
    {0.552, 0.272}, {0.448, 0.272},                   // ears
    {0.515, 0.312}, {0.485, 0.312},                   // mouth
    {0.600, 0.420}, {0.400, 0.420},                   // shoulders
    {0.640, 0.600}, {0.360, 0.600},                   // elbows
    {0.580, 0.780}, {0.420, 0.780},                   // wrists
    {0.585, 0.820}, {0.415, 0.820},                   // pinky
    {0.575, 0.830}, {0.425, 0.830},                   // index
    {0.565, 0.805}, {0.435, 0.805},                   // thumb
    {0.570, 0.780}, {0.430, 0.780},                   // hips
    {0.560, 0.960}, {0.440, 0.960},                   // knees
    {0.560, 1.000}, {0.440, 1.000},                   // ankles
    {0.560, 1.000}, {0.440, 1.000},                   // heels
    {0.560, 1.000}, {0.440, 1.000},                   // foot index
}};

// Open right hand, wrist at origin, fingers pointing up (-y), in units of
// hand length.
constexpr std::array<Vec2, landmarks::kHandCount> kOpenHand = {{
    {0.00, 0.00},
    {-0.25, -0.15}, {-0.45, -0.30}, {-0.60, -0.45}, {-0.72, -0.60},
    {-0.20, -0.60}, {-0.24, -0.85}, {-0.26, -1.00}, {-0.28, -1.15},
    {0.00, -0.65}, {0.00, -0.92}, {0.00, -1.08}, {0.00, -1.25},
    {0.18, -0.60}, {0.21, -0.85}, {0.23, -1.00}, {0.25, -1.12},
    {0.35, -0.50}, {0.40, -0.68}, {0.43, -0.80}, {0.46, -0.90},
}};

constexpr double kHandLength = 0.07;

struct HandshapeGeometry {
  std::array<double, 5> curl{};  // thumb, index, middle, ring, pinky
  double spread = 1.0;
};

HandshapeGeometry handshape_geometry(const std::string& label) {
  if (label == "5") return {{0, 0, 0, 0, 0}, 1.3};
  if (label == "B") return {{0.6, 0, 0, 0, 0}, 0.6};
  if (label == "A") return {{0, 1, 1, 1, 1}, 0.8};
  if (label == "1") return {{1, 0, 1, 1, 1}, 0.8};
  if (label == "C") return {{0.5, 0.5, 0.5, 0.5, 0.5}, 0.8};
  if (label == "O") return {{0.7, 0.7, 0.7, 0.7, 0.7}, 0.7};
  if (label == "V") return {{1, 0, 0, 1, 1}, 1.4};
  if (label == "Y") return {{0, 1, 1, 1, 0}, 1.2};
  return {};
}

// Offsets of the 21 hand points from the wrist. `mirror` flips x for the
// left hand.
std::array<Vec2, landmarks::kHandCount> hand_offsets(const HandshapeGeometry& g, bool mirror) {
  std::array<Vec2, landmarks::kHandCount> out{};
  out[0] = {0.0, 0.0};
  for (std::size_t finger = 0; finger < 5; ++finger) {
    const std::size_t base = 1 + 4 * finger;
    const Vec2 knuckle = kOpenHand[base];
    for (std::size_t j = 0; j < 4; ++j) {
      const Vec2 p = kOpenHand[base + j];
      Vec2 q = knuckle + (1.0 - 0.8 * g.curl[finger]) * (p - knuckle);
      q.x *= g.spread;
      if (mirror) q.x = -q.x;
      out[base + j] = kHandLength * q;
    }
  }
  return out;
}

Vec2 start_region(Location location) {
  switch (location) {
    case Location::torso: return {0.45, 0.60};
    case Location::neck: return {0.47, 0.45};
    case Location::face: return {0.46, 0.30};
    case Location::in_space: return {0.32, 0.50};
  }
  return {0.45, 0.60};
}

Vec2 wrist_offset(const SynthClassParams& p, double t) {
  const Vec2 u{std::cos(p.direction_rad), std::sin(p.direction_rad)};
  const double a = p.amplitude;
  switch (p.metadata.movement) {
    case Movement::unidirectional: {
      const double ease = 0.5 * (1.0 - std::cos(pi * t));
      return (a * (ease - 0.5)) * u;
    }
    case Movement::bidirectional: return (a * (std::sin(pi * t) - 0.5)) * u;
    case Movement::repeated: return (0.5 * a * std::sin(4.0 * pi * t)) * u;
    case Movement::circular: {
      const double phi = 2.0 * pi * t + p.direction_rad;
      return 0.5 * a * Vec2{std::cos(phi) - std::cos(p.direction_rad), std::sin(phi) - std::sin(p.direction_rad)};
    }
    case Movement::none: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void set_point(PoseFrame& frame, std::size_t index, Vec2 p, double visibility) {
  frame[index] = {clamp01(p.x), clamp01(p.y), visibility};
}

// Places one arm: wrist at `wrist`, hand points from `offsets`, elbow bent
// outward and down from the shoulder-wrist midpoint.
void place_arm(PoseFrame& frame, bool left, Vec2 wrist, const std::array<Vec2, landmarks::kHandCount>& offsets) {
  const std::size_t shoulder = left ? landmarks::kLeftShoulder : landmarks::kRightShoulder;
  const std::size_t elbow = left ? landmarks::kLeftElbow : landmarks::kRightElbow;
  const std::size_t body_wrist = left ? landmarks::kLeftWrist : landmarks::kRightWrist;
  const std::size_t hand_begin = left ? landmarks::kLeftHandBegin : landmarks::kRightHandBegin;
  const Vec2 s = kBody[shoulder];
  const Vec2 outward{left ? 0.05 : -0.05, 0.07};
  set_point(frame, elbow, 0.5 * (s + wrist) + outward, 0.99);
  set_point(frame, body_wrist, wrist, 0.99);
  for (std::size_t i = 0; i < landmarks::kHandCount; ++i) {
    set_point(frame, hand_begin + i, wrist + offsets[i], 0.99);
  }
  // Body-model pinky/index/thumb follow the hand's knuckles.
  const std::size_t pinky = left ? 17 : 18, index = left ? 19 : 20, thumb = left ? 21 : 22;
  set_point(frame, pinky, wrist + offsets[17], 0.99);
  set_point(frame, index, wrist + offsets[5], 0.99);
  set_point(frame, thumb, wrist + offsets[2], 0.99);
}

void check_spec(std::size_t num_classes, std::size_t frames) {
  if (num_classes < 1) throw Error(ErrorCode::invalid_argument, "num_classes must be >= 1");
  if (frames < 1) throw Error(ErrorCode::invalid_argument, "frames must be >= 1");
}

}  // namespace

SynthClassParams synth_class_params(std::size_t num_classes, ClassIndex label) {
  if (label >= num_classes) throw Error(ErrorCode::invalid_argument, "synthetic class out of range");
  SynthClassParams p;
  p.metadata.movement = kMovements[label % kMovements.size()];
  p.metadata.location = kLocations[(label + label / kMovements.size()) % kLocations.size()];
  p.metadata.hands = (label / 2) % 2 == 1 ? Hands::two : Hands::one;
  p.metadata.handshape = std::string(kHandshapes[label % kHandshapes.size()]);
  // Golden-ratio spacing keeps directions distinct for any class count.
  const double frac = std::fmod(static_cast<double>(label) * 0.6180339887498949, 1.0);
  p.direction_rad = 2.0 * pi * frac;
  p.amplitude = 0.12;
  return p;
}

PoseSequence synth_template(std::size_t num_classes, ClassIndex label, std::size_t frames, double fps) {
  check_spec(num_classes, frames);
  const SynthClassParams p = synth_class_params(num_classes, label);
  const auto shape = handshape_geometry(*p.metadata.handshape);
  const auto rest_shape = handshape_geometry("B");
  const bool two = p.metadata.hands == Hands::two;
  const Vec2 start = start_region(p.metadata.location);

  PoseFrame base{};
  for (std::size_t i = 0; i < landmarks::kBodyCount; ++i) {
    const bool legs = i >= 25;
    set_point(base, i, kBody[i], legs ? 0.1 : 0.99);
  }

  std::vector<PoseFrame> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = frames == 1 ? 0.0 : static_cast<double>(f) / static_cast<double>(frames - 1);
    PoseFrame frame = base;
    const Vec2 right_wrist = start + wrist_offset(p, t);
    place_arm(frame, false, right_wrist, hand_offsets(shape, false));
    if (two) {
      const Vec2 left_wrist{1.0 - right_wrist.x, right_wrist.y};
      place_arm(frame, true, left_wrist, hand_offsets(shape, true));
    } else {
      place_arm(frame, true, kBody[landmarks::kLeftWrist], hand_offsets(rest_shape, true));
    }
    out.push_back(frame);
  }
  return PoseSequence(std::move(out), fps, kStandardResolution);
}

PoseSequence synth_sample(const SynthSpec& spec, ClassIndex label, std::size_t index) {
  if (spec.noise_sigma < 0.0) throw Error(ErrorCode::invalid_argument, "noise_sigma must be >= 0");
  PoseSequence tmpl = synth_template(spec.num_classes, label, spec.frames, spec.fps);
  if (spec.noise_sigma == 0.0) return tmpl;
  Rng rng(mix_seed(mix_seed(spec.seed, label), index));
  std::vector<PoseFrame> frames = tmpl.frames();
  for (auto& frame : frames) {
    for (auto& lm : frame) {
      lm.x = clamp01(lm.x + rng.normal(0.0, spec.noise_sigma));
      lm.y = clamp01(lm.y + rng.normal(0.0, spec.noise_sigma));
    }
  }
  return PoseSequence(std::move(frames), spec.fps, tmpl.resolution());
}

std::vector<LabeledSequence> synthesize_dataset(const SynthSpec& spec) {
  check_spec(spec.num_classes, spec.frames);
  if (spec.per_class < 1) throw Error(ErrorCode::invalid_argument, "per_class must be >= 1");
  std::vector<LabeledSequence> out;
  out.reserve(spec.num_classes * spec.per_class);
  for (ClassIndex c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < spec.per_class; ++i) out.push_back({synth_sample(spec, c, i), c});
  }
  return out;
}

VocabularyCatalog synth_catalog(std::size_t num_classes) {
  check_spec(num_classes, 1);
  std::vector<GlossEntry> entries;
  for (ClassIndex c = 0; c < num_classes; ++c) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%03zu", c);
    GlossEntry e;
    e.rendition_id = id;
    e.gloss = "SYN" + std::to_string(c);
    e.metadata = synth_class_params(num_classes, c).metadata;
    e.example_media = std::string("examples/") + id + ".mp4";
    entries.push_back(std::move(e));
  }
  return VocabularyCatalog(std::move(entries));
}

PoseSequence synth_bystander(const PoseSequence& signer) {
  std::vector<PoseFrame> frames = signer.frames();
  for (auto& frame : frames) {
    for (auto& lm : frame) {
      lm.x = clamp01(0.85 + 0.4 * (lm.x - 0.5));
      lm.y = clamp01(0.35 + 0.4 * lm.y);
    }
  }
  return PoseSequence(std::move(frames), signer.fps(), signer.resolution());
}

}  // namespace signdict
