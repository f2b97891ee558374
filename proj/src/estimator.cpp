#include "signdict/estimator.hpp"

#include "signdict/error.hpp"
#include "signdict/text.hpp"

namespace signdict {

std::string_view to_string(ByteStatus status) {
  switch (status) {
    case ByteStatus::complete: return "complete";
    case ByteStatus::truncated: return "truncated";
    case ByteStatus::undecodable: return "undecodable";
  }
  return "undecodable";
}

EstimatorCapabilities FilePoseEstimator::capabilities() const { return {{3840, 2160}, {"pose"}}; }

MediaProbe FilePoseEstimator::probe(std::string_view media) const {
  MediaProbe out;
  if (media.substr(0, 4) != "POSE") {
    out.detail = "not a pose file";
    return out;
  }
  try {
    const auto tracks = parse_pose_tracks(media);
    out.resolution = tracks.front().resolution();
    if (media.back() != '\n') {
      out.status = ByteStatus::truncated;
      out.detail = "missing final newline";
      return out;
    }
    out.status = ByteStatus::complete;
    return out;
  } catch (const Error& e) {
    out.detail = e.what();
  }
  // Distinguish a cut-off upload from garbage: everything but the final
  // line must parse.
  const auto last_nl = media.find_last_of('\n', media.size() >= 2 ? media.size() - 2 : 0);
  if (last_nl != std::string_view::npos) {
    try {
      const auto head = parse_pose_tracks(media.substr(0, last_nl + 1));
      const auto tail = split_ws(trim(media.substr(last_nl + 1)));
      if (tail.size() < landmarks::kCount * 3 && tail.front() != "POSE") {
        out.status = ByteStatus::truncated;
        out.resolution = head.front().resolution();
        out.detail = "last frame is incomplete";
      }
    } catch (const Error&) {
    }
  }
  return out;
}

std::vector<PoseSequence> FilePoseEstimator::estimate(std::string_view media) const {
  return parse_pose_tracks(media);
}

SyntheticPoseEstimator::Request SyntheticPoseEstimator::parse_request(std::string_view media) {
  std::string_view body = trim(media);
  if (body.substr(0, 5) == "SYNTH") body = trim(body.substr(5));
  if (body.empty()) throw Error(ErrorCode::parse, "empty synthetic request");
  Request r;
  bool has_class = false;
  for (auto part : split(body, ',')) {
    part = trim(part);
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::parse, "synthetic request: expected key=value");
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    long long i = 0;
    double d = 0.0;
    auto need_int = [&](long long min) {
      if (!parse_int(value, i) || i < min) {
        throw Error(ErrorCode::parse, "synthetic request: bad value for " + std::string(key));
      }
      return i;
    };
    if (key == "class") {
      r.label = static_cast<ClassIndex>(need_int(0));
      has_class = true;
    } else if (key == "seed") {
      r.spec.seed = static_cast<std::uint64_t>(need_int(0));
    } else if (key == "index") {
      r.index = static_cast<std::size_t>(need_int(0));
    } else if (key == "classes") {
      r.spec.num_classes = static_cast<std::size_t>(need_int(1));
    } else if (key == "frames") {
      r.spec.frames = static_cast<std::size_t>(need_int(1));
    } else if (key == "people") {
      r.people = static_cast<std::size_t>(need_int(1));
    } else if (key == "w") {
      r.resolution.width = static_cast<int>(need_int(1));
    } else if (key == "h") {
      r.resolution.height = static_cast<int>(need_int(1));
    } else if (key == "noise" || key == "fps") {
      if (!parse_double(value, d) || d < 0.0 || (key == "fps" && d <= 0.0)) {
        throw Error(ErrorCode::parse, "synthetic request: bad value for " + std::string(key));
      }
      (key == "noise" ? r.spec.noise_sigma : r.spec.fps) = d;
    } else if (key == "hide") {
      for (auto region : split(value, '+')) {
        if (region == "hands") r.hide_hands = true;
        else if (region == "face") r.hide_face = true;
        else if (region == "torso") r.hide_torso = true;
        else throw Error(ErrorCode::parse, "synthetic request: unknown region '" + std::string(region) + "'");
      }
    } else {
      throw Error(ErrorCode::parse, "synthetic request: unknown key '" + std::string(key) + "'");
    }
  }
  if (!has_class) throw Error(ErrorCode::parse, "synthetic request: missing class");
  if (r.label >= r.spec.num_classes) throw Error(ErrorCode::parse, "synthetic request: class out of range");
  return r;
}

EstimatorCapabilities SyntheticPoseEstimator::capabilities() const { return {{3840, 2160}, {"synth"}}; }

MediaProbe SyntheticPoseEstimator::probe(std::string_view media) const {
  MediaProbe out;
  try {
    const Request r = parse_request(media);
    out.status = ByteStatus::complete;
    out.resolution = r.resolution;
  } catch (const Error& e) {
    out.detail = e.what();
  }
  return out;
}

std::vector<PoseSequence> SyntheticPoseEstimator::estimate(std::string_view media) const {
  const Request r = parse_request(media);
  const PoseSequence sample = synth_sample(r.spec, r.label, r.index);
  std::vector<PoseFrame> frames = sample.frames();
  auto hide = [&](std::size_t i) {
    for (auto& f : frames) f[i].visibility = 0.0;
  };
  if (r.hide_hands) {
    for (std::size_t i = landmarks::kLeftHandBegin; i < landmarks::kCount; ++i) hide(i);
  }
  if (r.hide_face) {
    for (auto i : landmarks::kFace) hide(i);
  }
  if (r.hide_torso) {
    for (auto i : landmarks::kTorso) hide(i);
  }
  std::vector<PoseSequence> people;
  people.emplace_back(std::move(frames), sample.fps(), r.resolution);
  for (std::size_t p = 1; p < r.people; ++p) people.push_back(synth_bystander(people.front()));
  return people;
}

EstimatorCapabilities AutoPoseEstimator::capabilities() const { return {{3840, 2160}, {"pose", "synth"}}; }

const PoseEstimator& AutoPoseEstimator::route(std::string_view media) const {
  if (media.substr(0, 4) == "POSE") return file_;
  return synthetic_;
}

MediaProbe AutoPoseEstimator::probe(std::string_view media) const { return route(media).probe(media); }

std::vector<PoseSequence> AutoPoseEstimator::estimate(std::string_view media) const {
  return route(media).estimate(media);
}

PoseSequence estimate(const PoseEstimator& estimator, std::string_view media) {
  auto people = estimator.estimate(media);
  if (people.empty()) throw Error(ErrorCode::parse, "no person detected");
  return std::move(people.front());
}

}  // namespace signdict
