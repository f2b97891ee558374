#pragma once

#include "signdict/pose.hpp"
#include "signdict/recognizer/config.hpp"
#include "signdict/rng.hpp"

namespace signdict::recognizer {

// With probability cfg.apply_probability applies, in order: per-arm rotation
// about the shoulder, global rotation about the frame center, horizontal
// squeeze, and a perspective warp; then clamps to [0,1]. A transform whose
// drawn parameter is the identity is skipped, so zero maxima return the
// input unchanged. The number of draws taken from `rng` is fixed per call.
PoseSequence augment(const PoseSequence& seq, const AugmentationConfig& cfg, Rng& rng);

}  // namespace signdict::recognizer
