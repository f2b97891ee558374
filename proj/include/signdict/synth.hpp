#pragma once

#include <cstdint>
#include <vector>

#include "signdict/catalog.hpp"
#include "signdict/pose.hpp"

namespace signdict {

struct LabeledSequence {
  PoseSequence sequence;
  ClassIndex label;
};

struct SynthSpec {
  std::size_t num_classes = 10;
  std::size_t per_class = 1;
  std::size_t frames = 60;
  double noise_sigma = 0.02;
  std::uint64_t seed = 1;
  double fps = 30.0;
};

// Shape of a synthetic class: a smooth wrist trajectory for the dominant
// hand (mirrored onto the other hand for two-handed classes), a start region
// and a static handshape.
struct SynthClassParams {
  SignMetadata metadata;
  double direction_rad = 0.0;
  double amplitude = 0.0;
};

SynthClassParams synth_class_params(std::size_t num_classes, ClassIndex label);

// Noise-free pose track for one class.
PoseSequence synth_template(std::size_t num_classes, ClassIndex label, std::size_t frames, double fps = 30.0);

// Sample `index` of class `label`: the template plus i.i.d. N(0, sigma)
// positional noise on every coordinate, clamped to [0,1]. Each sample draws
// from its own stream seeded by (seed, label, index), so any sample can be
// regenerated on its own.
PoseSequence synth_sample(const SynthSpec& spec, ClassIndex label, std::size_t index);

// per_class samples for each class, class-major order.
std::vector<LabeledSequence> synthesize_dataset(const SynthSpec& spec);

// One catalog entry per synthetic class, metadata matching the templates.
VocabularyCatalog synth_catalog(std::size_t num_classes);

// A second, bystander track: the template shifted sideways and scaled down.
PoseSequence synth_bystander(const PoseSequence& signer);

}  // namespace signdict
