#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace signdict::recognizer {

struct AugmentationConfig {
  double apply_probability = 0.5;
  double max_arm_joint_rotate_deg = 4.0;
  double arm_joint_rotate_probability = 0.4;
  double max_global_rotate_deg = 17.0;
  double max_squeeze_ratio = 0.4;
  double max_perspective_ratio = 0.2;

  void validate() const;
  // apply_probability = 0.
  static AugmentationConfig disabled();
};

enum class Optimizer { adam, sgd };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view token);

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 5;
  std::uint64_t seed = 1;
  // Indices into the 75-point schema; empty means landmarks::body_hands_subset().
  std::vector<std::size_t> landmark_subset;
  std::size_t batch_size = 16;
  Optimizer optimizer = Optimizer::adam;

  void validate() const;
};

struct ModelConfig {
  // 0 means 2 * |landmark_subset|.
  std::size_t hidden_dim = 0;
  std::size_t encoder_layers = 6;
  std::size_t attention_heads = 9;
  std::size_t max_frames = 204;
  // 0 means 4 * hidden_dim.
  std::size_t ff_dim = 0;

  // Fills the 0 defaults for a given subset size and validates.
  ModelConfig resolved(std::size_t subset_size) const;
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace signdict::recognizer
