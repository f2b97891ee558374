#pragma once

#include <span>
#include <vector>

#include "signdict/recognizer/config.hpp"
#include "signdict/recognizer/normalize.hpp"
#include "signdict/rng.hpp"

namespace signdict::recognizer {

// Pose-sequence transformer: a linear frame embedding plus learned frame
// positions, a stack of post-norm self-attention encoder blocks, and a single
// decoder block in which one learned class query cross-attends to the
// encoded frames, followed by a linear classifier.
//
// The network owns only the parameter layout. Parameters and gradients live
// in caller-provided flat vectors so that optimizers, serialization and the
// finite-difference check all see the same contiguous buffer.
class Network {
 public:
  Network(const ModelConfig& config, std::size_t input_dim, std::size_t num_classes);

  std::size_t parameter_count() const { return parameter_count_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }
  const ModelConfig& config() const { return config_; }

  void initialize(std::span<double> params, Rng& rng) const;

  // Input is T x input_dim with T <= max_frames.
  Vector logits(std::span<const double> params, const Matrix& input) const;

  // Softmax cross-entropy of one sample; adds its gradient into `grad`.
  double accumulate_gradient(std::span<const double> params, const Matrix& input, std::size_t label,
                             std::span<double> grad, Vector* logits_out = nullptr) const;

  struct LinearSlot {
    std::size_t weight = 0, bias = 0, in = 0, out = 0;
  };
  struct NormSlot {
    std::size_t gamma = 0, beta = 0, dim = 0;
  };
  struct AttentionSlot {
    LinearSlot query, key, value, output;
  };
  struct BlockSlot {
    AttentionSlot attention;
    NormSlot norm1;
    LinearSlot ff1, ff2;
    NormSlot norm2;
  };

 private:
  struct Forward;

  void run_forward(std::span<const double> params, const Matrix& input, Forward& state) const;

  ModelConfig config_;
  std::size_t input_dim_;
  std::size_t num_classes_;
  std::size_t parameter_count_ = 0;

  LinearSlot embed_;
  std::size_t positions_ = 0;
  std::vector<BlockSlot> encoder_;
  std::size_t class_query_ = 0;
  BlockSlot decoder_;
  LinearSlot classifier_;
};

// Numerically stable softmax.
Vector softmax(const Vector& logits);

}  // namespace signdict::recognizer
