#include "signdict/recognizer/config.hpp"

#include <string>

#include "signdict/error.hpp"

namespace signdict::recognizer {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw Error(ErrorCode::invalid_argument, message);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
bool is_ratio(double r) { return r >= 0.0 && r < 1.0; }

}  // namespace

void AugmentationConfig::validate() const {
  require(is_probability(apply_probability), "apply_probability must be in [0,1]");
  require(is_probability(arm_joint_rotate_probability), "arm_joint_rotate_probability must be in [0,1]");
  require(max_arm_joint_rotate_deg >= 0.0, "max_arm_joint_rotate_deg must be >= 0");
  require(max_global_rotate_deg >= 0.0, "max_global_rotate_deg must be >= 0");
  require(is_ratio(max_squeeze_ratio), "max_squeeze_ratio must be in [0,1)");
  require(is_ratio(max_perspective_ratio), "max_perspective_ratio must be in [0,1)");
}

AugmentationConfig AugmentationConfig::disabled() {
  AugmentationConfig cfg;
  cfg.apply_probability = 0.0;
  return cfg;
}

std::string_view to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(std::string_view token) {
  if (token == "adam") return Optimizer::adam;
  if (token == "sgd") return Optimizer::sgd;
  throw Error(ErrorCode::unknown_token, "unknown optimizer '" + std::string(token) + "'");
}

void TrainConfig::validate() const {
  require(epochs >= 1, "epochs must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(plateau_factor > 0.0 && plateau_factor < 1.0, "plateau_factor must be in (0,1)");
  require(plateau_patience >= 1, "plateau_patience must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
}

ModelConfig ModelConfig::resolved(std::size_t subset_size) const {
  ModelConfig out = *this;
  if (out.hidden_dim == 0) out.hidden_dim = 2 * subset_size;
  if (out.ff_dim == 0) out.ff_dim = 4 * out.hidden_dim;
  out.validate();
  return out;
}

void ModelConfig::validate() const {
  require(hidden_dim >= 1, "hidden_dim must be >= 1");
  require(attention_heads >= 1, "attention_heads must be >= 1");
  require(hidden_dim % attention_heads == 0, "hidden_dim must be divisible by attention_heads");
  require(encoder_layers >= 1, "encoder_layers must be >= 1");
  require(max_frames >= 1, "max_frames must be >= 1");
  require(ff_dim >= 1, "ff_dim must be >= 1");
}

}  // namespace signdict::recognizer
