#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signdict/catalog.hpp"
#include "signdict/pose.hpp"
#include "signdict/recognizer/config.hpp"
#include "signdict/recognizer/network.hpp"
#include "signdict/synth.hpp"

namespace signdict::recognizer {

// Probabilities over catalog classes, in class-index order.
struct Distribution {
  std::vector<double> probabilities;

  std::size_t size() const { return probabilities.size(); }
  std::size_t argmax() const;
  bool operator==(const Distribution&) const = default;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double learning_rate = 0.0;

  bool operator==(const EpochStats&) const = default;
};

class TrainedModel {
 public:
  TrainedModel(ModelConfig config, std::vector<std::size_t> subset, VocabularyCatalog catalog,
               std::vector<double> weights, std::vector<EpochStats> history);

  const ModelConfig& config() const { return network_.config(); }
  const std::vector<std::size_t>& subset() const { return subset_; }
  // The vocabulary the model was trained against.
  const VocabularyCatalog& catalog() const { return catalog_; }
  std::uint64_t fingerprint() const { return catalog_.fingerprint(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<EpochStats>& history() const { return history_; }
  const Network& network() const { return network_; }

 private:
  std::vector<std::size_t> subset_;
  VocabularyCatalog catalog_;
  Network network_;
  std::vector<double> weights_;
  std::vector<EpochStats> history_;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Mini-batch training with reduce-on-plateau on the epoch's mean training
// loss (a reduction happens once more than plateau_patience consecutive
// epochs fail to improve the best loss by a relative 1e-4). Deterministic
// for a given seed.
TrainedModel train(std::span<const LabeledSequence> dataset, const VocabularyCatalog& catalog, const TrainConfig& tc,
                   const ModelConfig& mc, const AugmentationConfig& ac, const EpochCallback& on_epoch = {});

// Features exactly as the network sees them.
Matrix model_input(const TrainedModel& model, const PoseSequence& seq);

Distribution predict(const TrainedModel& model, const PoseSequence& seq);
// Throws Error{fingerprint_mismatch} unless `active` is the training vocabulary.
Distribution predict(const TrainedModel& model, const VocabularyCatalog& active, const PoseSequence& seq);

// Binary container, little-endian:
//   8 bytes   magic "SDMODEL\0"
//   u32       format version (kModelFormatVersion)
//   u32       header length H
//   H bytes   JSON header: model_config, subset, fingerprint, catalog text,
//             history
//   u64       weight count W
//   W * f64   weights in network layout order
//   u64       FNV-1a checksum of all preceding bytes
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view bytes);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace signdict::recognizer
