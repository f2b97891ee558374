#include "signdict/recognizer/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "json.hpp"
#include "signdict/error.hpp"
#include "signdict/parallel.hpp"
#include "signdict/recognizer/augment.hpp"
#include "signdict/recognizer/normalize.hpp"
#include "signdict/rng.hpp"
#include "signdict/text.hpp"

namespace signdict::recognizer {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

std::size_t Distribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(probabilities.begin(), probabilities.end()) -
                                  probabilities.begin());
}

TrainedModel::TrainedModel(ModelConfig config, std::vector<std::size_t> subset, VocabularyCatalog catalog,
                           std::vector<double> weights, std::vector<EpochStats> history)
    : subset_(std::move(subset)),
      catalog_(std::move(catalog)),
      network_(config, 2 * subset_.size(), catalog_.size()),
      weights_(std::move(weights)),
      history_(std::move(history)) {
  validate_subset(subset_);
  if (weights_.size() != network_.parameter_count()) {
    throw Error(ErrorCode::corrupt_file, "weight count " + std::to_string(weights_.size()) + " does not match layout (" +
                                             std::to_string(network_.parameter_count()) + ")");
  }
}

namespace {

Matrix features_for(const std::vector<std::size_t>& subset, std::size_t max_frames, const PoseSequence& seq) {
  return limit_frames(normalize(seq, subset), max_frames).values;
}

class Adam {
 public:
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

// Reduce-on-plateau in "min" mode with a relative threshold of 1e-4 and no
// cooldown.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, std::size_t patience) : lr_(lr), factor_(factor), patience_(patience) {}

  double lr() const { return lr_; }

  void observe(double loss) {
    if (loss < best_ * (1.0 - 1e-4)) {
      best_ = loss;
      bad_epochs_ = 0;
      return;
    }
    if (++bad_epochs_ > patience_) {
      lr_ *= factor_;
      bad_epochs_ = 0;
    }
  }

 private:
  double lr_;
  double factor_;
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
};

}  // namespace

TrainedModel train(std::span<const LabeledSequence> dataset, const VocabularyCatalog& catalog, const TrainConfig& tc,
                   const ModelConfig& mc, const AugmentationConfig& ac, const EpochCallback& on_epoch) {
  tc.validate();
  ac.validate();
  if (dataset.empty()) throw Error(ErrorCode::invalid_argument, "empty training dataset");
  if (catalog.empty()) throw Error(ErrorCode::empty_catalog, "empty catalog");
  for (const auto& sample : dataset) {
    if (sample.label >= catalog.size()) {
      throw Error(ErrorCode::invalid_argument,
                  "training label " + std::to_string(sample.label) + " outside catalog of " +
                      std::to_string(catalog.size()) + " classes");
    }
  }
  std::vector<std::size_t> subset = tc.landmark_subset.empty() ? landmarks::body_hands_subset() : tc.landmark_subset;
  validate_subset(subset);
  const ModelConfig config = mc.resolved(subset.size());
  const Network net(config, 2 * subset.size(), catalog.size());

  Rng rng(tc.seed);
  std::vector<double> params(net.parameter_count());
  net.initialize(params, rng);

  Adam adam(params.size());
  PlateauScheduler scheduler(tc.learning_rate, tc.plateau_factor, tc.plateau_patience);
  std::vector<double> grad(params.size());
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EpochStats> history;
  history.reserve(tc.epochs);
  std::vector<Matrix> inputs(tc.batch_size);
  std::vector<std::vector<double>> sample_grads(tc.batch_size, std::vector<double>(params.size()));
  std::vector<double> losses(tc.batch_size);
  std::vector<std::size_t> hits(tc.batch_size);

  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    const double lr = scheduler.lr();
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      // Augmentation draws stay sequential; gradients are computed per sample
      // and summed in batch order so results do not depend on thread count.
      const std::size_t n = end - start;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& sample = dataset[order[start + i]];
        const PoseSequence augmented = augment(sample.sequence, ac, rng);
        try {
          inputs[i] = features_for(subset, config.max_frames, augmented);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::degenerate_pose) throw;
          inputs[i] = features_for(subset, config.max_frames, sample.sequence);
        }
      }
      parallel_for(n, [&](std::size_t i) {
        const auto& sample = dataset[order[start + i]];
        std::fill(sample_grads[i].begin(), sample_grads[i].end(), 0.0);
        Vector logits;
        losses[i] = net.accumulate_gradient(params, inputs[i], sample.label, sample_grads[i], &logits);
        Eigen::Index best = 0;
        logits.maxCoeff(&best);
        hits[i] = static_cast<std::size_t>(best) == sample.label ? 1 : 0;
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += sample_grads[i][k];
        loss_sum += losses[i];
        correct += hits[i];
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= inv;
      if (tc.optimizer == Optimizer::adam) {
        adam.step(params, grad, lr);
      } else {
        for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(dataset.size());
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    stats.learning_rate = lr;
    history.push_back(stats);
    scheduler.observe(stats.loss);
    if (on_epoch) on_epoch(stats);
  }
  return TrainedModel(config, std::move(subset), catalog, std::move(params), std::move(history));
}

Matrix model_input(const TrainedModel& model, const PoseSequence& seq) {
  return features_for(model.subset(), model.config().max_frames, seq);
}

Distribution predict(const TrainedModel& model, const PoseSequence& seq) {
  const Vector logits = model.network().logits(model.weights(), model_input(model, seq));
  const Vector probs = softmax(logits);
  return Distribution{std::vector<double>(probs.data(), probs.data() + probs.size())};
}

Distribution predict(const TrainedModel& model, const VocabularyCatalog& active, const PoseSequence& seq) {
  if (active.fingerprint() != model.fingerprint()) {
    throw Error(ErrorCode::fingerprint_mismatch, "model was trained on catalog " + fingerprint_hex(model.fingerprint()) +
                                                     " but the active catalog is " +
                                                     fingerprint_hex(active.fingerprint()));
  }
  return predict(model, seq);
}

namespace {

constexpr char kMagic[8] = {'S', 'D', 'M', 'O', 'D', 'E', 'L', '\0'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
    return value;
  }

  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw Error(ErrorCode::corrupt_file, "model file is truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"hidden_dim", c.hidden_dim},
          {"encoder_layers", c.encoder_layers},
          {"attention_heads", c.attention_heads},
          {"max_frames", c.max_frames},
          {"ff_dim", c.ff_dim}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
  c.attention_heads = j.at("attention_heads").get<std::size_t>();
  c.max_frames = j.at("max_frames").get<std::size_t>();
  c.ff_dim = j.at("ff_dim").get<std::size_t>();
  return c;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  nlohmann::json header;
  header["model_config"] = config_to_json(model.config());
  header["subset"] = model.subset();
  header["fingerprint"] = fingerprint_hex(model.fingerprint());
  header["catalog"] = model.catalog().serialize();
  auto& history = header["history"] = nlohmann::json::array();
  for (const auto& h : model.history()) {
    history.push_back({{"epoch", h.epoch}, {"loss", h.loss}, {"accuracy", h.accuracy}, {"learning_rate", h.learning_rate}});
  }
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  put<std::uint64_t>(out, model.weights().size());
  out.append(reinterpret_cast<const char*>(model.weights().data()), model.weights().size() * sizeof(double));
  put<std::uint64_t>(out, fnv1a(out.data(), out.size()));
  return out;
}

TrainedModel deserialize_model(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw Error(ErrorCode::corrupt_file, "not a model file (bad magic)");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::version_mismatch, "model format version " + std::to_string(version) + " (expected " +
                                                 std::to_string(kModelFormatVersion) + ")");
  }
  const auto header_len = in.get<std::uint32_t>();
  const auto header_text = in.take(header_len);
  const auto count = in.get<std::uint64_t>();
  if (count > in.remaining() / sizeof(double)) throw Error(ErrorCode::corrupt_file, "model file is truncated");
  const auto raw = in.take(count * sizeof(double));
  const std::size_t checked = in.position();
  const auto checksum = in.get<std::uint64_t>();
  if (in.remaining() != 0) throw Error(ErrorCode::corrupt_file, "trailing bytes after model checksum");
  if (checksum != fnv1a(bytes.data(), checked)) throw Error(ErrorCode::corrupt_file, "model checksum mismatch");

  std::vector<double> weights(count);
  std::memcpy(weights.data(), raw.data(), raw.size());
  try {
    const auto header = nlohmann::json::parse(header_text);
    std::vector<EpochStats> history;
    for (const auto& h : header.at("history")) {
      history.push_back({h.at("epoch").get<std::size_t>(), h.at("loss").get<double>(), h.at("accuracy").get<double>(),
                         h.at("learning_rate").get<double>()});
    }
    VocabularyCatalog catalog = parse_catalog(header.at("catalog").get<std::string>());
    if (fingerprint_hex(catalog.fingerprint()) != header.at("fingerprint").get<std::string>()) {
      throw Error(ErrorCode::corrupt_file, "embedded catalog does not match its fingerprint");
    }
    return TrainedModel(config_from_json(header.at("model_config")),
                        header.at("subset").get<std::vector<std::size_t>>(), std::move(catalog), std::move(weights),
                        std::move(history));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::corrupt_file, std::string("model header: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return deserialize_model(read_text_file(path)); }

}  // namespace signdict::recognizer
