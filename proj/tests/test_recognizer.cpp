#include <doctest.h>

#include <cmath>
#include <numeric>

#include "signdict/error.hpp"
#include "signdict/recognizer/augment.hpp"
#include "signdict/recognizer/model.hpp"
#include "signdict/recognizer/network.hpp"
#include "signdict/recognizer/normalize.hpp"
#include "signdict/synth.hpp"

using namespace signdict;
using namespace signdict::recognizer;

namespace {

constexpr double kGrid = 0x1.0p-20;

// Coordinates on a dyadic grid, so that shifting by a grid multiple is exact.
PoseSequence dyadic(const PoseSequence& seq) {
  auto frames = seq.frames();
  for (auto& f : frames)
    for (auto& lm : f) {
      lm.x = std::round(lm.x / kGrid) * kGrid;
      lm.y = std::round(lm.y / kGrid) * kGrid;
    }
  return PoseSequence(frames, seq.fps(), seq.resolution());
}

ModelConfig small_config() {
  ModelConfig mc;
  mc.hidden_dim = 32;
  mc.encoder_layers = 1;
  mc.attention_heads = 4;
  mc.ff_dim = 64;
  mc.max_frames = 30;
  return mc;
}

TrainConfig small_train(std::size_t epochs) {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.landmark_subset = landmarks::compact_subset();
  return tc;
}

std::vector<LabeledSequence> small_dataset(std::size_t per_class = 20) {
  SynthSpec spec;
  spec.per_class = per_class;
  spec.frames = 30;
  return synthesize_dataset(spec);
}

// A model with freshly initialized weights, no training.
TrainedModel untrained(std::uint64_t seed) {
  const auto subset = landmarks::compact_subset();
  const auto config = small_config().resolved(subset.size());
  const auto catalog = synth_catalog(10);
  const Network net(config, 2 * subset.size(), catalog.size());
  std::vector<double> w(net.parameter_count());
  Rng rng(seed);
  net.initialize(w, rng);
  return TrainedModel(config, subset, catalog, std::move(w), {});
}

double sum(const Distribution& d) { return std::accumulate(d.probabilities.begin(), d.probabilities.end(), 0.0); }

}  // namespace

TEST_CASE("normalized torso has zero mean and unit diagonal") {
  const auto seq = synth_sample(SynthSpec{}, 1, 0);
  const std::vector<std::size_t> torso(landmarks::kTorso.begin(), landmarks::kTorso.end());
  const auto f = normalize(seq, torso);
  double sx = 0, sy = 0, minx = 1e9, maxx = -1e9, miny = 1e9, maxy = -1e9;
  for (Eigen::Index r = 0; r < f.values.rows(); ++r)
    for (Eigen::Index c = 0; c < f.values.cols(); c += 2) {
      sx += f.values(r, c), sy += f.values(r, c + 1);
      minx = std::min(minx, f.values(r, c)), maxx = std::max(maxx, f.values(r, c));
      miny = std::min(miny, f.values(r, c + 1)), maxy = std::max(maxy, f.values(r, c + 1));
    }
  CHECK(std::abs(sx) < 1e-9);
  CHECK(std::abs(sy) < 1e-9);
  CHECK(std::hypot(maxx - minx, maxy - miny) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalization is exactly translation invariant") {
  const auto subset = landmarks::body_hands_subset();
  for (ClassIndex c = 0; c < 10; ++c) {
    const auto seq = dyadic(synth_sample(SynthSpec{}, c, 0));
    const auto moved = translate(seq, std::round(0.05 / kGrid) * kGrid, -std::round(0.03 / kGrid) * kGrid);
    CHECK(normalize(seq, subset).values == normalize(moved, subset).values);
  }
}

TEST_CASE("invisible landmarks are zero and masked") {
  auto frames = synth_template(10, 0, 5).frames();
  for (auto& f : frames) f[landmarks::kRightWrist].visibility = 0.0;
  const PoseSequence seq(frames, 30.0, kStandardResolution);
  const std::vector<std::size_t> subset = {landmarks::kLeftShoulder, landmarks::kRightWrist};
  const auto f = normalize(seq, subset);
  for (Eigen::Index r = 0; r < f.values.rows(); ++r) {
    CHECK(f.mask(r, 1) == false);
    CHECK(f.values(r, 2) == 0.0);
    CHECK(f.values(r, 3) == 0.0);
    CHECK(f.mask(r, 0) == true);
  }
}

TEST_CASE("degenerate pose") {
  std::vector<PoseFrame> frames(3);
  for (auto& f : frames)
    for (auto& lm : f) lm = {0.4, 0.4, 1.0};
  try {
    (void)normalize(PoseSequence(frames, 30.0, kStandardResolution), landmarks::body_hands_subset());
    FAIL("degenerate pose accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_pose);
  }
}

TEST_CASE("subset validation") {
  CHECK_THROWS_AS(validate_subset(std::vector<std::size_t>{}), Error);
  CHECK_THROWS_AS(validate_subset(std::vector<std::size_t>{1, 75}), Error);
  CHECK_THROWS_AS(validate_subset(std::vector<std::size_t>{3, 3}), Error);
  CHECK_NOTHROW(validate_subset(landmarks::compact_subset()));
}

TEST_CASE("limit_frames subsamples uniformly") {
  const auto f = normalize(synth_template(10, 2, 10), landmarks::compact_subset());
  const auto limited = limit_frames(f, 4);
  REQUIRE(limited.frames() == 4);
  const int expect[] = {0, 3, 6, 9};
  for (int i = 0; i < 4; ++i) CHECK(limited.values.row(i) == f.values.row(expect[i]));
  CHECK(limit_frames(f, 50).frames() == 10);
}

TEST_CASE("augmentation with zero maxima is the identity") {
  AugmentationConfig zero;
  zero.apply_probability = 1.0;
  zero.arm_joint_rotate_probability = 1.0;
  zero.max_arm_joint_rotate_deg = 0.0;
  zero.max_global_rotate_deg = 0.0;
  zero.max_squeeze_ratio = 0.0;
  zero.max_perspective_ratio = 0.0;
  Rng rng(5);
  for (ClassIndex c = 0; c < 10; ++c) {
    const auto seq = synth_sample(SynthSpec{}, c, 1);
    const auto out = augment(seq, zero, rng);
    double worst = 0.0;
    for (std::size_t f = 0; f < seq.frame_count(); ++f)
      for (std::size_t i = 0; i < landmarks::kCount; ++i) {
        worst = std::max(worst, std::abs(out.frame(f)[i].x - seq.frame(f)[i].x));
        worst = std::max(worst, std::abs(out.frame(f)[i].y - seq.frame(f)[i].y));
      }
    CHECK(worst <= 1e-9);
  }
  const auto seq = synth_sample(SynthSpec{}, 3, 0);
  CHECK(augment(seq, AugmentationConfig::disabled(), rng) == seq);
}

TEST_CASE("augmentation is seeded and consumes a fixed number of draws") {
  const auto seq = synth_sample(SynthSpec{}, 6, 0);
  Rng a(42), b(42), c(42);
  const auto x = augment(seq, AugmentationConfig{}, a);
  const auto y = augment(seq, AugmentationConfig{}, b);
  CHECK(x == y);
  (void)augment(seq, AugmentationConfig::disabled(), c);
  CHECK(a.next_u64() == c.next_u64());

  AugmentationConfig always;
  always.apply_probability = 1.0;
  Rng d(1);
  CHECK_FALSE(augment(seq, always, d) == seq);
}

TEST_CASE("augmentation config validation") {
  AugmentationConfig ac;
  ac.apply_probability = 1.5;
  CHECK_THROWS_AS(ac.validate(), Error);
  ac = {};
  ac.max_squeeze_ratio = 1.0;
  CHECK_THROWS_AS(ac.validate(), Error);
  ac = {};
  ac.max_global_rotate_deg = -1.0;
  CHECK_THROWS_AS(ac.validate(), Error);
}

TEST_CASE("config validation") {
  TrainConfig tc;
  tc.epochs = 0;
  CHECK_THROWS_AS(tc.validate(), Error);
  tc = {};
  tc.plateau_factor = 1.0;
  CHECK_THROWS_AS(tc.validate(), Error);
  tc = {};
  tc.learning_rate = 0.0;
  CHECK_THROWS_AS(tc.validate(), Error);

  ModelConfig mc;
  mc.hidden_dim = 10;
  mc.attention_heads = 3;
  CHECK_THROWS_AS((void)mc.resolved(5), Error);
  const auto def = ModelConfig{}.resolved(54);
  CHECK(def.hidden_dim == 108);
  CHECK(def.ff_dim == 432);
  CHECK(def.encoder_layers == 6);
  CHECK(def.attention_heads == 9);
  CHECK(def.max_frames == 204);
  CHECK(parse_optimizer("adam") == Optimizer::adam);
  CHECK_THROWS_AS((void)parse_optimizer("lbfgs"), Error);
}

TEST_CASE("softmax is stable") {
  Vector logits(3);
  logits << 1000.0, 1000.0, -1000.0;
  const Vector p = softmax(logits);
  CHECK(p(0) == doctest::Approx(0.5));
  CHECK(p(2) == 0.0);
}

TEST_CASE("distributions sum to one") {
  const auto model = untrained(9);
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    SynthSpec spec;
    spec.frames = 5 + rng.below(40);
    spec.noise_sigma = rng.uniform(0.0, 0.05);
    spec.seed = rng.next_u64();
    const auto d = predict(model, synth_sample(spec, rng.below(10), rng.below(100)));
    REQUIRE(d.size() == 10);
    CHECK(std::abs(sum(d) - 1.0) <= 1e-6);
    for (double p : d.probabilities) CHECK(p >= 0.0);
  }
}

TEST_CASE("predictions are exactly translation invariant") {
  const auto model = untrained(4);
  for (ClassIndex c = 0; c < 10; ++c) {
    const auto seq = dyadic(synth_sample(SynthSpec{}, c, 2));
    const auto moved = translate(seq, std::round(0.02 / kGrid) * kGrid, -std::round(0.02 / kGrid) * kGrid);
    CHECK(predict(model, seq) == predict(model, moved));
  }
}

TEST_CASE("gradient matches central finite differences") {
  ModelConfig mc;
  mc.hidden_dim = 8;
  mc.encoder_layers = 2;
  mc.attention_heads = 2;
  mc.ff_dim = 16;
  mc.max_frames = 6;
  const Network net(mc.resolved(4), 8, 2);
  std::vector<double> params(net.parameter_count());
  Rng rng(2024);
  net.initialize(params, rng);
  // non-zero biases and norm shifts so every parameter affects the loss
  for (double& p : params) p += rng.uniform(-0.1, 0.1);

  Matrix input(5, 8);
  for (Eigen::Index r = 0; r < input.rows(); ++r)
    for (Eigen::Index c = 0; c < input.cols(); ++c) input(r, c) = rng.normal();

  for (std::size_t label : {std::size_t{0}, std::size_t{1}}) {
    std::vector<double> grad(params.size(), 0.0);
    net.accumulate_gradient(params, input, label, grad);

    const double h = 1e-6;
    double diff2 = 0.0, norm2 = 0.0, worst = 0.0;
    std::vector<double> scratch_grad(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto p = params;
      p[k] += h;
      const double up = net.accumulate_gradient(p, input, label, scratch_grad);
      p[k] -= 2 * h;
      const double down = net.accumulate_gradient(p, input, label, scratch_grad);
      const double numeric = (up - down) / (2 * h);
      diff2 += (grad[k] - numeric) * (grad[k] - numeric);
      norm2 += std::max(grad[k] * grad[k], numeric * numeric);
      const double scale = std::max({std::abs(grad[k]), std::abs(numeric), 1e-4});
      worst = std::max(worst, std::abs(grad[k] - numeric) / scale);
    }
    CHECK(std::sqrt(diff2 / norm2) <= 1e-4);
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("training rejects bad input") {
  const auto catalog = synth_catalog(10);
  std::vector<LabeledSequence> none;
  CHECK_THROWS_AS((void)train(none, catalog, small_train(1), small_config(), {}), Error);
  auto data = small_dataset(1);
  data[0].label = 10;
  CHECK_THROWS_AS((void)train(data, catalog, small_train(1), small_config(), {}), Error);
  CHECK_THROWS_AS((void)train(small_dataset(1), catalog, small_train(0), small_config(), {}), Error);
}

TEST_CASE("short training run learns the synthetic classes") {
  const auto data = small_dataset(40);
  const auto catalog = synth_catalog(10);
  std::vector<EpochStats> seen;
  const auto model =
      train(data, catalog, small_train(15), small_config(), {}, [&](const EpochStats& s) { seen.push_back(s); });
  REQUIRE(model.history().size() == 15);
  CHECK(seen == model.history());

  // Smoothed over three epochs the loss never goes up.
  std::vector<double> smooth;
  for (std::size_t i = 2; i < 10; ++i)
    smooth.push_back((model.history()[i - 2].loss + model.history()[i - 1].loss + model.history()[i].loss) / 3.0);
  for (std::size_t i = 1; i < smooth.size(); ++i) CHECK(smooth[i] <= smooth[i - 1]);

  for (ClassIndex c = 0; c < 10; ++c) CHECK(predict(model, synth_template(10, c, 30)).argmax() == c);
  CHECK(model.history().back().accuracy > model.history().front().accuracy);
}

TEST_CASE("training is deterministic for a seed") {
  const auto data = small_dataset(4);
  const auto catalog = synth_catalog(10);
  const auto a = train(data, catalog, small_train(2), small_config(), {});
  const auto b = train(data, catalog, small_train(2), small_config(), {});
  CHECK(serialize_model(a) == serialize_model(b));
  auto other = small_train(2);
  other.seed = 2;
  CHECK(serialize_model(train(data, catalog, other, small_config(), {})) != serialize_model(a));
}

TEST_CASE("learning rate drops after a plateau") {
  const auto data = small_dataset(2);
  auto tc = small_train(6);
  tc.optimizer = Optimizer::sgd;
  tc.learning_rate = 1e-12;
  tc.plateau_patience = 1;
  tc.plateau_factor = 0.5;
  const auto model = train(data, synth_catalog(10), tc, small_config(), AugmentationConfig::disabled());
  std::vector<double> lrs;
  for (const auto& s : model.history()) lrs.push_back(s.learning_rate);
  CHECK(lrs == std::vector<double>{1e-12, 1e-12, 1e-12, 5e-13, 5e-13, 2.5e-13});
}

TEST_CASE("model file round-trip") {
  const auto model = untrained(12);
  const auto probe = synth_sample(SynthSpec{}, 5, 7);
  const auto bytes = serialize_model(model);
  const auto back = deserialize_model(bytes);
  CHECK(predict(back, probe) == predict(model, probe));
  CHECK(back.config() == model.config());
  CHECK(back.subset() == model.subset());
  CHECK(back.catalog().entries() == model.catalog().entries());
  CHECK(serialize_model(back) == bytes);

  const auto code = [](std::string_view b) {
    try {
      (void)deserialize_model(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  CHECK(code(bytes.substr(0, bytes.size() / 2)) == ErrorCode::corrupt_file);
  auto flipped = bytes;
  flipped[bytes.size() - 20] ^= 0x01;
  CHECK(code(flipped) == ErrorCode::corrupt_file);
  auto version = bytes;
  version[8] = 2;
  CHECK(code(version) == ErrorCode::version_mismatch);
  CHECK(code("not a model") == ErrorCode::corrupt_file);
}

TEST_CASE("fingerprint binds model and catalog") {
  const auto model = untrained(1);
  const auto probe = synth_template(10, 0, 10);
  CHECK_NOTHROW((void)predict(model, synth_catalog(10), probe));
  try {
    (void)predict(model, synth_catalog(11), probe);
    FAIL("mismatched catalog accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::fingerprint_mismatch);
  }
}
