#include "signdict/recognizer/network.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "signdict/error.hpp"

namespace signdict::recognizer {

namespace {

using ConstMatMap = Eigen::Map<const Matrix>;
using MatMap = Eigen::Map<Matrix>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;
using RowMap = Eigen::Map<Eigen::RowVectorXd>;
using Slot = Network::LinearSlot;
using NormSlot = Network::NormSlot;
using AttentionSlot = Network::AttentionSlot;
using BlockSlot = Network::BlockSlot;

constexpr double kNormEps = 1e-5;

auto idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// Eigen's vectorized reductions peel elements up to the first aligned
// address, so the rounding of a sum depends on where the buffer lives.
// Computing on aligned copies keeps results independent of the caller's
// allocation.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

bool is_aligned(const double* p) { return reinterpret_cast<std::uintptr_t>(p) % EIGEN_MAX_ALIGN_BYTES == 0; }

std::span<const double> aligned_params(std::span<const double> p) {
  if (is_aligned(p.data())) return p;
  thread_local AlignedBuffer copy;
  copy.assign(p.begin(), p.end());
  return copy;
}

ConstMatMap weight(std::span<const double> p, const Slot& s) {
  return ConstMatMap(p.data() + s.weight, idx(s.in), idx(s.out));
}
ConstRowMap bias(std::span<const double> p, const Slot& s) { return ConstRowMap(p.data() + s.bias, idx(s.out)); }

Matrix linear(std::span<const double> p, const Slot& s, const Matrix& x) {
  Matrix y = x * weight(p, s);
  y.rowwise() += bias(p, s);
  return y;
}

// Accumulates weight/bias gradients; returns dL/dx.
Matrix linear_backward(std::span<const double> p, const Slot& s, const Matrix& x, const Matrix& dy,
                       std::span<double> g) {
  MatMap(g.data() + s.weight, idx(s.in), idx(s.out)).noalias() += x.transpose() * dy;
  RowMap(g.data() + s.bias, idx(s.out)) += dy.colwise().sum();
  return dy * weight(p, s).transpose();
}

struct NormCache {
  Matrix xhat;
  Vector inv_std;
};

Matrix layer_norm(std::span<const double> p, const NormSlot& s, const Matrix& x, NormCache& c) {
  const auto n = x.cols();
  c.xhat.resize(x.rows(), n);
  c.inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + kNormEps);
    c.inv_std(r) = inv;
    c.xhat.row(r) = (x.row(r).array() - mean) * inv;
  }
  const ConstRowMap gamma(p.data() + s.gamma, idx(s.dim));
  const ConstRowMap beta(p.data() + s.beta, idx(s.dim));
  Matrix y = c.xhat.array().rowwise() * gamma.array();
  y.rowwise() += beta;
  return y;
}

Matrix layer_norm_backward(std::span<const double> p, const NormSlot& s, const NormCache& c, const Matrix& dy,
                           std::span<double> g) {
  RowMap(g.data() + s.gamma, idx(s.dim)) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  RowMap(g.data() + s.beta, idx(s.dim)) += dy.colwise().sum();
  const ConstRowMap gamma(p.data() + s.gamma, idx(s.dim));
  const Matrix dxhat = dy.array().rowwise() * gamma.array();
  const double n = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double sum = dxhat.row(r).sum();
    const double dot = dxhat.row(r).dot(c.xhat.row(r));
    dx.row(r) = (c.inv_std(r) / n) * (n * dxhat.row(r).array() - sum - c.xhat.row(r).array() * dot);
  }
  return dx;
}

struct AttentionCache {
  Matrix q, k, v, concat;
  std::vector<Matrix> probs;
};

Matrix attention(std::span<const double> p, const AttentionSlot& s, std::size_t heads, const Matrix& xq,
                 const Matrix& xkv, AttentionCache& c) {
  c.q = linear(p, s.query, xq);
  c.k = linear(p, s.key, xkv);
  c.v = linear(p, s.value, xkv);
  const auto head_dim = c.q.cols() / idx(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  c.concat.resize(xq.rows(), c.q.cols());
  c.probs.resize(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto col = idx(h) * head_dim;
    Matrix scores = (c.q.middleCols(col, head_dim) * c.k.middleCols(col, head_dim).transpose()) * scale;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double m = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - m).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    c.concat.middleCols(col, head_dim).noalias() = scores * c.v.middleCols(col, head_dim);
    c.probs[h] = std::move(scores);
  }
  return linear(p, s.output, c.concat);
}

void attention_backward(std::span<const double> p, const AttentionSlot& s, std::size_t heads, const Matrix& xq,
                        const Matrix& xkv, const AttentionCache& c, const Matrix& dy, std::span<double> g,
                        Matrix& dxq, Matrix& dxkv) {
  const Matrix dconcat = linear_backward(p, s.output, c.concat, dy, g);
  const auto head_dim = c.q.cols() / idx(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Matrix dq(c.q.rows(), c.q.cols()), dk(c.k.rows(), c.k.cols()), dv(c.v.rows(), c.v.cols());
  for (std::size_t h = 0; h < heads; ++h) {
    const auto col = idx(h) * head_dim;
    const Matrix& probs = c.probs[h];
    const auto dout = dconcat.middleCols(col, head_dim);
    dv.middleCols(col, head_dim).noalias() = probs.transpose() * dout;
    Matrix dprobs = dout * c.v.middleCols(col, head_dim).transpose();
    // Softmax Jacobian, row by row.
    const Vector row_dot = (dprobs.array() * probs.array()).rowwise().sum();
    Matrix dscores = probs.array() * (dprobs.array().colwise() - row_dot.array());
    dscores *= scale;
    dq.middleCols(col, head_dim).noalias() = dscores * c.k.middleCols(col, head_dim);
    dk.middleCols(col, head_dim).noalias() = dscores.transpose() * c.q.middleCols(col, head_dim);
  }
  dxq = linear_backward(p, s.query, xq, dq, g);
  dxkv = linear_backward(p, s.key, xkv, dk, g);
  dxkv += linear_backward(p, s.value, xkv, dv, g);
}

struct BlockCache {
  AttentionCache attention;
  NormCache norm1, norm2;
  Matrix h, z, u;
};

// Post-norm transformer block: y = LN2(h + FF(h)), h = LN1(xq + Attn(xq, xkv)).
Matrix block(std::span<const double> p, const BlockSlot& s, std::size_t heads, const Matrix& xq, const Matrix& xkv,
             BlockCache& c) {
  Matrix r1 = xq + attention(p, s.attention, heads, xq, xkv, c.attention);
  c.h = layer_norm(p, s.norm1, r1, c.norm1);
  c.z = linear(p, s.ff1, c.h);
  c.u = c.z.cwiseMax(0.0);
  Matrix r2 = c.h + linear(p, s.ff2, c.u);
  return layer_norm(p, s.norm2, r2, c.norm2);
}

void block_backward(std::span<const double> p, const BlockSlot& s, std::size_t heads, const Matrix& xq,
                    const Matrix& xkv, const BlockCache& c, const Matrix& dy, std::span<double> g, Matrix& dxq,
                    Matrix& dxkv) {
  const Matrix dr2 = layer_norm_backward(p, s.norm2, c.norm2, dy, g);
  Matrix du = linear_backward(p, s.ff2, c.u, dr2, g);
  du.array() *= (c.z.array() > 0.0).cast<double>();
  Matrix dh = dr2 + linear_backward(p, s.ff1, c.h, du, g);
  const Matrix dr1 = layer_norm_backward(p, s.norm1, c.norm1, dh, g);
  Matrix dq_attn;
  attention_backward(p, s.attention, heads, xq, xkv, c.attention, dr1, g, dq_attn, dxkv);
  dxq = dr1 + dq_attn;
}

// Xavier-uniform weights, zero biases.
void init_linear(std::span<double> p, const Slot& s, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
  for (std::size_t i = 0; i < s.in * s.out; ++i) p[s.weight + i] = rng.uniform(-limit, limit);
  for (std::size_t i = 0; i < s.out; ++i) p[s.bias + i] = 0.0;
}

void init_norm(std::span<double> p, const NormSlot& s) {
  for (std::size_t i = 0; i < s.dim; ++i) {
    p[s.gamma + i] = 1.0;
    p[s.beta + i] = 0.0;
  }
}

void init_block(std::span<double> p, const BlockSlot& s, Rng& rng) {
  init_linear(p, s.attention.query, rng);
  init_linear(p, s.attention.key, rng);
  init_linear(p, s.attention.value, rng);
  init_linear(p, s.attention.output, rng);
  init_norm(p, s.norm1);
  init_linear(p, s.ff1, rng);
  init_linear(p, s.ff2, rng);
  init_norm(p, s.norm2);
}

}  // namespace

struct Network::Forward {
  Matrix embedded;
  std::vector<Matrix> encoder_inputs;  // input of each encoder block
  std::vector<BlockCache> encoder;
  Matrix memory;
  Matrix query;
  BlockCache decoder;
  Matrix decoded;
  Vector logits;
};

Network::Network(const ModelConfig& config, std::size_t input_dim, std::size_t num_classes)
    : config_(config), input_dim_(input_dim), num_classes_(num_classes) {
  config_.validate();
  if (input_dim_ == 0) throw Error(ErrorCode::invalid_argument, "network input_dim must be >= 1");
  if (num_classes_ == 0) throw Error(ErrorCode::invalid_argument, "network needs at least one class");
  std::size_t cursor = 0;
  auto take = [&](std::size_t n) {
    const std::size_t at = cursor;
    cursor += n;
    return at;
  };
  auto make_linear = [&](std::size_t in, std::size_t out) {
    Slot s;
    s.in = in;
    s.out = out;
    s.weight = take(in * out);
    s.bias = take(out);
    return s;
  };
  auto make_norm = [&](std::size_t dim) {
    NormSlot s;
    s.dim = dim;
    s.gamma = take(dim);
    s.beta = take(dim);
    return s;
  };
  const std::size_t hidden = config_.hidden_dim;
  auto make_block = [&] {
    BlockSlot b;
    b.attention = {make_linear(hidden, hidden), make_linear(hidden, hidden), make_linear(hidden, hidden),
                   make_linear(hidden, hidden)};
    b.norm1 = make_norm(hidden);
    b.ff1 = make_linear(hidden, config_.ff_dim);
    b.ff2 = make_linear(config_.ff_dim, hidden);
    b.norm2 = make_norm(hidden);
    return b;
  };

  embed_ = make_linear(input_dim_, hidden);
  positions_ = take(config_.max_frames * hidden);
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) encoder_.push_back(make_block());
  class_query_ = take(hidden);
  decoder_ = make_block();
  classifier_ = make_linear(hidden, num_classes_);
  parameter_count_ = cursor;
}

void Network::initialize(std::span<double> params, Rng& rng) const {
  if (params.size() != parameter_count_) throw Error(ErrorCode::invalid_argument, "parameter buffer size mismatch");
  init_linear(params, embed_, rng);
  for (std::size_t i = 0; i < config_.max_frames * config_.hidden_dim; ++i) {
    params[positions_ + i] = rng.uniform(-0.1, 0.1);
  }
  for (const auto& b : encoder_) init_block(params, b, rng);
  for (std::size_t i = 0; i < config_.hidden_dim; ++i) params[class_query_ + i] = rng.uniform(-1.0, 1.0);
  init_block(params, decoder_, rng);
  init_linear(params, classifier_, rng);
}

void Network::run_forward(std::span<const double> params, const Matrix& input, Forward& state) const {
  if (params.size() != parameter_count_) throw Error(ErrorCode::invalid_argument, "parameter buffer size mismatch");
  if (static_cast<std::size_t>(input.cols()) != input_dim_) {
    throw Error(ErrorCode::invalid_argument, "network input has " + std::to_string(input.cols()) +
                                                 " features, expected " + std::to_string(input_dim_));
  }
  const auto frames = input.rows();
  if (frames < 1 || static_cast<std::size_t>(frames) > config_.max_frames) {
    throw Error(ErrorCode::invalid_argument, "network input frame count outside [1, max_frames]");
  }
  const auto hidden = idx(config_.hidden_dim);
  const std::size_t heads = config_.attention_heads;

  state.embedded = linear(params, embed_, input);
  state.embedded += ConstMatMap(params.data() + positions_, frames, hidden);

  state.encoder_inputs.resize(encoder_.size());
  state.encoder.resize(encoder_.size());
  Matrix x = state.embedded;
  for (std::size_t l = 0; l < encoder_.size(); ++l) {
    state.encoder_inputs[l] = x;
    x = block(params, encoder_[l], heads, state.encoder_inputs[l], state.encoder_inputs[l], state.encoder[l]);
  }
  state.memory = std::move(x);
  state.query = ConstMatMap(params.data() + class_query_, 1, hidden);
  state.decoded = block(params, decoder_, heads, state.query, state.memory, state.decoder);
  state.logits = linear(params, classifier_, state.decoded).row(0).transpose();
}

Vector Network::logits(std::span<const double> params, const Matrix& input) const {
  Forward state;
  run_forward(aligned_params(params), input, state);
  return state.logits;
}

double Network::accumulate_gradient(std::span<const double> params, const Matrix& input, std::size_t label,
                                    std::span<double> grad, Vector* logits_out) const {
  if (label >= num_classes_) throw Error(ErrorCode::invalid_argument, "label outside the class range");
  if (grad.size() != parameter_count_) throw Error(ErrorCode::invalid_argument, "gradient buffer size mismatch");
  if (!is_aligned(grad.data())) {
    thread_local AlignedBuffer local;
    local.assign(grad.size(), 0.0);
    const double loss = accumulate_gradient(params, input, label, local, logits_out);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += local[k];
    return loss;
  }
  params = aligned_params(params);
  Forward state;
  run_forward(params, input, state);
  if (logits_out) *logits_out = state.logits;

  const Vector probs = softmax(state.logits);
  const double loss = -std::log(std::max(probs(idx(label)), 1e-300));
  Matrix dlogits = probs.transpose();
  dlogits(0, idx(label)) -= 1.0;

  const Matrix ddecoded = linear_backward(params, classifier_, state.decoded, dlogits, grad);
  Matrix dquery, dmemory;
  const std::size_t heads = config_.attention_heads;
  block_backward(params, decoder_, heads, state.query, state.memory, state.decoder, ddecoded, grad, dquery, dmemory);
  const auto hidden = idx(config_.hidden_dim);
  RowMap(grad.data() + class_query_, hidden) += dquery.row(0);

  Matrix dx = std::move(dmemory);
  for (std::size_t l = encoder_.size(); l-- > 0;) {
    Matrix dxq, dxkv;
    block_backward(params, encoder_[l], heads, state.encoder_inputs[l], state.encoder_inputs[l], state.encoder[l], dx,
                   grad, dxq, dxkv);
    dx = dxq + dxkv;
  }
  MatMap(grad.data() + positions_, input.rows(), hidden) += dx;
  linear_backward(params, embed_, input, dx, grad);
  return loss;
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

}  // namespace signdict::recognizer
