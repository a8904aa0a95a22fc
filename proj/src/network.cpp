#include "deepproj/network.hpp"

#include "deepproj/error.hpp"
#include "deepproj/rng.hpp"

#include <limits>

namespace deepproj {
namespace {

constexpr double kSigmoidFloor = std::numeric_limits<double>::min();
const double kSigmoidCeil = std::nextafter(1.0, 0.0);

void sigmoid_inplace(Matrix& z) {
  z = (1.0 / (1.0 + (-z.array()).exp())).cwiseMax(kSigmoidFloor).cwiseMin(kSigmoidCeil);
}

void check_input(const NetworkModel& m, const Eigen::Ref<const Matrix>& x) {
  if (m.layers.empty()) throw ShapeError("network has no layers");
  if (x.cols() != m.n_input())
    throw ShapeError("network expects " + std::to_string(m.n_input()) + " input columns, got " +
                     std::to_string(x.cols()));
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace

std::vector<Index> NetworkModel::layer_dims() const {
  std::vector<Index> dims;
  if (layers.empty()) return dims;
  dims.push_back(layers.front().weights.rows());
  for (const auto& l : layers) dims.push_back(l.weights.cols());
  return dims;
}

Index NetworkModel::parameter_count() const {
  Index total = 0;
  for (const auto& l : layers) total += l.weights.size() + l.bias.size();
  return total;
}

void NetworkModel::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.weights.cols()) throw ShapeError("bias width does not match layer");
    if (i > 0 && layers[i - 1].weights.cols() != l.weights.rows())
      throw ShapeError("layer shapes do not chain");
    if (!l.weights.allFinite() || !l.bias.allFinite())
      throw ParameterError("network has non-finite parameters");
  }
  if (input_norm.dims() != n_input()) throw ShapeError("input normalizer width mismatch");
  if (target_norm.dims() != n_output()) throw ShapeError("target normalizer width mismatch");
}

NetworkModel init_network(std::span<const Index> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ParameterError("init_network: need at least input and output dims");
  for (Index d : dims)
    if (d < 1) throw ParameterError("init_network: layer widths must be >= 1");
  Rng rng(seed);
  NetworkModel m;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const double limit = he_uniform_limit(dims[i]);
    Layer l{Matrix(dims[i], dims[i + 1]), RowVector::Constant(dims[i + 1], kInitialBias)};
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = rng.uniform(-limit, limit);
    m.layers.push_back(std::move(l));
  }
  m.input_norm = Normalizer::identity(dims.front());
  m.target_norm = Normalizer::identity(dims.back());
  m.metadata.seed = seed;
  return m;
}

NetworkModel init_network(Index n_input, std::uint64_t seed) {
  if (n_input < 1) throw ParameterError("init_network: n_input must be >= 1");
  const std::array<Index, 5> dims{n_input, kHiddenWidths[0], kHiddenWidths[1], kHiddenWidths[2],
                                  kOutputDims};
  return init_network(dims, seed);
}

ForwardTrace forward_trace(const NetworkModel& m, const Eigen::Ref<const Matrix>& x) {
  check_input(m, x);
  ForwardTrace t;
  t.activations.reserve(m.layers.size() + 1);
  t.activations.emplace_back(x);
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& l = m.layers[i];
    Matrix z = t.activations.back() * l.weights;
    z.rowwise() += l.bias;
    if (i + 1 < m.layers.size())
      z = z.cwiseMax(0.0);
    else
      sigmoid_inplace(z);
    t.activations.push_back(std::move(z));
  }
  return t;
}

Matrix forward(const NetworkModel& m, const Eigen::Ref<const Matrix>& x) {
  check_input(m, x);
  Matrix h = x;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& l = m.layers[i];
    Matrix z = h * l.weights;
    z.rowwise() += l.bias;
    if (i + 1 < m.layers.size())
      h = z.cwiseMax(0.0);
    else {
      sigmoid_inplace(z);
      h = std::move(z);
    }
  }
  return h;
}

std::string_view loss_name(LossKind k) {
  switch (k) {
    case LossKind::mse: return "mse";
    case LossKind::mae: return "mae";
    case LossKind::logcosh: return "logcosh";
  }
  return "unknown";
}

LossKind parse_loss(std::string_view name) {
  for (LossKind k : {LossKind::mse, LossKind::mae, LossKind::logcosh})
    if (loss_name(k) == name) return k;
  throw ParameterError("unknown loss '" + std::string(name) + "'");
}

double loss(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target,
            LossKind kind) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("loss: prediction and target shapes differ");
  if (pred.size() == 0) throw ShapeError("loss: empty batch");
  const auto diff = (pred - target).array();
  switch (kind) {
    case LossKind::mse: return diff.square().mean();
    case LossKind::mae: return diff.abs().mean();
    case LossKind::logcosh: return diff.unaryExpr(&log_cosh).mean();
  }
  throw ParameterError("unknown loss kind");
}

Gradients Gradients::zeros_like(const NetworkModel& m) {
  Gradients g;
  for (const auto& l : m.layers) {
    g.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    g.biases.push_back(RowVector::Zero(l.bias.size()));
  }
  return g;
}

Gradients backward(const NetworkModel& m, const Eigen::Ref<const Matrix>& batch,
                   const Eigen::Ref<const Matrix>& targets, LossKind kind) {
  const auto trace = forward_trace(m, batch);
  const Matrix& out = trace.activations.back();
  if (out.rows() != targets.rows() || out.cols() != targets.cols())
    throw ShapeError("backward: target shape does not match network output");

  Gradients g;
  g.loss = loss(out, targets, kind);
  const std::size_t n_layers = m.layers.size();
  g.weights.resize(n_layers);
  g.biases.resize(n_layers);

  const double scale = 1.0 / static_cast<double>(out.size());
  const Eigen::ArrayXXd diff = (out - targets).array();
  Eigen::ArrayXXd d_out;
  switch (kind) {
    case LossKind::mse: d_out = 2.0 * scale * diff; break;
    case LossKind::mae: d_out = scale * diff.sign(); break;
    case LossKind::logcosh: d_out = scale * diff.tanh(); break;
  }
  // Through the sigmoid: s' = s (1 - s).
  Matrix delta = (d_out * out.array() * (1.0 - out.array())).matrix();

  for (std::size_t li = n_layers; li-- > 0;) {
    const Matrix& input = trace.activations[li];
    g.weights[li].noalias() = input.transpose() * delta;
    g.biases[li] = delta.colwise().sum();
    if (li == 0) break;
    Matrix upstream = delta * m.layers[li].weights.transpose();
    // ReLU subgradient is 0 at 0; activation > 0 iff pre-activation > 0.
    delta = (trace.activations[li].array() > 0.0).select(upstream.array(), 0.0).matrix();
  }
  return g;
}

AdamState AdamState::zeros_like(const NetworkModel& m) {
  AdamState s;
  for (const auto& l : m.layers) {
    s.m_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    s.v_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    s.m_biases.push_back(RowVector::Zero(l.bias.size()));
    s.v_biases.push_back(RowVector::Zero(l.bias.size()));
  }
  return s;
}

void adam_step(NetworkModel& model, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
  if (grads.weights.size() != model.layers.size() || state.m_weights.size() != model.layers.size())
    throw ShapeError("adam_step: parameter, gradient and state layouts differ");
  ++state.step;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    adam_update(model.layers[i].weights, grads.weights[i], state.m_weights[i], state.v_weights[i],
                state.step, cfg);
    adam_update(model.layers[i].bias, grads.biases[i], state.m_biases[i], state.v_biases[i],
                state.step, cfg);
  }
}

}  // namespace deepproj
