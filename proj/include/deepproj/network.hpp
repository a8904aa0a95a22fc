#pragma once

#include "deepproj/data.hpp"
#include "deepproj/numerics.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepproj {

/// Hidden layer widths of the projection network.
inline constexpr std::array<Index, 3> kHiddenWidths{256, 512, 256};
inline constexpr Index kOutputDims = 2;
inline constexpr double kInitialBias = 0.0001;

/// Fully connected layer computing `x * weights + bias` for row-vector x.
struct Layer {
  Matrix weights;  // fan_in x fan_out
  RowVector bias;
};

struct ModelMetadata {
  std::string source_projection;
  std::uint64_t seed = 0;
  Index epochs_trained = 0;
  Index fine_tune_epochs = 0;
  bool fine_tuned = false;
};

/// ReLU hidden layers followed by a sigmoid output layer.
struct NetworkModel {
  std::vector<Layer> layers;
  Normalizer input_norm;
  Normalizer target_norm;
  ModelMetadata metadata;

  Index n_input() const { return layers.empty() ? 0 : layers.front().weights.rows(); }
  Index n_output() const { return layers.empty() ? 0 : layers.back().weights.cols(); }
  std::vector<Index> layer_dims() const;
  Index parameter_count() const;

  /// Throws ShapeError/ParameterError when shapes do not chain or a
  /// parameter is non-finite.
  void validate() const;
};

/// He uniform bound sqrt(6 / fan_in).
inline double he_uniform_limit(Index fan_in) { return std::sqrt(6.0 / static_cast<double>(fan_in)); }

/// dims = {n_input, hidden..., n_output}. Weights ~ U[-L, L] with the He
/// bound of each layer, biases = kInitialBias.
NetworkModel init_network(std::span<const Index> dims, std::uint64_t seed);

/// n_input -> 256 -> 512 -> 256 -> 2.
NetworkModel init_network(Index n_input, std::uint64_t seed);

/// Activations of every layer; front() is the input, back() the output.
struct ForwardTrace {
  std::vector<Matrix> activations;
};

/// Input must already be normalized. Output lies strictly inside (0,1).
Matrix forward(const NetworkModel& m, const Eigen::Ref<const Matrix>& x);
ForwardTrace forward_trace(const NetworkModel& m, const Eigen::Ref<const Matrix>& x);

enum class LossKind { mse, mae, logcosh };

std::string_view loss_name(LossKind k);
LossKind parse_loss(std::string_view name);

/// Mean over every element of the batch.
double loss(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& target,
            LossKind kind);

/// Same layout as NetworkModel::layers.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<RowVector> biases;
  double loss = 0.0;

  static Gradients zeros_like(const NetworkModel& m);
};

/// Analytic gradients of `loss(forward(m, batch), targets, kind)`.
Gradients backward(const NetworkModel& m, const Eigen::Ref<const Matrix>& batch,
                   const Eigen::Ref<const Matrix>& targets, LossKind kind);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of a single tensor; `step` is 1-based.
template <typename P, typename G, typename M, typename V>
void adam_update(Eigen::MatrixBase<P>& param, const Eigen::MatrixBase<G>& grad,
                 Eigen::MatrixBase<M>& m, Eigen::MatrixBase<V>& v, long step,
                 const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  param.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
}

/// First and second moment estimates for every parameter tensor.
struct AdamState {
  std::vector<Matrix> m_weights, v_weights;
  std::vector<RowVector> m_biases, v_biases;
  long step = 0;

  static AdamState zeros_like(const NetworkModel& m);
};

/// Advances `state.step` and applies one update to every tensor.
void adam_step(NetworkModel& model, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace deepproj
