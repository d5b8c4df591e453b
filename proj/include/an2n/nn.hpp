#pragma once

#include <string>
#include <vector>

#include "an2n/rng.hpp"
#include "an2n/types.hpp"

namespace an2n {

enum class Hidden { relu, tanh };
enum class Output { identity, tanh, tanh_scaled };

/// Dense multilayer perceptron. weights[k] maps layer k activations to layer
/// k+1 pre-activations, so weights[k] is widths[k+1] x widths[k]. All
/// parameters are 64-bit floats.
struct Mlp {
  std::vector<int> widths;  // [input, hidden..., output]
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Hidden hidden = Hidden::relu;
  Output output = Output::identity;
  double output_scale = 1.0;  // multiplies tanh when output == tanh_scaled

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  bool all_finite() const;
};

/// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)]; the last layer is
/// additionally scaled by final_layer_scale (actors start near-zero).
Mlp make_mlp(std::vector<int> widths, Hidden hidden, Output output,
             double output_scale, Rng& rng, double final_layer_scale = 1.0);

/// Per-parameter gradients, shape-mirroring an Mlp.
struct GradientBundle {
  std::vector<Matrix> weight_grads;
  std::vector<Vector> bias_grads;
  bool all_finite() const;
};

GradientBundle zero_gradients(const Mlp& net);

Vector forward(const Mlp& net, const Vector& input);

/// Batched forward; inputs and the result hold one sample per column.
Matrix forward(const Mlp& net, const Matrix& inputs);

struct BackwardResult {
  GradientBundle grads;  // d(sum_i output_i . output_grad_i)/d(theta)
  Matrix input_grads;    // same quantity w.r.t. each input column
};

/// Reverse-mode gradients of output . output_grad, summed over columns.
/// input_grads enables actor-through-critic chaining (dQ/da).
BackwardResult backward(const Mlp& net, const Matrix& inputs,
                        const Matrix& output_grads);
BackwardResult backward(const Mlp& net, const Vector& input,
                        const Vector& output_grad);

struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam(const Mlp& net, double lr);

/// One bias-corrected Adam step. Non-finite gradients reject the whole step.
void adam_step(Mlp& params, const GradientBundle& grads, AdamState& state);

/// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

/// Parameter snapshots: little-endian binary, "AN2NNET1" magic, int32 layer
/// count, int32 widths, int32 activation tags, float64 output scale, then
/// row-major float64 weights and biases per layer. Round-trips bit-exactly.
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace an2n
