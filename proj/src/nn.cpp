#include "an2n/nn.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace an2n {

namespace {

Matrix apply_hidden(Hidden h, const Matrix& z) {
  if (h == Hidden::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

Matrix hidden_derivative(Hidden h, const Matrix& z) {
  if (h == Hidden::relu)
    return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

Matrix apply_output(const Mlp& net, const Matrix& z) {
  switch (net.output) {
    case Output::identity:
      return z;
    case Output::tanh:
      return z.array().tanh().matrix();
    case Output::tanh_scaled:
      return (net.output_scale * z.array().tanh()).matrix();
  }
  return z;
}

Matrix output_derivative(const Mlp& net, const Matrix& z) {
  switch (net.output) {
    case Output::identity:
      return Matrix::Ones(z.rows(), z.cols());
    case Output::tanh:
      return (1.0 - z.array().tanh().square()).matrix();
    case Output::tanh_scaled:
      return (net.output_scale * (1.0 - z.array().tanh().square())).matrix();
  }
  return Matrix::Ones(z.rows(), z.cols());
}

void check_conformable(const Mlp& net) {
  require(net.widths.size() >= 2, "mlp: need at least input and output widths");
  require(net.weights.size() == net.widths.size() - 1 &&
              net.biases.size() == net.weights.size(),
          "mlp: layer count mismatch");
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    require(net.weights[k].rows() == net.widths[k + 1] &&
                net.weights[k].cols() == net.widths[k] &&
                net.biases[k].size() == net.widths[k + 1],
            "mlp: layer " + std::to_string(k) + " has non-conformable shape");
  }
}

}  // namespace

bool Mlp::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

bool GradientBundle::all_finite() const {
  for (const auto& g : weight_grads)
    if (!g.allFinite()) return false;
  for (const auto& g : bias_grads)
    if (!g.allFinite()) return false;
  return true;
}

Mlp make_mlp(std::vector<int> widths, Hidden hidden, Output output,
             double output_scale, Rng& rng, double final_layer_scale) {
  require(widths.size() >= 2, "make_mlp: need at least two widths");
  for (int w : widths) require(w > 0, "make_mlp: widths must be positive");

  Mlp net;
  net.widths = std::move(widths);
  net.hidden = hidden;
  net.output = output;
  net.output_scale = output_scale;
  const std::size_t layers = net.widths.size() - 1;
  for (std::size_t k = 0; k < layers; ++k) {
    const int fan_in = net.widths[k];
    const int fan_out = net.widths[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const double scale = (k + 1 == layers) ? final_layer_scale : 1.0;
    Matrix w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) w(i, j) = scale * rng.uniform(-bound, bound);
    Vector b(fan_out);
    for (int i = 0; i < fan_out; ++i) b[i] = scale * rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

GradientBundle zero_gradients(const Mlp& net) {
  GradientBundle g;
  for (const auto& w : net.weights)
    g.weight_grads.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : net.biases)
    g.bias_grads.push_back(Vector::Zero(b.size()));
  return g;
}

Matrix forward(const Mlp& net, const Matrix& inputs) {
  check_conformable(net);
  require(inputs.rows() == net.input_dim(),
          "forward: input has " + std::to_string(inputs.rows()) +
              " rows, net expects " + std::to_string(net.input_dim()));
  Matrix a = inputs;
  const int layers = net.layer_count();
  for (int k = 0; k < layers; ++k) {
    Matrix z = (net.weights[k] * a).colwise() + net.biases[k];
    a = (k + 1 == layers) ? apply_output(net, z) : apply_hidden(net.hidden, z);
  }
  return a;
}

Vector forward(const Mlp& net, const Vector& input) {
  return forward(net, Matrix(input)).col(0);
}

BackwardResult backward(const Mlp& net, const Matrix& inputs,
                        const Matrix& output_grads) {
  check_conformable(net);
  require(inputs.rows() == net.input_dim(),
          "backward: input rows do not match net input width");
  require(output_grads.rows() == net.output_dim() &&
              output_grads.cols() == inputs.cols(),
          "backward: output_grads has shape " +
              std::to_string(output_grads.rows()) + "x" +
              std::to_string(output_grads.cols()) + ", expected " +
              std::to_string(net.output_dim()) + "x" +
              std::to_string(inputs.cols()));

  const int layers = net.layer_count();
  std::vector<Matrix> acts(layers + 1);  // acts[k]: layer-k activations
  std::vector<Matrix> pre(layers);       // pre[k]:  layer-(k+1) pre-activations
  acts[0] = inputs;
  for (int k = 0; k < layers; ++k) {
    pre[k] = (net.weights[k] * acts[k]).colwise() + net.biases[k];
    acts[k + 1] = (k + 1 == layers) ? apply_output(net, pre[k])
                                    : apply_hidden(net.hidden, pre[k]);
  }

  BackwardResult res;
  res.grads.weight_grads.resize(layers);
  res.grads.bias_grads.resize(layers);

  Matrix delta = output_grads.cwiseProduct(output_derivative(net, pre[layers - 1]));
  for (int k = layers - 1; k >= 0; --k) {
    res.grads.weight_grads[k] = delta * acts[k].transpose();
    res.grads.bias_grads[k] = delta.rowwise().sum();
    Matrix back = net.weights[k].transpose() * delta;
    if (k > 0)
      delta = back.cwiseProduct(hidden_derivative(net.hidden, pre[k - 1]));
    else
      res.input_grads = std::move(back);
  }
  return res;
}

BackwardResult backward(const Mlp& net, const Vector& input,
                        const Vector& output_grad) {
  return backward(net, Matrix(input), Matrix(output_grad));
}

AdamState make_adam(const Mlp& net, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto& w : net.weights) {
    s.m_w.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.v_w.push_back(Matrix::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : net.biases) {
    s.m_b.push_back(Vector::Zero(b.size()));
    s.v_b.push_back(Vector::Zero(b.size()));
  }
  return s;
}

void adam_step(Mlp& params, const GradientBundle& grads, AdamState& state) {
  require(grads.weight_grads.size() == params.weights.size() &&
              grads.bias_grads.size() == params.biases.size(),
          "adam_step: gradient layer count mismatch");
  require(state.m_w.size() == params.weights.size(),
          "adam_step: optimizer state does not mirror the parameters");
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    require(grads.weight_grads[k].rows() == params.weights[k].rows() &&
                grads.weight_grads[k].cols() == params.weights[k].cols() &&
                grads.bias_grads[k].size() == params.biases[k].size(),
            "adam_step: gradient shape mismatch at layer " + std::to_string(k));
  }
  if (!grads.all_finite())
    throw std::runtime_error("adam_step: non-finite gradient, step rejected");

  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.array() -=
        state.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    update(params.weights[k], state.m_w[k], state.v_w[k], grads.weight_grads[k]);
    update(params.biases[k], state.m_b[k], state.v_b[k], grads.bias_grads[k]);
  }
  if (!params.all_finite())
    throw std::runtime_error("adam_step: parameters became non-finite");
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  require(tau >= 0.0 && tau <= 1.0, "soft_update: tau must lie in [0, 1]");
  require(target.weights.size() == online.weights.size(),
          "soft_update: layer count mismatch");
  for (std::size_t k = 0; k < target.weights.size(); ++k) {
    require(target.weights[k].rows() == online.weights[k].rows() &&
                target.weights[k].cols() == online.weights[k].cols(),
            "soft_update: shape mismatch at layer " + std::to_string(k));
    target.weights[k] = tau * online.weights[k] + (1.0 - tau) * target.weights[k];
    target.biases[k] = tau * online.biases[k] + (1.0 - tau) * target.biases[k];
  }
}

namespace {

constexpr char kMagic[8] = {'A', 'N', '2', 'N', 'N', 'E', 'T', '1'};

void write_i32(std::ostream& os, std::int32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::int32_t read_i32(std::istream& is) {
  std::int32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_mlp(const Mlp& net, const std::string& path) {
  check_conformable(net);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_mlp: cannot open " + path);
  os.write(kMagic, sizeof kMagic);
  write_i32(os, static_cast<std::int32_t>(net.widths.size()));
  for (int w : net.widths) write_i32(os, w);
  write_i32(os, static_cast<std::int32_t>(net.hidden));
  write_i32(os, static_cast<std::int32_t>(net.output));
  write_f64(os, net.output_scale);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    const Matrix& w = net.weights[k];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) write_f64(os, w(i, j));
    for (Eigen::Index i = 0; i < net.biases[k].size(); ++i)
      write_f64(os, net.biases[k][i]);
  }
  if (!os) throw std::runtime_error("save_mlp: write failed for " + path);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_mlp: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("load_mlp: bad magic in " + path);

  Mlp net;
  const std::int32_t n_widths = read_i32(is);
  if (n_widths < 2 || n_widths > 1 << 16)
    throw std::runtime_error("load_mlp: corrupt width count in " + path);
  net.widths.resize(n_widths);
  for (auto& w : net.widths) w = read_i32(is);
  net.hidden = static_cast<Hidden>(read_i32(is));
  net.output = static_cast<Output>(read_i32(is));
  net.output_scale = read_f64(is);
  for (int k = 0; k + 1 < n_widths; ++k) {
    Matrix w(net.widths[k + 1], net.widths[k]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = read_f64(is);
    Vector b(net.widths[k + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = read_f64(is);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  if (!is) throw std::runtime_error("load_mlp: truncated file " + path);
  check_conformable(net);
  return net;
}

}  // namespace an2n
