#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "an2n/nn.hpp"
#include "doctest.h"

using namespace an2n;

namespace {

// Straight-line re-implementation of the affine + activation chain with
// plain scalar loops; deliberately independent of the Eigen code path.
std::vector<double> naive_forward(const Mlp& net, const std::vector<double>& x) {
  std::vector<double> a = x;
  for (int k = 0; k < net.layer_count(); ++k) {
    std::vector<double> z(net.widths[k + 1], 0.0);
    for (int i = 0; i < net.widths[k + 1]; ++i) {
      double acc = net.biases[k][i];
      for (int j = 0; j < net.widths[k]; ++j) acc += net.weights[k](i, j) * a[j];
      z[i] = acc;
    }
    const bool last = k + 1 == net.layer_count();
    for (int i = 0; i < net.widths[k + 1]; ++i) {
      if (!last) {
        z[i] = net.hidden == Hidden::relu ? (z[i] > 0.0 ? z[i] : 0.0)
                                          : std::tanh(z[i]);
      } else if (net.output == Output::tanh) {
        z[i] = std::tanh(z[i]);
      } else if (net.output == Output::tanh_scaled) {
        z[i] = net.output_scale * std::tanh(z[i]);
      }
    }
    a = std::move(z);
  }
  return a;
}

Mlp single_linear_layer() {
  Mlp net;
  net.widths = {1, 1};
  net.weights = {Matrix::Constant(1, 1, 2.0)};
  net.biases = {Vector::Constant(1, 1.0)};
  net.output = Output::identity;
  return net;
}

double fd_rel_err(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
}

}  // namespace

TEST_CASE("forward: affine identity case") {
  const Mlp net = single_linear_layer();
  const Vector x = Vector::Constant(1, 3.0);
  const Vector out = forward(net, x);
  CHECK(out.size() == 1);
  CHECK(out[0] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("forward: zero parameters give the zero vector") {
  Rng rng(1);
  Mlp net = make_mlp({4, 8, 3}, Hidden::relu, Output::identity, 1.0, rng);
  for (auto& w : net.weights) w.setZero();
  for (auto& b : net.biases) b.setZero();
  const Vector ones = Vector::Ones(4);
  CHECK(forward(net, ones).isZero(0.0));
}

TEST_CASE("forward: matches the straight-line scalar oracle") {
  Rng rng(42);
  const Mlp net = make_mlp({3, 5, 2}, Hidden::tanh, Output::tanh, 1.0, rng);
  Rng inputs(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = inputs.normal_vector(3);
    const auto expected = naive_forward(net, {x[0], x[1], x[2]});
    const Vector got = forward(net, x);
    for (int i = 0; i < 2; ++i)
      CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("forward: pure function, bit-identical repeats") {
  Rng rng(7);
  const Mlp net = make_mlp({3, 16, 16, 2}, Hidden::relu, Output::tanh_scaled,
                           2.0, rng);
  const Vector x = Rng(8).normal_vector(3);
  const Vector a = forward(net, x);
  const Vector b = forward(net, x);
  CHECK(a == b);
}

TEST_CASE("forward: dimension mismatch is rejected with a diagnostic") {
  Rng rng(7);
  const Mlp net = make_mlp({3, 4, 2}, Hidden::relu, Output::identity, 1.0, rng);
  const Vector wrong = Vector::Ones(5);
  CHECK_THROWS_AS(forward(net, wrong), std::invalid_argument);
}

TEST_CASE("backward: linear layer gradients are the textbook ones") {
  const Mlp net = single_linear_layer();
  const Vector x = Vector::Constant(1, 3.0);
  const Vector og = Vector::Ones(1);
  const auto res = backward(net, x, og);
  CHECK(res.grads.weight_grads[0](0, 0) == 3.0);  // dy/dW = x
  CHECK(res.grads.bias_grads[0][0] == 1.0);       // dy/db = 1
  CHECK(res.input_grads(0, 0) == 2.0);            // dy/dx = W
}

TEST_CASE("backward: zero output gradient gives a zero bundle") {
  Rng rng(11);
  const Mlp net = make_mlp({3, 8, 2}, Hidden::relu, Output::tanh, 1.0, rng);
  const Vector x = Vector::Ones(3);
  const Vector og = Vector::Zero(2);
  const auto res = backward(net, x, og);
  for (const auto& g : res.grads.weight_grads) CHECK(g.isZero(0.0));
  for (const auto& g : res.grads.bias_grads) CHECK(g.isZero(0.0));
  CHECK(res.input_grads.isZero(0.0));
}

TEST_CASE("backward: shape mismatch is rejected") {
  Rng rng(11);
  const Mlp net = make_mlp({3, 8, 2}, Hidden::relu, Output::identity, 1.0, rng);
  const Vector x = Vector::Ones(3);
  const Vector bad_og = Vector::Ones(3);
  CHECK_THROWS_AS(backward(net, x, bad_og), std::invalid_argument);
}

TEST_CASE("backward: finite-difference oracle over every parameter") {
  const double h = 1e-5;
  for (Hidden hidden : {Hidden::tanh, Hidden::relu}) {
    Rng rng(hidden == Hidden::tanh ? 101 : 202);
    Mlp net = make_mlp({4, 8, 6, 2}, hidden, Output::tanh, 1.0, rng);
    const Vector x = rng.normal_vector(4);
    const Vector v = rng.normal_vector(2);  // scalar loss: output . v

    const auto analytic = backward(net, x, v).grads;
    auto loss = [&] { return forward(net, x).dot(v); };

    double worst = 0.0;
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
      for (Eigen::Index i = 0; i < net.weights[k].rows(); ++i)
        for (Eigen::Index j = 0; j < net.weights[k].cols(); ++j) {
          double& p = net.weights[k](i, j);
          const double saved = p;
          p = saved + h;
          const double up = loss();
          p = saved - h;
          const double down = loss();
          p = saved;
          worst = std::max(worst, fd_rel_err(analytic.weight_grads[k](i, j),
                                             (up - down) / (2 * h)));
        }
      for (Eigen::Index i = 0; i < net.biases[k].size(); ++i) {
        double& p = net.biases[k][i];
        const double saved = p;
        p = saved + h;
        const double up = loss();
        p = saved - h;
        const double down = loss();
        p = saved;
        worst = std::max(worst, fd_rel_err(analytic.bias_grads[k][i],
                                           (up - down) / (2 * h)));
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("backward: input gradients match finite differences") {
  Rng rng(55);
  const Mlp net = make_mlp({3, 8, 2}, Hidden::tanh, Output::identity, 1.0, rng);
  Vector x = rng.normal_vector(3);
  const Vector v = rng.normal_vector(2);
  const Matrix ig = backward(net, x, v).input_grads;
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = forward(net, x).dot(v);
    x[i] = saved - h;
    const double down = forward(net, x).dot(v);
    x[i] = saved;
    CHECK(fd_rel_err(ig(i, 0), (up - down) / (2 * h)) < 1e-4);
  }
}

TEST_CASE("adam: zero gradients never change parameters") {
  Rng rng(3);
  Mlp net = make_mlp({2, 4, 1}, Hidden::relu, Output::identity, 1.0, rng);
  const Mlp before = net;
  AdamState state = make_adam(net, 1e-3);
  // seed the moments so the decay is observable
  const Vector x2 = Vector::Ones(2);
  const Vector og1 = Vector::Ones(1);
  adam_step(net, backward(net, x2, og1).grads, state);
  const double m_norm = state.m_w[0].norm();
  for (int i = 0; i < 5; ++i) adam_step(net, zero_gradients(net), state);
  CHECK(state.m_w[0].norm() < m_norm);  // moments decay toward zero

  Mlp fresh = before;
  AdamState fresh_state = make_adam(fresh, 1e-3);
  adam_step(fresh, zero_gradients(fresh), fresh_state);
  for (std::size_t k = 0; k < fresh.weights.size(); ++k) {
    CHECK(fresh.weights[k] == before.weights[k]);
    CHECK(fresh.biases[k] == before.biases[k]);
  }
}

TEST_CASE("adam: first-step magnitude is lr * sign(g), bias-corrected") {
  Mlp net = single_linear_layer();
  const double w0 = net.weights[0](0, 0);
  AdamState state = make_adam(net, 0.01);
  GradientBundle g = zero_gradients(net);
  g.weight_grads[0](0, 0) = 0.73;  // arbitrary positive gradient
  adam_step(net, g, state);
  const double delta = net.weights[0](0, 0) - w0;
  CHECK(delta < 0.0);
  CHECK(std::abs(delta) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("adam: 100 steps on f(x)=x^2 match the scalar reference recurrence") {
  // Reference recurrence, written independently of the library.
  double theta = 1.0, m = 0.0, v = 0.0;
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int t = 1; t <= 100; ++t) {
    const double g = 2.0 * theta;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    theta -= lr * mhat / (std::sqrt(vhat) + eps);
  }

  Mlp net;
  net.widths = {1, 1};
  net.weights = {Matrix::Constant(1, 1, 1.0)};
  net.biases = {Vector::Zero(1)};
  AdamState state = make_adam(net, lr);
  for (int t = 1; t <= 100; ++t) {
    GradientBundle g = zero_gradients(net);
    g.weight_grads[0](0, 0) = 2.0 * net.weights[0](0, 0);
    g.bias_grads[0][0] = 0.0;
    adam_step(net, g, state);
  }
  CHECK(net.weights[0](0, 0) == doctest::Approx(theta).epsilon(1e-12));
  CHECK(std::abs(net.weights[0](0, 0)) < 0.1);
}

TEST_CASE("adam: non-finite gradients reject the step loudly") {
  Rng rng(5);
  Mlp net = make_mlp({2, 3, 1}, Hidden::relu, Output::identity, 1.0, rng);
  const Mlp before = net;
  AdamState state = make_adam(net, 1e-3);
  GradientBundle g = zero_gradients(net);
  g.weight_grads[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(net, g, state), std::runtime_error);
  CHECK(net.weights[0] == before.weights[0]);  // nothing applied
  CHECK(state.step == 0);
}

TEST_CASE("soft_update: endpoint and midpoint cases") {
  Rng rng(9);
  const Mlp online = make_mlp({2, 4, 1}, Hidden::relu, Output::identity, 1.0, rng);

  Mlp target = make_mlp({2, 4, 1}, Hidden::relu, Output::identity, 1.0, rng);
  const Mlp target_before = target;

  soft_update(target, online, 0.0);
  for (std::size_t k = 0; k < target.weights.size(); ++k)
    CHECK(target.weights[k] == target_before.weights[k]);

  soft_update(target, online, 1.0);
  for (std::size_t k = 0; k < target.weights.size(); ++k)
    CHECK(target.weights[k] == online.weights[k]);

  Mlp half;
  half.widths = {1, 1};
  half.weights = {Matrix::Zero(1, 1)};
  half.biases = {Vector::Zero(1)};
  Mlp two = half;
  two.weights[0](0, 0) = 2.0;
  two.biases[0][0] = 2.0;
  soft_update(half, two, 0.5);
  CHECK(half.weights[0](0, 0) == 1.0);

  CHECK_THROWS_AS(soft_update(half, two, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(soft_update(half, two, -0.1), std::invalid_argument);
}

TEST_CASE("soft_update: twice with tau equals once with 1-(1-tau)^2") {
  Rng rng(13);
  const Mlp online = make_mlp({3, 8, 2}, Hidden::relu, Output::identity, 1.0, rng);
  Mlp twice = make_mlp({3, 8, 2}, Hidden::relu, Output::identity, 1.0, rng);
  Mlp once = twice;
  const double tau = 0.37;
  soft_update(twice, online, tau);
  soft_update(twice, online, tau);
  soft_update(once, online, 1.0 - (1.0 - tau) * (1.0 - tau));
  for (std::size_t k = 0; k < twice.weights.size(); ++k) {
    CHECK((twice.weights[k] - once.weights[k]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((twice.biases[k] - once.biases[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("snapshot: save/load round-trips bit-exactly") {
  Rng rng(21);
  const Mlp net = make_mlp({3, 16, 16, 2}, Hidden::relu, Output::tanh_scaled,
                           2.0, rng, 1e-3);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = (dir / "an2n_test_net.bin").string();
  save_mlp(net, path);
  const Mlp loaded = load_mlp(path);

  CHECK(loaded.widths == net.widths);
  CHECK(loaded.hidden == net.hidden);
  CHECK(loaded.output == net.output);
  CHECK(loaded.output_scale == net.output_scale);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    CHECK(loaded.weights[k] == net.weights[k]);
    CHECK(loaded.biases[k] == net.biases[k]);
  }

  // Saving the loaded net reproduces the file byte for byte.
  const auto path2 = (dir / "an2n_test_net2.bin").string();
  save_mlp(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("parameters stay finite through training-style updates") {
  Rng rng(33);
  Mlp net = make_mlp({4, 16, 16, 1}, Hidden::relu, Output::identity, 1.0, rng);
  AdamState state = make_adam(net, 1e-3);
  for (int i = 0; i < 200; ++i) {
    const Vector x = rng.normal_vector(4);
    const Vector v = Vector::Constant(1, rng.normal());
    adam_step(net, backward(net, x, v).grads, state);
    REQUIRE(net.all_finite());
  }
}
