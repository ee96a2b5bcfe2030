#include "ramp/mlp.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace ramp;

namespace {

// Independent evaluation, one sample and one neuron at a time.
double reference_forward(const Mlp& net, const Vec& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weight(l);
    const auto b = net.bias(l);
    std::vector<double> next(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      double z = b(i);
      for (Eigen::Index j = 0; j < w.cols(); ++j) z += w(i, j) * h[static_cast<std::size_t>(j)];
      if (l + 1 < net.num_layers()) z = net.hidden_activation() == Activation::relu ? std::max(z, 0.0) : std::tanh(z);
      next[static_cast<std::size_t>(i)] = z;
    }
    h = std::move(next);
  }
  return h[0];
}

}  // namespace

TEST_CASE("zero parameters give a zero output") {
  Mlp net({3, 8, 8, 2});
  const Vec y = net.forward(Vec(Vec::Constant(3, 0.7)));
  CHECK(y.isZero(0.0));
}

TEST_CASE("single identity layer passes the input through") {
  Mlp net({4, 4});
  net.weight(0).setIdentity();
  Rng rng(1);
  const Mat x = test::uniform_mat(4, 5, -3, 3, rng);
  CHECK(net.forward(x) == x);
}

TEST_CASE("batched forward agrees with a scalar re-implementation") {
  Rng rng(2);
  for (Activation act : {Activation::relu, Activation::tanh}) {
    Mlp net({2, 16, 1}, act);
    net.init_uniform(rng);
    const Mat x = test::uniform_mat(2, 50, -2, 2, rng);
    const Mat y = net.forward(x);
    for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK(std::abs(y(0, j) - reference_forward(net, x.col(j))) <= 1e-12);
  }
}

TEST_CASE("input width is validated") {
  Mlp net({3, 4, 1});
  CHECK_THROWS_AS(net.forward(Mat(Mat::Zero(2, 1))), std::invalid_argument);
  CHECK_THROWS_AS(Mlp({3}), std::invalid_argument);
}

TEST_CASE("uniform initialization respects the fan-in bound") {
  Rng rng(3);
  Mlp net({9, 25, 1});
  net.init_uniform(rng);
  CHECK(net.weight(0).cwiseAbs().maxCoeff() <= 1.0 / 3.0);
  CHECK(net.weight(1).cwiseAbs().maxCoeff() <= 1.0 / 5.0);
  CHECK(net.bias(1).cwiseAbs().maxCoeff() <= 1.0 / 5.0);
}

TEST_CASE("zero output gradient gives a zero parameter gradient") {
  Rng rng(4);
  Mlp net({3, 6, 2});
  net.init_uniform(rng);
  MlpTape tape;
  net.forward(test::uniform_mat(3, 7, -1, 1, rng), tape);
  Vec grad;
  net.backward(tape, Mat::Zero(2, 7), grad);
  CHECK(grad.size() == net.num_params());
  CHECK(grad.isZero(0.0));
}

TEST_CASE("backprop matches central differences on 100 random nets") {
  Rng rng(5);
  std::uniform_int_distribution<int> width(1, 12);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int in = width(rng), out = width(rng) % 3 + 1;
    Mlp net({in, width(rng), width(rng), out}, Activation::tanh);
    net.init_uniform(rng);
    const Mat x = test::uniform_mat(in, 6, -2, 2, rng);
    const Mat c = test::uniform_mat(out, 6, -1, 1, rng);
    // loss = sum(c .* y) + 0.5 * |y|^2
    auto loss = [&] {
      const Mat y = net.forward(x);
      return (c.array() * y.array()).sum() + 0.5 * y.squaredNorm();
    };
    MlpTape tape;
    const Mat y = net.forward(x, tape);
    Vec grad;
    Mat d_in;
    net.backward(tape, c + y, grad, &d_in);
    if (!test::check_gradient(net.params(), grad, loss).ok) ++failures;

    // input gradient
    Mat xv = x;
    auto loss_x = [&] {
      const Mat yy = net.forward(xv);
      return (c.array() * yy.array()).sum() + 0.5 * yy.squaredNorm();
    };
    Vec flat = Eigen::Map<Vec>(xv.data(), xv.size());
    const Vec d_flat = Eigen::Map<const Vec>(d_in.data(), d_in.size());
    auto loss_flat = [&] {
      xv = Eigen::Map<Mat>(flat.data(), x.rows(), x.cols());
      return loss_x();
    };
    if (!test::check_gradient(flat, d_flat, loss_flat).ok) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("gradient scales with the loss") {
  Rng rng(6);
  Mlp net({3, 10, 10, 1});
  net.init_uniform(rng);
  MlpTape tape;
  const Mat y = net.forward(test::uniform_mat(3, 8, -1, 1, rng), tape);
  Vec g1, g4;
  net.backward(tape, y, g1);
  net.backward(tape, 4.0 * y, g4);
  CHECK(g4 == 4.0 * g1);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  Adam opt(0.1);
  Vec p = Vec::LinSpaced(5, -1, 1);
  const Vec before = p;
  opt.step(p, Vec::Zero(5));
  CHECK(p == before);
}

TEST_CASE("adam first step moves by lr / (1 + eps)") {
  Adam opt(0.1);
  Vec p(1);
  p << 0.5;
  opt.step(p, Vec::Ones(1));
  CHECK(std::abs(p(0) - (0.5 - 0.1 / (1.0 + 1e-8))) <= 1e-15);
}

TEST_CASE("adam reproduces a scalar reference trace") {
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Adam opt(lr);
  Vec p(2);
  p << 1.0, -2.0;
  double q[2] = {1.0, -2.0}, m[2] = {0, 0}, v[2] = {0, 0};
  const double grads[3][2] = {{0.3, -1.2}, {0.3, -1.2}, {-2.0, 0.01}};
  for (int t = 1; t <= 3; ++t) {
    Vec g(2);
    g << grads[t - 1][0], grads[t - 1][1];
    opt.step(p, g);
    for (int i = 0; i < 2; ++i) {
      m[i] = b1 * m[i] + (1 - b1) * grads[t - 1][i];
      v[i] = b2 * v[i] + (1 - b2) * grads[t - 1][i] * grads[t - 1][i];
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      q[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
    CHECK(std::abs(p(0) - q[0]) <= 1e-12);
    CHECK(std::abs(p(1) - q[1]) <= 1e-12);
  }
  CHECK(opt.t == 3);
}

TEST_CASE("checkpoints round-trip exactly") {
  Rng rng(7);
  Mlp net({5, 7, 3}, Activation::tanh);
  net.init_uniform(rng);
  std::stringstream buf;
  save_mlp(buf, net);
  const Mlp back = load_mlp(buf);
  CHECK(back == net);
  CHECK(back.hidden_activation() == Activation::tanh);
}

TEST_CASE("corrupt checkpoints are rejected") {
  Mlp net({2, 3, 1});
  std::stringstream buf;
  save_mlp(buf, net);
  std::string bytes = buf.str();

  std::stringstream bad_magic(std::string("XXXXXXXX") + bytes.substr(8));
  CHECK_THROWS(load_mlp(bad_magic));
  std::stringstream truncated(bytes.substr(0, bytes.size() - 4));
  CHECK_THROWS(load_mlp(truncated));
  std::string wrong_count = bytes;
  wrong_count[8 + 4 + 3 * 4 + 1] = 99;  // parameter count low byte
  std::stringstream bad_count(wrong_count);
  CHECK_THROWS(load_mlp(bad_count));
}
