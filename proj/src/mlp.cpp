#include "ramp/mlp.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ramp {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'M', 'P', 'M', 'L', 'P', '1'};

void activate(Mat& z, Activation act) {
  if (act == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

// Multiplies delta in place by the activation derivative, expressed through
// the post-activation values.
void apply_derivative(Mat& delta, const Mat& post, Activation act) {
  if (act == Activation::relu) {
    delta.array() *= (post.array() > 0.0).cast<double>();
  } else {
    delta.array() *= 1.0 - post.array().square();
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, Activation hidden)
    : sizes_(std::move(layer_sizes)), hidden_(hidden) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw std::invalid_argument("Mlp layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Vec::Zero(total);
}

void Mlp::init_uniform(Rng& rng) {
  for (int l = 0; l < num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    auto b = bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = dist(rng);
  }
}

Eigen::Map<const Mat> Mlp::weight(int layer) const {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}
Eigen::Map<const Vec> Mlp::bias(int layer) const {
  return {params_.data() + offsets_[layer] + static_cast<Eigen::Index>(sizes_[layer + 1]) * sizes_[layer],
          sizes_[layer + 1]};
}
Eigen::Map<Mat> Mlp::weight(int layer) {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}
Eigen::Map<Vec> Mlp::bias(int layer) {
  return {params_.data() + offsets_[layer] + static_cast<Eigen::Index>(sizes_[layer + 1]) * sizes_[layer],
          sizes_[layer + 1]};
}

void Mlp::check_input(Eigen::Index rows) const {
  if (sizes_.empty()) throw std::logic_error("Mlp used before construction");
  if (rows != sizes_.front())
    throw std::invalid_argument("Mlp input has " + std::to_string(rows) + " rows, expected " +
                                std::to_string(sizes_.front()));
}

Mat Mlp::forward(const Mat& x) const {
  check_input(x.rows());
  Mat h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Mat z = weight(l) * h;
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) activate(z, hidden_);
    h = std::move(z);
  }
  return h;
}

Vec Mlp::forward(const Vec& x) const {
  Mat out = forward(Mat(x));
  return out.col(0);
}

Mat Mlp::forward(const Mat& x, MlpTape& tape) const {
  check_input(x.rows());
  tape.acts.resize(sizes_.size());
  tape.acts[0] = x;
  for (int l = 0; l < num_layers(); ++l) {
    Mat& z = tape.acts[l + 1];
    z.noalias() = weight(l) * tape.acts[l];
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) activate(z, hidden_);
  }
  return tape.acts.back();
}

void Mlp::backward(const MlpTape& tape, const Mat& d_out, Vec& grad, Mat* d_input) const {
  if (grad.size() != params_.size()) grad = Vec::Zero(params_.size());
  Mat delta = d_out;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::Index rows = sizes_[l + 1];
    const Eigen::Index cols = sizes_[l];
    Eigen::Map<Mat> gw(grad.data() + offsets_[l], rows, cols);
    Eigen::Map<Vec> gb(grad.data() + offsets_[l] + rows * cols, rows);
    gw.noalias() += delta * tape.acts[l].transpose();
    gb += delta.rowwise().sum();
    if (l > 0 || d_input != nullptr) {
      Mat prev = weight(l).transpose() * delta;
      if (l > 0) {
        apply_derivative(prev, tape.acts[l], hidden_);
        delta = std::move(prev);
      } else {
        *d_input = std::move(prev);
      }
    }
  }
}

void Adam::step(Vec& params, const Vec& grad) {
  if (grad.size() != params.size()) throw std::invalid_argument("Adam: gradient/parameter size mismatch");
  if (m.size() != params.size()) {
    m = Vec::Zero(params.size());
    v = Vec::Zero(params.size());
  }
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

void save_mlp(std::ostream& out, const Mlp& net) {
  out.write(kMagic, sizeof(kMagic));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
  for (int s : net.layer_sizes()) detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(net.hidden_activation()));
  detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(net.num_params()));
  for (Eigen::Index i = 0; i < net.num_params(); ++i) detail::write_le<double>(out, net.params()(i));
  if (!out) throw std::runtime_error("failed to write network checkpoint");
}

Mlp load_mlp(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::char_traits<char>::compare(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a network checkpoint (bad magic)");
  const auto n_sizes = detail::read_le<std::uint32_t>(in);
  if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("corrupt checkpoint: layer count");
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(detail::read_le<std::uint32_t>(in));
  const auto act = detail::read_le<std::uint8_t>(in);
  if (act > 1) throw std::runtime_error("corrupt checkpoint: activation");
  Mlp net(sizes, static_cast<Activation>(act));
  const auto count = detail::read_le<std::uint64_t>(in);
  if (count != static_cast<std::uint64_t>(net.num_params()))
    throw std::runtime_error("corrupt checkpoint: parameter count does not match shape header");
  for (Eigen::Index i = 0; i < net.num_params(); ++i) net.params()(i) = detail::read_le<double>(in);
  return net;
}

void save_mlp(const std::string& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_mlp(out, net);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_mlp(in);
}

}  // namespace ramp
