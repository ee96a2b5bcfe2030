#include "ramp/reward_kl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ramp {

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

}  // namespace

KlRewardModel::KlRewardModel(int state_dim, const KlConfig& cfg, Rng& rng)
    : cfg_(cfg), net_(layer_sizes(state_dim, cfg.hidden), cfg.activation), opt_(cfg.lr) {
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw std::invalid_argument("KlRewardModel: beta must lie in (0,1)");
  net_.init_uniform(rng);
  clamp_high_ = std::log(1.0 / cfg.beta);
  clamp_low_ = -clamp_high_;
}

double KlRewardModel::loss(const Mat& pos, const Mat& neg) const {
  if (pos.cols() != neg.cols()) throw std::invalid_argument("kl loss: positive and negative batches differ in size");
  const Mat fp = net_.forward(pos);
  const Mat fn = net_.forward(neg);
  double total = 0.0;
  for (Eigen::Index i = 0; i < fp.cols(); ++i) total += softplus(-fp(0, i)) + softplus(fn(0, i));
  return total / static_cast<double>(fp.cols());
}

double KlRewardModel::loss_and_grad(const Mat& pos, const Mat& neg, Vec& grad) const {
  if (pos.cols() != neg.cols()) throw std::invalid_argument("kl loss: positive and negative batches differ in size");
  const double n = static_cast<double>(pos.cols());
  grad = Vec::Zero(net_.num_params());
  MlpTape tp;
  MlpTape tn;
  const Mat fp = net_.forward(pos, tp);
  const Mat fn = net_.forward(neg, tn);
  Mat dp(1, fp.cols());
  Mat dn(1, fn.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < fp.cols(); ++i) {
    total += softplus(-fp(0, i)) + softplus(fn(0, i));
    dp(0, i) = (sigmoid(fp(0, i)) - 1.0) / n;
    dn(0, i) = sigmoid(fn(0, i)) / n;
  }
  if (!std::isfinite(total)) throw std::runtime_error("kl loss is not finite");
  net_.backward(tp, dp, grad);
  net_.backward(tn, dn, grad);
  return total / n;
}

double KlRewardModel::train(const SampleSource& source, Rng& rng) { return train(source, rng, cfg_.steps_per_epoch); }

double KlRewardModel::train(const SampleSource& source, Rng& rng, int steps) {
  double sum = 0.0;
  Vec grad;
  for (int step = 0; step < steps; ++step) {
    const Mat pos = source.positives(cfg_.batch_size, rng);
    const Mat neg = source.negatives(cfg_.batch_size, rng);
    sum += loss_and_grad(pos, neg, grad);
    opt_.step(net_.params(), grad);
  }
  return steps > 0 ? sum / steps : 0.0;
}

double KlRewardModel::train(const PresentBuffer& d_rho, const PastBuffer& d_mu, Rng& rng) {
  return train(buffer_source(d_rho, d_mu, cfg_.beta), rng);
}

double KlRewardModel::reward(const Vec& s) const { return std::clamp(logit(s), clamp_low_, clamp_high_); }

Vec KlRewardModel::rewards(const Mat& states) const {
  Vec out = net_.forward(states).row(0).transpose();
  return out.cwiseMax(clamp_low_).cwiseMin(clamp_high_);
}

}  // namespace ramp
