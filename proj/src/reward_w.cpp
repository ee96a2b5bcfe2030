#include "ramp/reward_w.hpp"

#include <cmath>
#include <stdexcept>

namespace ramp {

WRewardModel::WRewardModel(int state_dim, const WConfig& cfg, Rng& rng) : cfg_(cfg), opt_(cfg.lr), lambda_(cfg.lambda0) {
  if (!(cfg.eps_relax > 0.0)) throw std::invalid_argument("WRewardModel: eps_relax must be positive");
  if (cfg.lambda0 < 0.0) throw std::invalid_argument("WRewardModel: lambda0 must be nonnegative");
  std::vector<int> sizes{state_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  net_ = Mlp(sizes, cfg.activation);
  net_.init_uniform(rng);
}

void WRewardModel::set_lambda(double value) {
  if (value < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  lambda_ = value;
}

double WRewardModel::constraint_value(const Mat& s, const Mat& s_next) const {
  const Mat f = net_.forward(s);
  const Mat g = net_.forward(s_next);
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.cols(); ++i) total += std::max(std::abs(f(0, i) - g(0, i)) - 1.0, -cfg_.eps_relax);
  return total / static_cast<double>(f.cols());
}

double WRewardModel::loss(const Mat& pos, const Mat& neg, const Mat& s, const Mat& s_next) const {
  if (pos.cols() == 0 || neg.cols() == 0 || s.cols() == 0) throw std::invalid_argument("w loss: empty batch");
  const double objective = net_.forward(pos).mean() - net_.forward(neg).mean();
  return -objective + lambda_ * constraint_value(s, s_next);
}

double WRewardModel::loss_and_grad(const Mat& pos, const Mat& neg, const Mat& s, const Mat& s_next, Vec& grad) const {
  if (pos.cols() == 0 || neg.cols() == 0 || s.cols() == 0) throw std::invalid_argument("w loss: empty batch");
  grad = Vec::Zero(net_.num_params());
  MlpTape tp, tn, ts, tq;
  const Mat fp = net_.forward(pos, tp);
  const Mat fn = net_.forward(neg, tn);
  const Mat fs = net_.forward(s, ts);
  const Mat fq = net_.forward(s_next, tq);
  const double np = static_cast<double>(fp.cols());
  const double nn = static_cast<double>(fn.cols());
  const double nc = static_cast<double>(fs.cols());

  net_.backward(tp, Mat::Constant(1, fp.cols(), -1.0 / np), grad);
  net_.backward(tn, Mat::Constant(1, fn.cols(), 1.0 / nn), grad);

  Mat ds = Mat::Zero(1, fs.cols());
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < fs.cols(); ++i) {
    const double diff = fs(0, i) - fq(0, i);
    const double slack = std::abs(diff) - 1.0;
    if (slack > -cfg_.eps_relax) {
      penalty += slack;
      ds(0, i) = lambda_ * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) / nc;
    } else {
      penalty += -cfg_.eps_relax;
    }
  }
  net_.backward(ts, ds, grad);
  net_.backward(tq, -ds, grad);
  const double value = -(fp.mean() - fn.mean()) + lambda_ * penalty / nc;
  if (!std::isfinite(value)) throw std::runtime_error("w loss is not finite");
  return value;
}

void WRewardModel::lambda_update(const Mat& s, const Mat& s_next) {
  lambda_ = std::max(0.0, lambda_ + cfg_.lr_lambda * constraint_value(s, s_next));
}

double WRewardModel::train(const SampleSource& source, Rng& rng) { return train(source, rng, cfg_.steps_per_epoch); }

double WRewardModel::train(const SampleSource& source, Rng& rng, int steps) {
  double sum = 0.0;
  Vec grad;
  for (int step = 0; step < steps; ++step) {
    const Mat pos = source.positives(cfg_.batch_size, rng);
    const Mat neg = source.negatives(cfg_.batch_size, rng);
    const auto [s, s_next] = source.transitions(cfg_.batch_size, rng);
    lambda_update(s, s_next);
    sum += loss_and_grad(pos, neg, s, s_next, grad);
    opt_.step(net_.params(), grad);
  }
  return steps > 0 ? sum / steps : 0.0;
}

double WRewardModel::train(const PresentBuffer& d_rho, const PastBuffer& d_mu, Rng& rng) {
  return train(buffer_source(d_rho, d_mu, cfg_.beta), rng);
}

Vec WRewardModel::rewards(const Mat& states) const { return net_.forward(states).row(0).transpose(); }

}  // namespace ramp
