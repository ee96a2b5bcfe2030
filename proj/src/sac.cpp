#include "ramp/sac.hpp"

#include "ramp/reward_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ramp {

namespace {

const double kActionBound = std::nextafter(1.0, 0.0);
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// log(1 - tanh(u)^2) without cancellation.
double log1m_tanh2(double u) { return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u)); }

std::vector<int> sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

Mat stack(const Mat& top, const Mat& bottom) {
  Mat out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

// Forward state of the policy head, shared by sample() and actor_loss().
struct PolicyHead {
  Mat log_std;
  Mat std;
  Mat u;
  Mat action;
  Vec log_prob;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> ls_active;
};

PolicyHead policy_head(const Mat& out, const Mat& noise, int action_dim) {
  PolicyHead h;
  const auto mean = out.topRows(action_dim);
  const auto raw_ls = out.bottomRows(action_dim);
  h.ls_active = (raw_ls.array() > kLogStdMin) && (raw_ls.array() < kLogStdMax);
  h.log_std = raw_ls.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  h.std = h.log_std.array().exp().matrix();
  h.u = mean + h.std.cwiseProduct(noise);
  h.action = h.u.array().tanh().matrix().cwiseMax(-kActionBound).cwiseMin(kActionBound);
  h.log_prob = Vec::Zero(out.cols());
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    double lp = 0.0;
    for (int i = 0; i < action_dim; ++i)
      lp += -0.5 * noise(i, j) * noise(i, j) - h.log_std(i, j) - kHalfLog2Pi - log1m_tanh2(h.u(i, j));
    h.log_prob(j) = lp;
  }
  return h;
}

}  // namespace

void SacConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("sac.gamma must lie in (0,1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("sac.tau must lie in (0,1]");
  if (!(lambda_a >= 0.0)) throw std::invalid_argument("sac.lambda_a must be >= 0");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw std::invalid_argument("sac learning rates must be positive");
  if (batch_size < 1) throw std::invalid_argument("sac.batch_size must be >= 1");
  if (!(updates_per_env_step >= 0.0)) throw std::invalid_argument("sac.updates_per_env_step must be >= 0");
}

double squashed_gaussian_log_prob(double mean, double log_std, double noise) {
  const double u = mean + std::exp(log_std) * noise;
  return -0.5 * noise * noise - log_std - kHalfLog2Pi - log1m_tanh2(u);
}

SacAgent::SacAgent(int state_dim, int action_dim, const SacConfig& cfg, Rng& rng)
    : actor(sizes(state_dim, cfg.hidden, 2 * action_dim), cfg.activation),
      q1(sizes(state_dim + action_dim, cfg.hidden, 1), cfg.activation),
      q2(sizes(state_dim + action_dim, cfg.hidden, 1), cfg.activation),
      state_dim_(state_dim),
      action_dim_(action_dim),
      cfg_(cfg),
      actor_opt_(cfg.lr_actor),
      q1_opt_(cfg.lr_critic),
      q2_opt_(cfg.lr_critic) {
  cfg_.validate();
  actor.init_uniform(rng);
  q1.init_uniform(rng);
  q2.init_uniform(rng);
  q1_target = q1;
  q2_target = q2;
}

Mat SacAgent::standard_noise(Eigen::Index batch, Rng& rng) const {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat out(action_dim_, batch);
  for (Eigen::Index j = 0; j < batch; ++j)
    for (int i = 0; i < action_dim_; ++i) out(i, j) = n(rng);
  return out;
}

Vec SacAgent::act(const Vec& s, bool deterministic, Rng& rng) const {
  const Vec out = actor.forward(s);
  if (deterministic) {
    return out.head(action_dim_).array().tanh().matrix().cwiseMax(-kActionBound).cwiseMin(kActionBound);
  }
  const Mat noise = standard_noise(1, rng);
  return policy_head(Mat(out), noise, action_dim_).action.col(0);
}

PolicySample SacAgent::sample(const Mat& states, const Mat& noise) const {
  PolicyHead h = policy_head(actor.forward(states), noise, action_dim_);
  return {std::move(h.action), std::move(h.log_prob)};
}

Vec SacAgent::critic_targets(const SacBatch& batch, const Mat& next_noise) const {
  const PolicySample next = sample(batch.s_next, next_noise);
  const Mat x = stack(batch.s_next, next.action);
  const Mat t1 = q1_target.forward(x);
  const Mat t2 = q2_target.forward(x);
  Vec y(batch.r.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double soft_v = std::min(t1(0, j), t2(0, j)) - cfg_.lambda_a * next.log_prob(j);
    y(j) = batch.r(j) + cfg_.gamma * (1.0 - batch.done(j)) * soft_v;
  }
  return y;
}

double SacAgent::critic_loss(int which, const Mat& s, const Mat& a, const Vec& y, Vec* grad) const {
  const Mlp& net = which == 0 ? q1 : q2;
  const Mat x = stack(s, a);
  const double n = static_cast<double>(s.cols());
  if (grad == nullptr) {
    const Mat q = net.forward(x);
    return (q.row(0).transpose() - y).squaredNorm() / n;
  }
  MlpTape tape;
  const Mat q = net.forward(x, tape);
  const Vec err = q.row(0).transpose() - y;
  *grad = Vec::Zero(net.num_params());
  net.backward(tape, (2.0 / n) * err.transpose(), *grad);
  return err.squaredNorm() / n;
}

double SacAgent::actor_loss(const Mat& states, const Mat& noise, Vec* grad) const {
  const double n = static_cast<double>(states.cols());
  MlpTape actor_tape;
  const Mat out = grad ? actor.forward(states, actor_tape) : actor.forward(states);
  const PolicyHead h = policy_head(out, noise, action_dim_);
  const Mat x = stack(states, h.action);
  MlpTape t1, t2;
  const Mat v1 = q1.forward(x, t1);
  const Mat v2 = q2.forward(x, t2);

  double total = 0.0;
  Mat d1 = Mat::Zero(1, states.cols());
  Mat d2 = Mat::Zero(1, states.cols());
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    const bool first = v1(0, j) <= v2(0, j);
    total += cfg_.lambda_a * h.log_prob(j) - (first ? v1(0, j) : v2(0, j));
    (first ? d1 : d2)(0, j) = -1.0 / n;
  }
  if (grad == nullptr) return total / n;

  // dL/da through the selected critic.
  Vec scratch = Vec::Zero(q1.num_params());
  Mat dx1, dx2;
  q1.backward(t1, d1, scratch, &dx1);
  q2.backward(t2, d2, scratch, &dx2);
  const Mat d_action = (dx1 + dx2).bottomRows(action_dim_);

  const double w = cfg_.lambda_a / n;
  const Mat d_u = d_action.cwiseProduct((1.0 - h.action.array().square()).matrix()) + 2.0 * w * h.action;
  Mat d_out(2 * action_dim_, states.cols());
  d_out.topRows(action_dim_) = d_u;
  d_out.bottomRows(action_dim_) =
      ((d_u.cwiseProduct(h.std).cwiseProduct(noise).array() - w) * h.ls_active.cast<double>()).matrix();
  *grad = Vec::Zero(actor.num_params());
  actor.backward(actor_tape, d_out, *grad);
  return total / n;
}

std::pair<double, double> SacAgent::critic_update(const SacBatch& batch, Rng& rng) {
  if (batch.s.cols() == 0) throw std::invalid_argument("critic_update: empty batch");
  const Vec y = critic_targets(batch, standard_noise(batch.s.cols(), rng));
  Vec g;
  const double l1 = critic_loss(0, batch.s, batch.a, y, &g);
  q1_opt_.step(q1.params(), g);
  const double l2 = critic_loss(1, batch.s, batch.a, y, &g);
  q2_opt_.step(q2.params(), g);
  return {l1, l2};
}

double SacAgent::actor_update(const Mat& states, Rng& rng) {
  if (states.cols() == 0) throw std::invalid_argument("actor_update: empty batch");
  Vec g;
  const double loss = actor_loss(states, standard_noise(states.cols(), rng), &g);
  actor_opt_.step(actor.params(), g);
  return loss;
}

void SacAgent::target_soft_update() {
  q1_target.params() = cfg_.tau * q1.params() + (1.0 - cfg_.tau) * q1_target.params();
  q2_target.params() = cfg_.tau * q2.params() + (1.0 - cfg_.tau) * q2_target.params();
}

}  // namespace ramp
