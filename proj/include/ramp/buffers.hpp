#pragma once

#include "ramp/env.hpp"

#include <iosfwd>
#include <vector>

namespace ramp {

/// Present experience D_rho: the episodes collected by the current policy
/// during one epoch.
class PresentBuffer {
 public:
  explicit PresentBuffer(int capacity_episodes);

  void clear();
  /// Throws std::length_error once capacity_episodes episodes are held.
  void add_episode(const std::vector<Transition>& episode);

  int capacity() const { return capacity_; }
  int num_episodes() const { return episodes_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const Transition& operator[](std::size_t i) const { return data_[i]; }
  const std::vector<Transition>& transitions() const { return data_; }

  const Transition& sample(Rng& rng) const;

 private:
  int capacity_;
  int episodes_ = 0;
  std::vector<Transition> data_;
};

/// Fixed-size sample of the past mixture mu_n. Every incoming transition is
/// accepted with probability beta and then overwrites a uniformly chosen slot.
class PastBuffer {
 public:
  /// Fills M slots with transitions from consecutive rollouts of policy
  /// (normally the environment's random policy), all tagged epoch 0.
  static PastBuffer init(const Env& env, const Policy& policy, std::size_t capacity, double beta, Rng& rng);

  PastBuffer(std::vector<Transition> slots, double beta);

  /// Bernoulli(beta) accept-reject; on accept a uniform slot is replaced.
  /// Returns whether the transition was accepted.
  bool update(const Transition& t, int epoch, Rng& rng);

  std::size_t size() const { return slots_.size(); }
  double beta() const { return beta_; }
  const Transition& operator[](std::size_t i) const { return slots_[i]; }
  int epoch_tag(std::size_t i) const { return tags_[i]; }
  const std::vector<Transition>& slots() const { return slots_; }

  const Transition& sample(Rng& rng) const;

 private:
  std::vector<Transition> slots_;
  std::vector<int> tags_;
  double beta_;
};

/// Draws from beta * D_rho + (1 - beta) * D_mu: with probability beta a
/// uniform element of the present buffer, otherwise of the past buffer.
const Transition& sample_negative(const PresentBuffer& d_rho, const PastBuffer& d_mu, double beta, Rng& rng);

/// Buffer dump for scatter plots: header "source,epoch_tag,s0,...,s{d-1}",
/// one row per stored transition (its state s), present rows tagged with
/// present_epoch.
void write_buffer_csv(std::ostream& out, const PresentBuffer& d_rho, int present_epoch, const PastBuffer& d_mu);

}  // namespace ramp
