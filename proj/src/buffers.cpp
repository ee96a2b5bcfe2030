#include "ramp/buffers.hpp"

#include <ostream>
#include <stdexcept>

namespace ramp {

PresentBuffer::PresentBuffer(int capacity_episodes) : capacity_(capacity_episodes) {
  if (capacity_episodes < 1) throw std::invalid_argument("PresentBuffer: capacity must be >= 1 episode");
}

void PresentBuffer::clear() {
  data_.clear();
  episodes_ = 0;
}

void PresentBuffer::add_episode(const std::vector<Transition>& episode) {
  if (episodes_ >= capacity_) throw std::length_error("PresentBuffer: episode capacity exceeded");
  data_.insert(data_.end(), episode.begin(), episode.end());
  ++episodes_;
}

const Transition& PresentBuffer::sample(Rng& rng) const {
  if (data_.empty()) throw std::logic_error("PresentBuffer::sample on an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  return data_[pick(rng)];
}

PastBuffer PastBuffer::init(const Env& env, const Policy& policy, std::size_t capacity, double beta, Rng& rng) {
  if (capacity < 1) throw std::invalid_argument("PastBuffer: capacity must be >= 1");
  std::vector<Transition> slots;
  slots.reserve(capacity);
  while (slots.size() < capacity) {
    for (auto& t : rollout(env, policy, rng)) {
      if (slots.size() == capacity) break;
      slots.push_back(std::move(t));
    }
  }
  return PastBuffer(std::move(slots), beta);
}

PastBuffer::PastBuffer(std::vector<Transition> slots, double beta)
    : slots_(std::move(slots)), tags_(slots_.size(), 0), beta_(beta) {
  if (slots_.empty()) throw std::invalid_argument("PastBuffer: no slots");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("PastBuffer: beta must lie in [0,1]");
}

bool PastBuffer::update(const Transition& t, int epoch, Rng& rng) {
  std::bernoulli_distribution accept(beta_);
  if (!accept(rng)) return false;
  std::uniform_int_distribution<std::size_t> pick(0, slots_.size() - 1);
  const std::size_t i = pick(rng);
  slots_[i] = t;
  tags_[i] = epoch;
  return true;
}

const Transition& PastBuffer::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, slots_.size() - 1);
  return slots_[pick(rng)];
}

const Transition& sample_negative(const PresentBuffer& d_rho, const PastBuffer& d_mu, double beta, Rng& rng) {
  if (d_rho.empty() || d_mu.size() == 0) throw std::logic_error("sample_negative: empty buffer");
  std::bernoulli_distribution from_present(beta);
  return from_present(rng) ? d_rho.sample(rng) : d_mu.sample(rng);
}

void write_buffer_csv(std::ostream& out, const PresentBuffer& d_rho, int present_epoch, const PastBuffer& d_mu) {
  const Eigen::Index dim = d_mu[0].s.size();
  out << "source,epoch_tag";
  for (Eigen::Index j = 0; j < dim; ++j) out << ",s" << j;
  out << '\n';
  out.precision(17);
  auto row = [&](const char* src, int tag, const Vec& s) {
    out << src << ',' << tag;
    for (Eigen::Index j = 0; j < s.size(); ++j) out << ',' << s(j);
    out << '\n';
  };
  for (const auto& t : d_rho.transitions()) row("rho", present_epoch, t.s);
  for (std::size_t i = 0; i < d_mu.size(); ++i) row("mu", d_mu.epoch_tag(i), d_mu[i].s);
}

}  // namespace ramp
