#include "gpucb/algorithms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace gpucb {

std::string_view policy_name(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::Ucb: return "ucb";
    case PolicyKind::ExpectedImprovement: return "ei";
    case PolicyKind::MaxVarianceReduction: return "mvr";
    case PolicyKind::PhasedElimination: return "pe";
    case PolicyKind::UniformRandom: return "random";
    case PolicyKind::Reds: return "reds";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "ucb" || lower == "gp-ucb" || lower == "gpucb") return PolicyKind::Ucb;
  if (lower == "ei") return PolicyKind::ExpectedImprovement;
  if (lower == "mvr") return PolicyKind::MaxVarianceReduction;
  if (lower == "pe") return PolicyKind::PhasedElimination;
  if (lower == "random" || lower == "uniform") return PolicyKind::UniformRandom;
  if (lower == "reds") return PolicyKind::Reds;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

void PolicyConfig::validate() const {
  if (beta_sqrt && !(*beta_sqrt >= 0.0)) {
    throw std::invalid_argument("beta_sqrt must be non-negative");
  }
  if (pe_initial_batch < 1) {
    throw std::invalid_argument("pe_initial_batch must be at least 1");
  }
}

namespace {

template <typename Score>
std::size_t argmax_lowest(std::size_t count, Score&& score) {
  if (count == 0) {
    throw std::invalid_argument("selection over an empty candidate set");
  }
  std::size_t best = 0;
  double best_score = score(0);
  for (std::size_t i = 1; i < count; ++i) {
    const double s = score(i);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

std::size_t size_of(const CandidatePosterior& p) { return static_cast<std::size_t>(p.mean.size()); }

}  // namespace

std::size_t select_ucb(const CandidatePosterior& posterior, double beta_sqrt) {
  return argmax_lowest(size_of(posterior), [&](std::size_t i) {
    const auto j = static_cast<Eigen::Index>(i);
    return posterior.mean[j] + beta_sqrt * posterior.std[j];
  });
}

std::size_t select_ucb(const History& history, std::span<const Point> candidates, double beta_sqrt) {
  return select_ucb(posterior_on(history, candidates), beta_sqrt);
}

double expected_improvement(double mean, double std, double incumbent) noexcept {
  const double gap = mean - incumbent;
  if (std <= 1e-12) {
    return std::max(0.0, gap);
  }
  const double z = gap / std;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return gap * cdf + std * pdf;
}

std::size_t select_ei(const CandidatePosterior& posterior, std::optional<double> incumbent) {
  if (size_of(posterior) == 0) {
    throw std::invalid_argument("selection over an empty candidate set");
  }
  if (!incumbent) {
    return 0;
  }
  return argmax_lowest(size_of(posterior), [&](std::size_t i) {
    const auto j = static_cast<Eigen::Index>(i);
    return expected_improvement(posterior.mean[j], posterior.std[j], *incumbent);
  });
}

std::size_t select_ei(const History& history, std::span<const Point> candidates) {
  std::optional<double> incumbent;
  if (!history.empty()) {
    incumbent = history.best_value();
  }
  return select_ei(posterior_on(history, candidates), incumbent);
}

std::size_t select_mvr(const CandidatePosterior& posterior) {
  return argmax_lowest(size_of(posterior), [&](std::size_t i) { return posterior.std[static_cast<Eigen::Index>(i)]; });
}

std::size_t select_mvr(const History& history, std::span<const Point> candidates) {
  return select_mvr(posterior_on(history, candidates));
}

std::size_t select_uniform(std::size_t candidate_count, RandomStream& rng) {
  return rng.uniform_index(candidate_count);
}

// ---------------------------------------------------------------------------

PhasedEliminationState::PhasedEliminationState(std::size_t candidate_count, std::size_t initial_batch)
    : batch_size_(initial_batch) {
  if (candidate_count == 0 || initial_batch == 0) {
    throw std::invalid_argument("phased elimination needs candidates and a positive batch size");
  }
  survivors_.resize(candidate_count);
  for (std::size_t i = 0; i < candidate_count; ++i) {
    survivors_[i] = i;
  }
  phase_sizes_.push_back(candidate_count);
}

std::size_t PhasedEliminationState::select(const CandidatePosterior& posterior, double beta_sqrt) {
  if (size_of(posterior) < survivors_.size()) {
    throw std::invalid_argument("posterior does not cover the candidate set");
  }
  if (steps_in_phase_ == batch_size_) {
    eliminate(posterior, beta_sqrt);
    ++phase_;
    batch_size_ *= 2;
    steps_in_phase_ = 0;
    phase_sizes_.push_back(survivors_.size());
  }
  const std::size_t slot = argmax_lowest(survivors_.size(), [&](std::size_t i) {
    return posterior.std[static_cast<Eigen::Index>(survivors_[i])];
  });
  ++steps_in_phase_;
  return survivors_[slot];
}

void PhasedEliminationState::eliminate(const CandidatePosterior& posterior, double beta_sqrt) {
  double max_lcb = -std::numeric_limits<double>::infinity();
  for (auto i : survivors_) {
    const auto j = static_cast<Eigen::Index>(i);
    max_lcb = std::max(max_lcb, posterior.mean[j] - beta_sqrt * posterior.std[j]);
  }
  std::erase_if(survivors_, [&](std::size_t i) {
    const auto j = static_cast<Eigen::Index>(i);
    return posterior.mean[j] + beta_sqrt * posterior.std[j] < max_lcb - kEliminationSlack;
  });
}

std::size_t select_pe(PhasedEliminationState& state, const CandidatePosterior& posterior, double beta_sqrt) {
  return state.select(posterior, beta_sqrt);
}

std::size_t select_pe(PhasedEliminationState& state, const History& history, std::span<const Point> candidates,
                      double beta_sqrt) {
  return state.select(posterior_on(history, candidates), beta_sqrt);
}

// ---------------------------------------------------------------------------

namespace {

class UcbPolicy final : public Policy {
 public:
  explicit UcbPolicy(double beta_sqrt) : beta_sqrt_(beta_sqrt) {}
  std::size_t select(const History& history, RandomStream&) override {
    return select_ucb(history.candidate_posterior(), beta_sqrt_);
  }
  PolicyKind kind() const noexcept override { return PolicyKind::Ucb; }

 private:
  double beta_sqrt_;
};

class EiPolicy final : public Policy {
 public:
  std::size_t select(const History& history, RandomStream&) override {
    std::optional<double> incumbent;
    if (!history.empty()) {
      incumbent = history.best_value();
    }
    return select_ei(history.candidate_posterior(), incumbent);
  }
  PolicyKind kind() const noexcept override { return PolicyKind::ExpectedImprovement; }
};

class MvrPolicy final : public Policy {
 public:
  std::size_t select(const History& history, RandomStream&) override {
    return select_mvr(history.candidate_posterior());
  }
  PolicyKind kind() const noexcept override { return PolicyKind::MaxVarianceReduction; }
};

class PePolicy final : public Policy {
 public:
  PePolicy(std::size_t candidate_count, std::size_t batch, double beta_sqrt)
      : state_(candidate_count, batch), beta_sqrt_(beta_sqrt) {}
  std::size_t select(const History& history, RandomStream&) override {
    return select_pe(state_, history.candidate_posterior(), beta_sqrt_);
  }
  PolicyKind kind() const noexcept override { return PolicyKind::PhasedElimination; }

 private:
  PhasedEliminationState state_;
  double beta_sqrt_;
};

class UniformPolicy final : public Policy {
 public:
  std::size_t select(const History& history, RandomStream& rng) override {
    return select_uniform(history.candidates().size(), rng);
  }
  PolicyKind kind() const noexcept override { return PolicyKind::UniformRandom; }
};

double required_beta(const PolicyConfig& config) {
  if (!config.beta_sqrt) {
    throw std::invalid_argument(std::string(policy_name(config.kind)) + " requires beta_sqrt");
  }
  return *config.beta_sqrt;
}

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, std::size_t candidate_count) {
  config.validate();
  switch (config.kind) {
    case PolicyKind::Ucb:
      return std::make_unique<UcbPolicy>(required_beta(config));
    case PolicyKind::ExpectedImprovement:
      return std::make_unique<EiPolicy>();
    case PolicyKind::MaxVarianceReduction:
      return std::make_unique<MvrPolicy>();
    case PolicyKind::PhasedElimination:
      return std::make_unique<PePolicy>(candidate_count, config.pe_initial_batch, required_beta(config));
    case PolicyKind::UniformRandom:
      return std::make_unique<UniformPolicy>();
    case PolicyKind::Reds:
      throw UnimplementedPolicy("reds: unimplemented baseline");
  }
  throw std::invalid_argument("unknown policy kind");
}

}  // namespace gpucb
