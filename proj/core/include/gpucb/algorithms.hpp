#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gpucb/gp.hpp"
#include "gpucb/random.hpp"

namespace gpucb {

enum class PolicyKind {
  Ucb,
  ExpectedImprovement,
  MaxVarianceReduction,
  PhasedElimination,
  UniformRandom,
  Reds,  // reserved name; selecting it raises UnimplementedPolicy
};

/// Canonical lower-case names: ucb, ei, mvr, pe, random, reds.
std::string_view policy_name(PolicyKind kind) noexcept;
/// Accepts the canonical names plus a few aliases ("gp-ucb", "uniform").
PolicyKind parse_policy_kind(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Ucb;
  /// Confidence width beta^{1/2}. When unset the experiment harness fills it
  /// in from its beta mode (exact RKHS norm or the configured bound).
  std::optional<double> beta_sqrt;
  std::size_t pe_initial_batch = 5;

  void validate() const;
};

class UnimplementedPolicy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All selectors break ties toward the lowest candidate index.

/// argmax mean + beta_sqrt * std.
std::size_t select_ucb(const CandidatePosterior& posterior, double beta_sqrt);
std::size_t select_ucb(const History& history, std::span<const Point> candidates, double beta_sqrt);

/// Closed-form EI against the incumbent; max(0, mean - incumbent) when std <= 1e-12.
double expected_improvement(double mean, double std, double incumbent) noexcept;
/// Without an incumbent (no observations yet) returns index 0.
std::size_t select_ei(const CandidatePosterior& posterior, std::optional<double> incumbent);
std::size_t select_ei(const History& history, std::span<const Point> candidates);

/// argmax std.
std::size_t select_mvr(const CandidatePosterior& posterior);
std::size_t select_mvr(const History& history, std::span<const Point> candidates);

std::size_t select_uniform(std::size_t candidate_count, RandomStream& rng);

/// Phased elimination baseline. Within a phase it picks the maximum-variance
/// survivor; a phase lasts `batch` selections; at the phase boundary every
/// survivor whose UCB falls below the largest survivor LCB is dropped and the
/// batch size doubles.
class PhasedEliminationState {
 public:
  /// Survivors never drop a point whose UCB is within this of the max LCB.
  static constexpr double kEliminationSlack = 1e-9;

  PhasedEliminationState(std::size_t candidate_count, std::size_t initial_batch);

  std::size_t select(const CandidatePosterior& posterior, double beta_sqrt);

  [[nodiscard]] std::span<const std::size_t> survivors() const noexcept { return survivors_; }
  [[nodiscard]] std::size_t phase() const noexcept { return phase_; }
  [[nodiscard]] std::size_t batch_size() const noexcept { return batch_size_; }
  [[nodiscard]] std::size_t steps_in_phase() const noexcept { return steps_in_phase_; }
  /// Survivor count at the start of every phase so far.
  [[nodiscard]] std::span<const std::size_t> phase_survivor_counts() const noexcept { return phase_sizes_; }

 private:
  void eliminate(const CandidatePosterior& posterior, double beta_sqrt);

  std::vector<std::size_t> survivors_;
  std::vector<std::size_t> phase_sizes_;
  std::size_t batch_size_;
  std::size_t steps_in_phase_ = 0;
  std::size_t phase_ = 0;
};

std::size_t select_pe(PhasedEliminationState& state, const CandidatePosterior& posterior, double beta_sqrt);
std::size_t select_pe(PhasedEliminationState& state, const History& history, std::span<const Point> candidates,
                      double beta_sqrt);

/// A point-selection rule bound to one run. The history must track the
/// candidate set the returned index refers to.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::size_t select(const History& history, RandomStream& rng) = 0;
  [[nodiscard]] virtual PolicyKind kind() const noexcept = 0;
};

/// Throws UnimplementedPolicy for Reds and std::invalid_argument when a
/// confidence-width policy has no beta_sqrt.
std::unique_ptr<Policy> make_policy(const PolicyConfig& config, std::size_t candidate_count);

}  // namespace gpucb
