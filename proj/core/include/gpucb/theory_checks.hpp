#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpucb/gp.hpp"
#include "gpucb/kernels.hpp"

namespace gpucb {

// Empirical certificates for the posterior-standard-deviation bounds, stated
// on the realized sequence: the information gain of the actual queries stands
// in for its supremum over all sequences.

inline constexpr double kLambdaBracketLow = 1e-8;
inline constexpr double kLambdaBracketHigh = 1.0;
inline constexpr double kBisectionRelativeWidth = 1e-4;
inline constexpr std::size_t kMaxBisectionIterations = 60;
inline constexpr double kCertificateTolerance = 1e-9;
inline constexpr double kCumulativeTolerance = 1e-6;

struct EllipticalCount {
  double lambda = 0.0;
  /// |{t : sigma_lambda(x_t; X_{t-1}) > lambda}|
  std::size_t count = 0;
  double realized_gain = 0.0;

  /// 2 * gain / ln 2, the bound implied by ln(1 + s) > ln 2 on every counted step.
  [[nodiscard]] double bound() const noexcept;
  [[nodiscard]] bool within_bound() const noexcept { return static_cast<double>(count) <= bound(); }
  /// The looser 3 * gain form.
  [[nodiscard]] bool within_loose_bound() const noexcept { return static_cast<double>(count) <= 3.0 * realized_gain; }
};

struct LambdaCertificate {
  std::size_t horizon = 0;
  /// Smallest lambda in the bracket with 3 * gain(lambda^2) <= horizon - 1;
  /// kLambdaBracketHigh when no lambda in the bracket is feasible.
  double lambda_star = kLambdaBracketHigh;
  double realized_gain = 0.0;
  /// min_{t <= horizon} sigma(x_t; X_{t-1})
  double min_std = 0.0;
  bool feasible = false;
  bool at_lower_bracket = false;
  std::size_t iterations = 0;
  bool pass = false;
};

struct CumulativeCertificate {
  std::size_t horizon = 0;
  /// First t >= 2 with a feasible lambda; horizon + 1 when there is none.
  std::size_t first_feasible = 0;
  /// sum_{t <= horizon} sigma(x_t; X_{t-1})
  double lhs = 0.0;
  /// (first_feasible - 1) + sum_{t = first_feasible}^{horizon} lambda_t
  double rhs = 0.0;
  bool pass = false;
  /// Certificates for t = first_feasible .. horizon.
  std::vector<LambdaCertificate> steps;

  [[nodiscard]] double margin() const noexcept { return rhs - lhs; }
};

/// Sequence-level analysis state: the Gram matrix of the sequence and the
/// noise-free posterior standard deviation of every step, computed once.
class SequenceAnalysis {
 public:
  SequenceAnalysis(const KernelSpec& spec, std::span<const Point> sequence);

  [[nodiscard]] std::size_t size() const noexcept { return gram_.size(); }
  [[nodiscard]] std::span<const double> posterior_std() const noexcept { return posterior_std_; }
  [[nodiscard]] const SequenceGram& gram() const noexcept { return gram_; }

  /// 3 * gain_t(lambda^2) <= t - 1 on the first t points.
  [[nodiscard]] bool feasible(double lambda, std::size_t t) const;

  [[nodiscard]] EllipticalCount elliptical(double lambda, std::size_t horizon) const;
  [[nodiscard]] LambdaCertificate certify(std::size_t horizon) const;
  [[nodiscard]] CumulativeCertificate cumulative(std::size_t horizon) const;

 private:
  SequenceGram gram_;
  std::vector<double> posterior_std_;
};

EllipticalCount elliptical_count(const KernelSpec& spec, std::span<const Point> sequence, double lambda);
LambdaCertificate lambda_certificate(const KernelSpec& spec, std::span<const Point> sequence, std::size_t horizon);
CumulativeCertificate cumulative_certificate(const KernelSpec& spec, std::span<const Point> sequence,
                                             std::size_t horizon);

/// Re-derives both certificate inequalities from raw data.
bool recheck_certificate(const KernelSpec& spec, std::span<const Point> sequence, const LambdaCertificate& cert);

// ---------------------------------------------------------------------------

enum class ScheduleFamily { SquaredExponential, Matern };

/// lambda_t^2 = t * exp(-constant * t^{1/(d+1)})          (squared exponential)
/// lambda_t^2 = constant * t^{-2 nu/d} * (ln t)^{2 nu/d}  (Matern)
struct ScheduleSpec {
  ScheduleFamily family = ScheduleFamily::SquaredExponential;
  std::size_t dim = 1;
  double nu = 0.0;
  double constant = 1.0;

  [[nodiscard]] double lambda_sq(double t) const;
};

inline constexpr std::size_t kMinScheduleSamples = 50;
inline constexpr double kEnvelopeFactor = 10.0;

struct ScheduleFit {
  ScheduleSpec fitted;
  /// max_t lambda_t^2 / (fitted schedule), i.e. the multiplier the fitted
  /// shape needs to dominate every sample.
  double envelope_ratio = 0.0;
  double residual_rms = 0.0;
  /// Least-squares slope of ln lambda_t^2 against ln t.
  double trend_slope = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Fits the single free constant of the schedule shape by least squares on
/// ln lambda_t^2. Passes when the samples decay, the fitted shape decays, and
/// kEnvelopeFactor times the fitted schedule dominates every sample.
/// Throws std::invalid_argument with fewer than kMinScheduleSamples samples.
ScheduleFit schedule_shape_check(ScheduleFamily family, std::size_t dim, double nu, std::span<const double> steps,
                                 std::span<const double> lambdas);

/// One step of the sequence-elimination argument: drop the first step whose
/// regularized std is at most lambda and check that no later step's noise-free
/// std decreases (up to tolerance) under the shortened prefix.
struct EliminationCheck {
  bool found = false;
  std::size_t removed_step = 0;  // 1-based
  double worst_decrease = 0.0;
  bool pass = false;
};

EliminationCheck elimination_step_check(const KernelSpec& spec, std::span<const Point> sequence, double lambda);

}  // namespace gpucb
