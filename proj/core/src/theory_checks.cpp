#include "gpucb/theory_checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpucb {

double EllipticalCount::bound() const noexcept { return 2.0 * realized_gain / std::numbers::ln2; }

SequenceAnalysis::SequenceAnalysis(const KernelSpec& spec, std::span<const Point> sequence)
    : gram_(spec, sequence), posterior_std_(sequential_posterior_std(spec, sequence)) {}

bool SequenceAnalysis::feasible(double lambda, std::size_t t) const {
  return 3.0 * gram_.information_gain(lambda * lambda, t) <= static_cast<double>(t) - 1.0;
}

EllipticalCount SequenceAnalysis::elliptical(double lambda, std::size_t horizon) const {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("elliptical count needs lambda > 0");
  }
  const double lambda_sq = lambda * lambda;
  EllipticalCount out;
  out.lambda = lambda;
  for (double v : gram_.regularized_variances(lambda_sq, horizon)) {
    if (v > lambda_sq) {
      ++out.count;
    }
    out.realized_gain += 0.5 * std::log1p(v / lambda_sq);
  }
  return out;
}

LambdaCertificate SequenceAnalysis::certify(std::size_t horizon) const {
  if (horizon < 2 || horizon > size()) {
    throw std::invalid_argument("lambda certificate needs 2 <= T <= sequence length");
  }
  LambdaCertificate cert;
  cert.horizon = horizon;
  cert.min_std = *std::min_element(posterior_std_.begin(), posterior_std_.begin() + static_cast<std::ptrdiff_t>(horizon));

  if (!feasible(kLambdaBracketHigh, horizon)) {
    cert.lambda_star = kLambdaBracketHigh;
    cert.realized_gain = gram_.information_gain(kLambdaBracketHigh * kLambdaBracketHigh, horizon);
    return cert;
  }
  cert.feasible = true;
  if (feasible(kLambdaBracketLow, horizon)) {
    cert.lambda_star = kLambdaBracketLow;
    cert.at_lower_bracket = true;
  } else {
    // Gain is non-increasing in lambda: lo stays infeasible, hi stays feasible.
    double lo = kLambdaBracketLow;
    double hi = kLambdaBracketHigh;
    while (hi > lo * (1.0 + kBisectionRelativeWidth) && cert.iterations < kMaxBisectionIterations) {
      const double mid = std::sqrt(lo * hi);
      if (feasible(mid, horizon)) {
        hi = mid;
      } else {
        lo = mid;
      }
      ++cert.iterations;
    }
    cert.lambda_star = hi;
  }
  cert.realized_gain = gram_.information_gain(cert.lambda_star * cert.lambda_star, horizon);
  cert.pass = cert.min_std <= cert.lambda_star + kCertificateTolerance &&
              3.0 * cert.realized_gain <= static_cast<double>(horizon) - 1.0;
  return cert;
}

CumulativeCertificate SequenceAnalysis::cumulative(std::size_t horizon) const {
  if (horizon < 2 || horizon > size()) {
    throw std::invalid_argument("cumulative certificate needs 2 <= T <= sequence length");
  }
  CumulativeCertificate out;
  out.horizon = horizon;
  for (std::size_t t = 0; t < horizon; ++t) {
    out.lhs += posterior_std_[t];
  }

  const auto gains = gram_.prefix_information_gains(kLambdaBracketHigh * kLambdaBracketHigh);
  out.first_feasible = horizon + 1;
  for (std::size_t t = 2; t <= horizon; ++t) {
    if (3.0 * gains[t - 1] <= static_cast<double>(t) - 1.0) {
      out.first_feasible = t;
      break;
    }
  }

  out.rhs = static_cast<double>(out.first_feasible - 1);
  for (std::size_t t = out.first_feasible; t <= horizon; ++t) {
    out.steps.push_back(certify(t));
    out.rhs += out.steps.back().lambda_star;
  }
  if (out.first_feasible > horizon) {
    out.rhs = static_cast<double>(horizon);
  }
  out.pass = out.lhs <= out.rhs + kCumulativeTolerance;
  return out;
}

EllipticalCount elliptical_count(const KernelSpec& spec, std::span<const Point> sequence, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("elliptical count needs lambda > 0");
  }
  const SequenceGram gram(spec, sequence);
  const double lambda_sq = lambda * lambda;
  EllipticalCount out;
  out.lambda = lambda;
  for (double v : gram.regularized_variances(lambda_sq)) {
    if (v > lambda_sq) {
      ++out.count;
    }
    out.realized_gain += 0.5 * std::log1p(v / lambda_sq);
  }
  return out;
}

LambdaCertificate lambda_certificate(const KernelSpec& spec, std::span<const Point> sequence, std::size_t horizon) {
  return SequenceAnalysis(spec, sequence.first(std::min(horizon, sequence.size()))).certify(horizon);
}

CumulativeCertificate cumulative_certificate(const KernelSpec& spec, std::span<const Point> sequence,
                                             std::size_t horizon) {
  return SequenceAnalysis(spec, sequence.first(std::min(horizon, sequence.size()))).cumulative(horizon);
}

bool recheck_certificate(const KernelSpec& spec, std::span<const Point> sequence, const LambdaCertificate& cert) {
  if (!cert.pass) {
    return false;
  }
  const auto prefix = sequence.first(cert.horizon);
  const double gain = realized_information_gain(spec, prefix, cert.lambda_star * cert.lambda_star);
  const auto stds = sequential_posterior_std(spec, prefix);
  const double min_std = *std::min_element(stds.begin(), stds.end());
  return 3.0 * gain <= static_cast<double>(cert.horizon) - 1.0 && min_std <= cert.lambda_star + kCertificateTolerance;
}

// ---------------------------------------------------------------------------

double ScheduleSpec::lambda_sq(double t) const {
  const double d = static_cast<double>(dim);
  if (family == ScheduleFamily::SquaredExponential) {
    return t * std::exp(-constant * std::pow(t, 1.0 / (d + 1.0)));
  }
  const double p = 2.0 * nu / d;
  return constant * std::pow(t, -p) * std::pow(std::log(t), p);
}

ScheduleFit schedule_shape_check(ScheduleFamily family, std::size_t dim, double nu, std::span<const double> steps,
                                 std::span<const double> lambdas) {
  if (steps.size() != lambdas.size()) {
    throw std::invalid_argument("schedule check needs one lambda per step");
  }
  if (steps.size() < kMinScheduleSamples) {
    throw std::invalid_argument("schedule check needs at least " + std::to_string(kMinScheduleSamples) +
                                " certified steps");
  }
  if (dim == 0 || (family == ScheduleFamily::Matern && !(nu > 0.0))) {
    throw std::invalid_argument("schedule check needs dim >= 1 and nu > 0 for Matern");
  }
  const std::size_t n = steps.size();
  const double d = static_cast<double>(dim);
  std::vector<double> log_t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(steps[i] >= 2.0) || !(lambdas[i] > 0.0)) {
      throw std::invalid_argument("schedule samples need t >= 2 and lambda > 0");
    }
    log_t[i] = std::log(steps[i]);
    y[i] = 2.0 * std::log(lambdas[i]);
  }

  ScheduleFit fit;
  fit.samples = n;
  fit.fitted = {family, dim, nu, 1.0};

  if (family == ScheduleFamily::SquaredExponential) {
    // y = ln t - C * t^{1/(d+1)}, linear in C.
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::pow(steps[i], 1.0 / (d + 1.0));
      num += a * (log_t[i] - y[i]);
      den += a * a;
    }
    fit.fitted.constant = num / den;
  } else {
    // y = ln c + p (ln ln t - ln t), c by the mean residual.
    const double p = 2.0 * nu / d;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += y[i] - p * (std::log(log_t[i]) - log_t[i]);
    }
    fit.fitted.constant = std::exp(sum / static_cast<double>(n));
  }

  double max_residual = -std::numeric_limits<double>::infinity();
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - std::log(fit.fitted.lambda_sq(steps[i]));
    max_residual = std::max(max_residual, r);
    sq += r * r;
  }
  fit.residual_rms = std::sqrt(sq / static_cast<double>(n));
  fit.envelope_ratio = std::exp(max_residual);

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += log_t[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (log_t[i] - mean_x) * (y[i] - mean_y);
    sxx += (log_t[i] - mean_x) * (log_t[i] - mean_x);
  }
  fit.trend_slope = sxx > 0.0 ? sxy / sxx : 0.0;

  const bool shape_decays = family == ScheduleFamily::Matern || fit.fitted.constant > 0.0;
  fit.pass = fit.trend_slope < 0.0 && shape_decays && fit.envelope_ratio <= kEnvelopeFactor;
  return fit;
}

EliminationCheck elimination_step_check(const KernelSpec& spec, std::span<const Point> sequence, double lambda) {
  EliminationCheck out;
  const double lambda_sq = lambda * lambda;
  const auto variances = SequenceGram(spec, sequence).regularized_variances(lambda_sq);
  const auto it = std::find_if(variances.begin(), variances.end(), [&](double v) { return v <= lambda_sq; });
  if (it == variances.end()) {
    out.pass = true;
    return out;
  }
  const auto removed = static_cast<std::size_t>(it - variances.begin());
  out.found = true;
  out.removed_step = removed + 1;

  std::vector<Point> shortened;
  shortened.reserve(sequence.size() - 1);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i != removed) {
      shortened.push_back(sequence[i]);
    }
  }
  const auto original_std = sequential_posterior_std(spec, sequence);
  const auto shortened_std = sequential_posterior_std(spec, shortened);
  for (std::size_t i = removed + 1; i < sequence.size(); ++i) {
    out.worst_decrease = std::max(out.worst_decrease, original_std[i] - shortened_std[i - 1]);
  }
  out.pass = out.worst_decrease <= kCertificateTolerance;
  return out;
}

}  // namespace gpucb
