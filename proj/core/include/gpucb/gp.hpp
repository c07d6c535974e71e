#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "gpucb/kernels.hpp"

namespace gpucb {

/// A query joins the effective set E(X_t) only if its noise-free posterior
/// variance exceeds this value; otherwise it is treated as fully correlated
/// with the points already in E(X_t).
inline constexpr double kDedupThreshold = 1e-10;
/// Added to the diagonal of K(E, E) before factorization.
inline constexpr double kGramJitter = 1e-12;
/// Computed variances below -kNegativeVarianceLimit indicate a conditioning
/// failure rather than roundoff.
inline constexpr double kNegativeVarianceLimit = 1e-6;
/// The incrementally grown factor is rebuilt from scratch this often.
inline constexpr std::size_t kRefactorInterval = 128;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PosteriorSummary {
  double mean = 0.0;
  double std = 0.0;
};

struct CandidatePosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Noise-free GP posterior over a growing query sequence.
///
/// The raw sequence X_t and its values are kept in full. Only the effective
/// subset E(X_t) enters the factorization: a query is inserted when its
/// posterior variance given the current E exceeds kDedupThreshold, and the
/// lower Cholesky factor of K(E, E) + kGramJitter * I is extended by one row.
///
/// When constructed with a candidate set, the history also keeps
/// L^{-1} K(E, candidates) together with the posterior mean and variance of
/// every candidate, updated in O(|E| * N) per insertion.
class History {
 public:
  History(KernelSpec spec, std::size_t dim);
  History(KernelSpec spec, std::size_t dim, std::vector<Point> candidates);

  /// Appends (x, y). Returns true when x joined the effective set.
  bool extend(const Point& x, double y);

  [[nodiscard]] PosteriorSummary posterior(const Point& x) const;

  [[nodiscard]] const KernelSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return queries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return queries_.empty(); }
  [[nodiscard]] std::size_t effective_size() const noexcept { return effective_.size(); }

  [[nodiscard]] std::span<const Point> queries() const noexcept { return queries_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  /// Positions in the raw sequence of the members of E(X_t), in insertion order.
  [[nodiscard]] std::span<const std::size_t> effective_indices() const noexcept { return effective_; }
  [[nodiscard]] std::vector<Point> effective_points() const;

  /// Largest observed value. Throws std::logic_error on an empty history.
  [[nodiscard]] double best_value() const;

  /// Lower-triangular factor of effective_gram().
  [[nodiscard]] Eigen::MatrixXd cholesky_factor() const;
  /// K(E, E) + kGramJitter * I.
  [[nodiscard]] Eigen::MatrixXd effective_gram() const;
  /// K(E, E)^{-1} f(E) with the jittered Gram matrix.
  [[nodiscard]] Eigen::VectorXd alpha() const;
  [[nodiscard]] std::size_t refactor_count() const noexcept { return refactor_count_; }

  [[nodiscard]] bool tracks_candidates() const noexcept { return !candidates_.empty(); }
  [[nodiscard]] std::span<const Point> candidates() const noexcept { return candidates_; }
  [[nodiscard]] PosteriorSummary candidate_posterior(std::size_t index) const;
  [[nodiscard]] CandidatePosterior candidate_posterior() const;

 private:
  [[nodiscard]] Eigen::VectorXd project(const Point& x) const;
  void insert(const Point& x, double y, const Eigen::VectorXd& projection, double pivot);
  void refactor();
  void reserve_rows(Eigen::Index rows);

  KernelSpec spec_;
  std::size_t dim_;
  std::vector<Point> queries_;
  std::vector<double> values_;
  std::vector<std::size_t> effective_;

  // Storage is over-allocated; the active block is the leading n x n.
  Eigen::MatrixXd chol_;
  Eigen::VectorXd whitened_;  // L^{-1} f(E)
  std::size_t insertions_since_refactor_ = 0;
  std::size_t refactor_count_ = 0;

  std::vector<Point> candidates_;
  Eigen::MatrixXd candidate_projection_;  // rows: E, cols: candidates
  Eigen::VectorXd candidate_mean_;
  Eigen::VectorXd candidate_var_;
};

/// Clamps a computed variance to [0, prior]; throws NumericalError below
/// -kNegativeVarianceLimit.
double clamp_variance(double variance, double prior);

/// Posterior over an arbitrary candidate list, one triangular solve each.
CandidatePosterior posterior_on(const History& history, std::span<const Point> candidates);

/// sigma(x_t; X_{t-1}) for t = 1..T, replaying the sequence through a History.
std::vector<double> sequential_posterior_std(const KernelSpec& spec, std::span<const Point> sequence);

/// Regularized sequential factorization of K(X, X) + lambda^2 I for a fixed
/// sequence. The t-th pivot gives sigma_lambda^2(x_t; X_{t-1}), and the
/// leading t x t block of the factor is the factor of the prefix, so one pass
/// yields the information gain of every prefix. Pivots are floored at
/// lambda^2, their exact-arithmetic lower bound.
class SequenceGram {
 public:
  SequenceGram(const KernelSpec& spec, std::span<const Point> sequence);

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] const Eigen::MatrixXd& gram() const noexcept { return gram_; }

  /// sigma_lambda^2(x_t; X_{t-1}) for t = 1..prefix.
  [[nodiscard]] std::vector<double> regularized_variances(double lambda_sq, std::size_t prefix) const;
  [[nodiscard]] std::vector<double> regularized_variances(double lambda_sq) const {
    return regularized_variances(lambda_sq, size_);
  }
  /// 1/2 ln det(I + lambda^{-2} K) of the first `prefix` points.
  [[nodiscard]] double information_gain(double lambda_sq, std::size_t prefix) const;
  /// Entry t-1 is the gain of the first t points.
  [[nodiscard]] std::vector<double> prefix_information_gains(double lambda_sq) const;

 private:
  std::size_t size_;
  Eigen::MatrixXd gram_;
};

/// sigma_lambda^2(x; X_t) conditioned on the full raw sequence of `history`
/// (duplicates included).
double posterior_var_regularized(const History& history, const Point& x, double lambda_sq);

/// 1/2 ln det(I + lambda^{-2} K(points, points)); 0 for an empty list.
double realized_information_gain(const KernelSpec& spec, std::span<const Point> points, double lambda_sq);

}  // namespace gpucb
