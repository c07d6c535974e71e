#include "gpucb/gp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

namespace gpucb {

History::History(KernelSpec spec, std::size_t dim) : spec_(spec), dim_(dim) {
  if (dim == 0) {
    throw std::invalid_argument("History dimension must be positive");
  }
}

History::History(KernelSpec spec, std::size_t dim, std::vector<Point> candidates)
    : History(spec, dim) {
  for (const auto& c : candidates) {
    if (static_cast<std::size_t>(c.size()) != dim) {
      throw std::invalid_argument("candidate dimension does not match history");
    }
  }
  candidates_ = std::move(candidates);
  const auto n = static_cast<Eigen::Index>(candidates_.size());
  candidate_mean_ = Eigen::VectorXd::Zero(n);
  candidate_var_ = Eigen::VectorXd::Constant(n, spec_.at_distance(0.0));
}

double clamp_variance(double variance, double prior) {
  if (variance < -kNegativeVarianceLimit) {
    throw NumericalError("posterior variance " + std::to_string(variance) +
                         " is negative beyond roundoff; the Gram factor is ill-conditioned");
  }
  return std::clamp(variance, 0.0, prior);
}

Eigen::VectorXd History::project(const Point& x) const {
  const auto n = static_cast<Eigen::Index>(effective_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = kernel_eval(spec_, queries_[effective_[static_cast<std::size_t>(i)]], x);
  }
  if (n > 0) {
    chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(k);
  }
  return k;
}

PosteriorSummary History::posterior(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw std::invalid_argument("posterior query dimension does not match history");
  }
  const double prior = kernel_eval(spec_, x, x);
  if (effective_.empty()) {
    return {0.0, std::sqrt(prior)};
  }
  const Eigen::VectorXd l = project(x);
  const auto n = l.size();
  const double mean = l.dot(whitened_.head(n));
  const double variance = clamp_variance(prior - l.squaredNorm(), prior);
  return {mean, std::sqrt(variance)};
}

bool History::extend(const Point& x, double y) {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw std::invalid_argument("extend: point dimension does not match history");
  }
  const double prior = kernel_eval(spec_, x, x);
  const Eigen::VectorXd l = project(x);
  const double variance = prior - l.squaredNorm();

  queries_.push_back(x);
  values_.push_back(y);
  if (!(variance > kDedupThreshold)) {
    return false;
  }
  insert(x, y, l, std::sqrt(variance + kGramJitter));
  return true;
}

void History::reserve_rows(Eigen::Index rows) {
  if (chol_.rows() >= rows) {
    return;
  }
  const Eigen::Index capacity = std::max<Eigen::Index>({rows, 2 * chol_.rows(), 16});
  chol_.conservativeResize(capacity, capacity);
  whitened_.conservativeResize(capacity);
  if (tracks_candidates()) {
    candidate_projection_.conservativeResize(capacity, static_cast<Eigen::Index>(candidates_.size()));
  }
}

void History::insert(const Point& x, double y, const Eigen::VectorXd& projection, double pivot) {
  const auto n = static_cast<Eigen::Index>(effective_.size());
  reserve_rows(n + 1);

  chol_.row(n).head(n) = projection.transpose();
  chol_(n, n) = pivot;
  const double w = (y - projection.dot(whitened_.head(n))) / pivot;
  whitened_[n] = w;

  if (tracks_candidates()) {
    const auto m = static_cast<Eigen::Index>(candidates_.size());
    Eigen::VectorXd row(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      row[j] = kernel_eval(spec_, x, candidates_[static_cast<std::size_t>(j)]);
    }
    if (n > 0) {
      row.noalias() -= candidate_projection_.topRows(n).transpose() * projection;
    }
    row /= pivot;
    candidate_projection_.row(n) = row.transpose();
    candidate_mean_ += w * row;
    candidate_var_ -= row.cwiseAbs2();
  }

  effective_.push_back(queries_.size() - 1);
  if (++insertions_since_refactor_ >= kRefactorInterval) {
    refactor();
  }
}

void History::refactor() {
  insertions_since_refactor_ = 0;
  const auto n = static_cast<Eigen::Index>(effective_.size());
  const Eigen::LLT<Eigen::MatrixXd> llt(effective_gram());
  if (llt.info() != Eigen::Success) {
    // Keep the incremental factor; it is valid by construction.
    return;
  }
  ++refactor_count_;
  chol_.topLeftCorner(n, n) = llt.matrixL();
  const auto lower = chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>();

  Eigen::VectorXd f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    f[i] = values_[effective_[static_cast<std::size_t>(i)]];
  }
  whitened_.head(n) = lower.solve(f);

  if (tracks_candidates()) {
    const auto m = static_cast<Eigen::Index>(candidates_.size());
    Eigen::MatrixXd cross(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Point& e = queries_[effective_[static_cast<std::size_t>(i)]];
      for (Eigen::Index j = 0; j < m; ++j) {
        cross(i, j) = kernel_eval(spec_, e, candidates_[static_cast<std::size_t>(j)]);
      }
    }
    lower.solveInPlace(cross);
    candidate_projection_.topRows(n) = cross;
    candidate_mean_.noalias() = cross.transpose() * whitened_.head(n);
    const double prior = spec_.at_distance(0.0);
    candidate_var_ = (prior - cross.colwise().squaredNorm().array()).matrix().transpose();
  }
}

std::vector<Point> History::effective_points() const {
  std::vector<Point> out;
  out.reserve(effective_.size());
  for (auto i : effective_) {
    out.push_back(queries_[i]);
  }
  return out;
}

double History::best_value() const {
  if (values_.empty()) {
    throw std::logic_error("best_value of an empty history");
  }
  return *std::max_element(values_.begin(), values_.end());
}

Eigen::MatrixXd History::cholesky_factor() const {
  const auto n = static_cast<Eigen::Index>(effective_.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  out.triangularView<Eigen::Lower>() = chol_.topLeftCorner(n, n);
  return out;
}

Eigen::MatrixXd History::effective_gram() const {
  const auto points = effective_points();
  if (points.empty()) {
    return Eigen::MatrixXd(0, 0);
  }
  Eigen::MatrixXd gram = gram_matrix(spec_, points);
  gram.diagonal().array() += kGramJitter;
  return gram;
}

Eigen::VectorXd History::alpha() const {
  const auto n = static_cast<Eigen::Index>(effective_.size());
  if (n == 0) {
    return Eigen::VectorXd(0);
  }
  return chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>().transpose().solve(whitened_.head(n));
}

PosteriorSummary History::candidate_posterior(std::size_t index) const {
  if (index >= candidates_.size()) {
    throw std::out_of_range("candidate index out of range");
  }
  const auto j = static_cast<Eigen::Index>(index);
  const double variance = clamp_variance(candidate_var_[j], spec_.at_distance(0.0));
  return {candidate_mean_[j], std::sqrt(variance)};
}

CandidatePosterior History::candidate_posterior() const {
  if (!tracks_candidates()) {
    throw std::logic_error("history does not track a candidate set");
  }
  const double prior = spec_.at_distance(0.0);
  CandidatePosterior out{candidate_mean_, Eigen::VectorXd(candidate_var_.size())};
  for (Eigen::Index j = 0; j < candidate_var_.size(); ++j) {
    out.std[j] = std::sqrt(clamp_variance(candidate_var_[j], prior));
  }
  return out;
}

CandidatePosterior posterior_on(const History& history, std::span<const Point> candidates) {
  const auto m = static_cast<Eigen::Index>(candidates.size());
  CandidatePosterior out{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto s = history.posterior(candidates[static_cast<std::size_t>(j)]);
    out.mean[j] = s.mean;
    out.std[j] = s.std;
  }
  return out;
}

std::vector<double> sequential_posterior_std(const KernelSpec& spec, std::span<const Point> sequence) {
  std::vector<double> out;
  if (sequence.empty()) {
    return out;
  }
  out.reserve(sequence.size());
  History history(spec, static_cast<std::size_t>(sequence.front().size()));
  for (const auto& x : sequence) {
    out.push_back(history.posterior(x).std);
    // Only the inputs matter for the variance; the observed value is irrelevant.
    history.extend(x, 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_lambda(double lambda_sq) {
  if (!(lambda_sq > 0.0) || !std::isfinite(lambda_sq)) {
    throw std::invalid_argument("regularization lambda^2 must be positive and finite");
  }
}

// Row-by-row Cholesky of gram(0:n, 0:n) + lambda_sq * I. Returns the
// clamped noise-free part of every squared pivot, i.e. sigma_lambda^2(x_t; X_{t-1}).
std::vector<double> regularized_pivots(const Eigen::MatrixXd& gram, double lambda_sq, std::size_t n) {
  std::vector<double> factor(n * n, 0.0);
  std::vector<double> variances(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row_i = factor.data() + i * n;
    const auto col = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < i; ++j) {
      const double* row_j = factor.data() + j * n;
      const double dot = Eigen::Map<const Eigen::VectorXd>(row_i, static_cast<Eigen::Index>(j))
                             .dot(Eigen::Map<const Eigen::VectorXd>(row_j, static_cast<Eigen::Index>(j)));
      row_i[j] = (gram(static_cast<Eigen::Index>(j), col) - dot) / row_j[j];
    }
    const double norm_sq = Eigen::Map<const Eigen::VectorXd>(row_i, col).squaredNorm();
    const double variance = std::max(0.0, gram(col, col) - norm_sq);
    variances[i] = variance;
    row_i[i] = std::sqrt(variance + lambda_sq);
  }
  return variances;
}

}  // namespace

SequenceGram::SequenceGram(const KernelSpec& spec, std::span<const Point> sequence)
    : size_(sequence.size()),
      gram_(sequence.empty() ? Eigen::MatrixXd(0, 0) : gram_matrix(spec, sequence)) {}

std::vector<double> SequenceGram::regularized_variances(double lambda_sq, std::size_t prefix) const {
  check_lambda(lambda_sq);
  if (prefix > size_) {
    throw std::out_of_range("prefix longer than the sequence");
  }
  return regularized_pivots(gram_, lambda_sq, prefix);
}

double SequenceGram::information_gain(double lambda_sq, std::size_t prefix) const {
  double gain = 0.0;
  for (double v : regularized_variances(lambda_sq, prefix)) {
    gain += 0.5 * std::log1p(v / lambda_sq);
  }
  return gain;
}

std::vector<double> SequenceGram::prefix_information_gains(double lambda_sq) const {
  std::vector<double> gains;
  gains.reserve(size_);
  double gain = 0.0;
  for (double v : regularized_variances(lambda_sq, size_)) {
    gain += 0.5 * std::log1p(v / lambda_sq);
    gains.push_back(gain);
  }
  return gains;
}

double posterior_var_regularized(const History& history, const Point& x, double lambda_sq) {
  check_lambda(lambda_sq);
  if (static_cast<std::size_t>(x.size()) != history.dim()) {
    throw std::invalid_argument("query dimension does not match history");
  }
  std::vector<Point> sequence(history.queries().begin(), history.queries().end());
  sequence.push_back(x);
  const SequenceGram gram(history.spec(), sequence);
  return gram.regularized_variances(lambda_sq).back();
}

double realized_information_gain(const KernelSpec& spec, std::span<const Point> points, double lambda_sq) {
  check_lambda(lambda_sq);
  if (points.empty()) {
    return 0.0;
  }
  const SequenceGram gram(spec, points);
  return gram.information_gain(lambda_sq, points.size());
}

}  // namespace gpucb
