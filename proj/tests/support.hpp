#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gpucb/gp.hpp"
#include "gpucb/harness.hpp"
#include "gpucb/kernels.hpp"
#include "gpucb/random.hpp"

// Brute-force reference computations in extended precision, written against
// the formulas directly rather than the library's factorizations.
namespace oracle {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline long double kernel(const gpucb::KernelSpec& spec, const gpucb::Point& a, const gpucb::Point& b) {
  long double ss = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
    ss += d * d;
  }
  const long double r = std::sqrt(ss);
  const long double ell = spec.lengthscale();
  if (spec.family() == gpucb::KernelFamily::SquaredExponential) {
    return std::exp(-ss / (2.0L * ell * ell));
  }
  if (spec.nu() == 0.5) {
    return std::exp(-r / ell);
  }
  if (spec.nu() == 1.5) {
    const long double s = std::sqrt(3.0L) * r / ell;
    return (1.0L + s) * std::exp(-s);
  }
  const long double s = std::sqrt(5.0L) * r / ell;
  return (1.0L + s + s * s / 3.0L) * std::exp(-s);
}

inline LMatrix gram(const gpucb::KernelSpec& spec, std::span<const gpucb::Point> pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  LMatrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = kernel(spec, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
    }
  }
  return k;
}

inline LVector cross(const gpucb::KernelSpec& spec, std::span<const gpucb::Point> pts, const gpucb::Point& x) {
  LVector v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = kernel(spec, pts[i], x);
  }
  return v;
}

struct Posterior {
  double mean = 0.0;
  double var = 0.0;
};

/// mu and sigma^2 from an explicit inverse of (K + diag I).
inline Posterior dense_posterior(const gpucb::KernelSpec& spec, std::span<const gpucb::Point> pts,
                                 std::span<const double> values, const gpucb::Point& x, long double diag) {
  if (pts.empty()) {
    return {0.0, 1.0};
  }
  LMatrix k = gram(spec, pts);
  k.diagonal().array() += diag;
  const LMatrix inv = k.fullPivLu().inverse();
  LVector f(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    f[static_cast<Eigen::Index>(i)] = values[i];
  }
  const LVector kx = cross(spec, pts, x);
  return {static_cast<double>(kx.dot(inv * f)), static_cast<double>(1.0L - kx.dot(inv * kx))};
}

inline double dense_regularized_var(const gpucb::KernelSpec& spec, std::span<const gpucb::Point> pts,
                                    const gpucb::Point& x, double lambda_sq) {
  const std::vector<double> zeros(pts.size(), 0.0);
  return dense_posterior(spec, pts, zeros, x, lambda_sq).var;
}

/// 1/2 sum ln(1 + eig_i / lambda^2) from the eigenvalues of K.
inline double eigen_gain(const gpucb::KernelSpec& spec, std::span<const gpucb::Point> pts, double lambda_sq) {
  if (pts.empty()) {
    return 0.0;
  }
  const Eigen::SelfAdjointEigenSolver<LMatrix> solver(gram(spec, pts));
  long double gain = 0.0L;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    gain += std::log1p(std::max(0.0L, solver.eigenvalues()[i]) / lambda_sq);
  }
  return static_cast<double>(gain / 2.0L);
}

inline std::vector<gpucb::Point> random_points(gpucb::RandomStream& rng, std::size_t n, std::size_t dim) {
  std::vector<gpucb::Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    gpucb::Point p(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      p[static_cast<Eigen::Index>(j)] = rng.uniform01();
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

inline gpucb::Point point(std::initializer_list<double> coords) {
  gpucb::Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (const double c : coords) {
    p[i++] = c;
  }
  return p;
}

/// Query points of a trace, looked up on the grid.
inline std::vector<gpucb::Point> trace_points(const gpucb::RegretTrace& trace, std::span<const gpucb::Point> grid) {
  std::vector<gpucb::Point> out;
  out.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    out.push_back(grid[s.chosen_index]);
  }
  return out;
}

}  // namespace oracle
