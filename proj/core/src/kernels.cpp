#include "gpucb/kernels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gpucb {
namespace {

bool is_supported_nu(double nu) { return nu == 0.5 || nu == 1.5 || nu == 2.5; }

}  // namespace

KernelSpec::KernelSpec(KernelFamily family, double lengthscale, double nu)
    : family_(family), lengthscale_(lengthscale), nu_(nu) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("kernel lengthscale must be positive and finite");
  }
  if (family == KernelFamily::Matern && !is_supported_nu(nu)) {
    throw std::invalid_argument("Matern smoothness must be one of 0.5, 1.5, 2.5");
  }
}

KernelSpec KernelSpec::squared_exponential(double lengthscale) {
  return KernelSpec(KernelFamily::SquaredExponential, lengthscale, 0.0);
}

KernelSpec KernelSpec::matern(double nu, double lengthscale) {
  return KernelSpec(KernelFamily::Matern, lengthscale, nu);
}

double KernelSpec::at_distance(double r) const noexcept {
  const double s = r / lengthscale_;
  if (family_ == KernelFamily::SquaredExponential) {
    return std::exp(-0.5 * s * s);
  }
  if (nu_ == 0.5) {
    return std::exp(-s);
  }
  if (nu_ == 1.5) {
    const double a = std::sqrt(3.0) * s;
    return (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * s;
  return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  if (family_ == KernelFamily::SquaredExponential) {
    out << "se(ell=" << lengthscale_ << ")";
  } else {
    out << "matern(nu=" << nu_ << ",ell=" << lengthscale_ << ")";
  }
  return out.str();
}

double euclidean_distance(const Point& x, const Point& x2) {
  if (x.size() != x2.size() || x.size() == 0) {
    throw std::invalid_argument("kernel inputs must share a positive dimension");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double diff = x[i] - x2[i];
    sum += diff * diff;
  }
  if (!std::isfinite(sum)) {
    throw std::invalid_argument("kernel inputs must be finite");
  }
  return std::sqrt(sum);
}

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& x2) {
  return spec.at_distance(euclidean_distance(x, x2));
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Point> points) {
  if (points.empty()) {
    throw std::invalid_argument("gram_matrix needs at least one point");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram(i, i) = kernel_eval(spec, points[i], points[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double value = kernel_eval(spec, points[i], points[j]);
      gram(i, j) = value;
      gram(j, i) = value;
    }
  }
  return gram;
}

Eigen::VectorXd kernel_vector(const KernelSpec& spec, std::span<const Point> points, const Point& x) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = kernel_eval(spec, points[i], x);
  }
  return out;
}

}  // namespace gpucb
