#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gpucb {

using Point = Eigen::VectorXd;

enum class KernelFamily { SquaredExponential, Matern };

/// Stationary unit-variance covariance function. Matern smoothness is limited
/// to the half-integer closed forms nu in {1/2, 3/2, 5/2}.
class KernelSpec {
 public:
  static KernelSpec squared_exponential(double lengthscale);
  static KernelSpec matern(double nu, double lengthscale);

  [[nodiscard]] KernelFamily family() const noexcept { return family_; }
  [[nodiscard]] double lengthscale() const noexcept { return lengthscale_; }
  /// Smoothness; 0 for the squared exponential kernel.
  [[nodiscard]] double nu() const noexcept { return nu_; }

  /// Kernel value as a function of the Euclidean distance r >= 0.
  [[nodiscard]] double at_distance(double r) const noexcept;

  /// "se(ell=0.25)", "matern(nu=1.5,ell=0.25)".
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelSpec(KernelFamily family, double lengthscale, double nu);

  KernelFamily family_;
  double lengthscale_;
  double nu_;
};

/// Euclidean distance accumulated coordinate by coordinate; symmetric bit for bit.
/// Throws std::invalid_argument on dimension mismatch or non-finite input.
double euclidean_distance(const Point& x, const Point& x2);

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& x2);

/// Entry (i, j) is kernel_eval(points[i], points[j]); unit diagonal, exactly symmetric.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Point> points);

/// [k(points[i], x)]_i
Eigen::VectorXd kernel_vector(const KernelSpec& spec, std::span<const Point> points, const Point& x);

}  // namespace gpucb
