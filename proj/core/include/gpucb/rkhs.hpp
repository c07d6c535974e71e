#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gpucb/kernels.hpp"
#include "gpucb/random.hpp"

namespace gpucb {

/// f = sum_m c_m k(x^(m), .), a member of the RKHS of `spec` by construction.
/// Immutable; the RKHS norm is computed once at construction.
class RkhsFunction {
 public:
  RkhsFunction(KernelSpec spec, std::vector<Point> centers, std::vector<double> coefficients);

  [[nodiscard]] double operator()(const Point& x) const;

  [[nodiscard]] const KernelSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::span<const Point> centers() const noexcept { return centers_; }
  [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(centers_.front().size()); }
  [[nodiscard]] double norm() const noexcept { return norm_; }

  /// Key of the stream the function was sampled from, when known.
  [[nodiscard]] std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t key) noexcept { seed_ = key; }

 private:
  KernelSpec spec_;
  std::vector<Point> centers_;
  std::vector<double> coefficients_;
  double norm_;
  std::optional<std::uint64_t> seed_;
};

/// Draws `count` coefficients from U[-1, 1] and centers from U([0, 1]^dim).
RkhsFunction sample_objective(const KernelSpec& spec, std::size_t dim, std::size_t count, RandomStream& rng);

double evaluate(const RkhsFunction& f, const Point& x);

/// sqrt(c^T K c), recomputed. Throws NumericalError if the quadratic form is
/// below -1e-8.
double rkhs_norm(const RkhsFunction& f);

/// Uniform grid on [0, 1]^dim with `resolution` points per axis, coordinates
/// i / (resolution - 1). The first coordinate varies slowest.
std::vector<Point> make_grid(std::size_t resolution, std::size_t dim);

struct GridMaximum {
  std::size_t index = 0;
  double value = 0.0;
};

/// Lowest-index maximizer.
GridMaximum grid_maximum(std::span<const double> values);

std::vector<double> evaluate_on(const RkhsFunction& f, std::span<const Point> points);

}  // namespace gpucb
