#include "gpucb/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gpucb/gp.hpp"

namespace gpucb {
namespace {

double quadratic_form(const KernelSpec& spec, std::span<const Point> centers, std::span<const double> c) {
  double total = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      row += c[j] * kernel_eval(spec, centers[i], centers[j]);
    }
    total += c[i] * row;
  }
  return total;
}

double checked_sqrt(double form) {
  if (form < -1e-8) {
    throw NumericalError("RKHS quadratic form is negative: " + std::to_string(form));
  }
  return std::sqrt(std::max(0.0, form));
}

}  // namespace

RkhsFunction::RkhsFunction(KernelSpec spec, std::vector<Point> centers, std::vector<double> coefficients)
    : spec_(spec), centers_(std::move(centers)), coefficients_(std::move(coefficients)) {
  if (centers_.empty() || centers_.size() != coefficients_.size()) {
    throw std::invalid_argument("RKHS expansion needs matching, non-empty centers and coefficients");
  }
  const auto d = centers_.front().size();
  for (const auto& c : centers_) {
    if (c.size() != d || d == 0) {
      throw std::invalid_argument("RKHS centers must share a positive dimension");
    }
  }
  norm_ = checked_sqrt(quadratic_form(spec_, centers_, coefficients_));
}

double RkhsFunction::operator()(const Point& x) const {
  double value = 0.0;
  for (std::size_t m = 0; m < centers_.size(); ++m) {
    value += coefficients_[m] * kernel_eval(spec_, centers_[m], x);
  }
  return value;
}

RkhsFunction sample_objective(const KernelSpec& spec, std::size_t dim, std::size_t count, RandomStream& rng) {
  if (dim == 0 || count == 0) {
    throw std::invalid_argument("sample_objective needs dim >= 1 and count >= 1");
  }
  const std::uint64_t key = rng.key();
  std::vector<double> coefficients(count);
  for (auto& c : coefficients) {
    c = rng.uniform(-1.0, 1.0);
  }
  std::vector<Point> centers(count, Point(static_cast<Eigen::Index>(dim)));
  for (auto& center : centers) {
    for (Eigen::Index i = 0; i < center.size(); ++i) {
      center[i] = rng.uniform01();
    }
  }
  RkhsFunction f(spec, std::move(centers), std::move(coefficients));
  f.set_seed(key);
  return f;
}

double evaluate(const RkhsFunction& f, const Point& x) { return f(x); }

double rkhs_norm(const RkhsFunction& f) {
  return checked_sqrt(quadratic_form(f.spec(), f.centers(), f.coefficients()));
}

std::vector<Point> make_grid(std::size_t resolution, std::size_t dim) {
  if (resolution < 2 || dim == 0) {
    throw std::invalid_argument("grid needs resolution >= 2 and dim >= 1");
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    total *= resolution;
  }
  const double step = 1.0 / static_cast<double>(resolution - 1);
  std::vector<Point> grid;
  grid.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point p(static_cast<Eigen::Index>(dim));
    std::size_t rest = flat;
    for (std::size_t axis = dim; axis-- > 0;) {
      p[static_cast<Eigen::Index>(axis)] = static_cast<double>(rest % resolution) * step;
      rest /= resolution;
    }
    grid.push_back(std::move(p));
  }
  return grid;
}

GridMaximum grid_maximum(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("grid_maximum of an empty set");
  }
  GridMaximum best{0, values[0]};
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > best.value) {
      best = {i, values[i]};
    }
  }
  return best;
}

std::vector<double> evaluate_on(const RkhsFunction& f, std::span<const Point> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    out.push_back(f(p));
  }
  return out;
}

}  // namespace gpucb
