#include "backstep/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace backstep {

Grid1D::Grid1D(std::size_t n_points) : n_points_(n_points), dx_(0.0) {
  if (n_points < 2) throw std::invalid_argument("Grid1D needs at least 2 points");
  dx_ = 1.0 / static_cast<double>(n_points - 1);
}

Grid1D Grid1D::with_spacing(double dx) {
  if (!(dx > 0.0) || dx > 1.0) throw std::invalid_argument("grid spacing must lie in (0,1]");
  const double cells = 1.0 / dx;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-6 * rounded)
    throw std::invalid_argument("1/dx must be an integer, got dx=" + std::to_string(dx));
  return Grid1D(static_cast<std::size_t>(rounded) + 1);
}

double Grid1D::x(std::size_t i) const {
  // Pin the right endpoint so x_{n-1} == 1 exactly.
  if (i + 1 == n_points_) return 1.0;
  return static_cast<double>(i) * dx_;
}

GridFunction::GridFunction(Grid1D grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridFunction::GridFunction(Grid1D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("GridFunction: " + std::to_string(values_.size()) +
                                " values for a grid of " + std::to_string(grid_.size()));
}

GridFunction GridFunction::constant(Grid1D grid, double value) {
  return GridFunction(grid, std::vector<double>(grid.size(), value));
}

GridFunction GridFunction::sample(Grid1D grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.x(i));
  return GridFunction(grid, std::move(v));
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(*this, other, "operator+");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(*this, other, "operator-");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }
GridFunction operator-(GridFunction a) { return a *= -1.0; }

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what) {
  if (!(a.grid() == b.grid()))
    throw std::invalid_argument(std::string(what) + ": grid mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                " points)");
}

GridFunction convolve(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "convolve");
  const std::size_t n = a.size();
  const double dx = a.dx();
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += a[i - j] * b[j];
    c[i] = dx * acc;
  }
  return GridFunction(a.grid(), std::move(c));
}

double trapezoid(std::span<const double> samples, double dx) {
  if (samples.size() < 2) return 0.0;
  double acc = 0.5 * (samples.front() + samples.back());
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) acc += samples[i];
  return dx * acc;
}

double integrate(const GridFunction& f) { return trapezoid(f.values(), f.dx()); }

double weighted_norm_sq(const GridFunction& w, double c) {
  if (c < 0.0) throw std::invalid_argument("weighted_norm_sq: c must be nonnegative");
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::exp(c * w.grid().x(i)) * w[i] * w[i];
  return trapezoid(g, w.dx());
}

double l2_norm(const GridFunction& f) { return std::sqrt(weighted_norm_sq(f, 0.0)); }

double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double interpolate(const GridFunction& f, double x) {
  const std::size_t n = f.size();
  if (x <= 0.0) return f[0];
  if (x >= 1.0) return f[n - 1];
  const double s = x / f.dx();
  const auto i = std::min(static_cast<std::size_t>(s), n - 2);
  const double t = s - static_cast<double>(i);
  return (1.0 - t) * f[i] + t * f[i + 1];
}

GridFunction resample(const GridFunction& f, const Grid1D& target) {
  if (f.grid() == target) return f;
  std::vector<double> v(target.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = interpolate(f, target.x(i));
  return GridFunction(target, std::move(v));
}

void write_csv(std::ostream& out, const GridFunction& f) {
  out << "x,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < f.size(); ++i) out << f.grid().x(i) << ',' << f[i] << '\n';
}

}  // namespace backstep
