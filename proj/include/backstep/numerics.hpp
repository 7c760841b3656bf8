#pragma once

// Uniform-grid functions on [0,1] and the quadratures shared by every module.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace backstep {

/// Uniform grid x_i = i*dx on [0,1], with x_0 = 0 and x_{n-1} = 1.
class Grid1D {
 public:
  explicit Grid1D(std::size_t n_points);

  /// Grid whose spacing is dx; 1/dx must be (close to) an integer.
  static Grid1D with_spacing(double dx);

  std::size_t size() const { return n_points_; }
  double dx() const { return dx_; }
  double x(std::size_t i) const;

  bool operator==(const Grid1D& other) const { return n_points_ == other.n_points_; }

 private:
  std::size_t n_points_;
  double dx_;
};

/// Real samples of a function on a Grid1D.
class GridFunction {
 public:
  explicit GridFunction(Grid1D grid);
  GridFunction(Grid1D grid, std::vector<double> values);

  static GridFunction constant(Grid1D grid, double value);
  static GridFunction sample(Grid1D grid, const std::function<double(double)>& f);

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double dx() const { return grid_.dx(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& data() const { return values_; }

  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  bool all_finite() const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);
GridFunction operator-(GridFunction a);

/// Throws std::invalid_argument if a and b live on different grids.
void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what);

/// Left-rectangle convolution c(x_i) = dx * sum_{j<i} a(x_{i-j}) b(x_j); c(0) = 0.
GridFunction convolve(const GridFunction& a, const GridFunction& b);

/// Trapezoidal integral of f over [0,1].
double integrate(const GridFunction& f);

/// Trapezoidal integral of samples with spacing dx (at least two samples, else 0).
double trapezoid(std::span<const double> samples, double dx);

/// Trapezoidal approximation of int_0^1 e^{cx} w(x)^2 dx.
double weighted_norm_sq(const GridFunction& w, double c);

double l2_norm(const GridFunction& f);
double sup_norm(const GridFunction& f);

/// Piecewise-linear interpolation of f at an arbitrary point of [0,1].
double interpolate(const GridFunction& f, double x);

/// Piecewise-linear resampling onto another grid.
GridFunction resample(const GridFunction& f, const Grid1D& target);

/// Two-column `x,value` CSV with a one-line header.
void write_csv(std::ostream& out, const GridFunction& f);

}  // namespace backstep
