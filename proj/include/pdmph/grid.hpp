#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>

#include "pdmph/errors.hpp"
#include "pdmph/extended.hpp"

namespace pdmph {

using cplx = std::complex<double>;
using Index = Eigen::Index;

/// Half-open row range [begin, end).
struct Window {
  Index begin = 0;
  Index end = 0;
  Index size() const { return end > begin ? end - begin : 0; }
  bool contains(Index i) const { return i >= begin && i < end; }
};

/// Uniform grid on [xmin, xmax] with n points (dimensionless units).
struct Grid {
  double xmin = 0.0;
  double xmax = 0.0;
  Index n = 0;
  double h = 0.0;

  /// Symmetric about the origin with a node exactly at x = 0.
  bool parity_capable() const { return xmin == -xmax && n % 2 == 1; }

  /// Node i, correctly rounded from the exact node xmin + i (xmax - xmin)/(n - 1).
  double x(Index i) const { return static_cast<double>(xq(i)); }

  /// Spacing and nodes in binary128.
  hp::real hq() const { return (static_cast<hp::real>(xmax) - static_cast<hp::real>(xmin)) / static_cast<hp::real>(n - 1); }
  hp::real xq(Index i) const {
    if (parity_capable()) return static_cast<hp::real>(i - (n - 1) / 2) * hq();
    return static_cast<hp::real>(xmin) + static_cast<hp::real>(i) * hq();
  }
  /// Node i in the requested scalar.
  template <class T>
  T node(Index i) const {
    if constexpr (std::is_same_v<T, double>) return x(i);
    else return xq(i);
  }

  Eigen::VectorXd points() const {
    Eigen::VectorXd p(n);
    for (Index i = 0; i < n; ++i) p[i] = x(i);
    return p;
  }

  Index nearest(double x0) const {
    const double t = std::round((x0 - xmin) / h);
    if (t <= 0) return 0;
    if (t >= static_cast<double>(n - 1)) return n - 1;
    return static_cast<Index>(t);
  }

  /// Rows at distance >= margin from both edges.
  Window interior(Index margin = 4) const { return {margin, n - margin}; }

  bool operator==(const Grid& o) const {
    return xmin == o.xmin && xmax == o.xmax && n == o.n;
  }
};

inline Grid make_grid(double xmin, double xmax, Index n) {
  if (!(std::isfinite(xmin) && std::isfinite(xmax)) || !(xmax > xmin))
    throw Error(ErrorKind::invalid_domain, "grid requires xmax > xmin");
  if (n < 9)
    throw Error(ErrorKind::invalid_domain,
                "grid requires n >= 9 (got " + std::to_string(n) + ")");
  return Grid{xmin, xmax, n, (xmax - xmin) / static_cast<double>(n - 1)};
}

/// Complex samples of a function on a grid.
struct GridFunction {
  Grid grid;
  Eigen::VectorXcd values;

  GridFunction() = default;
  GridFunction(const Grid& g, Eigen::VectorXcd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n)
      throw std::invalid_argument("GridFunction: sample count does not match grid");
  }
  static GridFunction zeros(const Grid& g) { return {g, Eigen::VectorXcd::Zero(g.n)}; }
  static GridFunction real(const Grid& g, const Eigen::VectorXd& v) {
    return {g, v.cast<cplx>()};
  }
  template <class F>
  static GridFunction sample(const Grid& g, F&& fn) {
    Eigen::VectorXcd v(g.n);
    for (Index i = 0; i < g.n; ++i) v[i] = fn(g.x(i));
    return {g, std::move(v)};
  }

  Index size() const { return values.size(); }
  cplx operator[](Index i) const { return values[i]; }

  bool is_real(double tol = 0.0) const {
    return values.imag().cwiseAbs().maxCoeff() <= tol;
  }
  Eigen::VectorXd re() const { return values.real(); }
  Eigen::VectorXd im() const { return values.imag(); }
};

}  // namespace pdmph
