#pragma once

// Fourth-order finite differences and cumulative quadrature on uniform grids.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

#include "pdmph/extended.hpp"
#include "pdmph/grid.hpp"
#include "pdmph/operator_matrix.hpp"

namespace pdmph {

/// Finite-difference weights for derivatives 0..m at x0 over the given nodes
/// (Fornberg's recursion). Result[k][j] weights node j for derivative k.
template <class T = double>
std::vector<std::vector<T>> fornberg_weights(T x0, const std::vector<T>& nodes, int m) {
  const int np = static_cast<int>(nodes.size());
  std::vector<std::vector<T>> c(static_cast<std::size_t>(m + 1),
                                std::vector<T>(static_cast<std::size_t>(np), T(0)));
  auto C = [&](int k, int j) -> T& {
    return c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
  };
  T c1 = 1;
  T c4 = nodes[0] - x0;
  C(0, 0) = 1.0;
  for (int i = 1; i < np; ++i) {
    const int mn = std::min(i, m);
    T c2 = 1;
    const T c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const T c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) C(k, i) = c1 * (k * C(k - 1, i - 1) - c5 * C(k, i - 1)) / c2;
        C(0, i) = -c1 * c5 * C(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) C(k, j) = (c4 * C(k, j) - k * C(k - 1, j)) / c3;
      C(0, j) = c4 * C(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

/// One row of a stencil: weights applied to nodes first, first+1, ...
struct StencilRow {
  Index first = 0;
  std::vector<hp::real> w;
};

/// Node offsets (relative to the row node) used for each row of a
/// fourth-order derivative of the given order on n nodes.
inline std::vector<StencilRow> stencil_rows(const Grid& grid, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("stencil order must be 1 or 2");
  const Index n = grid.n;
  // 5-point central in the interior; 5 (first) or 6 (second derivative)
  // point one-sided closures in the two-row boundary band.
  const Index width = order == 1 ? 5 : 6;
  const hp::real h = grid.hq();
  const hp::real scale = order == 1 ? 1 / h : 1 / (h * h);
  std::vector<StencilRow> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index first, count;
    if (i >= 2 && i <= n - 3) {
      first = i - 2;
      count = 5;
    } else if (i < 2) {
      first = 0;
      count = width;
    } else {
      first = n - width;
      count = width;
    }
    std::vector<hp::real> w;
    if (count == 5 && first == i - 2) {
      // exact central weights keep the interior (anti)symmetric entrywise
      w = order == 1 ? std::vector<hp::real>{1, -8, 0, 8, -1} : std::vector<hp::real>{-1, 16, -30, 16, -1};
      for (hp::real& x : w) x *= scale / 12;
    } else {
      std::vector<hp::real> nodes(static_cast<std::size_t>(count));
      for (Index k = 0; k < count; ++k) nodes[static_cast<std::size_t>(k)] = static_cast<hp::real>(first + k - i);
      w = fornberg_weights<hp::real>(0, nodes, order)[static_cast<std::size_t>(order)];
      for (hp::real& x : w) x *= scale;
    }
    rows[static_cast<std::size_t>(i)] = {first, std::move(w)};
  }
  return rows;
}

/// Stencil rows for the Dirichlet block (nodes 1..n-2) with odd reflection
/// v(-k) = -v(k) about each pinned boundary node. Rows are indexed by block
/// position; columns refer to block positions too.
inline std::vector<std::vector<std::pair<Index, hp::real>>> dirichlet_stencil_rows(const Grid& grid,
                                                                                   int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("stencil order must be 1 or 2");
  const Index n = grid.n;
  const Index m = n - 2;
  const hp::real h = grid.hq();
  const hp::real s1 = 1 / (12 * h), s2 = 1 / (12 * h * h);
  const std::array<hp::real, 5> w1{s1, -8 * s1, 0, 8 * s1, -s1};
  const std::array<hp::real, 5> w2{-s2, 16 * s2, -30 * s2, 16 * s2, -s2};
  const auto& w = order == 1 ? w1 : w2;
  std::vector<std::vector<std::pair<Index, hp::real>>> rows(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) {
    const Index node = r + 1;
    std::vector<std::pair<Index, hp::real>> acc;
    for (int k = -2; k <= 2; ++k) {
      Index j = node + k;
      hp::real sign = 1;
      if (j < 0) {
        j = -j;
        sign = -1;
      } else if (j > n - 1) {
        j = 2 * (n - 1) - j;
        sign = -1;
      }
      if (j == 0 || j == n - 1) continue;  // pinned
      const hp::real wk = sign * w[static_cast<std::size_t>(k + 2)];
      if (wk == 0) continue;
      const Index col = j - 1;
      auto it = std::find_if(acc.begin(), acc.end(), [&](const auto& p) { return p.first == col; });
      if (it == acc.end())
        acc.emplace_back(col, wk);
      else
        it->second += wk;
    }
    std::sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    rows[static_cast<std::size_t>(r)] = std::move(acc);
  }
  return rows;
}

/// Matrix of the fourth-order first or second derivative. The interior
/// window (rows at distance >= 4 from each edge) is where only central
/// stencils are involved.
inline OperatorMatrix diff_matrix(const Grid& grid, int order) {
  const auto rows = stencil_rows(grid, order);
  std::vector<OperatorMatrix::Row> out(static_cast<std::size_t>(grid.n));
  for (Index i = 0; i < grid.n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    auto& o = out[static_cast<std::size_t>(i)];
    o.first = row.first;
    for (hp::real w : row.w) o.w.emplace_back(w);
  }
  return {grid, std::move(out), order, grid.interior(4)};
}

/// Derivative matrix on the Dirichlet block (nodes 1..n-2).
inline OperatorMatrix dirichlet_diff_matrix(const Grid& grid, int order) {
  const auto rows = dirichlet_stencil_rows(grid, order);
  const Index m = grid.n - 2;
  std::vector<OperatorMatrix::Row> out(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) {
    const auto& entries = rows[static_cast<std::size_t>(r)];
    auto& row = out[static_cast<std::size_t>(r)];
    row.first = entries.front().first;
    row.w.assign(static_cast<std::size_t>(entries.back().first - row.first + 1), hp::complex{});
    for (const auto& [col, w] : entries) row.w[static_cast<std::size_t>(col - row.first)] = hp::complex(w);
  }
  // block row r is node r + 1, so the node-based interior window shifts by one
  return {grid, std::move(out), order, {3, m - 3}, BoundaryPolicy::dirichlet_odd_reflection};
}

inline OperatorMatrix diff_matrix(const Grid& grid, int order, BoundaryPolicy boundary) {
  return boundary == BoundaryPolicy::one_sided ? diff_matrix(grid, order)
                                               : dirichlet_diff_matrix(grid, order);
}

/// Derivative of sampled values, accumulated in binary128 and returned in the
/// input scalar.
template <class T>
std::vector<T> differentiate(const Grid& grid, const std::vector<T>& v, int order) {
  if (static_cast<Index>(v.size()) != grid.n) throw std::invalid_argument("differentiate: length");
  const auto rows = stencil_rows(grid, order);
  std::vector<T> out(v.size());
  for (Index i = 0; i < grid.n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    hp::real s = 0;
    for (std::size_t k = 0; k < row.w.size(); ++k)
      s += row.w[k] * static_cast<hp::real>(v[static_cast<std::size_t>(row.first) + k]);
    out[static_cast<std::size_t>(i)] = static_cast<T>(s);
  }
  return out;
}

/// Derivative of sampled values; identical numbers to diff_matrix(grid, order) * v.
inline Eigen::VectorXd differentiate(const Grid& grid, const Eigen::VectorXd& v, int order) {
  const std::vector<double> d = differentiate(grid, std::vector<double>(v.data(), v.data() + v.size()), order);
  return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Index>(d.size()));
}

inline Eigen::VectorXcd differentiate(const Grid& grid, const Eigen::VectorXcd& v, int order) {
  Eigen::VectorXcd out(grid.n);
  out.real() = differentiate(grid, Eigen::VectorXd(v.real()), order);
  out.imag() = differentiate(grid, Eigen::VectorXd(v.imag()), order);
  return out;
}

namespace detail {
template <class T, class R>
std::vector<T> cumulative(const std::vector<T>& f, R h, Index anchor) {
  const Index n = static_cast<Index>(f.size());
  auto F = [&](Index j) { return f[static_cast<std::size_t>(j)]; };
  const R c = h / 24, k9 = 9, k19 = 19, k5 = 5, k13 = 13;
  std::vector<T> cell(static_cast<std::size_t>(n - 1));  // integral over [x_j, x_{j+1}]
  for (Index j = 0; j < n - 1; ++j) {
    T v;
    if (j == 0)
      v = c * (k9 * F(0) + k19 * F(1) - k5 * F(2) + F(3));
    else if (j == n - 2)
      v = c * (k9 * F(n - 1) + k19 * F(n - 2) - k5 * F(n - 3) + F(n - 4));
    else
      v = c * (-F(j - 1) + k13 * F(j) + k13 * F(j + 1) - F(j + 2));
    cell[static_cast<std::size_t>(j)] = v;
  }
  std::vector<T> out(static_cast<std::size_t>(n));
  out[static_cast<std::size_t>(anchor)] = T(0);
  for (Index i = anchor + 1; i < n; ++i)
    out[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i - 1)] + cell[static_cast<std::size_t>(i - 1)];
  for (Index i = anchor - 1; i >= 0; --i)
    out[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i + 1)] - cell[static_cast<std::size_t>(i)];
  return out;
}
}  // namespace detail

/// F with F(x_anchor) = 0 and F' = fn. Each cell integral is the exact
/// integral of the cubic through four neighbouring samples (one-sided at the
/// two end cells), giving a fourth-order composite rule that is exact for
/// cubics.
inline GridFunction cumulative_integral(const GridFunction& fn, Index anchor) {
  const Grid& g = fn.grid;
  if (anchor < 0 || anchor >= g.n) throw std::out_of_range("cumulative_integral: anchor outside grid");
  std::vector<cplx> f(fn.values.data(), fn.values.data() + g.n);
  const auto F = detail::cumulative<cplx, double>(f, g.h, anchor);
  Eigen::VectorXcd out(g.n);
  for (Index i = 0; i < g.n; ++i) out[i] = F[static_cast<std::size_t>(i)];
  return {g, std::move(out)};
}

/// Real cumulative integral carried out in binary128.
inline hp::rvector cumulative_integral(const Grid& g, const hp::rvector& fn, Index anchor) {
  if (anchor < 0 || anchor >= g.n) throw std::out_of_range("cumulative_integral: anchor outside grid");
  if (static_cast<Index>(fn.size()) != g.n) throw std::invalid_argument("cumulative_integral: length");
  return detail::cumulative<hp::real, hp::real>(fn, g.hq(), anchor);
}

}  // namespace pdmph
