#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdmph/errors.hpp"
#include "pdmph/extended.hpp"
#include "pdmph/grid.hpp"

namespace pdmph {

using DenseMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class BoundaryPolicy {
  one_sided,                 // full grid, one-sided closures in the boundary band
  dirichlet_odd_reflection,  // interior nodes only; ghost values mirror with sign flip
};

inline std::string_view to_string(BoundaryPolicy p) {
  return p == BoundaryPolicy::one_sided ? "one-sided" : "dirichlet-odd-reflection";
}

/// Complex realization of a differential operator on a grid.
///
/// Rows are stored as contiguous bands (first column plus values) in binary128;
/// dense() rounds to the full double matrix for eigensolvers and export.
///
/// A one-sided operator spans all n nodes. A Dirichlet operator spans the
/// interior nodes 1..n-2 only (boundary values pinned to zero), so row r
/// corresponds to grid node r + 1.
class OperatorMatrix {
 public:
  struct Row {
    Index first = 0;
    std::vector<hp::complex> w;
  };

  OperatorMatrix() = default;
  OperatorMatrix(Grid grid, std::vector<Row> rows, int order, Window window,
                 BoundaryPolicy boundary = BoundaryPolicy::one_sided)
      : grid_(grid), rows_(std::move(rows)), order_(order), window_(window), boundary_(boundary) {
    if (static_cast<Index>(rows_.size()) != expected_size())
      throw std::invalid_argument("OperatorMatrix size does not match grid and boundary policy");
    for (auto& r : rows_) trim(r);
  }

  static OperatorMatrix from_dense(Grid grid, const DenseMatrix& m, int order, Window window,
                                   BoundaryPolicy boundary = BoundaryPolicy::one_sided) {
    if (m.rows() != m.cols()) throw std::invalid_argument("OperatorMatrix must be square");
    std::vector<Row> rows(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) {
      auto& r = rows[static_cast<std::size_t>(i)];
      r.w.reserve(static_cast<std::size_t>(m.cols()));
      for (Index j = 0; j < m.cols(); ++j) r.w.emplace_back(m(i, j));
    }
    return {grid, std::move(rows), order, window, boundary};
  }

  const Grid& grid() const { return grid_; }
  int order() const { return order_; }
  const Window& window() const { return window_; }
  BoundaryPolicy boundary() const { return boundary_; }
  Index size() const { return static_cast<Index>(rows_.size()); }
  /// Grid index of row 0.
  Index node_offset() const { return boundary_ == BoundaryPolicy::one_sided ? 0 : 1; }

  const Row& row(Index i) const { return rows_[static_cast<std::size_t>(i)]; }

  hp::complex entry(Index i, Index j) const {
    const Row& r = row(i);
    const Index k = j - r.first;
    return k >= 0 && k < static_cast<Index>(r.w.size()) ? r.w[static_cast<std::size_t>(k)] : hp::complex{};
  }
  cplx operator()(Index i, Index j) const { return entry(i, j).to_cplx(); }

  /// Columns [first, second) holding the nonzeros of row i.
  std::pair<Index, Index> span(Index i) const {
    const Row& r = row(i);
    return {r.first, r.first + static_cast<Index>(r.w.size())};
  }

  DenseMatrix dense() const {
    DenseMatrix m = DenseMatrix::Zero(size(), size());
    for (Index i = 0; i < size(); ++i) {
      const Row& r = row(i);
      for (std::size_t k = 0; k < r.w.size(); ++k) m(i, r.first + static_cast<Index>(k)) = r.w[k].to_cplx();
    }
    return m;
  }

  /// Product with a vector, accumulated in binary128 and rounded once.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return hp::to_double(apply(hp::from(v))); }

  hp::vector apply(const hp::vector& v) const {
    if (static_cast<Index>(v.size()) != size()) throw std::invalid_argument("apply: vector length mismatch");
    hp::vector out(v.size());
    for (Index i = 0; i < size(); ++i) {
      const Row& r = row(i);
      hp::complex s;
      for (std::size_t k = 0; k < r.w.size(); ++k) s += r.w[k] * v[static_cast<std::size_t>(r.first) + k];
      out[static_cast<std::size_t>(i)] = s;
    }
    return out;
  }

  GridFunction apply(const GridFunction& f) const {
    if (boundary_ != BoundaryPolicy::one_sided)
      throw std::logic_error("apply(GridFunction) needs a full-grid operator");
    return {grid_, apply(f.values)};
  }

 private:
  Index expected_size() const {
    return boundary_ == BoundaryPolicy::one_sided ? grid_.n : grid_.n - 2;
  }
  static void trim(Row& r) {
    std::size_t lo = 0, hi = r.w.size();
    while (lo < hi && r.w[lo].is_zero()) ++lo;
    while (hi > lo && r.w[hi - 1].is_zero()) --hi;
    r.first += static_cast<Index>(lo);
    r.w = std::vector<hp::complex>(r.w.begin() + static_cast<std::ptrdiff_t>(lo),
                                   r.w.begin() + static_cast<std::ptrdiff_t>(hi));
    if (r.w.empty()) r.first = 0;
  }

  Grid grid_;
  std::vector<Row> rows_;
  int order_ = 0;
  Window window_;
  BoundaryPolicy boundary_ = BoundaryPolicy::one_sided;
};

namespace detail {
inline void require_compatible(const OperatorMatrix& a, const OperatorMatrix& b, const char* what) {
  if (!(a.grid() == b.grid()) || a.boundary() != b.boundary())
    throw std::invalid_argument(std::string(what) + ": operators live on different grids");
}
inline Window meet(const Window& a, const Window& b) {
  return {std::max(a.begin, b.begin), std::min(a.end, b.end)};
}
template <class F>
OperatorMatrix map_rows(const OperatorMatrix& a, F&& fn) {
  std::vector<OperatorMatrix::Row> rows;
  rows.reserve(static_cast<std::size_t>(a.size()));
  for (Index i = 0; i < a.size(); ++i) {
    auto r = a.row(i);
    for (std::size_t k = 0; k < r.w.size(); ++k) r.w[k] = fn(i, r.first + static_cast<Index>(k), r.w[k]);
    rows.push_back(std::move(r));
  }
  return {a.grid(), std::move(rows), a.order(), a.window(), a.boundary()};
}
}  // namespace detail

/// Conjugate transpose as a matrix.
inline OperatorMatrix conjugate_transpose(const OperatorMatrix& a) {
  const Index n = a.size();
  std::vector<Index> lo(static_cast<std::size_t>(n), n), hi(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    const auto [b, e] = a.span(i);
    for (Index j = b; j < e; ++j) {
      lo[static_cast<std::size_t>(j)] = std::min(lo[static_cast<std::size_t>(j)], i);
      hi[static_cast<std::size_t>(j)] = std::max(hi[static_cast<std::size_t>(j)], i + 1);
    }
  }
  std::vector<OperatorMatrix::Row> rows(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    auto& r = rows[static_cast<std::size_t>(j)];
    if (hi[static_cast<std::size_t>(j)] <= lo[static_cast<std::size_t>(j)]) continue;
    r.first = lo[static_cast<std::size_t>(j)];
    r.w.assign(static_cast<std::size_t>(hi[static_cast<std::size_t>(j)] - r.first), hp::complex{});
  }
  for (Index i = 0; i < n; ++i) {
    const auto [b, e] = a.span(i);
    for (Index j = b; j < e; ++j) {
      auto& r = rows[static_cast<std::size_t>(j)];
      r.w[static_cast<std::size_t>(i - r.first)] = hp::conj(a.entry(i, j));
    }
  }
  return {a.grid(), std::move(rows), a.order(), a.window(), a.boundary()};
}

/// Matrix product a*b exploiting the band structure of both factors.
inline OperatorMatrix multiply(const OperatorMatrix& a, const OperatorMatrix& b) {
  detail::require_compatible(a, b, "multiply");
  const Index n = a.size();
  std::vector<OperatorMatrix::Row> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto& arow = a.row(i);
    Index clo = n, chi = 0;
    for (std::size_t q = 0; q < arow.w.size(); ++q) {
      const auto [blo, bhi] = b.span(arow.first + static_cast<Index>(q));
      if (bhi <= blo) continue;
      clo = std::min(clo, blo);
      chi = std::max(chi, bhi);
    }
    auto& r = rows[static_cast<std::size_t>(i)];
    if (chi <= clo) continue;
    r.first = clo;
    r.w.assign(static_cast<std::size_t>(chi - clo), hp::complex{});
    for (std::size_t q = 0; q < arow.w.size(); ++q) {
      const hp::complex aik = arow.w[q];
      if (aik.is_zero()) continue;
      const auto& brow = b.row(arow.first + static_cast<Index>(q));
      for (std::size_t t = 0; t < brow.w.size(); ++t)
        r.w[static_cast<std::size_t>(brow.first - clo) + t] += aik * brow.w[t];
    }
  }
  return {a.grid(), std::move(rows), a.order() + b.order(), detail::meet(a.window(), b.window()),
          a.boundary()};
}

/// sa * a + sb * b.
inline OperatorMatrix linear_combination(hp::complex sa, const OperatorMatrix& a, hp::complex sb,
                                         const OperatorMatrix& b) {
  detail::require_compatible(a, b, "linear_combination");
  const Index n = a.size();
  std::vector<OperatorMatrix::Row> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto [alo, ahi] = a.span(i);
    const auto [blo, bhi] = b.span(i);
    const Index lo = std::min(ahi > alo ? alo : n, bhi > blo ? blo : n);
    const Index hi = std::max(ahi, bhi);
    auto& r = rows[static_cast<std::size_t>(i)];
    if (hi <= lo) continue;
    r.first = lo;
    r.w.assign(static_cast<std::size_t>(hi - lo), hp::complex{});
    for (Index j = alo; j < ahi; ++j) r.w[static_cast<std::size_t>(j - lo)] += sa * a.entry(i, j);
    for (Index j = blo; j < bhi; ++j) r.w[static_cast<std::size_t>(j - lo)] += sb * b.entry(i, j);
  }
  return {a.grid(), std::move(rows), std::max(a.order(), b.order()),
          detail::meet(a.window(), b.window()), a.boundary()};
}

inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  return linear_combination(1.0, a, 1.0, b);
}
inline OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  return linear_combination(1.0, a, -1.0, b);
}
inline OperatorMatrix operator*(hp::complex s, const OperatorMatrix& a) {
  return detail::map_rows(a, [&](Index, Index, hp::complex w) { return s * w; });
}

/// diag(c) * a, with c given on the full grid (length n) regardless of policy.
inline OperatorMatrix scale_rows(const hp::vector& c, const OperatorMatrix& a) {
  if (static_cast<Index>(c.size()) != a.grid().n)
    throw std::invalid_argument("scale_rows: coefficient length must be n");
  const Index off = a.node_offset();
  return detail::map_rows(a, [&](Index i, Index, hp::complex w) {
    return c[static_cast<std::size_t>(i + off)] * w;
  });
}
inline OperatorMatrix scale_rows(const Eigen::VectorXcd& c, const OperatorMatrix& a) {
  return scale_rows(hp::from(c), a);
}

/// a * diag(c), with c given on the full grid.
inline OperatorMatrix scale_columns(const OperatorMatrix& a, const hp::vector& c) {
  if (static_cast<Index>(c.size()) != a.grid().n)
    throw std::invalid_argument("scale_columns: coefficient length must be n");
  const Index off = a.node_offset();
  return detail::map_rows(a, [&](Index, Index j, hp::complex w) {
    return w * c[static_cast<std::size_t>(j + off)];
  });
}
inline OperatorMatrix scale_columns(const OperatorMatrix& a, const Eigen::VectorXcd& c) {
  return scale_columns(a, hp::from(c));
}

/// Entrywise complex conjugate.
inline OperatorMatrix conjugate(const OperatorMatrix& a) {
  return detail::map_rows(a, [](Index, Index, hp::complex w) { return hp::conj(w); });
}

/// Diagonal operator diag(c) under the given boundary policy.
inline OperatorMatrix diagonal(const Grid& grid, const hp::vector& c,
                               BoundaryPolicy boundary = BoundaryPolicy::one_sided) {
  if (static_cast<Index>(c.size()) != grid.n) throw std::invalid_argument("diagonal: coefficient length must be n");
  const Index off = boundary == BoundaryPolicy::one_sided ? 0 : 1;
  const Index m = boundary == BoundaryPolicy::one_sided ? grid.n : grid.n - 2;
  std::vector<OperatorMatrix::Row> rows(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) rows[static_cast<std::size_t>(i)] = {i, {c[static_cast<std::size_t>(i + off)]}};
  return {grid, std::move(rows), 0, {0, m}, boundary};
}
inline OperatorMatrix diagonal(const Grid& grid, const Eigen::VectorXcd& c,
                               BoundaryPolicy boundary = BoundaryPolicy::one_sided) {
  return diagonal(grid, hp::from(c), boundary);
}

/// Writes the dense binary layout: uint64 n, then n*n entries row-major, each
/// entry as two IEEE-754 float64 values (re, im); everything little-endian.
inline void write_binary(const OperatorMatrix& op, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "binary export assumes little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(op.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (Index i = 0; i < op.size(); ++i)
    for (Index j = 0; j < op.size(); ++j) {
      const cplx e = op(i, j);
      const double re = e.real(), im = e.imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

inline DenseMatrix read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  DenseMatrix m(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      in.read(reinterpret_cast<char*>(&im), sizeof im);
      m(i, j) = {re, im};
    }
  if (!in) throw Error(ErrorKind::io, "truncated matrix file " + path);
  return m;
}

}  // namespace pdmph
