#pragma once

#include <tuple>
#include <vector>

#include "pdmph/calculus.hpp"
#include "pdmph/extended.hpp"
#include "pdmph/grid.hpp"
#include "pdmph/jet.hpp"

namespace pdmph {

/// A real function sampled on a grid together with derivatives up to order N
/// at every node. Derivatives are either closed-form (analytic) or obtained by
/// fourth-order finite differences of the samples.
template <int N, class T = double>
struct JetField {
  using scalar_type = T;
  Grid grid;
  std::vector<Jet<N, T>> at;
  bool analytic = true;

  Index size() const { return static_cast<Index>(at.size()); }
  const Jet<N, T>& operator[](Index i) const { return at[static_cast<std::size_t>(i)]; }

  /// k-th derivative rounded to double.
  Eigen::VectorXd derivative(int k) const {
    Eigen::VectorXd v(grid.n);
    for (Index i = 0; i < grid.n; ++i)
      v[i] = static_cast<double>(at[static_cast<std::size_t>(i)].d[static_cast<std::size_t>(k)]);
    return v;
  }
  /// k-th derivative in the native scalar.
  std::vector<T> column(int k) const {
    std::vector<T> v(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) v[i] = at[i].d[static_cast<std::size_t>(k)];
    return v;
  }
  Eigen::VectorXd values() const { return derivative(0); }
  GridFunction function(int k = 0) const { return GridFunction::real(grid, derivative(k)); }

  template <class F>
  auto map(F&& fn) const {
    using J = decltype(fn(at[0]));
    JetField<static_cast<int>(std::tuple_size_v<decltype(J::d)>) - 1, typename J::scalar_type> out;
    out.grid = grid;
    out.analytic = analytic;
    out.at.reserve(at.size());
    for (const auto& j : at) out.at.push_back(fn(j));
    return out;
  }

  template <int M>
  JetField<M, T> truncated() const {
    return map([](const Jet<N, T>& j) { return truncate<M>(j); });
  }

  template <class S>
  JetField<N, S> as() const {
    return map([](const Jet<N, T>& j) { return convert<S>(j); });
  }
};

template <int N>
using QJetField = JetField<N, hp::real>;

/// Pointwise combination of two fields on the same grid.
template <int N, int M, class T, class S, class F>
auto zip(const JetField<N, T>& a, const JetField<M, S>& b, F&& fn) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("zip: fields on different grids");
  using J = decltype(fn(a.at[0], b.at[0]));
  JetField<static_cast<int>(std::tuple_size_v<decltype(J::d)>) - 1, typename J::scalar_type> out;
  out.grid = a.grid;
  out.analytic = a.analytic && b.analytic;
  out.at.reserve(a.at.size());
  for (std::size_t i = 0; i < a.at.size(); ++i) out.at.push_back(fn(a.at[i], b.at[i]));
  return out;
}

template <int N, class T = double, class F>
JetField<N, T> sample_jet(const Grid& grid, F&& fn) {
  JetField<N, T> out;
  out.grid = grid;
  out.analytic = true;
  out.at.reserve(static_cast<std::size_t>(grid.n));
  for (Index i = 0; i < grid.n; ++i) out.at.push_back(fn(Jet<N, T>::variable(grid.node<T>(i))));
  return out;
}

/// Jets from samples only: derivatives by repeated fourth-order differencing
/// (d1 = D1 v, d2 = D2 v, d3 = D1 D2 v, d4 = D2 D2 v), carried out in the
/// field's scalar.
template <int N, class T = double>
JetField<N, T> jet_from_samples(const Grid& grid, const std::vector<T>& v) {
  static_assert(N <= 4);
  std::array<std::vector<T>, 5> d;
  d[0] = v;
  if constexpr (N >= 1) d[1] = differentiate(grid, d[0], 1);
  if constexpr (N >= 2) d[2] = differentiate(grid, d[0], 2);
  if constexpr (N >= 3) d[3] = differentiate(grid, d[2], 1);
  if constexpr (N >= 4) d[4] = differentiate(grid, d[2], 2);
  JetField<N, T> out;
  out.grid = grid;
  out.analytic = false;
  out.at.resize(static_cast<std::size_t>(grid.n));
  for (std::size_t i = 0; i < out.at.size(); ++i)
    for (std::size_t k = 0; k <= static_cast<std::size_t>(N); ++k) out.at[i].d[k] = d[k][i];
  return out;
}

template <int N, class T = double>
JetField<N, T> jet_from_samples(const Grid& grid, const Eigen::VectorXd& v) {
  std::vector<T> s(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) s[static_cast<std::size_t>(i)] = static_cast<T>(v[i]);
  return jet_from_samples<N, T>(grid, s);
}

}  // namespace pdmph
