#pragma once

// Truncated Taylor jets: a value together with its first N derivatives at a
// point. Arithmetic propagates derivatives exactly (Leibniz / Faa di Bruno),
// which lets analytic profiles and generating functions deliver closed-form
// derivatives without finite-difference noise. The scalar is double or
// binary128.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

#include "pdmph/extended.hpp"

namespace pdmph {

namespace scalar {
using std::cosh;
using std::exp;
using std::sinh;
using std::sqrt;
inline hp::real exp(hp::real x) { return expq(x); }
inline hp::real cosh(hp::real x) { return coshq(x); }
inline hp::real sinh(hp::real x) { return sinhq(x); }
inline hp::real sqrt(hp::real x) { return sqrtq(x); }
}  // namespace scalar

template <int N, class T = double>
struct Jet {
  static_assert(N >= 0 && N <= 6);
  using scalar_type = T;
  std::array<T, N + 1> d{};  // d[k] = k-th derivative

  static constexpr Jet constant(T c) {
    Jet j;
    j.d[0] = c;
    return j;
  }
  /// The identity map t -> t evaluated at t = x.
  static constexpr Jet variable(T x) {
    Jet j;
    j.d[0] = x;
    if constexpr (N >= 1) j.d[1] = 1;
    return j;
  }

  T value() const { return d[0]; }
  T operator[](std::size_t k) const { return d[k]; }
};

template <int N>
using QJet = Jet<N, hp::real>;

template <class T>
using same_t = std::type_identity_t<T>;

namespace detail {
inline constexpr double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace detail

/// Derivative of a jet: shifts coefficients down one order.
template <int N, class T>
Jet<N - 1, T> derivative(const Jet<N, T>& a) {
  Jet<N - 1, T> r;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k + 1];
  return r;
}

/// Drops the highest orders.
template <int M, int N, class T>
Jet<M, T> truncate(const Jet<N, T>& a) {
  static_assert(M <= N);
  Jet<M, T> r;
  for (int k = 0; k <= M; ++k) r.d[k] = a.d[k];
  return r;
}

/// Changes the scalar type.
template <class S, int N, class T>
Jet<N, S> convert(const Jet<N, T>& a) {
  Jet<N, S> r;
  for (int k = 0; k <= N; ++k) r.d[k] = static_cast<S>(a.d[k]);
  return r;
}

template <int N, class T>
Jet<N, T> operator+(const Jet<N, T>& a, const Jet<N, T>& b) {
  Jet<N, T> r;
  for (int k = 0; k <= N; ++k) r.d[k] = a.d[k] + b.d[k];
  return r;
}
template <int N, class T>
Jet<N, T> operator-(const Jet<N, T>& a, const Jet<N, T>& b) {
  Jet<N, T> r;
  for (int k = 0; k <= N; ++k) r.d[k] = a.d[k] - b.d[k];
  return r;
}
template <int N, class T>
Jet<N, T> operator-(const Jet<N, T>& a) {
  Jet<N, T> r;
  for (int k = 0; k <= N; ++k) r.d[k] = -a.d[k];
  return r;
}
template <int N, class T>
Jet<N, T> operator*(same_t<T> s, const Jet<N, T>& a) {
  Jet<N, T> r;
  for (int k = 0; k <= N; ++k) r.d[k] = s * a.d[k];
  return r;
}
template <int N, class T>
Jet<N, T> operator*(const Jet<N, T>& a, same_t<T> s) {
  return s * a;
}
template <int N, class T>
Jet<N, T> operator+(const Jet<N, T>& a, same_t<T> s) {
  Jet<N, T> r = a;
  r.d[0] += s;
  return r;
}
template <int N, class T>
Jet<N, T> operator+(same_t<T> s, const Jet<N, T>& a) {
  return a + s;
}
template <int N, class T>
Jet<N, T> operator-(const Jet<N, T>& a, same_t<T> s) {
  return a + (-s);
}
template <int N, class T>
Jet<N, T> operator-(same_t<T> s, const Jet<N, T>& a) {
  return (-a) + s;
}

template <int N, class T>
Jet<N, T> operator*(const Jet<N, T>& a, const Jet<N, T>& b) {
  Jet<N, T> r;
  for (int k = 0; k <= N; ++k) {
    T s = 0;
    for (int j = 0; j <= k; ++j) s += static_cast<T>(detail::binomial(k, j)) * a.d[j] * b.d[k - j];
    r.d[k] = s;
  }
  return r;
}

template <int N, class T>
Jet<N, T> operator/(const Jet<N, T>& a, const Jet<N, T>& b) {
  Jet<N, T> q;
  for (int k = 0; k <= N; ++k) {
    T s = a.d[k];
    for (int j = 1; j <= k; ++j) s -= static_cast<T>(detail::binomial(k, j)) * b.d[j] * q.d[k - j];
    q.d[k] = s / b.d[0];
  }
  return q;
}
template <int N, class T>
Jet<N, T> operator/(same_t<T> s, const Jet<N, T>& b) {
  return Jet<N, T>::constant(s) / b;
}
template <int N, class T>
Jet<N, T> operator/(const Jet<N, T>& a, same_t<T> s) {
  return (T(1) / s) * a;
}

/// h(x) = F(u(x)) given F and its derivatives F^(k) at u(x) in `fd`.
template <int N, class T>
Jet<N, T> compose(const Jet<N, T>& u, const std::array<T, N + 1>& fd) {
  static_assert(N <= 4, "composition implemented up to fourth order");
  Jet<N, T> h;
  h.d[0] = fd[0];
  const T u1 = N >= 1 ? u.d[std::min(1, N)] : T(0);
  const T u2 = N >= 2 ? u.d[std::min(2, N)] : T(0);
  const T u3 = N >= 3 ? u.d[std::min(3, N)] : T(0);
  const T u4 = N >= 4 ? u.d[std::min(4, N)] : T(0);
  if constexpr (N >= 1) h.d[1] = fd[1] * u1;
  if constexpr (N >= 2) h.d[2] = fd[2] * u1 * u1 + fd[1] * u2;
  if constexpr (N >= 3) h.d[3] = fd[3] * u1 * u1 * u1 + 3 * fd[2] * u1 * u2 + fd[1] * u3;
  if constexpr (N >= 4)
    h.d[4] = fd[4] * u1 * u1 * u1 * u1 + 6 * fd[3] * u1 * u1 * u2 +
             fd[2] * (3 * u2 * u2 + 4 * u1 * u3) + fd[1] * u4;
  return h;
}

template <int N, class T>
Jet<N, T> exp(const Jet<N, T>& u) {
  std::array<T, N + 1> fd;
  fd.fill(scalar::exp(u.d[0]));
  return compose(u, fd);
}

template <int N, class T>
Jet<N, T> cosh(const Jet<N, T>& u) {
  std::array<T, N + 1> fd;
  const T c = scalar::cosh(u.d[0]), s = scalar::sinh(u.d[0]);
  for (int k = 0; k <= N; ++k) fd[k] = (k % 2 == 0) ? c : s;
  return compose(u, fd);
}

template <int N, class T>
Jet<N, T> sinh(const Jet<N, T>& u) {
  std::array<T, N + 1> fd;
  const T c = scalar::cosh(u.d[0]), s = scalar::sinh(u.d[0]);
  for (int k = 0; k <= N; ++k) fd[k] = (k % 2 == 0) ? s : c;
  return compose(u, fd);
}

template <int N, class T>
Jet<N, T> sech(const Jet<N, T>& u) {
  return T(1) / cosh(u);
}

template <int N, class T>
Jet<N, T> cosech(const Jet<N, T>& u) {
  return T(1) / sinh(u);
}

template <int N, class T>
Jet<N, T> sqrt(const Jet<N, T>& u) {
  std::array<T, N + 1> fd;
  const T x = u.d[0];
  T c = scalar::sqrt(x);
  // d^k/dx^k x^(1/2) = (1/2)(1/2 - 1)...(1/2 - k + 1) x^(1/2 - k)
  for (int k = 0; k <= N; ++k) {
    fd[k] = c;
    c *= (T(0.5) - k) / x;
  }
  return compose(u, fd);
}

}  // namespace pdmph
