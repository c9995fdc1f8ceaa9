#pragma once

// binary128 scalars. Stencil weights, operator entries and reference states
// are carried in quad precision and rounded to double only on output.

#include <quadmath.h>

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <vector>

namespace pdmph::hp {

using real = __float128;

struct complex {
  real re = 0;
  real im = 0;

  complex() = default;
  complex(real r, real i = 0) : re(r), im(i) {}
  complex(double r) : re(r), im(0) {}
  complex(std::complex<double> z) : re(z.real()), im(z.imag()) {}

  std::complex<double> to_cplx() const {
    return {static_cast<double>(re), static_cast<double>(im)};
  }
  bool is_zero() const { return re == 0 && im == 0; }
};

inline complex operator+(complex a, complex b) { return {a.re + b.re, a.im + b.im}; }
inline complex operator-(complex a, complex b) { return {a.re - b.re, a.im - b.im}; }
inline complex operator-(complex a) { return {-a.re, -a.im}; }
inline complex operator*(complex a, complex b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline complex operator*(real s, complex a) { return {s * a.re, s * a.im}; }
inline complex operator/(complex a, complex b) {
  const real d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline complex& operator+=(complex& a, complex b) { return a = a + b; }
inline complex conj(complex a) { return {a.re, -a.im}; }
inline double abs(complex a) {
  return static_cast<double>(sqrtq(a.re * a.re + a.im * a.im));
}

/// e^{z}
inline complex exp(complex z) {
  const real m = expq(z.re);
  return {m * cosq(z.im), m * sinq(z.im)};
}
/// e^{i theta}
inline complex unit(real theta) { return {cosq(theta), sinq(theta)}; }

using vector = std::vector<complex>;
using rvector = std::vector<real>;

inline vector from(const Eigen::VectorXcd& v) {
  vector r(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) r[static_cast<std::size_t>(i)] = complex(v[i]);
  return r;
}

inline rvector from_real(const Eigen::VectorXd& v) {
  rvector r(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) r[static_cast<std::size_t>(i)] = v[i];
  return r;
}

inline Eigen::VectorXcd to_double(const vector& v) {
  Eigen::VectorXcd r(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<Eigen::Index>(i)] = v[i].to_cplx();
  return r;
}

inline vector subtract(const vector& a, const vector& b) {
  vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline vector add(const vector& a, const vector& b) {
  vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline vector scale(complex s, const vector& a) {
  vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

inline vector conj(const vector& a) {
  vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = conj(a[i]);
  return r;
}

inline vector complexify(const rvector& a) {
  vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = complex(a[i]);
  return r;
}

/// Pointwise product.
inline vector multiply(const vector& a, const vector& b) {
  vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
  return r;
}

/// max_i |v_i| over [begin, end).
inline double max_abs(const vector& v, std::size_t begin, std::size_t end) {
  double m = 0.0;
  for (std::size_t i = begin; i < end && i < v.size(); ++i) m = std::max(m, abs(v[i]));
  return m;
}

}  // namespace pdmph::hp
