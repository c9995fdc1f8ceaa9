#pragma once

// Dense non-Hermitian eigendecomposition (LAPACK zgeev) with an explicit
// backward-error check on every returned pair.

#include <lapacke.h>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "pdmph/errors.hpp"
#include "pdmph/operator_matrix.hpp"

namespace pdmph {

struct EigenDecomposition {
  Eigen::VectorXcd values;   // sorted by (Re, Im)
  Eigen::MatrixXcd vectors;  // column k belongs to values[k]; unit 2-norm; empty if not requested
  double max_backward_error = 0.0;  // max_k |H v - E v| / (|H|_F |v|)
};

inline EigenDecomposition eigendecompose(const OperatorMatrix& H, bool want_vectors = true) {
  const Index n = H.size();
  Eigen::MatrixXcd a = H.dense();  // column-major copy, overwritten by LAPACK
  const double hnorm = a.norm();
  Eigen::VectorXcd w(n);
  Eigen::MatrixXcd vr;
  if (want_vectors) vr.resize(n, n);
  const lapack_int ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', ln,
      reinterpret_cast<lapack_complex_double*>(a.data()), ln,
      reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1,
      want_vectors ? reinterpret_cast<lapack_complex_double*>(vr.data()) : nullptr,
      want_vectors ? ln : 1);
  if (info != 0)
    throw Error(ErrorKind::eigensolver_failure, "zgeev returned info = " + std::to_string(info));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    if (w[i].real() != w[j].real()) return w[i].real() < w[j].real();
    return w[i].imag() < w[j].imag();
  });

  EigenDecomposition out;
  out.values.resize(n);
  for (Index k = 0; k < n; ++k) out.values[k] = w[order[static_cast<std::size_t>(k)]];
  if (!want_vectors) return out;

  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    Eigen::VectorXcd v = vr.col(order[static_cast<std::size_t>(k)]);
    // fix the phase so the largest component is real positive
    Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v[imax]) / std::abs(v[imax]);
    v /= v.norm();
    out.vectors.col(k) = v;
    const double be = (H.apply(v) - out.values[k] * v).norm() / (hnorm * v.norm());
    out.max_backward_error = std::max(out.max_backward_error, be);
  }
  if (!(out.max_backward_error <= 1e-10))
    throw Error(ErrorKind::eigensolver_failure,
                "backward error " + std::to_string(out.max_backward_error) + " exceeds 1e-10");
  return out;
}

enum class Pairing { real, conjugate_paired, unpaired };

inline std::string_view to_string(Pairing p) {
  switch (p) {
    case Pairing::real: return "real";
    case Pairing::conjugate_paired: return "conjugate-paired";
    case Pairing::unpaired: return "unpaired";
  }
  return "?";
}

/// Classifies each eigenvalue as real (|Im E| <= tol), paired with another
/// eigenvalue close to its conjugate, or unpaired.
inline std::vector<Pairing> classify_pairing(const Eigen::VectorXcd& E, double tol) {
  std::vector<Pairing> out(static_cast<std::size_t>(E.size()), Pairing::unpaired);
  for (Index i = 0; i < E.size(); ++i) {
    if (std::abs(E[i].imag()) <= tol) {
      out[static_cast<std::size_t>(i)] = Pairing::real;
      continue;
    }
    for (Index j = 0; j < E.size(); ++j)
      if (j != i && std::abs(E[j].imag()) > tol && std::abs(E[j] - std::conj(E[i])) <= tol) {
        out[static_cast<std::size_t>(i)] = Pairing::conjugate_paired;
        break;
      }
  }
  return out;
}

}  // namespace pdmph
