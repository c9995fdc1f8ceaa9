#pragma once

// Matrix realizations of the first-order factors D, D-dagger, the gauged
// factor D-tilde, the metric eta-tilde, the Hamiltonian H' and its adjoint,
// parity and the parity-based metric. Coefficient functions are carried in
// binary128 like the stencil weights.

#include <cmath>

#include "pdmph/calculus.hpp"
#include "pdmph/errors.hpp"
#include "pdmph/extended.hpp"
#include "pdmph/operator_matrix.hpp"
#include "pdmph/pipeline.hpp"

namespace pdmph {

/// Coefficient functions of the expanded second-order operators, on the full
/// grid.
///   eta-tilde = -U^2 d^2 - 2K d + L
///   H'        = -U^2 d^2 - 2M1 d + N1 + V
///   H'^dagger = -U^2 d^2 - 2M2 d + N2 + V*
struct CoefficientSet {
  hp::vector K, L, M1, N1, M2, N2;
};

inline CoefficientSet coefficients(const QJetField<4>& Uf, const QJetField<3>& f,
                                   const QJetField<4>& g, const QJetField<2>& a) {
  const auto n = Uf.at.size();
  CoefficientSet c;
  for (auto* v : {&c.K, &c.L, &c.M1, &c.N1, &c.M2, &c.N2}) v->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const hp::real U = Uf.at[i].d[0], U1 = Uf.at[i].d[1];
    const hp::real F = f.at[i].d[0], F1 = f.at[i].d[1];
    const hp::real q = g.at[i].d[0] - a.at[i].d[0], q1 = g.at[i].d[1] - a.at[i].d[1];
    const hp::real A = a.at[i].d[0], A1 = a.at[i].d[1];
    c.K[i] = {U * U1, U * q};
    c.L[i] = {F * F + q * q - (U1 * F + U * F1), -(U1 * q + U * q1)};
    c.M1[i] = {U * U1, -U * A};
    c.N1[i] = {A * A, U1 * A + U * A1};
    // A is real, so A* = A in the adjoint coefficients
    c.M2[i] = {U * U1, -U * A};
    c.N2[i] = {A * A, U1 * A + U * A1};
  }
  return c;
}

inline CoefficientSet coefficients(const DressedSystem& s) {
  return coefficients(s.profile.U_quad, s.f_quad, s.g_quad, s.a_quad);
}

/// D = U d + phi.
inline OperatorMatrix build_D(const Grid& grid, const hp::rvector& U, const hp::vector& phi,
                              BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return scale_rows(hp::complexify(U), diff_matrix(grid, 1, bp)) + diagonal(grid, phi, bp);
}

/// D-dagger = -d U + phi*, with d acting after multiplication by U.
inline OperatorMatrix build_D_dagger(const Grid& grid, const hp::rvector& U, const hp::vector& phi,
                                     BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return hp::complex(-1.0) * scale_columns(diff_matrix(grid, 1, bp), hp::complexify(U)) +
         diagonal(grid, hp::conj(phi), bp);
}

/// D-dagger in expanded form -U d - U' + phi*.
inline OperatorMatrix build_D_dagger_expanded(const Grid& grid, const hp::rvector& U,
                                              const hp::rvector& U1, const hp::vector& phi,
                                              BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return hp::complex(-1.0) * scale_rows(hp::complexify(U), diff_matrix(grid, 1, bp)) +
         diagonal(grid, hp::subtract(hp::conj(phi), hp::complexify(U1)), bp);
}

/// D-tilde = D - iA.
inline OperatorMatrix build_D_tilde(const Grid& grid, const hp::rvector& U, const hp::vector& phi,
                                    const hp::rvector& A,
                                    BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return build_D(grid, U, phi, bp) - diagonal(grid, hp::scale({0, 1}, hp::complexify(A)), bp);
}

inline OperatorMatrix build_D_tilde_dagger(const Grid& grid, const hp::rvector& U,
                                           const hp::vector& phi, const hp::rvector& A,
                                           BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return build_D_dagger(grid, U, phi, bp) + diagonal(grid, hp::scale({0, 1}, hp::complexify(A)), bp);
}

enum class EtaMode { product, direct };

/// eta-tilde as the product D-tilde-dagger * D-tilde.
inline OperatorMatrix build_eta_tilde_product(const Grid& grid, const hp::rvector& U,
                                              const hp::vector& phi, const hp::rvector& A,
                                              BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return multiply(build_D_tilde_dagger(grid, U, phi, A, bp), build_D_tilde(grid, U, phi, A, bp));
}

namespace detail {
/// -U^2 d^2 - 2 c1 d + c0.
inline OperatorMatrix second_order(const Grid& grid, const hp::rvector& U, const hp::vector& c1,
                                   const hp::vector& c0, BoundaryPolicy bp) {
  hp::vector neg_u2(U.size());
  for (std::size_t i = 0; i < U.size(); ++i) neg_u2[i] = hp::complex(-U[i] * U[i]);
  return scale_rows(neg_u2, diff_matrix(grid, 2, bp)) +
         scale_rows(hp::scale(-2.0, c1), diff_matrix(grid, 1, bp)) + diagonal(grid, c0, bp);
}
}  // namespace detail

inline OperatorMatrix build_eta_tilde_direct(const Grid& grid, const hp::rvector& U,
                                             const CoefficientSet& c,
                                             BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return detail::second_order(grid, U, c.K, c.L, bp);
}

inline OperatorMatrix build_eta_tilde(const DressedSystem& s, EtaMode mode,
                                      BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  if (mode == EtaMode::product) return build_eta_tilde_product(s.grid(), s.U_quad(), s.phi_quad, s.A_quad, bp);
  return build_eta_tilde_direct(s.grid(), s.U_quad(), coefficients(s), bp);
}

inline OperatorMatrix build_H_prime(const Grid& grid, const hp::rvector& U, const CoefficientSet& c,
                                    const hp::vector& V,
                                    BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return detail::second_order(grid, U, c.M1, hp::add(c.N1, V), bp);
}

inline OperatorMatrix build_H_prime_dagger(const Grid& grid, const hp::rvector& U,
                                           const CoefficientSet& c, const hp::vector& V,
                                           BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  return detail::second_order(grid, U, c.M2, hp::add(c.N2, hp::conj(V)), bp);
}

/// Every operator of a dressed system under one boundary policy.
struct SystemOperators {
  BoundaryPolicy boundary = BoundaryPolicy::one_sided;
  CoefficientSet coeffs;
  OperatorMatrix D, D_dagger, D_tilde, D_tilde_dagger;
  OperatorMatrix eta_product, eta_direct;
  OperatorMatrix H, H_dagger;
};

inline SystemOperators build_operators(const DressedSystem& s,
                                       BoundaryPolicy bp = BoundaryPolicy::one_sided) {
  const Grid& grid = s.grid();
  const hp::rvector U = s.U_quad();
  SystemOperators ops;
  ops.boundary = bp;
  ops.coeffs = coefficients(s);
  ops.D = build_D(grid, U, s.phi_quad, bp);
  ops.D_dagger = build_D_dagger(grid, U, s.phi_quad, bp);
  ops.D_tilde = build_D_tilde(grid, U, s.phi_quad, s.A_quad, bp);
  ops.D_tilde_dagger = build_D_tilde_dagger(grid, U, s.phi_quad, s.A_quad, bp);
  ops.eta_product = multiply(ops.D_tilde_dagger, ops.D_tilde);
  ops.eta_direct = build_eta_tilde_direct(grid, U, ops.coeffs, bp);
  ops.H = build_H_prime(grid, U, ops.coeffs, s.V_quad, bp);
  ops.H_dagger = build_H_prime_dagger(grid, U, ops.coeffs, s.V_quad, bp);
  return ops;
}

inline void require_parity_capable(const Grid& grid) {
  if (!grid.parity_capable())
    throw Error(ErrorKind::not_parity_capable,
                "parity needs xmin = -xmax and an odd point count");
}

/// Index reversal x -> -x.
inline OperatorMatrix build_parity(const Grid& grid) {
  require_parity_capable(grid);
  std::vector<OperatorMatrix::Row> rows(static_cast<std::size_t>(grid.n));
  for (Index i = 0; i < grid.n; ++i) rows[static_cast<std::size_t>(i)] = {grid.n - 1 - i, {hp::complex(1.0)}};
  return {grid, std::move(rows), 0, {0, grid.n}};
}

/// eta = exp[2i int_0^x A/U] P.
inline OperatorMatrix build_eta_parity(const Grid& grid, const hp::rvector& A, const hp::rvector& U) {
  require_parity_capable(grid);
  const Index centre = (grid.n - 1) / 2;
  const hp::rvector theta = detail::integral_over_U(grid, A, U, centre, 2);
  hp::vector phase(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) phase[i] = hp::unit(theta[i]);
  return scale_rows(phase, build_parity(grid));
}

/// conj(diag(e^{i alpha}) H diag(e^{-i alpha})): the matrix of tau H tau^-1
/// for the antilinear tau = T e^{i alpha}.
inline OperatorMatrix tau_similarity(const OperatorMatrix& H, const hp::rvector& alpha) {
  const auto n = static_cast<std::size_t>(H.grid().n);
  hp::vector left(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    left[i] = hp::unit(alpha[i]);
    right[i] = hp::unit(-alpha[i]);
  }
  return conjugate(scale_columns(scale_rows(left, H), right));
}

}  // namespace pdmph
