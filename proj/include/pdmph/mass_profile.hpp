#pragma once

// Position-dependent mass profiles m(x), with U = 1/sqrt(2m) and the mass
// integral mu(x) = int^x dy / U(y).

#include <cmath>
#include <memory>
#include <sstream>
#include <string>

#include "pdmph/calculus.hpp"
#include "pdmph/errors.hpp"
#include "pdmph/field.hpp"
#include "pdmph/grid.hpp"
#include "pdmph/interp.hpp"

namespace pdmph {

enum class MassKind { constant, rational, table };

inline std::string_view to_string(MassKind k) {
  switch (k) {
    case MassKind::constant: return "constant";
    case MassKind::rational: return "rational";
    case MassKind::table: return "table";
  }
  return "?";
}

struct MassProfile {
  MassKind kind = MassKind::constant;
  double m0 = 0.5;    // constant: m = m0
  double beta = 1.0;  // rational: m = beta / (2 (1 + x^2)^2)
  std::shared_ptr<const TwoColumnTable> table;
  std::string source;  // table file, informational

  static MassProfile constant(double m0 = 0.5) {
    MassProfile p;
    p.kind = MassKind::constant;
    p.m0 = m0;
    return p;
  }
  static MassProfile rational(double beta = 1.0) {
    MassProfile p;
    p.kind = MassKind::rational;
    p.beta = beta;
    return p;
  }
  static MassProfile from_table(TwoColumnTable t, std::string source = {}) {
    MassProfile p;
    p.kind = MassKind::table;
    p.table = std::make_shared<const TwoColumnTable>(std::move(t));
    p.source = std::move(source);
    return p;
  }
  static MassProfile from_csv(const std::string& path) {
    return from_table(read_two_column_csv(path), path);
  }

  /// m(-x) = m(x) by construction.
  bool even() const { return kind != MassKind::table; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case MassKind::constant: os << "constant:m0=" << m0; break;
      case MassKind::rational: os << "rational:beta=" << beta; break;
      case MassKind::table: os << "table:" << source; break;
    }
    return os.str();
  }
};

/// Sampled profile: m, U with derivatives through fourth order, and mu with
/// derivatives through fifth order (mu' = 1/U). The binary128 fields are the
/// primary ones; U and mu are their roundings.
struct ProfileBundle {
  Grid grid;
  MassKind kind = MassKind::constant;
  Eigen::VectorXd m;
  JetField<4> U;
  JetField<5> mu;
  QJetField<4> U_quad;
  QJetField<5> mu_quad;
  /// Node where mu vanishes; -1 when the closed form fixes mu(0) = 0.
  Index mu_anchor = -1;
  /// Default anchor for cumulative integrals: node nearest x = 0, or xmin.
  Index quadrature_anchor = 0;
  std::string anchor_convention;

  GridFunction m_fn() const { return GridFunction::real(grid, m); }
  GridFunction U_fn(int k = 0) const { return U.function(k); }
  GridFunction mu_fn(int k = 0) const { return mu.function(k); }
};

inline Index default_anchor(const Grid& grid) {
  return (grid.xmin <= 0.0 && grid.xmax >= 0.0) ? grid.nearest(0.0) : 0;
}

namespace detail {

inline QJetField<5> mu_jets(const QJetField<4>& U, const hp::rvector& mu) {
  QJetField<5> out;
  out.grid = U.grid;
  out.analytic = U.analytic;
  out.at.resize(U.at.size());
  for (std::size_t i = 0; i < U.at.size(); ++i) {
    const QJet<4> inv = hp::real(1) / U.at[i];
    out.at[i].d[0] = mu[i];
    for (int k = 0; k <= 4; ++k) out.at[i].d[static_cast<std::size_t>(k + 1)] = inv.d[static_cast<std::size_t>(k)];
  }
  return out;
}

inline void require_positive(const Grid& grid, const Eigen::VectorXd& m) {
  for (Index i = 0; i < grid.n; ++i)
    if (!(m[i] > 0.0) || !std::isfinite(m[i])) {
      std::ostringstream os;
      os << "m(" << grid.x(i) << ") = " << m[i] << " is not positive";
      throw Error(ErrorKind::nonpositive_mass, os.str());
    }
}

}  // namespace detail

inline ProfileBundle eval_profile(const MassProfile& p, const Grid& grid) {
  ProfileBundle b;
  b.grid = grid;
  b.kind = p.kind;
  b.quadrature_anchor = default_anchor(grid);
  const auto n = static_cast<std::size_t>(grid.n);
  hp::rvector mu(n);
  switch (p.kind) {
    case MassKind::constant: {
      if (!(p.m0 > 0.0)) throw Error(ErrorKind::nonpositive_mass, "constant mass must be positive");
      const hp::real u = 1 / sqrtq(2 * static_cast<hp::real>(p.m0));
      b.m = Eigen::VectorXd::Constant(grid.n, p.m0);
      b.U_quad = sample_jet<4, hp::real>(grid, [&](const QJet<4>&) { return QJet<4>::constant(u); });
      for (std::size_t i = 0; i < n; ++i) mu[i] = grid.xq(static_cast<Index>(i)) / u;
      b.anchor_convention = "closed form, mu(0) = 0";
      break;
    }
    case MassKind::rational: {
      if (!(p.beta > 0.0)) throw Error(ErrorKind::nonpositive_mass, "rational profile needs beta > 0");
      const hp::real s = sqrtq(static_cast<hp::real>(p.beta));
      b.m.resize(grid.n);
      for (Index i = 0; i < grid.n; ++i) {
        const double q = 1.0 + grid.x(i) * grid.x(i);
        b.m[i] = p.beta / (2.0 * q * q);
      }
      b.U_quad = sample_jet<4, hp::real>(grid, [&](const QJet<4>& x) { return (hp::real(1) + x * x) / s; });
      for (std::size_t i = 0; i < n; ++i)
        mu[i] = s * atanq(grid.xq(static_cast<Index>(i)));
      b.anchor_convention = "closed form, mu(0) = 0";
      break;
    }
    case MassKind::table: {
      if (!p.table) throw Error(ErrorKind::config, "table profile without samples");
      const CubicSpline spline(p.table->x, p.table->y);
      b.m.resize(grid.n);
      for (Index i = 0; i < grid.n; ++i) b.m[i] = spline(grid.x(i));
      detail::require_positive(grid, b.m);
      hp::rvector u(n), inv(n);
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = 1 / sqrtq(2 * static_cast<hp::real>(b.m[static_cast<Index>(i)]));
        inv[i] = 1 / u[i];
      }
      b.U_quad = jet_from_samples<4, hp::real>(grid, u);
      b.mu_anchor = b.quadrature_anchor;
      mu = cumulative_integral(grid, inv, b.mu_anchor);
      b.anchor_convention = !(grid.xmin <= 0.0 && grid.xmax >= 0.0)
                                ? "quadrature, mu = 0 at xmin"
                                : "quadrature, mu = 0 at the node nearest x = 0";
      break;
    }
  }
  detail::require_positive(grid, b.m);
  b.mu_quad = detail::mu_jets(b.U_quad, mu);
  b.U = b.U_quad.as<double>();
  b.mu = b.mu_quad.as<double>();
  return b;
}

}  // namespace pdmph
