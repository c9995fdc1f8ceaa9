#pragma once

// From a generating function g, a gauge function a and a constant delta to
// f, phi, the complex potential V, the effective potential and the ground
// state; plus the catalog of exactly solvable families.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "pdmph/calculus.hpp"
#include "pdmph/errors.hpp"
#include "pdmph/field.hpp"
#include "pdmph/interp.hpp"
#include "pdmph/mass_profile.hpp"

namespace pdmph {

enum class Family {
  harmonic3d,
  morse,
  scarf2,
  gen_poschl_teller,
  poschl_teller,
  constant,  // Hermitian limit, g = alpha
  custom_table,
};

struct FamilyInfo {
  Family family;
  std::string_view name;
  std::string_view g_text;
  std::string_view title;
  double xmin, xmax;  // default domain
  double alpha_min, alpha_max;
  bool needs_positive_mu;
  bool has_printed_forms;
};

inline const std::vector<FamilyInfo>& catalog() {
  static const std::vector<FamilyInfo> rows{
      {Family::harmonic3d, "harmonic3d", "alpha*mu", "3D harmonic oscillator", 0.5, 8.0, 0.0,
       std::numeric_limits<double>::infinity(), true, true},
      {Family::morse, "morse", "exp(-alpha*mu)", "Morse", -1.0, 8.0, 0.0,
       std::numeric_limits<double>::infinity(), false, true},
      {Family::scarf2, "scarf2", "sech(alpha*mu)", "Scarf II", -8.0, 8.0, 0.0,
       std::numeric_limits<double>::infinity(), false, true},
      {Family::gen_poschl_teller, "gen-poschl-teller", "cosech(alpha*mu)",
       "generalized Poschl-Teller", 0.5, 6.0, 0.0, std::numeric_limits<double>::infinity(), true,
       true},
      {Family::poschl_teller, "poschl-teller", "sech(alpha*mu)*cosech(alpha*mu)", "Poschl-Teller",
       0.5, 6.0, 0.0, std::numeric_limits<double>::infinity(), true, true},
  };
  return rows;
}

inline std::string_view to_string(Family f) {
  for (const auto& r : catalog())
    if (r.family == f) return r.name;
  if (f == Family::constant) return "constant";
  return "custom-table";
}

inline Family parse_family(std::string_view s) {
  for (const auto& r : catalog())
    if (r.name == s) return r.family;
  if (s == "constant") return Family::constant;
  if (s == "custom-table") return Family::custom_table;
  throw Error(ErrorKind::config, "unknown family '" + std::string(s) + "'");
}

inline const FamilyInfo* family_info(Family f) {
  for (const auto& r : catalog())
    if (r.family == f) return &r;
  return nullptr;
}

struct GaugeSpec {
  enum class Kind { zero, multiple_of_g, table };
  Kind kind = Kind::zero;
  double factor = 0.0;
  std::shared_ptr<const TwoColumnTable> table;
  std::string source;

  static GaugeSpec zero() { return {}; }
  static GaugeSpec multiple_of_g(double c) { return {Kind::multiple_of_g, c, nullptr, {}}; }
};

struct GeneratingSpec {
  Family family = Family::scarf2;
  double alpha = 1.0;
  double delta = 0.0;
  GaugeSpec gauge;
  std::shared_ptr<const TwoColumnTable> g_table;  // custom-table only
  std::string g_source;
};

/// g as a function of s = mu for the analytic families.
template <int N, class T>
Jet<N, T> family_g(Family family, double alpha, const Jet<N, T>& mu) {
  const Jet<N, T> s = static_cast<T>(alpha) * mu;
  switch (family) {
    case Family::harmonic3d: return s;
    case Family::morse: return exp(-s);
    case Family::scarf2: return sech(s);
    case Family::gen_poschl_teller: return cosech(s);
    case Family::poschl_teller: return sech(s) * cosech(s);
    case Family::constant: return Jet<N, T>::constant(static_cast<T>(alpha));
    case Family::custom_table: break;
  }
  throw std::logic_error("family_g: no closed form for custom-table");
}

/// Profile fields in the requested scalar.
template <class T>
const JetField<4, T>& profile_U(const ProfileBundle& b) {
  if constexpr (std::is_same_v<T, double>) return b.U;
  else return b.U_quad;
}
template <class T>
const JetField<5, T>& profile_mu(const ProfileBundle& b) {
  if constexpr (std::is_same_v<T, double>) return b.mu;
  else return b.mu_quad;
}

inline QJetField<4> sample_g(const GeneratingSpec& spec, const ProfileBundle& b) {
  if (spec.family == Family::custom_table) {
    if (!spec.g_table) throw Error(ErrorKind::config, "custom-table family needs a g table");
    const CubicSpline spline(spec.g_table->x, spec.g_table->y);
    Eigen::VectorXd v(b.grid.n);
    for (Index i = 0; i < b.grid.n; ++i) v[i] = spline(b.grid.x(i));
    return jet_from_samples<4, hp::real>(b.grid, v);
  }
  if (!(spec.alpha > 0.0) && spec.family != Family::constant)
    throw Error(ErrorKind::config, "alpha must be positive");
  const FamilyInfo* info = family_info(spec.family);
  if (info && info->needs_positive_mu) {
    for (Index i = 0; i < b.grid.n; ++i)
      if (!(b.mu[i].d[0] > 0.0))
        throw Error(ErrorKind::domain_violation,
                    std::string(info->name) + " needs mu > 0 on the whole grid; mu(" +
                        std::to_string(b.grid.x(i)) + ") = " + std::to_string(b.mu[i].d[0]));
  }
  return b.mu_quad.map(
      [&](const QJet<5>& m) { return family_g(spec.family, spec.alpha, truncate<4>(m)); });
}

template <class T>
JetField<2, T> sample_a(const GaugeSpec& gauge, const JetField<4, T>& g) {
  switch (gauge.kind) {
    case GaugeSpec::Kind::zero:
      return g.map([](const Jet<4, T>&) { return Jet<2, T>{}; });
    case GaugeSpec::Kind::multiple_of_g:
      return g.map([&](const Jet<4, T>& j) { return static_cast<T>(gauge.factor) * truncate<2>(j); });
    case GaugeSpec::Kind::table: {
      if (!gauge.table) throw Error(ErrorKind::config, "gauge table missing");
      const CubicSpline spline(gauge.table->x, gauge.table->y);
      Eigen::VectorXd v(g.grid.n);
      for (Index i = 0; i < g.grid.n; ++i) v[i] = spline(g.grid.x(i));
      return jet_from_samples<2, T>(g.grid, v);
    }
  }
  throw std::logic_error("sample_a");
}

template <class T>
void require_nonvanishing(const JetField<4, T>& g) {
  for (Index i = 0; i < g.size(); ++i)
    if (!(std::abs(static_cast<double>(g[i].d[0])) >= 1e-12))
      throw Error(ErrorKind::generating_function_zero,
                  "|g| < 1e-12 at x = " + std::to_string(g.grid.x(i)));
}

/// f = -g'/(2 mu' g) - mu''/(2 mu'^2).
template <class T>
JetField<3, T> compute_f(const JetField<4, T>& g, const ProfileBundle& b) {
  require_nonvanishing(g);
  return zip(g, profile_mu<T>(b), [](const Jet<4, T>& gj, const Jet<5, T>& m) {
    const Jet<3, T> g0 = truncate<3>(gj);
    const Jet<3, T> g1 = derivative(gj);
    const Jet<4, T> m1full = derivative(m);
    const Jet<3, T> m1 = truncate<3>(m1full);
    const Jet<3, T> m2 = derivative(m1full);
    return -(g1 / (T(2) * m1 * g0)) - m2 / (T(2) * m1 * m1);
  });
}

/// f = (U' g - U g') / (2 g).
template <class T>
JetField<3, T> compute_f_eq33(const JetField<4, T>& g, const ProfileBundle& b) {
  require_nonvanishing(g);
  return zip(g, profile_U<T>(b), [](const Jet<4, T>& gj, const Jet<4, T>& u) {
    const Jet<3, T> g0 = truncate<3>(gj);
    return (derivative(u) * g0 - truncate<3>(u) * derivative(gj)) / (T(2) * g0);
  });
}

/// V = f^2 - g^2 - (U f)' - 2i U g' + delta, evaluated in binary128.
template <class T>
hp::vector assemble_potential_quad(const JetField<3, T>& f, const JetField<4, T>& g,
                                   const ProfileBundle& b, double delta) {
  const JetField<4, T>& Uf = profile_U<T>(b);
  hp::vector v(static_cast<std::size_t>(b.grid.n));
  for (Index i = 0; i < b.grid.n; ++i) {
    const auto q = [](T t) { return static_cast<hp::real>(t); };
    const auto& F = f[i].d;
    const auto& G = g[i].d;
    const auto& U = Uf[i].d;
    const hp::real re = q(F[0]) * q(F[0]) - q(G[0]) * q(G[0]) -
                        (q(U[1]) * q(F[0]) + q(U[0]) * q(F[1])) + static_cast<hp::real>(delta);
    const hp::real im = -2 * q(U[0]) * q(G[1]);
    v[static_cast<std::size_t>(i)] = {re, im};
  }
  return v;
}

template <class T>
GridFunction assemble_potential(const JetField<3, T>& f, const JetField<4, T>& g,
                                const ProfileBundle& b, double delta) {
  return {b.grid, hp::to_double(assemble_potential_quad(f, g, b, delta))};
}

struct EffectivePotential {
  GridFunction V_eff;
  GridFunction V_mu;
};

template <class T>
EffectivePotential effective_potential(const JetField<4, T>& g, const ProfileBundle& b,
                                       double delta) {
  require_nonvanishing(g);
  const JetField<5, T>& muf = profile_mu<T>(b);
  Eigen::VectorXcd veff(b.grid.n);
  Eigen::VectorXd vmu(b.grid.n);
  for (Index i = 0; i < b.grid.n; ++i) {
    const auto q = [](T t) { return static_cast<hp::real>(t); };
    const auto& G = g[i].d;
    const auto& M = muf[i].d;
    const hp::real g0 = q(G[0]), g1 = q(G[1]), g2 = q(G[2]);
    const hp::real m1 = q(M[1]), m2 = q(M[2]), m3 = q(M[3]);
    const hp::real re = static_cast<hp::real>(delta) - g0 * g0 - g1 * g1 / (4 * g0 * g0 * m1 * m1) +
                        g2 / (2 * g0 * m1 * m1) - g1 * m2 / (2 * g0 * m1 * m1 * m1);
    veff[i] = {static_cast<double>(re), static_cast<double>(-2 * g1 / m1)};
    vmu[i] = static_cast<double>(m3 / (m1 * m1 * m1) - hp::real(1.25) * m2 * m2 / (m1 * m1 * m1 * m1));
  }
  return {{b.grid, std::move(veff)}, GridFunction::real(b.grid, vmu)};
}

struct GroundState {
  GridFunction psi;
  GridFunction xi;
  GridFunction Lambda;
  hp::vector psi_quad;  // the same states before rounding to double
  hp::vector xi_quad;
  hp::vector Lambda_quad;
};

namespace detail {
template <class T>
hp::rvector to_quad(const std::vector<T>& v) {
  hp::rvector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = static_cast<hp::real>(v[i]);
  return r;
}

/// scale * int_anchor^x c/U in binary128.
inline hp::rvector integral_over_U(const Grid& grid, const hp::rvector& c, const hp::rvector& u,
                                   Index anchor, hp::real scale = 1) {
  hp::rvector q(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) q[i] = scale * c[i] / u[i];
  return cumulative_integral(grid, q, anchor);
}
inline hp::rvector integral_over_U(const Grid& grid, const Eigen::VectorXd& c, const Eigen::VectorXd& u,
                                   Index anchor, hp::real scale = 1) {
  return integral_over_U(grid, hp::from_real(c), hp::from_real(u), anchor, scale);
}

inline GridFunction round_to_double(const Grid& grid, const hp::vector& v) {
  return {grid, hp::to_double(v)};
}
}  // namespace detail

/// psi = exp[-int f/U - i int g/U], Lambda = exp[i int a/U], xi = Lambda psi;
/// all integrals vanish at the anchor node, so psi(anchor) = 1. The integrals
/// and exponentials are carried in binary128.
template <class T>
GroundState ground_state(const JetField<3, T>& f, const JetField<4, T>& g, const JetField<2, T>& a,
                         const ProfileBundle& b, Index anchor) {
  const Grid& grid = b.grid;
  const hp::rvector u = detail::to_quad(profile_U<T>(b).column(0));
  const hp::rvector F = detail::integral_over_U(grid, detail::to_quad(f.column(0)), u, anchor);
  const hp::rvector G = detail::integral_over_U(grid, detail::to_quad(g.column(0)), u, anchor);
  const hp::rvector Aint = detail::integral_over_U(grid, detail::to_quad(a.column(0)), u, anchor);
  const auto n = static_cast<std::size_t>(grid.n);
  hp::vector psi(n), lam(n), xi(n);
  for (std::size_t i = 0; i < n; ++i) {
    psi[i] = hp::exp(hp::complex(-F[i], -G[i]));
    lam[i] = hp::unit(Aint[i]);
    xi[i] = lam[i] * psi[i];
  }
  GroundState out{detail::round_to_double(grid, psi), detail::round_to_double(grid, xi),
                  detail::round_to_double(grid, lam), std::move(psi), std::move(xi), std::move(lam)};
  return out;
}

/// Closed forms as printed in the catalog, as functions of mu.
namespace printed {

inline std::optional<cplx> effective_potential(Family family, double alpha, double mu) {
  const double s = alpha * mu, a2 = alpha * alpha;
  const cplx I(0.0, 1.0);
  switch (family) {
    case Family::harmonic3d: return -a2 * mu * mu - 1.0 / (4.0 * mu * mu) - 2.0 * I * alpha;
    case Family::morse:
      return -std::exp(-2.0 * s) + 2.0 * I * alpha * std::exp(-s) + a2 / 4.0;
    case Family::scarf2: {
      const double sh = 1.0 / std::cosh(s);
      return -(1.0 + 0.75 * a2) * sh * sh + 2.0 * I * alpha * sh * std::tanh(s) + a2 / 4.0;
    }
    case Family::gen_poschl_teller: {
      const double cs = 1.0 / std::sinh(s);
      return -(1.0 - 0.75 * a2) * cs * cs + 2.0 * I * alpha * cs / std::tanh(s) + a2 / 4.0;
    }
    case Family::poschl_teller: {
      const double cs = 1.0 / std::sinh(s), sh = 1.0 / std::cosh(s);
      return (0.75 * a2 - 1.0 + 2.0 * I * alpha) * cs * cs -
             (0.75 * a2 - 1.0 - 2.0 * I * alpha) * sh * sh + a2;
    }
    default: return std::nullopt;
  }
}

/// Printed f; the generalized Poschl-Teller entry carries coefficient 1 on
/// the mu''/mu'^2 term as printed.
inline std::optional<double> f(Family family, double alpha, const Jet<5>& mu) {
  const double s = alpha * mu.d[0];
  const double corr = mu.d[2] / (2.0 * mu.d[1] * mu.d[1]);
  switch (family) {
    case Family::harmonic3d: return -1.0 / (2.0 * mu.d[0]) - corr;
    case Family::morse: return alpha / 2.0 - corr;
    case Family::scarf2: return alpha / 2.0 * std::tanh(s) - corr;
    case Family::gen_poschl_teller: return alpha / 2.0 / std::tanh(s) - 2.0 * corr;
    case Family::poschl_teller: return alpha / std::tanh(2.0 * s) - corr;
    default: return std::nullopt;
  }
}

/// Printed ground-state wavefunction (unnormalized).
inline std::optional<cplx> ground_state(Family family, double alpha, double mu, double U) {
  const double s = alpha * mu;
  const cplx I(0.0, 1.0);
  switch (family) {
    case Family::harmonic3d: return std::sqrt(mu) / U * std::exp(-I * alpha / 2.0 * mu * mu);
    case Family::morse:
      return 1.0 / U * std::exp(-s / 2.0) * std::exp(2.0 * I / alpha * std::exp(-s));
    case Family::scarf2:
      return 1.0 / (U * std::sqrt(std::cosh(s))) *
             std::exp(-I / alpha * std::atan(std::tanh(s / 2.0)));
    case Family::gen_poschl_teller:
      return 1.0 / (U * std::sqrt(std::sinh(s))) *
             std::exp(-2.0 * I / alpha * std::log(std::tanh(s / 2.0)));
    case Family::poschl_teller:
      return 1.0 / (U * std::sqrt(std::sinh(2.0 * s))) *
             std::exp(-2.0 * I / alpha * std::log(std::tanh(s)));
    default: return std::nullopt;
  }
}

}  // namespace printed

/// Every derived field of one configuration on one grid. The binary128
/// members are the primary values; the double members are their roundings.
struct DressedSystem {
  GeneratingSpec spec;
  ProfileBundle profile;
  JetField<4> g;
  JetField<3> f;
  JetField<2> a;
  QJetField<4> g_quad;
  QJetField<3> f_quad;
  QJetField<2> a_quad;
  GridFunction phi;
  GridFunction A;
  GridFunction Lambda;
  GridFunction V;
  GridFunction V_eff;
  GridFunction V_mu;
  GridFunction psi;
  GridFunction xi;
  GridFunction tau_phase;  // -2 int A/U
  hp::vector phi_quad;
  hp::rvector A_quad;
  hp::vector V_quad;
  hp::vector psi_quad;
  hp::vector xi_quad;
  hp::vector Lambda_quad;
  hp::rvector tau_phase_quad;
  cplx energy;
  Index anchor = 0;
  std::optional<GridFunction> V_eff_printed;

  const Grid& grid() const { return profile.grid; }
  hp::rvector U_quad() const { return profile.U_quad.column(0); }
};

/// Builds every derived field from g and a. When f_override is given it is
/// used in place of the generating-function relation (off-shell studies).
inline DressedSystem dress(const GeneratingSpec& spec, ProfileBundle profile, QJetField<4> g,
                           QJetField<2> a, std::optional<Index> anchor = std::nullopt,
                           std::optional<QJetField<3>> f_override = std::nullopt) {
  DressedSystem s;
  s.spec = spec;
  s.profile = std::move(profile);
  const ProfileBundle& b = s.profile;
  const Grid& grid = b.grid;
  s.g_quad = std::move(g);
  s.a_quad = std::move(a);
  s.f_quad = f_override ? std::move(*f_override) : compute_f(s.g_quad, b);
  s.g = s.g_quad.as<double>();
  s.a = s.a_quad.as<double>();
  s.f = s.f_quad.as<double>();
  s.anchor = anchor.value_or(b.quadrature_anchor);
  if (s.anchor < 0 || s.anchor >= grid.n) throw Error(ErrorKind::config, "anchor outside grid");

  const auto n = static_cast<std::size_t>(grid.n);
  s.phi_quad.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.phi_quad[i] = {s.f_quad.at[i].d[0], s.g_quad.at[i].d[0]};
  s.phi = detail::round_to_double(grid, s.phi_quad);
  s.A_quad = s.a_quad.column(0);
  s.A = GridFunction::real(grid, s.a.values());
  s.V_quad = assemble_potential_quad(s.f_quad, s.g_quad, b, spec.delta);
  s.V = detail::round_to_double(grid, s.V_quad);
  auto eff = effective_potential(s.g_quad, b, spec.delta);
  s.V_eff = std::move(eff.V_eff);
  s.V_mu = std::move(eff.V_mu);
  auto gs = ground_state(s.f_quad, s.g_quad, s.a_quad, b, s.anchor);
  s.psi = std::move(gs.psi);
  s.xi = std::move(gs.xi);
  s.Lambda = std::move(gs.Lambda);
  s.psi_quad = std::move(gs.psi_quad);
  s.xi_quad = std::move(gs.xi_quad);
  s.Lambda_quad = std::move(gs.Lambda_quad);
  s.tau_phase_quad = detail::integral_over_U(grid, s.A_quad, s.U_quad(), s.anchor, -2);
  Eigen::VectorXd tp(grid.n);
  for (Index i = 0; i < grid.n; ++i) tp[i] = static_cast<double>(s.tau_phase_quad[static_cast<std::size_t>(i)]);
  s.tau_phase = GridFunction::real(grid, tp);
  s.energy = {spec.delta, 0.0};

  if (family_info(spec.family)) {
    Eigen::VectorXcd vp(grid.n);
    for (Index i = 0; i < grid.n; ++i)
      vp[i] = *printed::effective_potential(spec.family, spec.alpha, b.mu[i].d[0]) + spec.delta;
    s.V_eff_printed = GridFunction(grid, std::move(vp));
  }
  return s;
}

inline DressedSystem make_family(const GeneratingSpec& spec, ProfileBundle profile,
                                 std::optional<Index> anchor = std::nullopt) {
  QJetField<4> g = sample_g(spec, profile);
  QJetField<2> a = sample_a(spec.gauge, g);
  return dress(spec, std::move(profile), std::move(g), std::move(a), anchor);
}

inline DressedSystem make_family(const GeneratingSpec& spec, const MassProfile& mass,
                                 const Grid& grid, std::optional<Index> anchor = std::nullopt) {
  return make_family(spec, eval_profile(mass, grid), anchor);
}

/// Column layout of the dataset export.
inline const std::vector<std::string_view>& dataset_columns() {
  static const std::vector<std::string_view> cols{
      "x",       "m",       "U",   "mu",     "g",      "f",     "a",     "V_re",
      "V_im",    "Veff_re", "Veff_im", "Vmu", "psi_re", "psi_im", "xi_re", "xi_im"};
  return cols;
}

inline void write_dataset_csv(const DressedSystem& s, std::ostream& out) {
  const auto& cols = dataset_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  char buf[32];
  auto put = [&](double v, bool first = false) {
    std::snprintf(buf, sizeof buf, "%.16e", v);
    if (!first) out << ',';
    out << buf;
  };
  const auto& b = s.profile;
  for (Index i = 0; i < s.grid().n; ++i) {
    put(s.grid().x(i), true);
    put(b.m[i]);
    put(b.U[i].d[0]);
    put(b.mu[i].d[0]);
    put(s.g[i].d[0]);
    put(s.f[i].d[0]);
    put(s.a[i].d[0]);
    put(s.V[i].real());
    put(s.V[i].imag());
    put(s.V_eff[i].real());
    put(s.V_eff[i].imag());
    put(s.V_mu[i].real());
    put(s.psi[i].real());
    put(s.psi[i].imag());
    put(s.xi[i].real());
    put(s.xi[i].imag());
    out << '\n';
  }
}

inline void write_dataset_csv(const DressedSystem& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path);
  write_dataset_csv(s, out);
  if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

}  // namespace pdmph
