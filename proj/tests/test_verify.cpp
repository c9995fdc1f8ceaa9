#include <gtest/gtest.h>

#include <cmath>

#include "pdmph/verify.hpp"

using namespace pdmph;

namespace {

GeneratingSpec family(Family f, double alpha, double gauge_factor = 0.0) {
  GeneratingSpec s;
  s.family = f;
  s.alpha = alpha;
  if (gauge_factor != 0.0) s.gauge = GaugeSpec::multiple_of_g(gauge_factor);
  return s;
}

std::vector<Level> levels(const GeneratingSpec& spec, const MassProfile& mass, double xmin, double xmax,
                          std::vector<Index> ns = {501, 1001, 2001}) {
  return build_levels(spec, mass, xmin, xmax, ns, 4, 3);
}

const Tolerances tol{};

}  // namespace

TEST(Refinement, ObservedOrderOfPowerLaw) {
  const std::vector<double> h{0.1, 0.05, 0.025};
  EXPECT_NEAR(observed_order(h, {3e-4, 3e-4 / 16, 3e-4 / 256}), 4.0, 1e-12);
  EXPECT_NEAR(observed_order(h, {1e-2, 5e-3, 2.5e-3}), 1.0, 1e-12);
  EXPECT_TRUE(std::isnan(observed_order(h, {1e-3, 0.0, 1e-5})));
  EXPECT_TRUE(std::isnan(observed_order({0.1, 0.05}, {1e-3, 1e-4})));
}

TEST(Refinement, VerdictRule) {
  EXPECT_EQ(judge_refinement({1e-4, 6e-6, 4e-7}, 4.0, 1e-6, tol), Verdict::pass);
  EXPECT_EQ(judge_refinement({1e-4, 6e-6, 4e-7}, 3.0, 1e-6, tol), Verdict::fail);
  EXPECT_EQ(judge_refinement({1e-3, 6e-5, 4e-6}, 4.0, 1e-6, tol), Verdict::fail);
  // roundoff-level residuals have no meaningful order
  EXPECT_EQ(judge_refinement({3e-13, 5e-13, 2e-13}, std::nan(""), 1e-6, tol), Verdict::pass);
  EXPECT_EQ(judge_refinement({3e-13, 5e-12, 2e-11}, std::nan(""), 1e-6, tol), Verdict::fail);
  EXPECT_EQ(judge_refinement({1e-4, NAN, 1e-8}, 4.0, 1e-6, tol), Verdict::fail);
  EXPECT_EQ(judge_refinement({1e-12, 1e-12}, 4.0, 1e-6, tol), Verdict::fail);
}

TEST(PotentialLaws, HoldAndDetectCorruption) {
  const auto lv = levels(family(Family::scarf2, 0.8), MassProfile::rational(), -8, 8);
  for (auto check : {check_conjugate_law, check_shape_law}) {
    const CheckResult r = check(lv, tol, Corruption::none);
    EXPECT_EQ(r.verdict, Verdict::pass) << r.name << " finest " << r.residual.back();
    EXPECT_TRUE(r.details["negative_control"]["detected"].get<bool>()) << r.name;
    const CheckResult bad = check(lv, tol, Corruption::flip_imaginary);
    EXPECT_EQ(bad.verdict, Verdict::fail) << r.name;
    EXPECT_GT(bad.residual.back(), 1.0) << r.name;
  }
  EXPECT_EQ(check_shape_law(lv, tol, Corruption::linear_offset).verdict, Verdict::fail);
}

// U = 1, g = x, f = -1/(2x): printed R = 1/x^3 - 1/x^2, rederived R = 0.
TEST(NullCoefficient, HarmonicConstantMassClosedForm) {
  const Grid grid = make_grid(0.5, 8.0, 1501);
  const DressedSystem s = make_family(family(Family::harmonic3d, 1.0), MassProfile::constant(), grid);
  const hp::rvector P = null_coefficient(s, NullForm::printed);
  const hp::rvector R = null_coefficient(s, NullForm::rederived);
  ASSERT_DOUBLE_EQ(grid.x(300), 2.0);
  EXPECT_NEAR(static_cast<double>(P[300]), -0.125, 1e-28);
  for (Index i : {0, 100, 300, 1500}) {
    const double x = grid.x(i);
    EXPECT_NEAR(static_cast<double>(P[static_cast<std::size_t>(i)]), 1 / (x * x * x) - 1 / (x * x), 1e-26);
    EXPECT_NEAR(static_cast<double>(R[static_cast<std::size_t>(i)]), 0.0, 1e-28);
  }
}

TEST(NullCoefficient, HarmonicRationalMassReference) {
  const Grid grid = make_grid(0.5, 8.0, 1501);
  const DressedSystem s = make_family(family(Family::harmonic3d, 1.0), MassProfile::rational(), grid);
  const Index i = grid.nearest(0.7);
  ASSERT_DOUBLE_EQ(grid.x(i), 0.7);
  EXPECT_NEAR(static_cast<double>(null_coefficient(s, NullForm::printed)[static_cast<std::size_t>(i)]),
              0.081192391766333887, 1e-15);
  EXPECT_LT(std::abs(static_cast<double>(null_coefficient(s, NullForm::rederived)[static_cast<std::size_t>(i)])), 1e-28);
}

TEST(NullCoefficient, CheckIsReportedOnly) {
  const auto lv = levels(family(Family::scarf2, 1.0), MassProfile::constant(), -8, 8, {201, 401, 801});
  const CheckResult r = check_null_coefficient(lv, tol);
  EXPECT_EQ(r.verdict, Verdict::reported_only);
  EXPECT_GT(r.residual.back(), 0.1);
  EXPECT_LT(r.details["levels"].back()["max_abs_rederived"].get<double>(), 1e-25);
  ASSERT_EQ(r.findings.size(), 1u);
}

// Off the f-g relation the defect is the multiplication operator i R, with
// R in the rederived form. Probe-to-probe scatter of the symbol is
// discretization error and shrinks at fourth order.
TEST(Intertwining, OffShellDefectIsMultiplicationByIR) {
  const GeneratingSpec spec = family(Family::scarf2, 1.0);
  std::vector<DefectLevel> ds;
  for (Index n : {1001, 2001}) {
    const Grid grid = make_grid(-6, 6, n);
    const DressedSystem on = make_family(spec, MassProfile::rational(), grid);
    QJetField<3> f = on.f_quad;
    const auto bump = sample_jet<3, hp::real>(grid, [](const QJet<3>& x) { return hp::real(0.3) * sech(x); });
    for (std::size_t i = 0; i < f.at.size(); ++i) f.at[i] = f.at[i] + bump.at[i];
    const DressedSystem off = dress(spec, on.profile, on.g_quad, on.a_quad, std::nullopt, f);
    const SystemOperators ops = build_operators(off);
    const hp::rvector Rp = null_coefficient(off, NullForm::printed);
    const hp::rvector Rr = null_coefficient(off, NullForm::rederived);
    ds.push_back(analyse_defect(ops.eta_direct, ops.H, ops.H_dagger, make_probes(grid, 4), grid.interior(), &Rp, &Rr));
  }
  const DefectLevel& d = ds.back();
  EXPECT_LT(d.symbol_deviation, 1e-4);
  EXPECT_GT(ds[0].symbol_deviation / d.symbol_deviation, 10.0);
  ASSERT_TRUE(d.c_rederived.has_value());
  EXPECT_LT(std::abs(*d.c_rederived - cplx(0, 1)), 1e-5);
  EXPECT_LT(d.fit_rederived, 1e-4);
  EXPECT_GT(ds[0].fit_rederived / d.fit_rederived, 10.0);
  ASSERT_TRUE(d.c_printed.has_value());
  EXPECT_GT(d.fit_printed, 1e-2);
}

TEST(Intertwining, ConvergesOnShell) {
  const auto lv = levels(family(Family::scarf2, 1.0, 0.5), MassProfile::rational(), -8, 8);
  const CheckResult r = check_intertwining(lv, tol);
  EXPECT_EQ(r.verdict, Verdict::pass) << r.residual.back() << " order " << r.order;
  EXPECT_GE(r.order, 3.5);
  EXPECT_FALSE(r.details["defect_analysis"]["proportional_to_printed_R"].get<bool>());
}

TEST(GroundState, PrintedFormsAgainstPipeline) {
  const auto ho = levels(family(Family::harmonic3d, 1.0), MassProfile::constant(), 0.5, 8);
  const CheckResult a = check_groundstate(ho, tol);
  EXPECT_EQ(a.verdict, Verdict::pass);
  EXPECT_TRUE(a.details["printed_state"]["annihilated"].get<bool>());

  const auto morse = levels(family(Family::morse, 1.0), MassProfile::rational(), -1, 8);
  const CheckResult b = check_groundstate(morse, tol);
  EXPECT_EQ(b.verdict, Verdict::pass);
  EXPECT_FALSE(b.details["printed_state"]["annihilated"].get<bool>());
  ASSERT_EQ(b.findings.size(), 1u);
  EXPECT_GT(b.findings[0]["finest_residual"].get<double>(), 0.1);
}

TEST(Suite, GaugedMorseChecksPass) {
  const auto lv = levels(family(Family::morse, 1.0, 0.7), MassProfile::rational(), -1, 8);
  for (const CheckResult& r : {check_eigen_residual(lv, tol), check_gauge(lv, tol), check_tau(lv, tol),
                               check_eta_dual(lv, tol), check_eta_hermiticity(lv, tol)})
    EXPECT_EQ(r.verdict, Verdict::pass) << r.name << " finest " << r.residual.back() << " order " << r.order;
}

TEST(ParityMetric, PredictionMatchesMeasurement) {
  const auto even = levels(family(Family::scarf2, 1.0, 0.4), MassProfile::rational(), -8, 8, {201, 401, 801});
  const CheckResult a = check_parity_eta(even, tol);
  EXPECT_EQ(a.verdict, Verdict::pass);
  EXPECT_TRUE(a.details["levels"][0]["predicted_hermitian"].get<bool>());

  // Morse g is not even, so a nonzero gauge breaks Hermiticity
  const auto odd = levels(family(Family::morse, 1.0, 0.4), MassProfile::rational(), -8, 8, {201, 401, 801});
  const CheckResult b = check_parity_eta(odd, tol);
  EXPECT_EQ(b.verdict, Verdict::pass);
  EXPECT_FALSE(b.details["levels"][0]["measured_hermitian"].get<bool>());

  const auto lopsided = levels(family(Family::morse, 1.0), MassProfile::rational(), -1, 8, {201, 401, 801});
  const CheckResult c = check_parity_eta(lopsided, tol);
  EXPECT_EQ(c.verdict, Verdict::fail);
  EXPECT_EQ(c.details["error_kind"].get<std::string>(), "not-parity-capable");
}

TEST(GramMatrix, FreeParticleIsExactRegime) {
  const auto [H, eta] = free_particle_dirichlet(make_grid(0, 1, 201));
  const CheckResult r = check_gram(H, eta, 20, tol);
  EXPECT_TRUE(r.details["exact_regime"].get<bool>());
  EXPECT_EQ(r.verdict, Verdict::pass) << r.residual[0];
  EXPECT_LT(r.residual[0], tol.gram_exact);
}

TEST(GramMatrix, DefectBearingMetricIsReportedOnly) {
  const DressedSystem s = make_family(family(Family::constant, 0.5), MassProfile::constant(), make_grid(-8, 8, 201));
  const BoundaryPolicy bp = BoundaryPolicy::dirichlet_odd_reflection;
  const SystemOperators ops = build_operators(s, bp);
  const CheckResult r = check_gram(ops.H, ops.eta_direct, 20, tol);
  EXPECT_EQ(r.verdict, Verdict::reported_only);
  EXPECT_GT(r.details["intertwining_defect"].get<double>(), tol.defect_gate);
}

TEST(SpectrumCheck, ScarfPairingIsStable) {
  const GeneratingSpec spec = family(Family::scarf2, 0.5);
  const BoundaryPolicy bp = BoundaryPolicy::dirichlet_odd_reflection;
  const auto H = [&](Index n) {
    return build_operators(make_family(spec, MassProfile::constant(), make_grid(-15, 15, n)), bp).H;
  };
  const CheckResult r = check_spectrum(H(301), H(601), 20, tol);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_TRUE(r.details["pairing_stable"].get<bool>());
  EXPECT_LT(r.residual[1], 1e-10);
}

TEST(Parallel, JobsDoNotChangeResults) {
  const GeneratingSpec spec = family(Family::gen_poschl_teller, 1.0, 0.3);
  const auto a = build_levels(spec, MassProfile::rational(), 0.5, 6, {201, 401, 801}, 4, 1);
  const auto b = build_levels(spec, MassProfile::rational(), 0.5, 6, {201, 401, 801}, 4, 3);
  const CheckResult ra = check_intertwining(a, tol), rb = check_intertwining(b, tol);
  EXPECT_EQ(ra.residual, rb.residual);
}
