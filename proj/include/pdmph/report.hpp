#pragma once

// Orchestration of generate / verify / spectrum runs and byte-stable JSON
// emission of their reports.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>

#include "pdmph/config.hpp"
#include "pdmph/eigensolver.hpp"
#include "pdmph/operators.hpp"
#include "pdmph/pipeline.hpp"
#include "pdmph/verify.hpp"

namespace pdmph {

inline constexpr const char* toolkit_name = "pdmph";
inline constexpr const char* toolkit_version = "1.0.0";

// ---------------------------------------------------------------------------
// Deterministic JSON

namespace detail {

inline void write_number(std::ostream& out, double v) {
  if (!std::isfinite(v)) {
    out << "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  out << buf;
}

inline void write_json(std::ostream& out, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << json(it.key()).dump() << ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      out << '\n' << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // arrays of scalars stay on one line
      const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); }) ||
                        std::all_of(j.begin(), j.end(), [](const json& e) {
                          return e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number();
                        });
      if (flat) {
        out << '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out << ", ";
          write_json(out, j[k], indent, depth + 1);
        }
        out << ']';
        return;
      }
      out << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out << ",\n";
        out << pad;
        write_json(out, j[k], indent, depth + 1);
      }
      out << '\n' << close << ']';
      return;
    }
    case json::value_t::number_float: write_number(out, j.get<double>()); return;
    default: out << j.dump(); return;
  }
}

}  // namespace detail

/// Floats as 17 significant digits in lowercase scientific notation,
/// non-finite values as null, keys in insertion order.
inline std::string serialize(const json& j) {
  std::ostringstream out;
  detail::write_json(out, j, 2, 0);
  out << '\n';
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path);
  out << text;
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
}

/// Writes `payload` to path (stdout when empty). A file payload gets a
/// sidecar path + ".meta.json" holding the generation timestamp.
inline void emit(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  write_text(path, payload);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_text(path + ".meta.json", serialize({{"payload", path}, {"generated_at", stamp}}));
}

// ---------------------------------------------------------------------------
// Report pieces

inline json to_json(const CheckResult& r) {
  json j = {{"name", r.name}, {"relation", r.relation}, {"n", r.n}, {"h", r.h}, {"residual", r.residual}};
  j["order"] = r.order;
  j["threshold"] = r.threshold;
  j["verdict"] = to_string(r.verdict);
  if (!r.error.empty()) j["error"] = r.error;
  j["details"] = r.details;
  return j;
}

inline json toolkit_json() { return {{"name", toolkit_name}, {"version", toolkit_version}}; }

inline json conventions_json(const DressedSystem& s) {
  return {{"mu_anchor", s.profile.anchor_convention},
          {"quadrature_anchor_x", s.grid().x(s.anchor)},
          {"boundary",
           {{"identities", "one-sided closures; residuals on the interior window (4 nodes from each edge)"},
            {"hermiticity", "interior window 8 nodes from each edge"},
            {"spectrum", std::string(to_string(BoundaryPolicy::dirichlet_odd_reflection))}}}};
}

/// Pointwise comparison of the pipeline against the printed closed forms on
/// the interior window.
inline json printed_deltas(const DressedSystem& s) {
  if (!s.V_eff_printed) return nullptr;
  const Window w = s.grid().interior();
  double veff = 0.0, f = 0.0;
  for (Index i = w.begin; i < w.end; ++i) {
    const cplx p = (*s.V_eff_printed)[i];
    const double d = std::abs(s.V_eff[i] - p);
    veff = std::max(veff, std::abs(p) > 0.0 ? d / std::abs(p) : d);
    if (auto pf = printed::f(s.spec.family, s.spec.alpha, s.profile.mu[i]))
      f = std::max(f, std::abs(s.f[i].d[0] - *pf));
  }
  return {{"effective_potential_max_rel_error", veff}, {"f_max_abs_error", f}};
}

struct Outcome {
  json payload;
  int exit_code = 0;
};

// ---------------------------------------------------------------------------
// verify

namespace detail {

inline bool wants(const RunConfig& c, std::string_view name) {
  return std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end();
}

struct SpectralPair {
  std::optional<SpectralResult> coarse, fine;
  std::optional<Error> error;
  OperatorMatrix H, eta;  // Dirichlet blocks at the coarse size
};

inline SpectralPair spectral_pair(const RunConfig& c, const GeneratingSpec& spec, const MassProfile& mass, int jobs) {
  const BoundaryPolicy bp = BoundaryPolicy::dirichlet_odd_reflection;
  const std::vector<Index> ns{c.spectrum.n, 2 * c.spectrum.n - 1};
  for (Index n : ns)
    if (n > c.spectrum.budget)
      throw Error(ErrorKind::budget_exceeded, "spectrum n = " + std::to_string(n) + " exceeds the dense-solve budget " +
                                                  std::to_string(c.spectrum.budget));
  struct Built {
    OperatorMatrix H, eta;
  };
  auto built = parallel_map<Built>(2, jobs, [&](std::size_t k) {
    const DressedSystem s = make_family(spec, mass, make_grid(*c.grid.xmin, *c.grid.xmax, ns[k]));
    const SystemOperators ops = build_operators(s, bp);
    return Built{ops.H, ops.eta_direct};
  });
  SpectralPair out;
  out.H = built[0].H;
  out.eta = built[0].eta;
  auto res = parallel_map<std::optional<SpectralResult>>(2, jobs, [&](std::size_t k) -> std::optional<SpectralResult> {
    try {
      return spectral_analysis(built[k].H, c.spectrum.modes, c.tolerances.pairing, true);
    } catch (const Error&) {
      return std::nullopt;
    }
  });
  out.coarse = std::move(res[0]);
  out.fine = std::move(res[1]);
  if (!out.coarse || !out.fine)
    out.error = Error(ErrorKind::eigensolver_failure, "dense eigensolve failed its backward-error contract");
  return out;
}

inline json spectral_summary(const SpectralResult& s, double delta, double pairing_tol) {
  const double scale = spectral_scale(s.eig.values, s.modes);
  double nearest = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < s.eig.values.size(); ++k) nearest = std::min(nearest, std::abs(s.eig.values[k] - delta));
  return {{"n", s.grid.n},
          {"boundary", std::string(to_string(BoundaryPolicy::dirichlet_odd_reflection))},
          {"eigenvalue_count", static_cast<Index>(s.eig.values.size())},
          {"max_backward_error", s.eig.max_backward_error},
          {"pairing_lowest", counts_json(count_pairing(s.eig.values, s.modes, pairing_tol * scale))},
          {"distance_to_delta", nearest},
          {"eigenvalues", eigenvalues_json(s.eig.values, s.modes)}};
}

}  // namespace detail

inline Outcome run_verify(RunConfig c, int jobs = 1) {
  resolve(c);
  const GeneratingSpec spec = make_spec(c);
  const MassProfile mass = make_mass(c.mass);
  const Tolerances& tol = c.tolerances;
  const Corruption corrupt = make_corruption(c);

  using Fn = std::function<CheckResult(const std::vector<Level>&)>;
  const std::vector<std::pair<std::string, Fn>> refinement{
      {"eq25", [&](const auto& l) { return check_conjugate_law(l, tol, corrupt); }},
      {"eq26", [&](const auto& l) { return check_shape_law(l, tol, corrupt); }},
      {"eq28", [&](const auto& l) { return check_null_coefficient(l, tol); }},
      {"intertwining", [&](const auto& l) { return check_intertwining(l, tol); }},
      {"groundstate", [&](const auto& l) { return check_groundstate(l, tol); }},
      {"eigen-residual", [&](const auto& l) { return check_eigen_residual(l, tol); }},
      {"gauge", [&](const auto& l) { return check_gauge(l, tol); }},
      {"tau", [&](const auto& l) { return check_tau(l, tol); }},
      {"eta-dual", [&](const auto& l) { return check_eta_dual(l, tol); }},
      {"eta-hermiticity", [&](const auto& l) { return check_eta_hermiticity(l, tol); }},
      {"parity-eta", [&](const auto& l) { return check_parity_eta(l, tol); }},
  };
  std::vector<const std::pair<std::string, Fn>*> todo;
  for (const auto& e : refinement)
    if (detail::wants(c, e.first)) todo.push_back(&e);

  // the coarsest level also fixes conventions and printed-form deltas
  std::vector<Level> levels =
      todo.empty() ? build_levels(spec, mass, *c.grid.xmin, *c.grid.xmax, {c.refine.back()}, tol.probes, 1)
                   : build_levels(spec, mass, *c.grid.xmin, *c.grid.xmax, c.refine, tol.probes, jobs);
  const DressedSystem& finest = levels.back().system;

  std::vector<CheckResult> results =
      parallel_map<CheckResult>(todo.size(), jobs, [&](std::size_t k) { return todo[k]->second(levels); });

  json spectral = nullptr;
  if (detail::wants(c, "spectrum") || detail::wants(c, "eq29")) {
    auto sp = detail::spectral_pair(c, spec, mass, jobs);
    if (detail::wants(c, "spectrum")) {
      if (sp.error) {
        CheckResult r;
        r.name = "spectrum";
        r.relation = "pairing classification of the lowest modes is stable under refinement";
        detail::record_error(r, *sp.error);
        results.push_back(r);
      } else {
        results.push_back(check_spectrum(*sp.coarse, *sp.fine, tol));
      }
    }
    if (detail::wants(c, "eq29")) {
      if (sp.coarse) {
        results.push_back(check_gram(*sp.coarse, sp.H, sp.eta, tol));
      } else {
        CheckResult r;
        r.name = "eq29";
        r.relation = "eta-tilde Gram matrix: zero norm for complex modes, orthogonality unless conjugate";
        detail::record_error(r, *sp.error);
        results.push_back(r);
      }
    }
    if (sp.fine) spectral = detail::spectral_summary(*sp.fine, c.delta, tol.pairing);
  }

  json checks = json::array();
  json findings = json::array();
  Index passed = 0, failed = 0, reported = 0;
  for (const auto& r : results) {
    checks.push_back(to_json(r));
    for (const auto& f : r.findings) {
      json g = {{"check", r.name}};
      for (auto it = f.begin(); it != f.end(); ++it) g[it.key()] = it.value();
      findings.push_back(g);
    }
    if (r.verdict == Verdict::pass) ++passed;
    else if (r.verdict == Verdict::fail) ++failed;
    else ++reported;
  }
  if (json d = printed_deltas(finest); !d.is_null()) {
    json g = {{"check", "pipeline"}, {"topic", "printed closed forms"}, {"n", finest.grid().n}};
    for (auto it = d.begin(); it != d.end(); ++it) g[it.key()] = it.value();
    findings.push_back(g);
  }

  Outcome out;
  out.exit_code = failed == 0 ? 0 : 1;
  out.payload = {{"toolkit", toolkit_json()},
                 {"command", "verify"},
                 {"config", to_json(c)},
                 {"conventions", conventions_json(finest)},
                 {"checks", checks},
                 {"spectral_summary", spectral},
                 {"findings", findings},
                 {"summary", {{"passed", passed}, {"failed", failed}, {"reported_only", reported},
                              {"exit_code", out.exit_code}}}};
  return out;
}

// ---------------------------------------------------------------------------
// spectrum

inline Outcome run_spectrum(RunConfig c, const std::string& export_path = {}) {
  resolve(c);
  const GeneratingSpec spec = make_spec(c);
  const MassProfile mass = make_mass(c.mass);
  const DressedSystem s = make_family(spec, mass, make_grid(*c.grid.xmin, *c.grid.xmax, c.spectrum.n));
  const SystemOperators ops = build_operators(s, BoundaryPolicy::dirichlet_odd_reflection);
  if (!export_path.empty()) write_binary(ops.H, export_path);
  SpectralResult sr = spectral_analysis(ops.H, c.spectrum.modes, c.tolerances.pairing, true);
  const CheckResult gram = check_gram(sr, ops.H, ops.eta_direct, c.tolerances);

  Eigen::VectorXcd all = sr.eig.values;
  std::vector<Index> every(static_cast<std::size_t>(all.size()));
  for (Index k = 0; k < all.size(); ++k) every[static_cast<std::size_t>(k)] = k;
  const double scale = spectral_scale(all, every);

  Outcome out;
  out.payload = {{"toolkit", toolkit_json()},
                 {"command", "spectrum"},
                 {"config", to_json(c)},
                 {"conventions", conventions_json(s)},
                 {"spectrum", detail::spectral_summary(sr, c.delta, c.tolerances.pairing)},
                 {"pairing_all", counts_json(count_pairing(all, every, c.tolerances.pairing * scale))},
                 {"eta_gram", to_json(gram)}};
  return out;
}

// ---------------------------------------------------------------------------
// generate

inline Outcome run_generate(RunConfig c) {
  resolve(c);
  const GeneratingSpec spec = make_spec(c);
  const MassProfile mass = make_mass(c.mass);
  const DressedSystem s = make_family(spec, mass, make_grid(*c.grid.xmin, *c.grid.xmax, c.grid.n));
  const std::string dataset = c.output.dataset.empty() ? std::string("dataset.csv") : c.output.dataset;
  {
    std::ofstream csv(dataset);
    if (!csv) throw Error(ErrorKind::io, "cannot open " + dataset);
    write_dataset_csv(s, csv);
  }
  json cols = json::array();
  for (auto col : dataset_columns()) cols.push_back(std::string(col));
  Outcome out;
  out.payload = {{"toolkit", toolkit_json()},
                 {"command", "generate"},
                 {"config", to_json(c)},
                 {"conventions", conventions_json(s)},
                 {"dataset", {{"path", dataset}, {"rows", s.grid().n}, {"columns", cols}}},
                 {"printed_form_deltas", printed_deltas(s)}};
  return out;
}

// ---------------------------------------------------------------------------
// catalog

inline std::string catalog_table(std::optional<Family> only = std::nullopt) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-34s %-26s %-16s %s\n", "family", "g", "title", "default domain",
                "alpha range");
  os << line;
  for (const auto& r : catalog()) {
    if (only && r.family != *only) continue;
    char dom[48];
    std::snprintf(dom, sizeof dom, "[%g, %g]", r.xmin, r.xmax);
    std::snprintf(line, sizeof line, "%-18s %-34s %-26s %-16s (%g, inf)\n", std::string(r.name).c_str(),
                  std::string(r.g_text).c_str(), std::string(r.title).c_str(), dom, r.alpha_min);
    os << line;
  }
  return os.str();
}

}  // namespace pdmph
