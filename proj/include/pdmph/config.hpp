#pragma once

// Run configuration: strict JSON schema, defaults, command-line style mass
// strings and resolution into pipeline inputs.

#include <json.hpp>

#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pdmph/errors.hpp"
#include "pdmph/pipeline.hpp"
#include "pdmph/verify.hpp"

namespace pdmph {

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "eq25",  "eq26", "eq28", "intertwining",    "groundstate", "eigen-residual", "gauge",
      "tau",   "eta-dual", "eta-hermiticity", "parity-eta",  "spectrum",       "eq29"};
  return names;
}

struct MassConfig {
  std::string kind = "constant";  // constant | rational | table
  double m0 = 0.5;
  double beta = 1.0;
  std::string path;
};

struct GaugeConfig {
  std::string kind = "zero";  // zero | multiple-of-g | table
  double factor = 0.0;
  std::string path;
};

struct GridConfig {
  std::optional<double> xmin, xmax;
  Index n = 2001;
};

struct SpectrumConfig {
  Index n = 401;
  Index modes = 40;
  Index budget = 4001;
};

struct OutputConfig {
  std::string report;   // verify / spectrum JSON; empty = stdout
  std::string dataset;  // generate CSV
  std::string summary;  // generate JSON summary; empty = stdout
};

struct RunConfig {
  std::string family = "scarf2";
  double alpha = 1.0;
  double delta = 0.0;
  GaugeConfig gauge;
  std::string g_table;  // custom-table family
  MassConfig mass;
  GridConfig grid;
  std::vector<Index> refine{1001, 2001, 4001};
  std::vector<std::string> checks = known_checks();
  Tolerances tolerances;
  SpectrumConfig spectrum;
  OutputConfig output;
  std::string corrupt = "none";  // none | flip-imaginary | linear-offset (negative-control fixtures)
};

namespace detail {

inline void only_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::config, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw Error(ErrorKind::config, "unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::config, std::string("bad value for '") + key + "' in " + where);
  }
}

inline void read(const json& j, const char* key, std::optional<double>& out, const std::string& where) {
  if (!j.contains(key)) return;
  double v = 0.0;
  read(j, key, v, where);
  out = v;
}

inline void read_tolerances(const json& j, Tolerances& t) {
  only_keys(j,
            {"residual", "min_order", "exact_floor", "symbol_deviation", "proportionality", "negative_control",
             "parity", "gram_floor", "gram_exact", "defect_gate", "pairing", "probes"},
            "tolerances");
  read(j, "residual", t.residual, "tolerances");
  read(j, "min_order", t.min_order, "tolerances");
  read(j, "exact_floor", t.exact_floor, "tolerances");
  read(j, "symbol_deviation", t.symbol_deviation, "tolerances");
  read(j, "proportionality", t.proportionality, "tolerances");
  read(j, "negative_control", t.negative_control, "tolerances");
  read(j, "parity", t.parity, "tolerances");
  read(j, "gram_floor", t.gram_floor, "tolerances");
  read(j, "gram_exact", t.gram_exact, "tolerances");
  read(j, "defect_gate", t.defect_gate, "tolerances");
  read(j, "pairing", t.pairing, "tolerances");
  read(j, "probes", t.probes, "tolerances");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double parse_number(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw Error(ErrorKind::config, "bad number '" + s + "' for " + what);
  return v;
}

}  // namespace detail

/// Mass profile from KIND[:k=v,...], e.g. "rational:beta=2" or "table:path=m.csv".
inline MassConfig parse_mass_spec(const std::string& text) {
  MassConfig m;
  const auto colon = text.find(':');
  m.kind = text.substr(0, colon);
  if (m.kind != "constant" && m.kind != "rational" && m.kind != "table")
    throw Error(ErrorKind::config, "unknown mass kind '" + m.kind + "'");
  if (colon == std::string::npos) return m;
  for (const auto& kv : detail::split(text.substr(colon + 1), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, "mass parameter '" + kv + "' needs k=v");
    const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k == "m0" && m.kind == "constant") m.m0 = detail::parse_number(v, "m0");
    else if (k == "beta" && m.kind == "rational") m.beta = detail::parse_number(v, "beta");
    else if (k == "path" && m.kind == "table") m.path = v;
    else throw Error(ErrorKind::config, "mass kind '" + m.kind + "' has no parameter '" + k + "'");
  }
  return m;
}

inline RunConfig parse_config(const json& j) {
  detail::only_keys(j,
                    {"family", "alpha", "delta", "gauge", "g_table", "mass", "grid", "refine", "checks",
                     "tolerances", "spectrum", "output", "corrupt"},
                    "config");
  RunConfig c;
  detail::read(j, "family", c.family, "config");
  detail::read(j, "alpha", c.alpha, "config");
  detail::read(j, "delta", c.delta, "config");
  detail::read(j, "g_table", c.g_table, "config");
  detail::read(j, "corrupt", c.corrupt, "config");
  if (j.contains("gauge")) {
    const json& g = j["gauge"];
    detail::only_keys(g, {"kind", "factor", "path"}, "gauge");
    detail::read(g, "kind", c.gauge.kind, "gauge");
    detail::read(g, "factor", c.gauge.factor, "gauge");
    detail::read(g, "path", c.gauge.path, "gauge");
  }
  if (j.contains("mass")) {
    const json& m = j["mass"];
    detail::only_keys(m, {"kind", "m0", "beta", "path"}, "mass");
    detail::read(m, "kind", c.mass.kind, "mass");
    detail::read(m, "m0", c.mass.m0, "mass");
    detail::read(m, "beta", c.mass.beta, "mass");
    detail::read(m, "path", c.mass.path, "mass");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    detail::only_keys(g, {"xmin", "xmax", "n"}, "grid");
    detail::read(g, "xmin", c.grid.xmin, "grid");
    detail::read(g, "xmax", c.grid.xmax, "grid");
    detail::read(g, "n", c.grid.n, "grid");
  }
  detail::read(j, "refine", c.refine, "config");
  detail::read(j, "checks", c.checks, "config");
  if (j.contains("tolerances")) detail::read_tolerances(j["tolerances"], c.tolerances);
  if (j.contains("spectrum")) {
    const json& s = j["spectrum"];
    detail::only_keys(s, {"n", "modes", "budget"}, "spectrum");
    detail::read(s, "n", c.spectrum.n, "spectrum");
    detail::read(s, "modes", c.spectrum.modes, "spectrum");
    detail::read(s, "budget", c.spectrum.budget, "spectrum");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    detail::only_keys(o, {"report", "dataset", "summary"}, "output");
    detail::read(o, "report", c.output.report, "output");
    detail::read(o, "dataset", c.output.dataset, "output");
    detail::read(o, "summary", c.output.summary, "output");
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::config, path + ": " + e.what());
  }
  return parse_config(j);
}

/// Fills the domain from the family default when absent and validates every
/// field that can be checked without building the system.
inline void resolve(RunConfig& c) {
  const Family fam = parse_family(c.family);
  if (!c.grid.xmin || !c.grid.xmax) {
    double lo = -8.0, hi = 8.0;
    if (const FamilyInfo* info = family_info(fam)) {
      lo = info->xmin;
      hi = info->xmax;
    }
    if (!c.grid.xmin) c.grid.xmin = lo;
    if (!c.grid.xmax) c.grid.xmax = hi;
  }
  make_grid(*c.grid.xmin, *c.grid.xmax, c.grid.n);
  if (c.refine.size() < 3) throw Error(ErrorKind::config, "refine needs at least three levels");
  for (std::size_t k = 0; k < c.refine.size(); ++k) {
    make_grid(*c.grid.xmin, *c.grid.xmax, c.refine[k]);
    if (k > 0 && c.refine[k] <= c.refine[k - 1]) throw Error(ErrorKind::config, "refine levels must increase");
  }
  std::set<std::string> seen;
  for (const auto& name : c.checks) {
    if (std::find(known_checks().begin(), known_checks().end(), name) == known_checks().end())
      throw Error(ErrorKind::config, "unknown check '" + name + "'");
    if (!seen.insert(name).second) throw Error(ErrorKind::config, "check '" + name + "' listed twice");
  }
  if (c.gauge.kind != "zero" && c.gauge.kind != "multiple-of-g" && c.gauge.kind != "table")
    throw Error(ErrorKind::config, "unknown gauge kind '" + c.gauge.kind + "'");
  if (c.gauge.kind == "table" && c.gauge.path.empty()) throw Error(ErrorKind::config, "gauge table needs a path");
  if (c.mass.kind != "constant" && c.mass.kind != "rational" && c.mass.kind != "table")
    throw Error(ErrorKind::config, "unknown mass kind '" + c.mass.kind + "'");
  if (c.mass.kind == "table" && c.mass.path.empty()) throw Error(ErrorKind::config, "mass table needs a path");
  if (fam == Family::custom_table && c.g_table.empty())
    throw Error(ErrorKind::config, "custom-table family needs g_table");
  if (c.corrupt != "none" && c.corrupt != "flip-imaginary" && c.corrupt != "linear-offset")
    throw Error(ErrorKind::config, "unknown corruption '" + c.corrupt + "'");
  if (c.spectrum.n > c.spectrum.budget)
    throw Error(ErrorKind::budget_exceeded, "spectrum n = " + std::to_string(c.spectrum.n) +
                                                " exceeds the dense-solve budget " +
                                                std::to_string(c.spectrum.budget));
  if (c.spectrum.modes < 1) throw Error(ErrorKind::config, "spectrum modes must be positive");
  if (c.tolerances.probes < 2) throw Error(ErrorKind::config, "at least two probes are needed");
}

inline MassProfile make_mass(const MassConfig& m) {
  if (m.kind == "rational") return MassProfile::rational(m.beta);
  if (m.kind == "table") return MassProfile::from_csv(m.path);
  return MassProfile::constant(m.m0);
}

inline GeneratingSpec make_spec(const RunConfig& c) {
  GeneratingSpec s;
  s.family = parse_family(c.family);
  s.alpha = c.alpha;
  s.delta = c.delta;
  if (c.gauge.kind == "multiple-of-g") s.gauge = GaugeSpec::multiple_of_g(c.gauge.factor);
  if (c.gauge.kind == "table") {
    s.gauge.kind = GaugeSpec::Kind::table;
    s.gauge.table = std::make_shared<const TwoColumnTable>(read_two_column_csv(c.gauge.path));
    s.gauge.source = c.gauge.path;
  }
  if (!c.g_table.empty()) {
    s.g_table = std::make_shared<const TwoColumnTable>(read_two_column_csv(c.g_table));
    s.g_source = c.g_table;
  }
  return s;
}

inline Corruption make_corruption(const RunConfig& c) {
  if (c.corrupt == "flip-imaginary") return Corruption::flip_imaginary;
  if (c.corrupt == "linear-offset") return Corruption::linear_offset;
  return Corruption::none;
}

inline json to_json(const Tolerances& t) {
  return {{"residual", t.residual},
          {"min_order", t.min_order},
          {"exact_floor", t.exact_floor},
          {"symbol_deviation", t.symbol_deviation},
          {"proportionality", t.proportionality},
          {"negative_control", t.negative_control},
          {"parity", t.parity},
          {"gram_floor", t.gram_floor},
          {"gram_exact", t.gram_exact},
          {"defect_gate", t.defect_gate},
          {"pairing", t.pairing},
          {"probes", t.probes}};
}

/// The resolved configuration with every default written out. Output
/// destinations are left out so the same run written to different paths
/// yields identical reports.
inline json to_json(const RunConfig& c) {
  json mass = {{"kind", c.mass.kind}};
  if (c.mass.kind == "constant") mass["m0"] = c.mass.m0;
  if (c.mass.kind == "rational") mass["beta"] = c.mass.beta;
  if (c.mass.kind == "table") mass["path"] = c.mass.path;
  json gauge = {{"kind", c.gauge.kind}};
  if (c.gauge.kind == "multiple-of-g") gauge["factor"] = c.gauge.factor;
  if (c.gauge.kind == "table") gauge["path"] = c.gauge.path;
  json j = {{"family", c.family}, {"alpha", c.alpha}, {"delta", c.delta}, {"gauge", gauge}};
  if (!c.g_table.empty()) j["g_table"] = c.g_table;
  j["mass"] = mass;
  j["grid"] = {{"xmin", c.grid.xmin.value_or(std::numeric_limits<double>::quiet_NaN())},
               {"xmax", c.grid.xmax.value_or(std::numeric_limits<double>::quiet_NaN())},
               {"n", c.grid.n}};
  j["refine"] = c.refine;
  j["checks"] = c.checks;
  j["tolerances"] = to_json(c.tolerances);
  j["spectrum"] = {{"n", c.spectrum.n}, {"modes", c.spectrum.modes}, {"budget", c.spectrum.budget}};
  j["corrupt"] = c.corrupt;
  return j;
}

}  // namespace pdmph
