// Command-line front-end: catalog listing, dataset generation, verification
// reports and Dirichlet spectra.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <unistd.h>

#include "pdmph/config.hpp"
#include "pdmph/report.hpp"

namespace {

using namespace pdmph;

struct Overrides {
  std::string config;
  std::optional<std::string> family;
  std::optional<double> alpha, delta, xmin, xmax;
  std::optional<std::string> mass;
  std::optional<Index> n;
  std::optional<std::string> refine, checks;
  std::optional<std::string> out;
  int jobs = 1;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration");
  app->add_option("--family", o.family, "generating-function family");
  app->add_option("--alpha", o.alpha, "family parameter alpha");
  app->add_option("--delta", o.delta, "energy shift delta");
  app->add_option("--mass", o.mass, "mass profile KIND[:k=v,...]");
  app->add_option("--xmin", o.xmin, "domain start");
  app->add_option("--xmax", o.xmax, "domain end");
  app->add_option("--n", o.n, "grid points");
  app->add_option("--refine", o.refine, "refinement levels n1,n2,n3");
  app->add_option("--checks", o.checks, "comma-separated check names");
  app->add_option("--out", o.out, "output path");
  app->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  return out;
}

RunConfig assemble(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.family) {
    // a new family brings its own default domain unless one is given
    if (*o.family != c.family && o.config.empty()) c.grid.xmin = c.grid.xmax = std::nullopt;
    c.family = *o.family;
  }
  if (o.alpha) c.alpha = *o.alpha;
  if (o.delta) c.delta = *o.delta;
  if (o.mass) c.mass = parse_mass_spec(*o.mass);
  if (o.xmin) c.grid.xmin = *o.xmin;
  if (o.xmax) c.grid.xmax = *o.xmax;
  if (o.n) c.grid.n = *o.n;
  if (o.refine) {
    c.refine.clear();
    for (const auto& s : split_list(*o.refine)) {
      std::size_t pos = 0;
      long long v = 0;
      try {
        v = std::stoll(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != s.size()) throw Error(ErrorKind::config, "bad refine level '" + s + "'");
      c.refine.push_back(static_cast<Index>(v));
    }
  }
  if (o.checks) c.checks = split_list(*o.checks);
  return c;
}

bool use_color() { return std::getenv("PDMPH_NO_COLOR") == nullptr && isatty(STDERR_FILENO); }

void print_verdicts(const json& payload) {
  const bool color = use_color();
  for (const auto& ch : payload["checks"]) {
    const std::string v = ch["verdict"].get<std::string>();
    const char* code = v == "pass" ? "\033[32m" : v == "fail" ? "\033[31m" : "\033[33m";
    std::cerr << (color ? code : "") << v << (color ? "\033[0m" : "") << "  " << ch["name"].get<std::string>();
    if (ch.contains("error")) std::cerr << "  (" << ch["error"].get<std::string>() << ")";
    std::cerr << '\n';
  }
}

int fail(const Error& e) {
  std::cerr << "error: " << e.what() << '\n';
  return e.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Position-dependent-mass pseudo-Hermitian toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(toolkit_version));

  auto* catalog_cmd = app.add_subcommand("catalog", "exactly solvable families");
  auto* list_cmd = catalog_cmd->add_subcommand("list", "list the families");
  catalog_cmd->require_subcommand(1);
  std::optional<std::string> list_family;
  list_cmd->add_option("--family", list_family, "show one family");

  Overrides gen, ver, spe;
  std::optional<std::string> summary_path;
  auto* generate_cmd = app.add_subcommand("generate", "write the dressed-system CSV and a JSON summary");
  add_common(generate_cmd, gen);
  generate_cmd->add_option("--summary", summary_path, "JSON summary path (stdout when absent)");

  auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  add_common(verify_cmd, ver);

  std::string export_path;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Dirichlet spectrum and eta-tilde Gram summary");
  add_common(spectrum_cmd, spe);
  spectrum_cmd->add_option("--export", export_path, "write H' as a dense binary matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }

  try {
    if (*catalog_cmd) {
      std::optional<Family> only;
      if (list_family) {
        only = parse_family(*list_family);
        if (!family_info(*only)) throw Error(ErrorKind::config, "'" + *list_family + "' is not a catalog family");
      }
      std::cout << catalog_table(only);
      return 0;
    }
    if (*generate_cmd) {
      RunConfig c = assemble(gen);
      if (gen.out) c.output.dataset = *gen.out;
      if (summary_path) c.output.summary = *summary_path;
      const Outcome o = run_generate(c);
      emit(c.output.summary, serialize(o.payload));
      return o.exit_code;
    }
    if (*verify_cmd) {
      RunConfig c = assemble(ver);
      if (ver.out) c.output.report = *ver.out;
      const Outcome o = run_verify(c, ver.jobs);
      emit(c.output.report, serialize(o.payload));
      print_verdicts(o.payload);
      return o.exit_code;
    }
    if (*spectrum_cmd) {
      Overrides local = spe;
      RunConfig c = assemble([&] {
        local.n.reset();  // --n selects the spectrum size here
        return local;
      }());
      if (spe.n) c.spectrum.n = *spe.n;
      if (spe.out) c.output.report = *spe.out;
      const Outcome o = run_spectrum(c, export_path);
      emit(c.output.report, serialize(o.payload));
      return o.exit_code;
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 11;
  }
  return 0;
}
