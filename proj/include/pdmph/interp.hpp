#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pdmph/errors.hpp"

namespace pdmph {

struct TwoColumnTable {
  std::vector<double> x;
  std::vector<double> y;
};

/// Reads a two-column CSV (x, y). Blank lines, '#' comments and a single
/// non-numeric header line are skipped. x must be strictly increasing.
inline TwoColumnTable read_two_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  TwoColumnTable t;
  std::string line;
  bool header_allowed = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a >> b)) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw Error(ErrorKind::io, path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    header_allowed = false;
    t.x.push_back(a);
    t.y.push_back(b);
  }
  if (t.x.size() < 4) throw Error(ErrorKind::io, path + ": need at least 4 rows");
  for (std::size_t i = 1; i < t.x.size(); ++i)
    if (!(t.x[i] > t.x[i - 1]))
      throw Error(ErrorKind::io, path + ": x column must be strictly increasing");
  return t;
}

/// Natural cubic spline through tabulated samples (GSL cspline).
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 3)
      throw std::invalid_argument("CubicSpline: need >= 3 matching samples");
    gsl_set_error_handler_off();
    interp_.reset(gsl_interp_alloc(gsl_interp_cspline, x_.size()));
    accel_.reset(gsl_interp_accel_alloc());
    if (gsl_interp_init(interp_.get(), x_.data(), y_.data(), x_.size()) != GSL_SUCCESS)
      throw std::invalid_argument("CubicSpline: abscissae must be strictly increasing");
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  double operator()(double x) const {
    if (x < x_.front() || x > x_.back())
      throw Error(ErrorKind::invalid_domain,
                  "table does not cover x = " + std::to_string(x));
    return gsl_interp_eval(interp_.get(), x_.data(), y_.data(), x, accel_.get());
  }

 private:
  struct InterpDeleter {
    void operator()(gsl_interp* p) const { gsl_interp_free(p); }
  };
  struct AccelDeleter {
    void operator()(gsl_interp_accel* p) const { gsl_interp_accel_free(p); }
  };
  std::vector<double> x_, y_;
  std::unique_ptr<gsl_interp, InterpDeleter> interp_;
  std::unique_ptr<gsl_interp_accel, AccelDeleter> accel_;
};

}  // namespace pdmph
