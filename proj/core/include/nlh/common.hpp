#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nlh {

/// Bad or inconsistent user input (config file, parameters, preconditions).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical contract was violated (quadrature failure, lost coercivity,
/// assembled-matrix sanity check failing).  Signals a bug or an
/// ill-conditioned configuration, not bad user input.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested a documented unsupported case (e.g. non-diagonal effective
/// matrix in the d=2 box spectrum).
class UnsupportedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A point in the cell; only the first `d` coordinates are meaningful.
using Pt = std::array<double, 2>;

inline double norm(const Pt& p, int d) {
  return d == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

inline Pt operator+(const Pt& a, const Pt& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Pt operator-(const Pt& a, const Pt& b) { return {a[0] - b[0], a[1] - b[1]}; }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Degree used by parallel loops: explicit argument wins, then the
/// NLH_PARALLEL environment variable, then single-threaded.
int parallel_degree(int requested = 0);

/// Index-parallel loop with deterministic result placement: body(i) writes
/// only to slot i of caller-owned storage, so the output is identical for
/// every degree.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int degree = 0);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string format_double(double v);

}  // namespace nlh
