#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nlh/common.hpp"

namespace nlh {

enum class KernelFamily { Indicator, Tent, Table, Windowed, Exponential, PowerLaw };

/// Even, nonnegative convolution profile with an ellipticity floor
/// a >= c_a on |x| < r_a.  All lengths are in cell units.
struct KernelSpec {
  int d = 1;
  KernelFamily family = KernelFamily::Indicator;

  // indicator: height * 1_{|x| <= radius}
  double radius = 1.0;
  double height = 0.5;

  // table: radial abscissae/values, linear interpolation, zero past the end
  std::vector<double> abscissae, values;

  // windowed (d = 1 only): union of {lo, hi, height} on x >= 0, mirrored to x < 0,
  // plus an optional smooth bump at the origin restoring ellipticity
  std::vector<std::array<double, 3>> windows;
  double bump_weight = 0.0;
  double bump_radius = 0.0625;

  // exponential: exp(-rate |x|);  power law: (1 + |x|)^(-exponent)
  double rate = 1.0;
  double exponent = 3.5;

  double c_a = 0.0;
  double r_a = 0.0;
  std::optional<double> truncation_box;  // half-side L of the truncation box

  double operator()(const Pt& x) const;
  double radial(double r) const;
  double support_radius() const;  // infinity for unbounded families
  bool compact_support() const;
  bool third_moment_finite() const;
};

KernelSpec make_indicator(int d, double radius);
KernelSpec make_tent541();
KernelSpec make_windowed543(double kappa, double gamma_reg = 0.0);
KernelSpec make_table(int d, std::vector<double> abscissae, std::vector<double> values,
                      double c_a, double r_a);
KernelSpec make_exponential(int d, double rate);
KernelSpec make_powerlaw(int d, double exponent);

struct ValidationReport {
  struct Check {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Check> checks;
  bool all_pass = true;
  const Check* find(const std::string& name) const;
};

ValidationReport validate_kernel(const KernelSpec& spec, bool check_third_moment = false);

/// integral of a over R^d
double kernel_mass(const KernelSpec& spec);
/// g(r) = integral of a(xi) |xi|^2 over |xi| > r
double tail_mass(const KernelSpec& spec, double r);
/// integral of a over |xi| > r
double tail_mass0(const KernelSpec& spec, double r);
/// integral of a(xi) |xi|^3
double third_moment(const KernelSpec& spec);
/// integral of a(xi) xi xi^T  (d x d, embedded in 2x2)
Eigen::Matrix2d second_moment_matrix(const KernelSpec& spec);

/// Decay-rate functions steering the fiber-approximation error: the
/// tail profile g, h(t) = sqrt(g(r(t))) with g(r(t))^{1/4}/r(t) = t,
/// h_hat(t) = t sup_{s>=t} h(s)/s and h_bar = max(h, h_hat).  For kernels
/// with a finite third moment all three collapse to h(t) = t.
struct RateFunctions {
  std::vector<double> t;
  std::vector<double> h, h_hat, h_bar;
  std::vector<double> r_of_t;
  bool third_moment_finite = true;
  double hbar_at(double tq) const;
};

RateFunctions rate_function(const KernelSpec& spec, double t_min = 1e-4, double t_max = 1.0,
                            int samples = 81,
                            std::optional<bool> force_tail_branch = std::nullopt);

/// Smallest lattice cutoff J with periodization tail below tol * mass.
int default_lattice_cutoff(const KernelSpec& spec, double tol = 1e-10);

/// Lattice-fold tables on the offset grid {m/n : m in [0,n)^d}, row-major.
/// periodize_phase carries the phase factor e^{i theta.(z+j)} per shift.
Eigen::VectorXcd periodize_phase(const KernelSpec& spec, const Pt& theta, int n, int J = -1,
                                 double tail_tol = 1e-10);
Eigen::VectorXd periodize(const KernelSpec& spec, int n, int J = -1, double tail_tol = 1e-10);
/// fold of a(z+j) (z+j)_axis  (odd)
Eigen::VectorXd periodize_moment1(const KernelSpec& spec, int axis, int n, int J = -1);
/// fold of a(z+j) (z+j)_i (z+j)_j  (even)
Eigen::VectorXd periodize_moment2(const KernelSpec& spec, int i, int j, int n, int J = -1);

}  // namespace nlh
