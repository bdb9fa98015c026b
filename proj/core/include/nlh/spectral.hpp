#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlh/assembly.hpp"
#include "nlh/corrector.hpp"

namespace nlh {

struct SpectralPoint {
  double value = 0.0;
  int multiplicity = 1;
};

/// Finite union of closed intervals and isolated points on the real line.
/// Membership and distance queries are exact on the stored representation.
struct SpectralSet {
  std::vector<Interval> intervals;
  std::vector<SpectralPoint> points;
  std::string provenance;

  static SpectralSet from_eigenvalues(const Eigen::VectorXd& w, double mult_tol = 1e-9);

  bool empty() const { return intervals.empty() && points.empty(); }
  /// sorts, merges overlapping intervals, absorbs interior points
  void normalize(double merge_tol = 0.0);
  SpectralSet unite(const SpectralSet& other) const;
  SpectralSet truncated(double lo, double hi) const;
  double min_value() const;
  double max_value() const;
  double distance(double x) const;
  bool contains(double x, double tol = 0.0) const;
  /// sup over this set of the distance to other (one-sided deviation)
  double sup_deviation_to(const SpectralSet& other) const;
};

/// Closure of the sampled values of a multiplier, merged into intervals.
/// gap_tol < 0 picks 2/n times a robust Lipschitz estimate of the samples.
SpectralSet essential_range(const Eigen::VectorXd& values, int n, double gap_tol = -1.0);

/// All eigenvalues, ascending (real symmetric fast path when flagged).
Eigen::VectorXd eigenvalues_of(const HermitianOperator& op);
void eigen_decompose(const HermitianOperator& op, Eigen::VectorXd& w, Eigen::MatrixXcd& V);

SpectralSet spectrum(const HermitianOperator& op, std::optional<Interval> window = std::nullopt);

/// Eigenvalues at distance > tol from the essential set.
SpectralSet discrete_spectrum(const SpectralSet& spec, const SpectralSet& ess, double tol);

/// Classification tolerance max(1e-6, c/n) with c calibrated on the
/// rank-one example.
double classification_tolerance(int n);

enum class MinMaxSide { Below, Above };
/// k-th min-max (Below) or max-min (Above) Rayleigh value, 1-indexed.
double rayleigh_minmax(const HermitianOperator& op, int k, MinMaxSide side);

/// Sampled dispersion function beta(lambda) = lambda + lambda^2 <b_lambda>
/// with (A_soft - lambda) b_lambda = 1_soft, plus its pole/root structure.
struct BetaTable {
  std::vector<double> lambda, beta, mean_resolvent;
  std::vector<std::uint8_t> near_pole;
  std::vector<double> poles;      // mass-carrying eigenvalue clusters, ascending
  std::vector<double> pole_mass;
  std::vector<double> roots;      // sign changes of beta between poles
  double soft_volume = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double spectral_radius = 0.0;
  // spectral data backing fast evaluation
  std::vector<double> eigs, mass;
  double eval(double lambda) const;        // via the spectral representation
  double eval_mean_resolvent(double lambda) const;
  bool is_pole(double lambda, double tol) const;
};

struct BetaSample {
  double beta = 0.0;
  double mean_resolvent = 0.0;
};

/// Direct evaluation through the resolvent solve (the implementation route;
/// the tabulated spectral representation is the independent cross-check).
BetaSample beta_value(const HermitianOperator& soft_op, const CellGeometry& g, double lambda,
                      double pole_tol_rel = 1e-6);

BetaTable tabulate_beta(const HermitianOperator& soft_op, const CellGeometry& g,
                        double lambda_max, int samples_per_gap = 32,
                        double pole_mass_tol = 1e-14, double pole_tol_rel = 1e-6,
                        double lambda_min = -1.0);

/// {beta >= 0} as a union of [root, pole] intervals, truncated to lambda_max.
SpectralSet beta_nonneg_set(const BetaTable& bt, double lambda_max);

/// {beta >= 0} united with the whole-space soft spectrum (theta-sweep union).
SpectralSet limit_spectrum_wholespace(const BetaTable& bt, const SpectralSet& soft_union,
                                      double lambda_max);

/// {beta >= 0} united with the periodic soft spectrum (two-scale limit set).
SpectralSet two_scale_limit_spectrum(const BetaTable& bt, const SpectralSet& periodic_spectrum,
                                     double lambda_max);

/// Solutions of beta(lambda) = target below lambda_max, one per pole gap.
std::vector<double> beta_preimages(const BetaTable& bt, double target, double lambda_max);

/// Dirichlet spectrum route for a rectangular box with integer sides:
/// {lambda : beta(lambda) in Sp(Dirichlet Laplacian with Ahom)} united with
/// the orthant spectra.  d = 2 requires diagonal Ahom.
SpectralSet box_limit_spectrum(const BetaTable& bt, const HomogenizedMatrix& Ahom,
                               const std::vector<int>& box_lengths,
                               const std::vector<SpectralSet>& orthant_spectra,
                               double lambda_max);

/// Dirichlet eigenvalues sum_i Ahom_ii (pi k_i / l_i)^2 up to the cap.
std::vector<double> box_dirichlet_values(const HomogenizedMatrix& Ahom,
                                         const std::vector<int>& box_lengths, double cap);

/// max of the two one-sided deviations of the window truncations; an empty
/// truncation contributes 0.
double hausdorff_distance(const SpectralSet& s1, const SpectralSet& s2, double Lambda);

struct QuasimodeBound {
  double epsilon = 0.0;
  double bound = 0.0;
  bool valid = false;  // epsilon < 1
};

/// Residual-based distance certificate for a nonnegative self-adjoint
/// operator: dist(lambda, Sp) <= |lambda+1| eps / (1-eps).
QuasimodeBound quasimode_distance(const HermitianOperator& op, const Eigen::VectorXcd& u,
                                  double lambda);

struct LimitResolventSolution {
  Eigen::VectorXd u;       // macroscopic part on the interior FD grid
  Eigen::MatrixXd z;       // per-x soft profiles (mx rows, n columns, zero off soft)
  Eigen::VectorXd x_grid;
  double beta = 0.0;
  double residual = 0.0;
  bool near_singular = false;
};

/// Coupled-system resolvent at lambda < 0 on a 1d box via the reduced
/// second-order equation; verifies the coupled residual afterwards.
LimitResolventSolution solve_limit_resolvent(const CellGeometry& g, const CoefficientField& c,
                                             const KernelSpec& spec,
                                             const HomogenizedMatrix& Ahom, double lambda,
                                             const Eigen::MatrixXd& f, int box_length, int mx);

}  // namespace nlh
