#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "nlh/coefficients.hpp"
#include "nlh/geometry.hpp"
#include "nlh/kernel.hpp"

namespace nlh {

enum class BasisKind { FullCell, SoftCells, ConstPlusSoft, TruncatedSoft };

/// Dense self-adjoint matrix of a discretized operator, with the grid
/// metadata needed to interpret it.
struct HermitianOperator {
  Eigen::MatrixXcd M;
  BasisKind basis = BasisKind::SoftCells;
  bool real = false;  // imaginary parts are identically zero
  std::vector<int> cells;             // grid cells backing the basis
  Eigen::VectorXd diag_multiplier;    // multiplication part m(y) when meaningful
  double eps = 0.0;
  Pt theta{0.0, 0.0};
  int n = 0;
  int d = 1;

  int dim() const { return static_cast<int>(M.rows()); }
  Eigen::MatrixXd real_view() const;
  double hermiticity_defect() const;  // max |M - M*| / max |M|
};

/// Midpoint-rule Nystrom matrix of the periodic soft-component operator
/// m(y) z(y) - 2 int fold(a)(xi - y) p(y, xi) z(xi) dxi  on the soft cells.
HermitianOperator assemble_soft_periodic(const CellGeometry& g, const CoefficientField& c,
                                         const KernelSpec& spec,
                                         const PairTables* tables = nullptr);

/// Quasimomentum fiber of the soft operator: the fold carries the phase
/// e^{i theta.(z+j)} per lattice shift.  theta = 0 coincides with
/// assemble_soft_periodic entrywise.
HermitianOperator assemble_soft_fiber(const CellGeometry& g, const CoefficientField& c,
                                      const KernelSpec& spec, const Pt& theta,
                                      const PairTables* tables = nullptr);

/// Fiber of the full high-contrast operator on the whole cell grid, weight
/// eps^{-2} lambda0 + p.
HermitianOperator assemble_fiber(const CellGeometry& g, const CoefficientField& c,
                                 const KernelSpec& spec, double eps, const Pt& theta,
                                 const PairTables* tables = nullptr);

/// Effective fiber on constants + soft cells: scalar block
/// eps^{-2} (Ahom theta . theta) coupling the constant mode plus the
/// p-weighted fiber form, assembled in an L2-orthonormal basis.
HermitianOperator assemble_homogenized_fiber(const CellGeometry& g, const CoefficientField& c,
                                             const KernelSpec& spec, double eps, const Pt& theta,
                                             const Eigen::Matrix2d& Ahom,
                                             const PairTables* tables = nullptr);

struct TruncatedRegion {
  enum class Kind { Box, Orthant } kind = Kind::Box;
  /// Box: periods per axis (N * l_i).  Orthant: window periods per axis.
  std::array<int, 2> periods{8, 8};
  /// Orthant direction per axis: +1 keeps [0, window), -1 keeps (-window, 0].
  std::array<int, 2> sign{+1, +1};
  /// Kernel truncation half-side L; -1 picks min(support, smallest extent).
  double kernel_cutoff = -1.0;
};

struct TruncatedOperator {
  HermitianOperator op;
  std::vector<Pt> points;       // physical midpoints of the basis cells
  double cutoff_L = 0.0;
  double m_deficit_bound = 0.0;    // sup |m - m_L| bound
  double operator_tail_bound = 0.0;  // norm bound for the dropped kernel tail
};

/// Non-periodic Nystrom matrix of the soft operator on a box or orthant
/// region; the region indicator multiplies the integral term, the
/// multiplication part keeps the truncated m_L.
TruncatedOperator assemble_truncated(const CellGeometry& g, const CoefficientField& c,
                                     const KernelSpec& spec, const TruncatedRegion& region);

/// Galerkin matrix of the stiff-pair energy form on piecewise constants over
/// stiff cells (positive semidefinite, constants in the kernel).
Eigen::MatrixXd assemble_stiff_form(const CellGeometry& g, const CoefficientField& c,
                                    const KernelSpec& spec, const PairTables* tables = nullptr);

/// Orthonormal basis of V0 = {functions constant on the stiff set}:
/// normalized stiff indicator followed by normalized soft-cell indicators.
struct SubspaceBasis {
  Eigen::MatrixXd Psi;  // num_cells x (1 + n_soft), n^{-d} Psi^T Psi = I
  std::vector<int> soft_cells;
  int n = 0;
  int d = 1;
  Eigen::MatrixXd projector() const;  // L2-orthogonal projector onto V0
};

SubspaceBasis make_v0_basis(const CellGeometry& g);

}  // namespace nlh
