#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nlh/assembly.hpp"

namespace nlh {

/// Cell correctors on the stiff component, one per coordinate, zero-mean.
struct CorrectorSet {
  std::vector<Eigen::VectorXd> chi;  // d vectors on stiff cells
  std::vector<double> residuals;     // relative Galerkin residuals
  std::vector<int> stiff_cells;
  int d = 1;
  int n = 0;
};

struct HomogenizedMatrix {
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();  // top-left d x d block
  int d = 1;
  double coercivity_floor = 0.0;  // smallest eigenvalue
  double asymmetry = 0.0;         // |A - A^T|_max before symmetrization
};

/// Solves the coordinate corrector problems in the zero-mean stiff subspace.
/// The stiff form must be coercive there (checked; throws NumericalError).
CorrectorSet solve_corrector(const Eigen::MatrixXd& stiff_form, const CellGeometry& g,
                             const KernelSpec& spec, const CoefficientField& c);

/// Effective diffusion matrix of the stiff component from the corrector
/// quadrature; symmetrized, positive definiteness verified.
HomogenizedMatrix homogenized_matrix(const CorrectorSet& chi, const CellGeometry& g,
                                     const KernelSpec& spec, const CoefficientField& c);

/// Energy of eta.y + chi^eta in the stiff form; equals Ahom eta.eta for the
/// discrete corrector (identity used as a cross-check).
double stiff_energy(const CorrectorSet& chi, const CellGeometry& g, const KernelSpec& spec,
                    const CoefficientField& c, const Pt& eta);

}  // namespace nlh
