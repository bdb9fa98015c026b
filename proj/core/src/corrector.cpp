#include "nlh/corrector.hpp"

#include <cmath>

#include "nlh/eig.hpp"

namespace nlh {

CorrectorSet solve_corrector(const Eigen::MatrixXd& stiff_form, const CellGeometry& g,
                             const KernelSpec& spec, const CoefficientField& c) {
  int m = static_cast<int>(stiff_form.rows());
  if (m != static_cast<int>(g.stiff_cells.size()))
    throw ConfigError("solve_corrector: stiff form does not match the geometry");

  {
    Eigen::VectorXd ev = sym_eigenvalues(stiff_form);
    double scale = std::max(std::abs(ev[0]), std::abs(ev[m - 1]));
    if (m < 2 || ev[1] <= 1e-10 * scale)
      throw NumericalError(
          "solve_corrector: stiff form not coercive on the zero-mean subspace "
          "(kernel-connectivity of the stiff set is violated)");
  }

  int total = g.num_cells();
  double scale2 = 2.0 / (double(total) * total);

  CorrectorSet cs;
  cs.stiff_cells = g.stiff_cells;
  cs.d = g.d;
  cs.n = g.n;

  // augmented symmetric-indefinite system enforcing zero mean
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + 1, m + 1);
  K.topLeftCorner(m, m) = stiff_form;
  for (int a = 0; a < m; ++a) K(a, m) = K(m, a) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

  for (int axis = 0; axis < g.d; ++axis) {
    Eigen::VectorXd fold1 = periodize_moment1(spec, axis, g.n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    for (int a = 0; a < m; ++a) {
      int i = g.stiff_cells[a];
      double acc = 0.0;
      for (int b = 0; b < m; ++b) {
        int l = g.stiff_cells[b];
        acc += fold1[g.diff_index(i, l)] * c.lambda0_at(g, i, l);
      }
      rhs[a] = acc * scale2;
    }
    Eigen::VectorXd sol = lu.solve(rhs);
    Eigen::VectorXd chi = sol.head(m);
    chi.array() -= chi.mean();

    Eigen::VectorXd resid = stiff_form * chi - rhs.head(m);
    double rn = rhs.head(m).norm();
    cs.chi.push_back(chi);
    cs.residuals.push_back(rn > 0 ? resid.norm() / rn : resid.norm());
  }
  return cs;
}

HomogenizedMatrix homogenized_matrix(const CorrectorSet& cs, const CellGeometry& g,
                                     const KernelSpec& spec, const CoefficientField& c) {
  if (static_cast<int>(cs.chi.size()) != g.d)
    throw ConfigError("homogenized_matrix: corrector set does not match the geometry");
  int m = static_cast<int>(g.stiff_cells.size());
  int total = g.num_cells();
  double scale = 1.0 / (double(total) * total);

  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  for (int i = 0; i < g.d; ++i)
    for (int j = 0; j < g.d; ++j) {
      Eigen::VectorXd fold2 = periodize_moment2(spec, i, j, g.n);
      Eigen::VectorXd fold1 = periodize_moment1(spec, j, g.n);
      double acc = 0.0;
      for (int a = 0; a < m; ++a) {
        int ia = g.stiff_cells[a];
        for (int b = 0; b < m; ++b) {
          int ib = g.stiff_cells[b];
          double lam = c.lambda0_at(g, ia, ib);
          if (lam == 0.0) continue;
          int off = g.diff_index(ia, ib);
          acc += (fold2[off] + fold1[off] * (cs.chi[i][b] - cs.chi[i][a])) * lam;
        }
      }
      A(i, j) = acc * scale;
    }

  HomogenizedMatrix H;
  H.d = g.d;
  Eigen::Matrix2d At = A.transpose();
  H.asymmetry = (A - At).cwiseAbs().maxCoeff();
  H.A = 0.5 * (A + At);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.A.topLeftCorner(g.d, g.d));
  H.coercivity_floor = es.eigenvalues().minCoeff();
  if (H.coercivity_floor <= 0.0)
    throw NumericalError("homogenized_matrix: effective matrix is not positive definite");
  return H;
}

double stiff_energy(const CorrectorSet& cs, const CellGeometry& g, const KernelSpec& spec,
                    const CoefficientField& c, const Pt& eta) {
  int m = static_cast<int>(g.stiff_cells.size());
  int total = g.num_cells();
  double scale = 1.0 / (double(total) * total);

  Eigen::VectorXd chi_eta = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < g.d; ++i) chi_eta += eta[i] * cs.chi[i];

  Eigen::VectorXd fold0 = periodize(spec, g.n);
  std::vector<Eigen::VectorXd> fold1(g.d), fold2(g.d * g.d);
  for (int i = 0; i < g.d; ++i) fold1[i] = periodize_moment1(spec, i, g.n);
  for (int i = 0; i < g.d; ++i)
    for (int j = 0; j < g.d; ++j) fold2[i * g.d + j] = periodize_moment2(spec, i, j, g.n);

  double acc = 0.0;
  for (int a = 0; a < m; ++a) {
    int ia = g.stiff_cells[a];
    for (int b = 0; b < m; ++b) {
      int ib = g.stiff_cells[b];
      double lam = c.lambda0_at(g, ia, ib);
      if (lam == 0.0) continue;
      int off = g.diff_index(ia, ib);
      double quad = 0.0, lin = 0.0;
      for (int i = 0; i < g.d; ++i) {
        lin += eta[i] * fold1[i][off];
        for (int j = 0; j < g.d; ++j) quad += eta[i] * eta[j] * fold2[i * g.d + j][off];
      }
      double dchi = chi_eta[b] - chi_eta[a];
      acc += (quad + 2.0 * lin * dchi + fold0[off] * dchi * dchi) * lam;
    }
  }
  return acc * scale;
}

}  // namespace nlh
