#include "nlh/assembly.hpp"

#include <cmath>

namespace nlh {

Eigen::MatrixXd HermitianOperator::real_view() const {
  if (!real) throw NumericalError("real_view on a genuinely complex operator");
  return M.real();
}

double HermitianOperator::hermiticity_defect() const {
  double num = (M - M.adjoint()).cwiseAbs().maxCoeff();
  double den = M.cwiseAbs().maxCoeff();
  return den > 0 ? num / den : 0.0;
}

namespace {

bool theta_is_zero(const Pt& theta) { return theta[0] == 0.0 && theta[1] == 0.0; }

struct WeightAccess {
  const CellGeometry& g;
  const CoefficientField& c;
  const PairTables* tables;
  double p(int i, int k) const { return tables ? tables->p(i, k) : c.p_at(g, i, k); }
  double lambda0(int i, int k) const {
    return tables ? tables->lambda0(i, k) : c.lambda0_at(g, i, k);
  }
};

// m(y_i) = 2 sum_k fold(a)(y_k - y_i) W(i, k) n^{-d}, same quadrature as the
// coupling part so that row-sum identities hold exactly
Eigen::VectorXd multiplier_on(const std::vector<int>& rows, const CellGeometry& g,
                              const Eigen::VectorXd& fold0,
                              const std::function<double(int, int)>& W) {
  int total = g.num_cells();
  double ndinv = 1.0 / total;
  Eigen::VectorXd m(rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    int i = rows[a];
    double acc = 0.0;
    for (int k = 0; k < total; ++k) acc += fold0[g.diff_index(i, k)] * W(i, k);
    m[a] = 2.0 * acc * ndinv;
  }
  return m;
}

HermitianOperator assemble_on_cells(const CellGeometry& g, const KernelSpec& spec,
                                    const Pt& theta, const std::vector<int>& cells,
                                    const std::function<double(int, int)>& W,
                                    BasisKind basis) {
  int total = g.num_cells();
  double ndinv = 1.0 / total;
  Eigen::VectorXd fold0 = periodize(spec, g.n);
  bool zero = theta_is_zero(theta);
  Eigen::VectorXcd foldt =
      zero ? fold0.cast<std::complex<double>>() : periodize_phase(spec, theta, g.n);

  HermitianOperator op;
  op.basis = basis;
  op.real = zero;
  op.cells = cells;
  op.theta = theta;
  op.n = g.n;
  op.d = g.d;
  op.diag_multiplier = multiplier_on(cells, g, fold0, W);

  int m = static_cast<int>(cells.size());
  op.M.resize(m, m);
  for (int a = 0; a < m; ++a) {
    int i = cells[a];
    for (int b = a; b < m; ++b) {
      int k = cells[b];
      std::complex<double> v = -2.0 * foldt[g.diff_index(i, k)] * W(i, k) * ndinv;
      if (a == b) {
        op.M(a, a) = v + op.diag_multiplier[a];
      } else {
        op.M(a, b) = v;
        op.M(b, a) = std::conj(v);
      }
    }
  }
  return op;
}

}  // namespace

HermitianOperator assemble_soft_periodic(const CellGeometry& g, const CoefficientField& c,
                                         const KernelSpec& spec, const PairTables* tables) {
  return assemble_soft_fiber(g, c, spec, Pt{0.0, 0.0}, tables);
}

HermitianOperator assemble_soft_fiber(const CellGeometry& g, const CoefficientField& c,
                                      const KernelSpec& spec, const Pt& theta,
                                      const PairTables* tables) {
  if (g.soft_cells.empty()) throw ConfigError("assemble_soft_fiber: empty soft mask");
  WeightAccess wa{g, c, tables};
  auto W = [&wa](int i, int k) { return wa.p(i, k); };
  return assemble_on_cells(g, spec, theta, g.soft_cells, W, BasisKind::SoftCells);
}

HermitianOperator assemble_fiber(const CellGeometry& g, const CoefficientField& c,
                                 const KernelSpec& spec, double eps, const Pt& theta,
                                 const PairTables* tables) {
  if (eps <= 0.0) throw ConfigError("assemble_fiber: eps must be positive");
  WeightAccess wa{g, c, tables};
  double contrast = 1.0 / (eps * eps);
  auto W = [&wa, contrast](int i, int k) {
    return contrast * wa.lambda0(i, k) + wa.p(i, k);
  };
  std::vector<int> all(g.num_cells());
  for (int i = 0; i < g.num_cells(); ++i) all[i] = i;
  auto op = assemble_on_cells(g, spec, theta, all, W, BasisKind::FullCell);
  op.eps = eps;
  return op;
}

HermitianOperator assemble_homogenized_fiber(const CellGeometry& g, const CoefficientField& c,
                                             const KernelSpec& spec, double eps, const Pt& theta,
                                             const Eigen::Matrix2d& Ahom,
                                             const PairTables* tables) {
  if (eps <= 0.0) throw ConfigError("assemble_homogenized_fiber: eps must be positive");
  {
    Eigen::Matrix2d S = Ahom.topLeftCorner(g.d, g.d) +
                        Ahom.topLeftCorner(g.d, g.d).transpose();
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * S)
                             .eigenvalues();
    if (ev.minCoeff() <= 0.0)
      throw ConfigError("assemble_homogenized_fiber: effective matrix not positive definite");
  }

  WeightAccess wa{g, c, tables};
  int total = g.num_cells();
  double ndinv = 1.0 / total;
  int ns = static_cast<int>(g.soft_cells.size());
  int nst = total - ns;
  bool zero = theta_is_zero(theta);
  Eigen::VectorXd fold0 = periodize(spec, g.n);
  Eigen::VectorXcd foldt =
      zero ? fold0.cast<std::complex<double>>() : periodize_phase(spec, theta, g.n);

  // soft-soft block of the p-weighted fiber operator
  auto Wp = [&wa](int i, int k) { return wa.p(i, k); };
  HermitianOperator soft = assemble_on_cells(g, spec, theta, g.soft_cells, Wp,
                                             BasisKind::SoftCells);

  HermitianOperator op;
  op.basis = BasisKind::ConstPlusSoft;
  op.real = zero;
  op.cells = g.soft_cells;
  op.eps = eps;
  op.theta = theta;
  op.n = g.n;
  op.d = g.d;
  op.M = Eigen::MatrixXcd::Zero(1 + ns, 1 + ns);
  op.M.bottomRightCorner(ns, ns) = soft.M;

  // multiplication part on stiff rows (p-weight)
  std::vector<int> stiff = g.stiff_cells;
  Eigen::VectorXd m_stiff = multiplier_on(stiff, g, fold0, Wp);

  // cross block: sum over stiff rows of the coupling against each soft cell
  double inv_sqrt_nst = 1.0 / std::sqrt(double(nst));
  for (int b = 0; b < ns; ++b) {
    int k = g.soft_cells[b];
    std::complex<double> acc = 0.0;
    for (int i : stiff) acc += -2.0 * foldt[g.diff_index(i, k)] * wa.p(i, k) * ndinv;
    op.M(0, 1 + b) = acc * inv_sqrt_nst;
    op.M(1 + b, 0) = std::conj(op.M(0, 1 + b));
  }

  // constant-constant entry: stiff-stiff couplings vanish (p = 0 there)
  double v00 = m_stiff.sum() / nst;
  double th2 = 0.0;
  {
    Eigen::Vector2d tv(theta[0], theta[1]);
    th2 = tv.head(g.d).dot(Ahom.topLeftCorner(g.d, g.d) * tv.head(g.d));
  }
  v00 += th2 / (eps * eps) * (double(total) / nst);
  op.M(0, 0) = v00;
  return op;
}

Eigen::MatrixXd assemble_stiff_form(const CellGeometry& g, const CoefficientField& c,
                                    const KernelSpec& spec, const PairTables* tables) {
  if (g.stiff_cells.empty()) throw ConfigError("assemble_stiff_form: empty stiff mask");
  WeightAccess wa{g, c, tables};
  int total = g.num_cells();
  double scale = 1.0 / (double(total) * total);
  Eigen::VectorXd fold0 = periodize(spec, g.n);

  int m = static_cast<int>(g.stiff_cells.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    int i = g.stiff_cells[a];
    double diag = 0.0;
    for (int b = 0; b < m; ++b) {
      int k = g.stiff_cells[b];
      if (a == b) continue;
      double coup = fold0[g.diff_index(i, k)] * wa.lambda0(i, k);
      diag += coup;
      if (b > a) {
        A(a, b) = -2.0 * coup * scale;
        A(b, a) = A(a, b);
      }
    }
    A(a, a) = 2.0 * diag * scale;
  }
  return A;
}

Eigen::MatrixXd SubspaceBasis::projector() const {
  double ndinv = 1.0 / Psi.rows();
  return Psi * (ndinv * Psi.transpose());
}

SubspaceBasis make_v0_basis(const CellGeometry& g) {
  int total = g.num_cells();
  int ns = static_cast<int>(g.soft_cells.size());
  int nst = total - ns;
  SubspaceBasis b;
  b.soft_cells = g.soft_cells;
  b.n = g.n;
  b.d = g.d;
  b.Psi = Eigen::MatrixXd::Zero(total, 1 + ns);
  double c0 = std::sqrt(double(total) / nst);
  for (int i : g.stiff_cells) b.Psi(i, 0) = c0;
  double cs = std::sqrt(double(total));
  for (int a = 0; a < ns; ++a) b.Psi(g.soft_cells[a], 1 + a) = cs;
  return b;
}

TruncatedOperator assemble_truncated(const CellGeometry& g, const CoefficientField& c,
                                     const KernelSpec& spec, const TruncatedRegion& region) {
  int n = g.n;
  double extent = region.periods[0];
  for (int ax = 0; ax < g.d; ++ax) {
    if (region.periods[ax] < 1) throw ConfigError("assemble_truncated: region needs >= 1 period");
    extent = std::min(extent, double(region.periods[ax]));
  }
  double L = region.kernel_cutoff;
  if (L <= 0) L = std::min(spec.compact_support() ? spec.support_radius() : extent, extent);
  if (region.kind == TruncatedRegion::Kind::Orthant && extent < L)
    throw ConfigError("assemble_truncated: orthant window smaller than kernel cutoff");

  // region cells along each axis in lattice units (cell index offsets)
  auto axis_cells = [&](int ax) {
    int count = region.periods[ax] * n;
    std::vector<int> idx(count);
    for (int i = 0; i < count; ++i)
      idx[i] = (region.kind == TruncatedRegion::Kind::Orthant && region.sign[ax] < 0)
                   ? -count + i
                   : i;
    return idx;
  };

  std::vector<Pt> pts;
  std::vector<int> base_cells;  // periodic cell id of each point
  auto base_of = [&](int ux, int uy) {
    int bx = ((ux % n) + n) % n;
    if (g.d == 1) return bx;
    int by = ((uy % n) + n) % n;
    return bx * n + by;
  };
  auto xs = axis_cells(0);
  std::vector<int> ys = g.d == 2 ? axis_cells(1) : std::vector<int>{0};
  for (int ux : xs)
    for (int uy : ys) {
      int bc = base_of(ux, uy);
      if (g.is_stiff(bc)) continue;
      pts.push_back({(ux + 0.5) / n, g.d == 2 ? (uy + 0.5) / n : 0.0});
      base_cells.push_back(bc);
    }
  if (pts.empty()) throw ConfigError("assemble_truncated: region contains no soft cell");

  // truncated kernel a_L and its multiplication part m_L, folded with the
  // same midpoint quadrature as the coupling term
  auto aL = [&](const Pt& z) {
    if (std::abs(z[0]) > L || (g.d == 2 && std::abs(z[1]) > L)) return 0.0;
    return spec(z);
  };
  int JL = static_cast<int>(std::ceil(L)) + 1;
  int total = g.num_cells();
  double ndinv = 1.0 / total;
  // fold of a_L on the offset lattice
  Eigen::VectorXd foldL = Eigen::VectorXd::Zero(total);
  for (int m = 0; m < total; ++m) {
    int mx = g.d == 1 ? m : m / n;
    int my = g.d == 1 ? 0 : m % n;
    for (int jx = -JL; jx <= JL; ++jx)
      for (int jy = (g.d == 1 ? 0 : -JL); jy <= (g.d == 1 ? 0 : JL); ++jy)
        foldL[m] += aL({double(mx) / n + jx, g.d == 2 ? double(my) / n + jy : 0.0});
  }
  Eigen::VectorXd mL(total);
  for (int i = 0; i < total; ++i) {
    double acc = 0.0;
    for (int k = 0; k < total; ++k) acc += foldL[g.diff_index(i, k)] * c.p_at(g, i, k);
    mL[i] = 2.0 * acc * ndinv;
  }

  int m = static_cast<int>(pts.size());
  TruncatedOperator out;
  out.cutoff_L = L;
  out.points = pts;
  out.op.basis = BasisKind::TruncatedSoft;
  out.op.real = true;
  out.op.n = n;
  out.op.d = g.d;
  out.op.cells = base_cells;
  out.op.diag_multiplier.resize(m);
  out.op.M = Eigen::MatrixXcd::Zero(m, m);

  for (int a = 0; a < m; ++a) out.op.diag_multiplier[a] = mL[base_cells[a]];
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      Pt dz = pts[b] - pts[a];
      double av = aL(dz);
      double v = 0.0;
      if (av != 0.0) v = -2.0 * av * c.p_at(g, base_cells[a], base_cells[b]) * ndinv;
      if (a == b)
        out.op.M(a, a) = v + out.op.diag_multiplier[a];
      else if (v != 0.0) {
        out.op.M(a, b) = v;
        out.op.M(b, a) = v;
      }
    }
  }

  double pmax = 0.0;
  for (int a = 0; a < m; ++a) pmax = std::max(pmax, std::abs(mL[base_cells[a]]));
  double tail0 = spec.compact_support() && L >= spec.support_radius() ? 0.0
                                                                      : tail_mass0(spec, L);
  double wmax = c.alpha2 > 0 ? c.alpha2 : 1.0 + pmax;
  out.m_deficit_bound = 2.0 * wmax * tail0;
  out.operator_tail_bound = 4.0 * wmax * tail0;
  return out;
}

}  // namespace nlh
