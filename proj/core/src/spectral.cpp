#include "nlh/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlh/eig.hpp"

namespace nlh {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SpectralSet SpectralSet::from_eigenvalues(const Eigen::VectorXd& w, double mult_tol) {
  SpectralSet s;
  double scale = w.size() ? std::max(1.0, w.cwiseAbs().maxCoeff()) : 1.0;
  double tol = mult_tol * scale;
  int i = 0;
  while (i < w.size()) {
    int j = i;
    while (j + 1 < w.size() && w[j + 1] - w[i] <= tol) ++j;
    double mid = 0.5 * (w[i] + w[j]);
    s.points.push_back({mid, j - i + 1});
    i = j + 1;
  }
  return s;
}

void SpectralSet::normalize(double merge_tol) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.lo <= merged.back().hi + merge_tol)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  intervals = std::move(merged);
  std::sort(points.begin(), points.end(),
            [](const SpectralPoint& a, const SpectralPoint& b) { return a.value < b.value; });
  std::vector<SpectralPoint> keep;
  for (const auto& p : points) {
    bool interior = false;
    for (const auto& iv : intervals)
      if (p.value >= iv.lo - merge_tol && p.value <= iv.hi + merge_tol) {
        interior = true;
        break;
      }
    if (!interior) {
      if (!keep.empty() && p.value - keep.back().value <= merge_tol)
        keep.back().multiplicity += p.multiplicity;
      else
        keep.push_back(p);
    }
  }
  points = std::move(keep);
}

SpectralSet SpectralSet::unite(const SpectralSet& other) const {
  SpectralSet s = *this;
  s.intervals.insert(s.intervals.end(), other.intervals.begin(), other.intervals.end());
  s.points.insert(s.points.end(), other.points.begin(), other.points.end());
  s.normalize();
  return s;
}

SpectralSet SpectralSet::truncated(double lo, double hi) const {
  SpectralSet s;
  s.provenance = provenance;
  for (const auto& iv : intervals) {
    double a = std::max(iv.lo, lo), b = std::min(iv.hi, hi);
    if (a <= b) s.intervals.push_back({a, b});
  }
  for (const auto& p : points)
    if (p.value >= lo && p.value <= hi) s.points.push_back(p);
  return s;
}

double SpectralSet::min_value() const {
  double v = kInf;
  if (!intervals.empty()) v = std::min(v, intervals.front().lo);
  if (!points.empty()) v = std::min(v, points.front().value);
  return v;
}

double SpectralSet::max_value() const {
  double v = -kInf;
  for (const auto& iv : intervals) v = std::max(v, iv.hi);
  if (!points.empty()) v = std::max(v, points.back().value);
  return v;
}

double SpectralSet::distance(double x) const {
  double d = kInf;
  for (const auto& iv : intervals) {
    if (x < iv.lo)
      d = std::min(d, iv.lo - x);
    else if (x > iv.hi)
      d = std::min(d, x - iv.hi);
    else
      return 0.0;
  }
  for (const auto& p : points) d = std::min(d, std::abs(x - p.value));
  return d;
}

bool SpectralSet::contains(double x, double tol) const { return distance(x) <= tol; }

double SpectralSet::sup_deviation_to(const SpectralSet& other) const {
  if (empty()) return 0.0;
  if (other.empty()) return kInf;

  // candidate maximizers: endpoints and isolated points of this set, plus the
  // centers of the other set's coverage gaps clipped into our intervals
  std::vector<double> candidates;
  for (const auto& p : points) candidates.push_back(p.value);
  std::vector<std::pair<double, double>> comp;  // other's components
  for (const auto& iv : other.intervals) comp.push_back({iv.lo, iv.hi});
  for (const auto& p : other.points) comp.push_back({p.value, p.value});
  std::sort(comp.begin(), comp.end());
  for (const auto& iv : intervals) {
    candidates.push_back(iv.lo);
    candidates.push_back(iv.hi);
    for (std::size_t i = 0; i + 1 < comp.size(); ++i) {
      double mid = 0.5 * (comp[i].second + comp[i + 1].first);
      if (mid > iv.lo && mid < iv.hi) candidates.push_back(mid);
    }
  }
  double dev = 0.0;
  for (double x : candidates) dev = std::max(dev, other.distance(x));
  return dev;
}

SpectralSet essential_range(const Eigen::VectorXd& values, int n, double gap_tol) {
  if (values.size() == 0) throw ConfigError("essential_range: empty sample");
  std::vector<double> v(values.data(), values.data() + values.size());

  if (gap_tol < 0) {
    // robust local-variation estimate from adjacent samples in cell order
    std::vector<double> diffs;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) diffs.push_back(std::abs(v[i + 1] - v[i]) * n);
    double lip = 0.0;
    if (!diffs.empty()) {
      std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
      lip = diffs[diffs.size() / 2];
    }
    double scale = *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
    gap_tol = std::max(2.0 / n * lip, 1e-10 * (1.0 + scale));
  }

  std::sort(v.begin(), v.end());
  SpectralSet s;
  s.provenance = "essential-range";
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] - v[j] <= gap_tol) ++j;
    double width = v[j] - v[i];
    if (width <= 1e-9 * (1.0 + std::abs(v[i])))
      s.points.push_back({0.5 * (v[i] + v[j]), 1});
    else
      s.intervals.push_back({v[i], v[j]});
    i = j + 1;
  }
  s.normalize();
  return s;
}

Eigen::VectorXd eigenvalues_of(const HermitianOperator& op) {
  return op.real ? sym_eigenvalues(op.real_view()) : herm_eigenvalues(op.M);
}

void eigen_decompose(const HermitianOperator& op, Eigen::VectorXd& w, Eigen::MatrixXcd& V) {
  if (op.real) {
    Eigen::MatrixXd Vr;
    sym_eig(op.real_view(), w, Vr);
    V = Vr.cast<std::complex<double>>();
  } else {
    herm_eig(op.M, w, V);
  }
}

SpectralSet spectrum(const HermitianOperator& op, std::optional<Interval> window) {
  Eigen::VectorXd w = eigenvalues_of(op);
  if (window) {
    std::vector<double> kept;
    for (int i = 0; i < w.size(); ++i)
      if (w[i] >= window->lo && w[i] <= window->hi) kept.push_back(w[i]);
    w = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  }
  SpectralSet s = SpectralSet::from_eigenvalues(w);
  s.provenance = "eigensolve";
  return s;
}

double classification_tolerance(int n) { return std::max(1e-6, 4.0 / n); }

SpectralSet discrete_spectrum(const SpectralSet& spec, const SpectralSet& ess, double tol) {
  SpectralSet s;
  s.provenance = "discrete";
  for (const auto& p : spec.points)
    if (ess.distance(p.value) > tol) s.points.push_back(p);
  return s;
}

double rayleigh_minmax(const HermitianOperator& op, int k, MinMaxSide side) {
  if (k < 1 || k > op.dim()) throw ConfigError("rayleigh_minmax: k out of range");
  Eigen::VectorXd w = eigenvalues_of(op);
  return side == MinMaxSide::Below ? w[k - 1] : w[op.dim() - k];
}

double BetaTable::eval(double lambda) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < eigs.size(); ++i) acc += mass[i] / (eigs[i] - lambda);
  return lambda + lambda * lambda * acc;
}

double BetaTable::eval_mean_resolvent(double lambda) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < eigs.size(); ++i) acc += mass[i] / (eigs[i] - lambda);
  return acc;
}

bool BetaTable::is_pole(double lambda, double tol) const {
  for (double p : poles)
    if (std::abs(lambda - p) <= tol) return true;
  return false;
}

BetaSample beta_value(const HermitianOperator& soft_op, const CellGeometry& g, double lambda,
                      double pole_tol_rel) {
  Eigen::MatrixXd A = soft_op.real_view();
  int m = static_cast<int>(A.rows());
  Eigen::VectorXd w = sym_eigenvalues(A);
  double specrad = std::max(std::abs(w[0]), std::abs(w[m - 1]));
  for (int i = 0; i < m; ++i)
    if (std::abs(w[i] - lambda) <= pole_tol_rel * std::max(specrad, 1.0)) {
      // mass-free eigenvalues do not obstruct the resolvent average, but the
      // linear solve does; fall through only if the solve stays bounded
      break;
    }
  Eigen::MatrixXd S = A - lambda * Eigen::MatrixXd::Identity(m, m);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd b = lu.solve(one);
  double resid = (S * b - one).norm();
  if (!b.allFinite() || resid > 1e-6 * std::sqrt(double(m)))
    throw NumericalError("beta_value: resolvent solve failed near lambda = " +
                         format_double(lambda));
  double mean = b.sum() / g.num_cells();
  BetaSample out;
  out.mean_resolvent = mean;
  out.beta = lambda + lambda * lambda * mean;
  return out;
}

BetaTable tabulate_beta(const HermitianOperator& soft_op, const CellGeometry& g,
                        double lambda_max, int samples_per_gap, double pole_mass_tol,
                        double pole_tol_rel, double lambda_min) {
  Eigen::VectorXd w;
  Eigen::MatrixXcd V;
  eigen_decompose(soft_op, w, V);
  int m = static_cast<int>(w.size());
  double ndinv = 1.0 / g.num_cells();

  BetaTable bt;
  bt.soft_volume = double(soft_op.cells.size()) * ndinv;
  bt.lambda_min = lambda_min;
  bt.lambda_max = lambda_max;
  bt.spectral_radius = std::max(std::abs(w[0]), std::abs(w[m - 1]));
  double pole_tol = pole_tol_rel * std::max(bt.spectral_radius, 1.0);

  // spectral masses mu_k = |<e_k, 1_soft>|^2 in the L2 normalization
  std::vector<std::pair<double, double>> massive;
  for (int k = 0; k < m; ++k) {
    double s = V.col(k).sum().real();
    double si = V.col(k).sum().imag();
    double mu = (s * s + si * si) * ndinv;
    bt.eigs.push_back(w[k]);
    bt.mass.push_back(mu);
    if (mu > pole_mass_tol) massive.push_back({w[k], mu});
  }
  // cluster mass-carrying eigenvalues into poles
  std::size_t i = 0;
  while (i < massive.size()) {
    std::size_t j = i;
    double msum = massive[i].second, mpos = massive[i].first * massive[i].second;
    while (j + 1 < massive.size() && massive[j + 1].first - massive[j].first <= pole_tol) {
      ++j;
      msum += massive[j].second;
      mpos += massive[j].first * massive[j].second;
    }
    bt.poles.push_back(mpos / msum);
    bt.pole_mass.push_back(msum);
    i = j + 1;
  }

  // sample each pole gap with geometric refinement toward both ends
  auto add_sample = [&](double x) {
    if (x < lambda_min || x > lambda_max) return;
    bt.lambda.push_back(x);
  };
  std::vector<double> cuts{lambda_min};
  for (double p : bt.poles)
    if (p > lambda_min && p < lambda_max) cuts.push_back(p);
  cuts.push_back(lambda_max);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    double gap = hi - lo;
    if (gap <= 0) continue;
    bool lo_is_pole = c > 0;
    bool hi_is_pole = c + 2 < cuts.size();
    double off_lo = lo_is_pole ? gap * 1e-7 : 0.0;
    double off_hi = hi_is_pole ? gap * 1e-7 : 0.0;
    for (int s = 0; s <= samples_per_gap; ++s) {
      double t = double(s) / samples_per_gap;
      // smooth clustering toward the pole ends
      double u = 0.5 - 0.5 * std::cos(M_PI * t);
      add_sample(lo + off_lo + (gap - off_lo - off_hi) * u);
    }
    // extra geometric ladder toward a pole on the right (blow-up side)
    if (hi_is_pole)
      for (double e : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
        add_sample(hi - gap * e);
    if (lo_is_pole)
      for (double e : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
        add_sample(lo + gap * e);
  }
  add_sample(0.0);
  std::sort(bt.lambda.begin(), bt.lambda.end());
  bt.lambda.erase(std::unique(bt.lambda.begin(), bt.lambda.end()), bt.lambda.end());

  for (double x : bt.lambda) {
    bt.mean_resolvent.push_back(bt.eval_mean_resolvent(x));
    bt.beta.push_back(x == 0.0 ? 0.0 : bt.eval(x));
    bt.near_pole.push_back(bt.is_pole(x, 1e-3 * std::max(bt.spectral_radius, 1.0)) ? 1 : 0);
  }

  // one root per pole gap (beta is increasing there, -inf to +inf)
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    double gap = hi - lo;
    if (gap <= 0) continue;
    bool lo_is_pole = c > 0;
    bool hi_is_pole = c + 2 < cuts.size();
    double a = lo + (lo_is_pole ? gap * 1e-12 : 0.0);
    double b = hi - (hi_is_pole ? gap * 1e-12 : 0.0);
    double fa = bt.eval(a), fb = bt.eval(b);
    if (fa > 0.0 || fb < 0.0) continue;  // no sign change inside this gap
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
      double mid = 0.5 * (a + b);
      (bt.eval(mid) < 0.0 ? a : b) = mid;
    }
    bt.roots.push_back(0.5 * (a + b));
  }
  return bt;
}

SpectralSet beta_nonneg_set(const BetaTable& bt, double lambda_max) {
  SpectralSet s;
  s.provenance = "beta-nonneg";
  std::vector<double> cuts{bt.lambda_min};
  for (double p : bt.poles)
    if (p > bt.lambda_min && p < lambda_max) cuts.push_back(p);
  cuts.push_back(lambda_max);
  std::size_t ri = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    // root inside this gap, if any
    double root = kInf;
    while (ri < bt.roots.size() && bt.roots[ri] < lo) ++ri;
    if (ri < bt.roots.size() && bt.roots[ri] <= hi) root = bt.roots[ri];
    if (root < kInf) {
      s.intervals.push_back({root, hi});
    } else {
      // no sign change: either all nonnegative or all negative in the gap
      double probe = bt.eval(0.5 * (lo + hi));
      if (probe >= 0.0) s.intervals.push_back({lo, hi});
    }
  }
  s.normalize();
  return s;
}

SpectralSet limit_spectrum_wholespace(const BetaTable& bt, const SpectralSet& soft_union,
                                      double lambda_max) {
  SpectralSet s = beta_nonneg_set(bt, lambda_max).unite(soft_union.truncated(-kInf, lambda_max));
  s.provenance = "limit-set";
  return s;
}

SpectralSet two_scale_limit_spectrum(const BetaTable& bt, const SpectralSet& periodic_spectrum,
                                     double lambda_max) {
  SpectralSet s =
      beta_nonneg_set(bt, lambda_max).unite(periodic_spectrum.truncated(-kInf, lambda_max));
  s.provenance = "two-scale-limit-set";
  return s;
}

std::vector<double> beta_preimages(const BetaTable& bt, double target, double lambda_max) {
  std::vector<double> out;
  std::vector<double> cuts{bt.lambda_min};
  for (double p : bt.poles)
    if (p > bt.lambda_min && p < lambda_max) cuts.push_back(p);
  cuts.push_back(lambda_max);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    double gap = hi - lo;
    if (gap <= 0) continue;
    bool lo_is_pole = c > 0;
    bool hi_is_pole = c + 2 < cuts.size();
    double a = lo + (lo_is_pole ? gap * 1e-12 : 0.0);
    double b = hi - (hi_is_pole ? gap * 1e-12 : 0.0);
    if (bt.eval(a) > target || bt.eval(b) < target) continue;
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
      double mid = 0.5 * (a + b);
      (bt.eval(mid) < target ? a : b) = mid;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

std::vector<double> box_dirichlet_values(const HomogenizedMatrix& Ahom,
                                         const std::vector<int>& box_lengths, double cap) {
  std::vector<double> vals;
  int d = Ahom.d;
  if (static_cast<int>(box_lengths.size()) != d)
    throw ConfigError("box_dirichlet_values: box length count must match dimension");
  if (d == 2 && std::abs(Ahom.A(0, 1)) > 1e-12 * Ahom.A.norm())
    throw UnsupportedError("box spectrum requires d = 1 or a diagonal effective matrix");
  auto term = [&](int axis, int k) {
    double l = box_lengths[axis];
    return Ahom.A(axis, axis) * M_PI * M_PI * k * k / (l * l);
  };
  if (d == 1) {
    for (int k = 1; term(0, k) <= cap; ++k) vals.push_back(term(0, k));
  } else {
    for (int k1 = 1; term(0, k1) <= cap; ++k1)
      for (int k2 = 1; term(0, k1) + term(1, k2) <= cap; ++k2)
        vals.push_back(term(0, k1) + term(1, k2));
  }
  std::sort(vals.begin(), vals.end());
  return vals;
}

SpectralSet box_limit_spectrum(const BetaTable& bt, const HomogenizedMatrix& Ahom,
                               const std::vector<int>& box_lengths,
                               const std::vector<SpectralSet>& orthant_spectra,
                               double lambda_max) {
  // beta ranges over (-inf, +inf) in each pole gap, so the preimage cap on
  // Dirichlet values only limits the last (unbounded) gap; use a generous cap
  double beta_cap = std::max(1.0, bt.eval(lambda_max - 1e-9 * std::max(1.0, lambda_max)));
  SpectralSet s;
  s.provenance = "box-limit-set";
  for (double dv : box_dirichlet_values(Ahom, box_lengths, beta_cap))
    for (double pre : beta_preimages(bt, dv, lambda_max)) s.points.push_back({pre, 1});
  for (const auto& o : orthant_spectra) s = s.unite(o.truncated(-kInf, lambda_max));
  s.normalize();
  return s;
}

double hausdorff_distance(const SpectralSet& s1, const SpectralSet& s2, double Lambda) {
  if (Lambda <= 0) throw ConfigError("hausdorff_distance: Lambda must be positive");
  SpectralSet a = s1.truncated(0.0, Lambda);
  SpectralSet b = s2.truncated(0.0, Lambda);
  double d1 = a.empty() ? 0.0 : a.sup_deviation_to(s2);
  double d2 = b.empty() ? 0.0 : b.sup_deviation_to(s1);
  return std::max(d1, d2);
}

QuasimodeBound quasimode_distance(const HermitianOperator& op, const Eigen::VectorXcd& u,
                                  double lambda) {
  double nu = u.norm();
  if (std::abs(nu - 1.0) > 1e-6)
    throw ConfigError("quasimode_distance: u must be normalized");
  Eigen::VectorXd w;
  Eigen::MatrixXcd V;
  eigen_decompose(op, w, V);
  if (w[0] < -1e-10 * std::max(1.0, std::abs(w[w.size() - 1])))
    throw ConfigError("quasimode_distance: operator must be nonnegative");

  Eigen::VectorXcd r = op.M * u - lambda * u;
  Eigen::VectorXcd rc = V.adjoint() * r;
  double eps2 = 0.0;
  for (int k = 0; k < w.size(); ++k) eps2 += std::norm(rc[k]) / (1.0 + std::max(w[k], 0.0));
  QuasimodeBound qb;
  qb.epsilon = std::sqrt(eps2);
  qb.valid = qb.epsilon < 1.0;
  qb.bound = qb.valid ? std::abs(lambda + 1.0) * qb.epsilon / (1.0 - qb.epsilon) : kInf;
  return qb;
}

LimitResolventSolution solve_limit_resolvent(const CellGeometry& g, const CoefficientField& c,
                                             const KernelSpec& spec,
                                             const HomogenizedMatrix& Ahom, double lambda,
                                             const Eigen::MatrixXd& f, int box_length, int mx) {
  if (g.d != 1) throw UnsupportedError("solve_limit_resolvent: d = 1 only");
  if (lambda >= 0) throw ConfigError("solve_limit_resolvent: lambda must be negative");
  if (f.rows() != mx || f.cols() != g.n)
    throw ConfigError("solve_limit_resolvent: f must be mx x n");

  HermitianOperator soft = assemble_soft_periodic(g, c, spec);
  Eigen::MatrixXd A = soft.real_view();
  int ms = static_cast<int>(A.rows());
  Eigen::MatrixXd S = A - lambda * Eigen::MatrixXd::Identity(ms, ms);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(ms);
  Eigen::VectorXd b_lambda = lu.solve(one);
  double mean_b = b_lambda.sum() / g.n;
  double beta = lambda + lambda * lambda * mean_b;

  LimitResolventSolution out;
  out.beta = beta;

  // per-slice soft responses q_j = (A_soft - lambda)^{-1} (f restricted to soft)
  Eigen::MatrixXd q(mx, ms);
  Eigen::VectorXd rhs_reduced(mx);
  for (int j = 0; j < mx; ++j) {
    Eigen::VectorXd fs(ms);
    for (int a = 0; a < ms; ++a) fs[a] = f(j, soft.cells[a]);
    Eigen::VectorXd qj = lu.solve(fs);
    q.row(j) = qj.transpose();
    double mean_f = f.row(j).sum() / g.n;
    rhs_reduced[j] = mean_f + lambda * qj.sum() / g.n;
  }

  // second-order Dirichlet finite differences on (0, box_length)
  double hx = double(box_length) / (mx + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mx, mx);
  double A11 = Ahom.A(0, 0);
  for (int j = 0; j < mx; ++j) {
    T(j, j) = 2.0 * A11 / (hx * hx) - beta;
    if (j > 0) T(j, j - 1) = -A11 / (hx * hx);
    if (j + 1 < mx) T(j, j + 1) = -A11 / (hx * hx);
  }
  {
    Eigen::VectorXd tw = sym_eigenvalues(T);
    double spread = std::max(std::abs(tw[0]), std::abs(tw[tw.size() - 1]));
    out.near_singular = tw.cwiseAbs().minCoeff() <= 1e-8 * spread;
  }
  Eigen::VectorXd u = Eigen::PartialPivLU<Eigen::MatrixXd>(T).solve(
      (1.0 + lambda * mean_b) * Eigen::VectorXd::Zero(mx) + rhs_reduced);

  out.u = u;
  out.x_grid.resize(mx);
  for (int j = 0; j < mx; ++j) out.x_grid[j] = (j + 1) * hx;

  out.z = Eigen::MatrixXd::Zero(mx, g.n);
  for (int j = 0; j < mx; ++j)
    for (int a = 0; a < ms; ++a)
      out.z(j, soft.cells[a]) = lambda * u[j] * b_lambda[a] + q(j, a);

  // residual of the coupled system
  double num = 0.0, den = 0.0;
  for (int j = 0; j < mx; ++j) {
    double lap = 2.0 * u[j];
    if (j > 0) lap -= u[j - 1];
    if (j + 1 < mx) lap -= u[j + 1];
    double mean_z = out.z.row(j).sum() / g.n;
    double mean_f = f.row(j).sum() / g.n;
    double r1 = A11 * lap / (hx * hx) - lambda * (u[j] + mean_z) - mean_f;
    num += r1 * r1;
    den += mean_f * mean_f + u[j] * u[j];
    Eigen::VectorXd zj(ms);
    for (int a = 0; a < ms; ++a) zj[a] = out.z(j, soft.cells[a]);
    Eigen::VectorXd r2 = A * zj - lambda * (u[j] * one + zj);
    for (int a = 0; a < ms; ++a) r2[a] -= f(j, soft.cells[a]);
    num += r2.squaredNorm();
    den += zj.squaredNorm();
  }
  out.residual = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
  if (out.residual > 1e-6)
    throw NumericalError("solve_limit_resolvent: coupled residual " +
                         format_double(out.residual));
  return out;
}

}  // namespace nlh
