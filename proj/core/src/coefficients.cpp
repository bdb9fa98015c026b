#include "nlh/coefficients.hpp"

#include <cmath>

namespace nlh {

namespace {
Pt wrap_cell(const Pt& y) {
  return {y[0] - std::floor(y[0]), y[1] - std::floor(y[1])};
}
}  // namespace

PairWeight PairWeight::constant(double c) {
  PairWeight w;
  w.kind_ = Kind::Constant;
  w.value_ = c;
  return w;
}

PairWeight PairWeight::separable(std::function<double(const Pt&)> factor) {
  PairWeight w;
  w.kind_ = Kind::Separable;
  w.factor_ = std::move(factor);
  return w;
}

PairWeight PairWeight::general(std::function<double(const Pt&, const Pt&)> f) {
  PairWeight w;
  w.kind_ = Kind::General;
  w.pair_ = std::move(f);
  return w;
}

double PairWeight::eval(const Pt& y, const Pt& xi) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Separable:
      return factor_(wrap_cell(y)) * factor_(wrap_cell(xi));
    case Kind::General:
      return pair_(wrap_cell(y), wrap_cell(xi));
  }
  return value_;
}

double CoefficientField::lambda0_at(const CellGeometry& g, int i, int k) const {
  if (!g.is_stiff(i) || !g.is_stiff(k)) return 0.0;
  return lambda0.eval(g.midpoint(i), g.midpoint(k));
}

double CoefficientField::p_at(const CellGeometry& g, int i, int k) const {
  if (g.is_stiff(i) && g.is_stiff(k)) return 0.0;
  return w.eval(g.midpoint(i), g.midpoint(k));
}

double CoefficientField::p_phys(const Pt& y, bool y_stiff, const Pt& xi, bool xi_stiff) const {
  if (y_stiff && xi_stiff) return 0.0;
  return w.eval(y, xi);
}

void CoefficientField::validate(const CellGeometry& g) const {
  if (alpha1 <= 0.0 && alpha2 <= 0.0) return;
  if (alpha1 < 0 || alpha2 < alpha1) throw ConfigError("coefficients: need 0 < alpha1 <= alpha2");
  int total = g.num_cells();
  int stride = std::max(1, total / 64);
  for (int i = 0; i < total; i += stride)
    for (int k = 0; k < total; k += stride) {
      double l = lambda0_at(g, i, k);
      if (g.is_stiff(i) && g.is_stiff(k) && (l < alpha1 - 1e-12 || l > alpha2 + 1e-12))
        throw ConfigError("coefficients: lambda0 out of [alpha1, alpha2] on stiff pairs");
      double pv = p_at(g, i, k);
      if (!(g.is_stiff(i) && g.is_stiff(k)) && (pv < alpha1 - 1e-12 || pv > alpha2 + 1e-12))
        throw ConfigError("coefficients: p out of [alpha1, alpha2] on its support");
    }
}

PairTables make_pair_tables(const CellGeometry& g, const CoefficientField& c) {
  int total = g.num_cells();
  PairTables t;
  t.lambda0.resize(total, total);
  t.p.resize(total, total);
  for (int i = 0; i < total; ++i) {
    for (int k = i; k < total; ++k) {
      double l = c.lambda0_at(g, i, k);
      double pv = c.p_at(g, i, k);
      t.lambda0(i, k) = l;
      t.lambda0(k, i) = l;
      t.p(i, k) = pv;
      t.p(k, i) = pv;
    }
  }
  return t;
}

}  // namespace nlh
