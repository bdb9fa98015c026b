#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "nlh/geometry.hpp"

namespace nlh {

/// Symmetric pair weight on Y x Y, periodic in each argument.
class PairWeight {
public:
  static PairWeight constant(double c);
  static PairWeight separable(std::function<double(const Pt&)> factor);
  static PairWeight general(std::function<double(const Pt&, const Pt&)> f);

  double eval(const Pt& y, const Pt& xi) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  double constant_value() const { return value_; }

private:
  enum class Kind { Constant, Separable, General } kind_ = Kind::Constant;
  double value_ = 1.0;
  std::function<double(const Pt&)> factor_;
  std::function<double(const Pt&, const Pt&)> pair_;
};

/// Lambda0 (stiff-pair weight) and p = w (1 - 1_stiff 1_stiff).
struct CoefficientField {
  PairWeight lambda0 = PairWeight::constant(1.0);
  PairWeight w = PairWeight::constant(1.0);
  double alpha1 = 0.0;  // contrast bounds; (0,0) switches the check off
  double alpha2 = 0.0;

  double lambda0_at(const CellGeometry& g, int i, int k) const;
  double p_at(const CellGeometry& g, int i, int k) const;
  /// evaluate p at physical points given their stiff flags (truncated domains)
  double p_phys(const Pt& y, bool y_stiff, const Pt& xi, bool xi_stiff) const;
  /// reports bound violations on a sample of pairs; throws ConfigError
  void validate(const CellGeometry& g) const;
};

/// Dense per-pair tables of lambda0 and p over the full cell grid; reused
/// across fibers and contrast values.
struct PairTables {
  Eigen::MatrixXd lambda0;
  Eigen::MatrixXd p;
};

PairTables make_pair_tables(const CellGeometry& g, const CoefficientField& c);

}  // namespace nlh
