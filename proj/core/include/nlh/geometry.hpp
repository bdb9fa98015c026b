#pragma once

#include <string>
#include <vector>

#include "nlh/common.hpp"
#include "nlh/kernel.hpp"

namespace nlh {

struct GeometryConfig {
  int d = 1;
  int n = 64;
  std::vector<Interval> soft_intervals;            // d = 1
  std::vector<std::array<double, 4>> soft_rects;   // d = 2: {x0, x1, y0, y1}
  std::string mask_file;                           // d = 2 alternative: rows of 0/1
};

/// Midpoint rasterization of the periodicity cell: a cell is soft iff its
/// midpoint lies in the (open) soft set.
struct CellGeometry {
  int d = 1;
  int n = 64;
  std::vector<std::uint8_t> stiff_mask;  // size n^d, 1 = stiff
  std::vector<int> soft_cells, stiff_cells;
  double soft_volume = 0.0;

  int num_cells() const { return d == 1 ? n : n * n; }
  bool is_stiff(int idx) const { return stiff_mask[static_cast<std::size_t>(idx)] != 0; }
  Pt midpoint(int idx) const;
  /// lattice offset (K - I) mod n of midpoints, as a row-major table index
  int diff_index(int i, int k) const;
  int cell_of(const Pt& y) const;  // cell containing y (wrapped into the cell)
};

CellGeometry build_geometry(const GeometryConfig& cfg);

struct ConnectivityReport {
  double r0 = 0.0;
  double kappa0 = 0.0;
  double r1 = 0.0;
  int k = 0;
  int Nbar = 0;
  bool satisfied = false;
  std::string detail;
};

/// Finds a grid witness (r0, kappa0, r1, k, Nbar) for kernel-connectivity of
/// the stiff component and checks r_a >= 2 r0 + r1.
ConnectivityReport verify_connectivity(const CellGeometry& geom, const KernelSpec& spec,
                                       int k_max = 8);

}  // namespace nlh
