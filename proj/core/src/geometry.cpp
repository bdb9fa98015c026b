#include "nlh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

namespace nlh {

Pt CellGeometry::midpoint(int idx) const {
  if (d == 1) return {(idx + 0.5) / n, 0.0};
  return {(idx / n + 0.5) / n, (idx % n + 0.5) / n};
}

int CellGeometry::diff_index(int i, int k) const {
  if (d == 1) return ((k - i) % n + n) % n;
  int ix = i / n, iy = i % n, kx = k / n, ky = k % n;
  int dx = ((kx - ix) % n + n) % n;
  int dy = ((ky - iy) % n + n) % n;
  return dx * n + dy;
}

int CellGeometry::cell_of(const Pt& y) const {
  auto wrap = [this](double v) {
    double f = v - std::floor(v);
    int c = static_cast<int>(f * n);
    return std::min(c, n - 1);
  };
  if (d == 1) return wrap(y[0]);
  return wrap(y[0]) * n + wrap(y[1]);
}

CellGeometry build_geometry(const GeometryConfig& cfg) {
  if (cfg.d != 1 && cfg.d != 2) throw ConfigError("geometry: d must be 1 or 2");
  if (cfg.n < 2) throw ConfigError("geometry: n must be at least 2");

  CellGeometry g;
  g.d = cfg.d;
  g.n = cfg.n;
  int total = g.num_cells();
  g.stiff_mask.assign(total, 1);

  auto mark_soft_1d = [&](double a, double b) {
    if (a < 0.0 || b > 1.0 || a >= b)
      throw ConfigError("geometry: soft interval outside [0,1) or empty");
    for (int i = 0; i < cfg.n; ++i) {
      double m = (i + 0.5) / cfg.n;
      if (m > a && m < b) g.stiff_mask[i] = 0;
    }
  };

  if (cfg.d == 1) {
    if (cfg.soft_intervals.empty()) throw ConfigError("geometry: d=1 needs soft_intervals");
    for (const auto& iv : cfg.soft_intervals) mark_soft_1d(iv.lo, iv.hi);
  } else if (!cfg.mask_file.empty()) {
    std::ifstream in(cfg.mask_file);
    if (!in) throw ConfigError("geometry: cannot open mask file " + cfg.mask_file);
    // one row of n 0/1 entries per grid line, row-major; 1 marks soft
    std::string line;
    int row = 0;
    while (std::getline(in, line) && row < cfg.n) {
      std::istringstream ls(line);
      for (int col = 0; col < cfg.n; ++col) {
        int v;
        if (!(ls >> v)) throw ConfigError("geometry: short mask row in " + cfg.mask_file);
        if (v != 0) g.stiff_mask[row * cfg.n + col] = 0;
      }
      ++row;
    }
    if (row != cfg.n) throw ConfigError("geometry: mask file has too few rows");
  } else {
    if (cfg.soft_rects.empty()) throw ConfigError("geometry: d=2 needs soft_rects or mask_file");
    for (const auto& r : cfg.soft_rects) {
      if (r[0] < 0 || r[1] > 1 || r[2] < 0 || r[3] > 1 || r[0] >= r[1] || r[2] >= r[3])
        throw ConfigError("geometry: soft rectangle outside [0,1)^2 or empty");
      for (int ix = 0; ix < cfg.n; ++ix)
        for (int iy = 0; iy < cfg.n; ++iy) {
          double mx = (ix + 0.5) / cfg.n, my = (iy + 0.5) / cfg.n;
          if (mx > r[0] && mx < r[1] && my > r[2] && my < r[3]) g.stiff_mask[ix * cfg.n + iy] = 0;
        }
    }
  }

  for (int i = 0; i < total; ++i)
    (g.stiff_mask[i] ? g.stiff_cells : g.soft_cells).push_back(i);
  if (g.soft_cells.empty()) throw ConfigError("geometry: soft set rasterizes to no cells");
  if (g.stiff_cells.empty()) throw ConfigError("geometry: stiff set rasterizes to no cells");
  g.soft_volume = double(g.soft_cells.size()) / total;
  return g;
}

namespace {

// connected components of the stiff cells on the torus with hop length <= r1
bool torus_connected(const CellGeometry& g, double r1) {
  const auto& cells = g.stiff_cells;
  if (cells.empty()) return false;
  std::vector<int> pos(static_cast<std::size_t>(g.num_cells()), -1);
  for (std::size_t i = 0; i < cells.size(); ++i) pos[cells[i]] = static_cast<int>(i);

  int reach = static_cast<int>(std::floor(r1 * g.n + 1e-9));
  std::vector<std::array<int, 2>> offsets;
  for (int ox = -reach; ox <= reach; ++ox)
    for (int oy = (g.d == 1 ? 0 : -reach); oy <= (g.d == 1 ? 0 : reach); ++oy) {
      if (ox == 0 && oy == 0) continue;
      double dist = g.d == 1 ? std::abs(ox) : std::hypot(ox, oy);
      if (dist * 1.0 / g.n <= r1 + 1e-12) offsets.push_back({ox, oy});
    }

  std::vector<std::uint8_t> seen(cells.size(), 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!queue.empty()) {
    int ci = queue.front();
    queue.pop_front();
    int cell = cells[ci];
    int ix = g.d == 1 ? cell : cell / g.n;
    int iy = g.d == 1 ? 0 : cell % g.n;
    for (const auto& o : offsets) {
      int jx = ((ix + o[0]) % g.n + g.n) % g.n;
      int jy = g.d == 1 ? 0 : ((iy + o[1]) % g.n + g.n) % g.n;
      int jcell = g.d == 1 ? jx : jx * g.n + jy;
      int pj = pos[jcell];
      if (pj < 0 || seen[pj]) continue;
      seen[pj] = 1;
      ++visited;
      queue.push_back(pj);
    }
  }
  return visited == cells.size();
}

// BFS over the periodically-unrolled stiff pattern inside the cube [-k, k)^d;
// returns max hop count from the base-period cells, or -1 if disconnected.
int window_path_bound(const CellGeometry& g, double r1, int k) {
  int n = g.n;
  int side = 2 * k * n;  // cells of [-k, k)
  auto stiff_at = [&](int ux, int uy) {
    int bx = ((ux % n) + n) % n;
    int by = g.d == 1 ? 0 : ((uy % n) + n) % n;
    return g.stiff_mask[g.d == 1 ? bx : bx * n + by] != 0;
  };
  int reach = static_cast<int>(std::floor(r1 * n + 1e-9));
  std::vector<std::array<int, 2>> offsets;
  for (int ox = -reach; ox <= reach; ++ox)
    for (int oy = (g.d == 1 ? 0 : -reach); oy <= (g.d == 1 ? 0 : reach); ++oy) {
      if (ox == 0 && oy == 0) continue;
      double dist = g.d == 1 ? std::abs(ox) : std::hypot(ox, oy);
      if (dist / n <= r1 + 1e-12) offsets.push_back({ox, oy});
    }

  std::size_t total = g.d == 1 ? static_cast<std::size_t>(side)
                               : static_cast<std::size_t>(side) * side;
  std::vector<int> hops(total, -1);
  auto flat = [&](int ux, int uy) {
    std::size_t fx = static_cast<std::size_t>(ux + k * n);
    if (g.d == 1) return fx;
    return fx * side + static_cast<std::size_t>(uy + k * n);
  };

  // multi-source BFS from all stiff cells of the base period [0, n)
  std::deque<std::array<int, 2>> queue;
  for (int c : g.stiff_cells) {
    int ux = g.d == 1 ? c : c / n;
    int uy = g.d == 1 ? 0 : c % n;
    hops[flat(ux, uy)] = 0;
    queue.push_back({ux, uy});
  }
  int max_hop = 0;
  while (!queue.empty()) {
    auto [ux, uy] = queue.front();
    queue.pop_front();
    int h = hops[flat(ux, uy)];
    for (const auto& o : offsets) {
      int vx = ux + o[0], vy = uy + o[1];
      if (vx < -k * n || vx >= k * n) continue;
      if (g.d == 2 && (vy < -k * n || vy >= k * n)) continue;
      if (!stiff_at(vx, vy)) continue;
      std::size_t f = flat(vx, vy);
      if (hops[f] >= 0) continue;
      hops[f] = h + 1;
      max_hop = std::max(max_hop, h + 1);
      queue.push_back({vx, vy});
    }
  }
  // every stiff cell of the window must be reachable for the witness to
  // certify paths between arbitrary base-period pairs through the window
  for (int ux = -k * n; ux < k * n; ++ux) {
    if (g.d == 1) {
      if (stiff_at(ux, 0) && hops[flat(ux, 0)] < 0) return -1;
    } else {
      for (int uy = -k * n; uy < k * n; ++uy)
        if (stiff_at(ux, uy) && hops[flat(ux, uy)] < 0) return -1;
    }
  }
  return 2 * max_hop;  // path between two base cells via a common source
}

}  // namespace

ConnectivityReport verify_connectivity(const CellGeometry& geom, const KernelSpec& spec,
                                       int k_max) {
  if (geom.stiff_cells.empty()) throw ConfigError("verify_connectivity: empty stiff mask");
  ConnectivityReport rep;
  int n = geom.n;

  // r0: smallest grid radius so that B_{r0}(x) around any stiff point keeps a
  // definite stiff fraction; one cell diagonal suffices on the midpoint grid.
  rep.r0 = std::sqrt(double(geom.d)) / n;
  double ball = geom.d == 1 ? 2.0 * rep.r0 : M_PI * rep.r0 * rep.r0;
  rep.kappa0 = (1.0 / std::pow(double(n), geom.d)) / ball;

  // r1: smallest ladder value connecting the stiff graph on the torus
  double max_r1 = 0.75 * std::sqrt(double(geom.d));
  bool found = false;
  for (int m = 1; m <= static_cast<int>(std::ceil(max_r1 * n)); ++m) {
    double r1 = double(m) / n * (geom.d == 1 ? 1.0 : std::sqrt(2.0));
    if (torus_connected(geom, r1)) {
      rep.r1 = r1;
      found = true;
      break;
    }
  }
  if (!found) {
    rep.satisfied = false;
    rep.detail = "stiff cells do not connect on the torus at any tested hop length";
    return rep;
  }

  found = false;
  for (int k = 1; k <= k_max; ++k) {
    int bound = window_path_bound(geom, rep.r1, k);
    if (bound >= 0) {
      rep.k = k;
      rep.Nbar = bound;
      found = true;
      break;
    }
  }
  if (!found) {
    rep.satisfied = false;
    rep.detail = "no connecting window up to k_max; increase k_max or refine the grid";
    return rep;
  }

  rep.satisfied = spec.r_a >= 2.0 * rep.r0 + rep.r1;
  if (!rep.satisfied) {
    std::ostringstream os;
    os << "r_a = " << spec.r_a << " < 2 r0 + r1 = " << 2.0 * rep.r0 + rep.r1;
    rep.detail = os.str();
  }
  return rep;
}

}  // namespace nlh
