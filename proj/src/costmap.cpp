#include "windplan/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace windplan {

Vec2 goal_direction(const Vec2& start, const Vec2& goal, double cell_size) {
  const Vec2 d = goal - start;
  const double n = d.norm();
  if (!(n >= 0.5 * cell_size) || n == 0.0)
    throw Error(ErrorCode::DegenerateGoal, "goal_direction: start and goal coincide");
  return d / n;
}

double wind_alignment(const Vec2& u, const Vec2& g) {
  const double s = u.norm();
  if (s == 0.0) return 0.0;
  return std::clamp(u.dot(g) / s, -1.0, 1.0);
}

double cell_cost(const Vec2& u, double s_max, const Vec2& g, const CostWeights& w) {
  const double alpha = wind_alignment(u, g);
  const double c_s = s_max > 0.0 ? u.norm() / s_max : 0.0;
  const double c_d = 1.0 - (alpha + 1.0) / 2.0;
  const double c_a = 1.0 - std::abs(alpha);
  return w.w_s * c_s + w.w_d * c_d + w.w_a * c_a;
}

WindField resample_field(const WindField& field, const GridGeometry& target) {
  if (field.geometry() == target) return field;
  WindField out(target.width, target.height, target.cell_size);
  const auto& src = field.geometry();
  for (int j = 0; j < target.height; ++j) {
    for (int i = 0; i < target.width; ++i) {
      const Vec2 p = target.center({i, j});
      Cell nearest = src.cell_of(p);
      nearest.i = std::clamp(nearest.i, 0, src.width - 1);
      nearest.j = std::clamp(nearest.j, 0, src.height - 1);
      const bool wall = field.wall(nearest.i, nearest.j);
      const Vec2 u{sample_bilinear(src, field.vx(), p), sample_bilinear(src, field.vy(), p)};
      out.set(i, j, u, wall);
    }
  }
  return out;
}

std::vector<double> masked_gaussian(const GridGeometry& geom, const std::vector<double>& values,
                                    const std::vector<std::uint8_t>& mask, double sigma) {
  if (!(sigma > 0.0)) return values;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));

  const int w = geom.width, h = geom.height;
  // The 2-D kernel is separable, so blurring (value * free) and free separately
  // and dividing gives the kernel renormalised over free cells.
  std::vector<double> num(geom.size()), den(geom.size());
  for (std::size_t k = 0; k < geom.size(); ++k) {
    den[k] = mask[k] ? 0.0 : 1.0;
    num[k] = mask[k] ? 0.0 : values[k];
  }
  auto blur = [&](std::vector<double>& a, bool along_x) {
    std::vector<double> out(a.size(), 0.0);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int ii = along_x ? i + k : i;
          const int jj = along_x ? j : j + k;
          if (ii < 0 || jj < 0 || ii >= w || jj >= h) continue;
          acc += kernel[k + radius] * a[geom.index(ii, jj)];
        }
        out[geom.index(i, j)] = acc;
      }
    }
    a.swap(out);
  };
  blur(num, true);
  blur(num, false);
  blur(den, true);
  blur(den, false);

  std::vector<double> out = values;
  for (std::size_t k = 0; k < geom.size(); ++k)
    if (!mask[k] && den[k] > 0.0) out[k] = num[k] / den[k];
  return out;
}

CostMap build_costmap(const WindField& field, const OccupancyGrid& dilated, const Vec2& start,
                      const Vec2& goal, const PipelineParams& params, bool flow_aware) {
  const GridGeometry& geom = dilated.geometry();
  if (std::abs(field.cell_size() * field.width() - geom.extent_x()) > 1e-9 * geom.extent_x() ||
      std::abs(field.cell_size() * field.height() - geom.extent_y()) > 1e-9 * geom.extent_y())
    throw Error(ErrorCode::DimensionMismatch, "build_costmap: wind field and grid cover different extents");
  const WindField f = resample_field(field, geom);

  CostMap cm;
  cm.geom = geom;
  cm.c_wall = params.c_wall;
  cm.goal_dir = goal_direction(start, goal, geom.cell_size);
  cm.obstacle.resize(geom.size());
  for (std::size_t k = 0; k < geom.size(); ++k)
    cm.obstacle[k] = dilated.cells()[k] == CellState::Solid ? 1 : 0;

  double s_max = 0.0;
  for (std::size_t k = 0; k < geom.size(); ++k)
    if (!cm.obstacle[k]) s_max = std::max(s_max, f.speed()[k]);

  cm.speed_norm.assign(geom.size(), 0.0);
  cm.alignment.assign(geom.size(), 0.0);
  for (std::size_t k = 0; k < geom.size(); ++k) {
    const Vec2 u{f.vx()[k], f.vy()[k]};
    cm.alignment[k] = wind_alignment(u, cm.goal_dir);
    cm.speed_norm[k] = s_max > 0.0 ? f.speed()[k] / s_max : 0.0;
  }

  cm.cost.assign(geom.size(), params.base_cost);
  if (flow_aware) {
    const CostWeights w{params.w_s, params.w_d, params.w_a};
    for (std::size_t k = 0; k < geom.size(); ++k) {
      if (cm.obstacle[k]) continue;
      const Vec2 u{f.vx()[k], f.vy()[k]};
      cm.cost[k] = std::clamp(cell_cost(u, s_max, cm.goal_dir, w), kCostFloor, kCostCeiling);
    }
    cm.cost = masked_gaussian(geom, cm.cost, cm.obstacle, params.sigma_smooth);
  }
  for (std::size_t k = 0; k < geom.size(); ++k)
    if (cm.obstacle[k]) cm.cost[k] = params.c_wall;
  return cm;
}

namespace {

// Squared-distance transform of a sampled function along one line
// (lower envelope of parabolas rooted at each sample).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    auto meet = [&](int a) { return ((f[q] + q * q) - (f[a] + a * a)) / (2.0 * (q - a)); };
    double s = meet(v[k]);
    while (s <= z[k]) s = meet(v[--k]);  // z[0] = -inf stops the walk
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  d.assign(n, inf);
  if (k < 0) return;
  int idx = 0;
  for (int q = 0; q < n; ++q) {
    while (z[idx + 1] < q) ++idx;
    d[q] = static_cast<double>(q - v[idx]) * (q - v[idx]) + f[v[idx]];
  }
}

}  // namespace

std::vector<double> obstacle_distance(const GridGeometry& geom, const std::vector<std::uint8_t>& obstacle) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int w = geom.width, h = geom.height;
  std::vector<double> grid(geom.size());
  for (std::size_t k = 0; k < geom.size(); ++k) grid[k] = obstacle[k] ? 0.0 : inf;

  std::vector<double> line, out;
  for (int i = 0; i < w; ++i) {
    line.resize(h);
    for (int j = 0; j < h; ++j) line[j] = grid[geom.index(i, j)];
    distance_transform_1d(line, out);
    for (int j = 0; j < h; ++j) grid[geom.index(i, j)] = out[j];
  }
  for (int j = 0; j < h; ++j) {
    line.resize(w);
    for (int i = 0; i < w; ++i) line[i] = grid[geom.index(i, j)];
    distance_transform_1d(line, out);
    for (int i = 0; i < w; ++i) grid[geom.index(i, j)] = out[i];
  }
  const double far = std::hypot(geom.extent_x(), geom.extent_y());
  for (auto& v : grid) v = std::isfinite(v) ? std::sqrt(v) * geom.cell_size : far;
  return grid;
}

}  // namespace windplan
