#pragma once

#include <cstdint>
#include <vector>

#include "windplan/env.hpp"
#include "windplan/lbm.hpp"
#include "windplan/types.hpp"

namespace windplan {

inline constexpr double kCostFloor = 0.1;
inline constexpr double kCostCeiling = 20.0;

/// Per-cell traversal cost over the planning grid. `obstacle` is the dilated
/// obstacle set (including the boundary ring); those cells carry exactly c_wall.
struct CostMap {
  GridGeometry geom;
  std::vector<double> cost;
  std::vector<std::uint8_t> obstacle;
  Vec2 goal_dir{1.0, 0.0};
  double c_wall = 1000.0;
  /// Wind speed over the max free-cell speed, and alignment of local wind with goal_dir.
  std::vector<double> speed_norm;
  std::vector<double> alignment;

  bool is_obstacle(Cell c) const { return obstacle[geom.index(c)] != 0; }
  double at(Cell c) const { return cost[geom.index(c)]; }
};

/// Unit vector from start to goal. Throws DegenerateGoal when they are closer than half a cell.
Vec2 goal_direction(const Vec2& start, const Vec2& goal, double cell_size);

struct CostWeights {
  double w_s = 1.0, w_d = 1.0, w_a = 1.0;
};

/// Alignment of wind `u` with unit `g`; defined as 0 in still air.
double wind_alignment(const Vec2& u, const Vec2& g);

/// Unclamped w_s * speed/s_max + w_d * (1 - (alpha + 1)/2) + w_a * (1 - |alpha|).
double cell_cost(const Vec2& u, double s_max, const Vec2& g, const CostWeights& w);

/// Resamples a field onto another raster: bilinear velocity, nearest-neighbour wall mask.
WindField resample_field(const WindField& field, const GridGeometry& target);

/// Obstacle-masked Gaussian blur (kernel renormalised over free cells, truncated at 3 sigma).
std::vector<double> masked_gaussian(const GridGeometry& geom, const std::vector<double>& values,
                                    const std::vector<std::uint8_t>& mask, double sigma);

/// Flow-aware: cell_cost, clamp to [0.1, 20], masked Gaussian smoothing, then wall stamping.
/// Otherwise every free cell is base_cost. The field is resampled when its raster differs.
CostMap build_costmap(const WindField& field, const OccupancyGrid& dilated, const Vec2& start,
                      const Vec2& goal, const PipelineParams& params, bool flow_aware);

/// Euclidean distance (m) from each cell centre to the nearest obstacle cell centre.
std::vector<double> obstacle_distance(const GridGeometry& geom, const std::vector<std::uint8_t>& obstacle);

}  // namespace windplan
