#pragma once

#include <vector>

#include "windplan/costmap.hpp"
#include "windplan/types.hpp"

namespace windplan {

/// Multiplier of the against-flow variant: edge cost *= 1 + kAgainstFlowPenalty * s_norm(target).
inline constexpr double kAgainstFlowPenalty = 2.5;
/// Mean alignment below this switches the planner to the against-flow variant.
inline constexpr double kAdverseAlignment = -0.3;

struct GridPath {
  std::vector<Cell> cells;
  double total_cost = 0.0;
  double length_m = 0.0;
  /// Accumulated cost at each cell (same length as `cells`).
  std::vector<double> cumulative;
};

/// Cost of the 8-connected move a -> b: step length * (C[a] + C[b]) / 2,
/// times (1 + 2.5 * s_norm[b]) in the against-flow variant.
double edge_cost(const CostMap& cm, Cell a, Cell b, bool against_flow);

/// Minimum-cost 8-connected path between free cells with heuristic 0.1 * euclidean distance.
/// Throws StartOrGoalBlocked or NoPath.
GridPath astar(const CostMap& cm, Cell start, Cell goal, bool against_flow);

/// Mean of the per-cell alignment over free cells.
double mean_alignment(const CostMap& cm);

/// True iff the mean alignment is strictly below -0.3.
bool select_against_flow(double mean_alpha);

/// Cell centres of the path with the first and last replaced by the exact endpoints.
Polyline path_polyline(const GridPath& path, const GridGeometry& geom, const Vec2& start, const Vec2& goal);

/// Drops interior vertices that are collinear with their neighbours.
Polyline simplify_collinear(const Polyline& pts, double tol = 1e-12);

double polyline_length(const Polyline& pts);

}  // namespace windplan
