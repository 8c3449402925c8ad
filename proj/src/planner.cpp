#include "windplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace windplan {

namespace {

constexpr int kDi[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDj[8] = {0, 0, 1, -1, 1, -1, 1, -1};

struct OpenEntry {
  double f;
  double g;
  std::size_t index;
};

// Min-heap on f; ties go to the larger g (deeper node), then the lower index.
struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.index > b.index;
  }
};

}  // namespace

double edge_cost(const CostMap& cm, Cell a, Cell b, bool against_flow) {
  const bool diagonal = a.i != b.i && a.j != b.j;
  const double step = (diagonal ? std::sqrt(2.0) : 1.0) * cm.geom.cell_size;
  double c = step * (cm.at(a) + cm.at(b)) / 2.0;
  if (against_flow) c *= 1.0 + kAgainstFlowPenalty * cm.speed_norm[cm.geom.index(b)];
  return c;
}

GridPath astar(const CostMap& cm, Cell start, Cell goal, bool against_flow) {
  const GridGeometry& g = cm.geom;
  if (!g.contains(start) || !g.contains(goal) || cm.is_obstacle(start) || cm.is_obstacle(goal))
    throw Error(ErrorCode::StartOrGoalBlocked, "astar: start or goal cell is an obstacle or out of range");

  const Vec2 goal_c = g.center(goal);
  auto heuristic = [&](Cell c) { return kCostFloor * (g.center(c) - goal_c).norm(); };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(g.size(), inf);
  std::vector<std::int64_t> parent(g.size(), -1);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;

  const std::size_t s_idx = g.index(start), goal_idx = g.index(goal);
  best[s_idx] = 0.0;
  open.push({heuristic(start), 0.0, s_idx});
  while (!open.empty()) {
    const OpenEntry cur = open.top();
    open.pop();
    if (cur.g > best[cur.index]) continue;  // stale entry
    if (cur.index == goal_idx) break;
    const Cell c{static_cast<int>(cur.index % g.width), static_cast<int>(cur.index / g.width)};
    for (int d = 0; d < 8; ++d) {
      const Cell n{c.i + kDi[d], c.j + kDj[d]};
      if (!g.contains(n) || cm.is_obstacle(n)) continue;
      const double ng = cur.g + edge_cost(cm, c, n, against_flow);
      const std::size_t ni = g.index(n);
      if (ng < best[ni]) {
        best[ni] = ng;
        parent[ni] = static_cast<std::int64_t>(cur.index);
        open.push({ng + heuristic(n), ng, ni});
      }
    }
  }
  if (best[goal_idx] == inf)
    throw Error(ErrorCode::NoPath, "astar: goal is not reachable from start");

  GridPath path;
  for (std::int64_t k = static_cast<std::int64_t>(goal_idx); k >= 0; k = parent[k])
    path.cells.push_back({static_cast<int>(k % g.width), static_cast<int>(k / g.width)});
  std::reverse(path.cells.begin(), path.cells.end());
  path.total_cost = best[goal_idx];
  path.cumulative.reserve(path.cells.size());
  for (std::size_t k = 0; k < path.cells.size(); ++k) {
    path.cumulative.push_back(best[g.index(path.cells[k])]);
    if (k > 0) path.length_m += (g.center(path.cells[k]) - g.center(path.cells[k - 1])).norm();
  }
  return path;
}

double mean_alignment(const CostMap& cm) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < cm.geom.size(); ++k) {
    if (cm.obstacle[k]) continue;
    sum += cm.alignment[k];
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

bool select_against_flow(double mean_alpha) { return mean_alpha < kAdverseAlignment; }

Polyline path_polyline(const GridPath& path, const GridGeometry& geom, const Vec2& start, const Vec2& goal) {
  Polyline pts;
  pts.reserve(path.cells.size() + 2);
  for (const Cell& c : path.cells) pts.push_back(geom.center(c));
  if (pts.size() < 2) return {start, goal};
  pts.front() = start;
  pts.back() = goal;
  return pts;
}

Polyline simplify_collinear(const Polyline& pts, double tol) {
  if (pts.size() < 3) return pts;
  Polyline out{pts.front()};
  for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
    const Vec2 a = pts[k] - out.back();
    const Vec2 b = pts[k + 1] - pts[k];
    const double cross = a.x() * b.y() - a.y() * b.x();
    if (std::abs(cross) > tol * (a.norm() * b.norm() + 1e-300) || a.dot(b) < 0) out.push_back(pts[k]);
  }
  out.push_back(pts.back());
  return out;
}

double polyline_length(const Polyline& pts) {
  double len = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) len += (pts[k] - pts[k - 1]).norm();
  return len;
}

}  // namespace windplan
