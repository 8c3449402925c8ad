#pragma once

#include <vector>

#include "windplan/costmap.hpp"
#include "windplan/lbm.hpp"
#include "windplan/types.hpp"

namespace windplan {

/// Single-segment planar Bezier curve r(s), s in [0, 1], flown in time T (t = s T).
struct BezierTrajectory {
  std::vector<Vec2> control;  // P_0 .. P_n
  double T = 1.0;             // seconds

  int degree() const { return static_cast<int>(control.size()) - 1; }
  const Vec2& start() const { return control.front(); }
  const Vec2& goal() const { return control.back(); }
};

/// B_{i,n}(s) = C(n, i) s^i (1 - s)^(n - i).
double bernstein(int i, int n, double s);

/// Point on the curve by de Casteljau.
Vec2 evaluate(const BezierTrajectory& traj, double s);

/// Control points of the order-th hodograph, d^k r / ds^k (no time scaling).
std::vector<Vec2> hodograph(const std::vector<Vec2>& control, int order);

/// d^k r / ds^k at s; zero when order exceeds the degree.
Vec2 evaluate_derivative(const BezierTrajectory& traj, int order, double s);

struct KinematicState {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 acc = Vec2::Zero();
  Vec2 jerk = Vec2::Zero();
  Vec2 snap = Vec2::Zero();  // zero for degree < 4
};

/// Time derivatives at t in [0, T]: the k-th s-derivative scaled by 1 / T^k.
KinematicState derivatives(const BezierTrajectory& traj, double t);

struct ObjectiveWeights {
  double lambda_p = 1.0;
  double lambda_s = 1.0;
  double lambda_t = 1.0;
  double lambda_w = 10.0;
};

/// Linear drag f_d = K (u_wind - v) on a point mass.
struct DragModel {
  double K = 0.3;  // kg/s
  double mass = 1.0;
};

struct CostTerms {
  double path = 0.0;
  double snap = 0.0;
  double thrust = 0.0;
  double wall = 0.0;

  double total(const ObjectiveWeights& w) const {
    return w.lambda_p * path + w.lambda_s * snap + w.lambda_t * thrust + w.lambda_w * wall;
  }
};

/// Everything the objective samples: the seed polyline, the wind, obstacle
/// clearance, and the drag model. Quadrature uses m midpoint samples in s.
class CostContext {
 public:
  CostContext(Polyline seed_path, const WindField* field, const CostMap& cmap, DragModel drag,
              int samples = 96, double wall_margin = 0.05);

  const Polyline& seed_path() const { return path_; }
  const DragModel& drag() const { return drag_; }
  int samples() const { return samples_; }
  double wall_margin() const { return margin_; }

  /// Squared distance to the nearest point of the seed polyline.
  double path_distance_sq(const Vec2& p) const;
  /// Signed distance (m) to the obstacle boundary: negative inside obstacles and outside the domain.
  double clearance(const Vec2& p) const;
  /// Wind at p; zero without a field or outside the domain.
  Vec2 wind(const Vec2& p) const { return field_ ? field_->sample(p) : Vec2::Zero(); }
  /// Smooth hinge on (margin - clearance), squared.
  double wall_penalty(const Vec2& p) const;

 private:
  Polyline path_;
  const WindField* field_;
  GridGeometry geom_;
  std::vector<double> clearance_;
  DragModel drag_;
  int samples_;
  double margin_;
  double sharpness_;  // 1/m
};

/// J_path, J_snap, J_thrust, J_wall for a trajectory.
CostTerms cost_terms(const BezierTrajectory& traj, const CostContext& ctx);

/// Interior control points P_1..P_{n-1} at n-1 equally spaced arc-length stations of
/// the polyline; T = length / cruise_speed.
BezierTrajectory initialize_from_path(const Polyline& path, int degree, double cruise_speed);

struct Box {
  Vec2 lo;
  Vec2 hi;
};

/// One box per control point, centred on it; endpoint boxes are degenerate.
std::vector<Box> boxes_around(const BezierTrajectory& traj, double half_width);

struct OptimizeOptions {
  int max_sweeps = 40;
  double rel_tol = 1e-6;
  double T_min = 0.0;  // 0: T0 / 1.5
  double T_max = 0.0;  // 0: T0 * 1.5
  int golden_iterations = 24;
};

struct OptimizeResult {
  BezierTrajectory traj;
  CostTerms terms;
  std::vector<double> history;  // J before the first sweep, then after each sweep
  int sweeps = 0;
};

/// Block coordinate descent: golden-section line search per control-point
/// coordinate inside its box, then over T. Only improving moves are accepted,
/// so J never increases. Endpoints never move. Throws NonFiniteObjective.
OptimizeResult optimize(const BezierTrajectory& initial, const ObjectiveWeights& weights,
                        const std::vector<Box>& boxes, const CostContext& ctx,
                        const OptimizeOptions& opts = {});

/// Line integral of cell cost along the curve (obstacles count as c_wall).
double integrated_cell_cost(const BezierTrajectory& traj, const CostMap& cmap, int samples = 512);

}  // namespace windplan
