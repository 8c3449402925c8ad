#include "windplan/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace windplan {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// n! / (n - r)!
double falling_factorial(int n, int r) {
  double v = 1.0;
  for (int k = 0; k < r; ++k) v *= n - k;
  return v;
}

Vec2 de_casteljau(std::vector<Vec2> pts, double s) {
  if (pts.empty()) return Vec2::Zero();
  for (std::size_t level = pts.size() - 1; level > 0; --level)
    for (std::size_t k = 0; k < level; ++k) pts[k] = (1.0 - s) * pts[k] + s * pts[k + 1];
  return pts.front();
}

// Bernstein values of one degree at the quadrature nodes, row-major [sample][i].
std::vector<double> basis_table(int degree, const std::vector<double>& nodes) {
  std::vector<double> table(nodes.size() * (degree + 1));
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (int i = 0; i <= degree; ++i) table[k * (degree + 1) + i] = bernstein(i, degree, nodes[k]);
  return table;
}

// Squared distance from p to segment ab.
double segment_distance_sq(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).squaredNorm();
}

double softplus(double x, double beta) {
  const double z = beta * x;
  return (z > 30.0 ? z : std::log1p(std::exp(z))) / beta;
}

constexpr double kHullWeight = 0.5;
constexpr int kHullSamplesPerEdge = 8;

}  // namespace

double bernstein(int i, int n, double s) {
  if (i < 0 || i > n) return 0.0;
  return binomial(n, i) * std::pow(s, i) * std::pow(1.0 - s, n - i);
}

Vec2 evaluate(const BezierTrajectory& traj, double s) { return de_casteljau(traj.control, s); }

std::vector<Vec2> hodograph(const std::vector<Vec2>& control, int order) {
  const int n = static_cast<int>(control.size()) - 1;
  if (order > n) return {};
  std::vector<Vec2> d = control;
  for (int r = 0; r < order; ++r) {
    for (std::size_t k = 0; k + 1 < d.size(); ++k) d[k] = d[k + 1] - d[k];
    d.pop_back();
  }
  const double scale = falling_factorial(n, order);
  for (auto& p : d) p *= scale;
  return d;
}

Vec2 evaluate_derivative(const BezierTrajectory& traj, int order, double s) {
  if (order > traj.degree()) return Vec2::Zero();
  return de_casteljau(hodograph(traj.control, order), s);
}

KinematicState derivatives(const BezierTrajectory& traj, double t) {
  const double s = std::clamp(t / traj.T, 0.0, 1.0);
  const double inv_T = 1.0 / traj.T;
  KinematicState k;
  k.pos = evaluate(traj, s);
  k.vel = evaluate_derivative(traj, 1, s) * inv_T;
  k.acc = evaluate_derivative(traj, 2, s) * (inv_T * inv_T);
  k.jerk = evaluate_derivative(traj, 3, s) * (inv_T * inv_T * inv_T);
  k.snap = evaluate_derivative(traj, 4, s) * (inv_T * inv_T * inv_T * inv_T);
  return k;
}

namespace {

// Distance from each cell centre to the obstacle boundary; negative inside obstacles.
std::vector<double> signed_clearance(const GridGeometry& geom, const std::vector<std::uint8_t>& obstacle) {
  std::vector<std::uint8_t> free(obstacle.size());
  for (std::size_t k = 0; k < obstacle.size(); ++k) free[k] = obstacle[k] ? 0 : 1;
  const std::vector<double> outside = obstacle_distance(geom, obstacle);
  const std::vector<double> inside = obstacle_distance(geom, free);
  const double half = 0.5 * geom.cell_size;
  std::vector<double> out(obstacle.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = obstacle[k] ? half - inside[k] : outside[k] - half;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// CostContext

CostContext::CostContext(Polyline seed_path, const WindField* field, const CostMap& cmap, DragModel drag,
                         int samples, double wall_margin)
    : path_(std::move(seed_path)),
      field_(field),
      geom_(cmap.geom),
      clearance_(signed_clearance(cmap.geom, cmap.obstacle)),
      drag_(drag),
      samples_(samples),
      margin_(wall_margin),
      sharpness_(2.0 / cmap.geom.cell_size) {
  if (samples_ < 32) throw ValidationError("quadrature_samples", "must be >= 32");
  if (path_.empty()) throw ValidationError("seed_path", "must not be empty");
}

double CostContext::path_distance_sq(const Vec2& p) const {
  if (path_.size() == 1) return (p - path_.front()).squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < path_.size(); ++k)
    best = std::min(best, segment_distance_sq(p, path_[k], path_[k + 1]));
  return best;
}

double CostContext::clearance(const Vec2& p) const {
  if (!std::isfinite(p.x()) || !std::isfinite(p.y())) return -std::hypot(geom_.extent_x(), geom_.extent_y());
  const Vec2 inside(std::clamp(p.x(), 0.0, geom_.extent_x()), std::clamp(p.y(), 0.0, geom_.extent_y()));
  const double c = sample_bilinear(geom_, clearance_, inside);
  return inside == p ? c : std::min(c, 0.0) - (p - inside).norm();
}

double CostContext::wall_penalty(const Vec2& p) const {
  const double h = softplus(margin_ - clearance(p), sharpness_);
  return h * h;
}

// ---------------------------------------------------------------------------
// Objective

namespace {

struct Quadrature {
  int degree;
  int m;
  std::vector<double> b0, b1, b2, b4;  // Bernstein tables for degrees n, n-1, n-2, n-4
};

Quadrature make_quadrature(int degree, int m) {
  std::vector<double> nodes(m);
  for (int k = 0; k < m; ++k) nodes[k] = (k + 0.5) / m;
  Quadrature q{degree, m, basis_table(degree, nodes), {}, {}, {}};
  if (degree >= 1) q.b1 = basis_table(degree - 1, nodes);
  if (degree >= 2) q.b2 = basis_table(degree - 2, nodes);
  if (degree >= 4) q.b4 = basis_table(degree - 4, nodes);
  return q;
}

Vec2 combine(const std::vector<double>& table, int k, const std::vector<Vec2>& pts) {
  Vec2 v = Vec2::Zero();
  const std::size_t stride = pts.size();
  for (std::size_t i = 0; i < stride; ++i) v += table[k * stride + i] * pts[i];
  return v;
}

CostTerms evaluate_terms(const Quadrature& q, const BezierTrajectory& traj, const CostContext& ctx) {
  const double T = traj.T;
  const std::vector<Vec2> d1 = hodograph(traj.control, 1);
  const std::vector<Vec2> d2 = hodograph(traj.control, 2);
  const std::vector<Vec2> d4 = hodograph(traj.control, 4);
  const double dt = T / q.m;
  const double inv_T = 1.0 / T;
  const double inv_T2 = inv_T * inv_T;
  const double inv_T4 = inv_T2 * inv_T2;
  const DragModel& drag = ctx.drag();

  CostTerms terms;
  for (int k = 0; k < q.m; ++k) {
    const Vec2 pos = combine(q.b0, k, traj.control);
    const Vec2 vel = d1.empty() ? Vec2::Zero() : Vec2(combine(q.b1, k, d1) * inv_T);
    const Vec2 acc = d2.empty() ? Vec2::Zero() : Vec2(combine(q.b2, k, d2) * inv_T2);
    const Vec2 snap = d4.empty() ? Vec2::Zero() : Vec2(combine(q.b4, k, d4) * inv_T4);
    terms.path += ctx.path_distance_sq(pos);
    terms.snap += snap.squaredNorm() * dt;
    const Vec2 thrust = drag.mass * acc - drag.K * (ctx.wind(pos) - vel);
    terms.thrust += thrust.squaredNorm() * dt;
    terms.wall += ctx.wall_penalty(pos);
  }
  terms.path /= q.m;

  // Hull term: keep each control-polygon edge clear, a conservative proxy for the hull.
  double hull = 0.0;
  for (std::size_t k = 0; k + 1 < traj.control.size(); ++k) {
    for (int s = 0; s <= kHullSamplesPerEdge; ++s) {
      const double a = static_cast<double>(s) / kHullSamplesPerEdge;
      hull += ctx.wall_penalty((1.0 - a) * traj.control[k] + a * traj.control[k + 1]);
    }
  }
  terms.wall += kHullWeight * hull;
  return terms;
}

}  // namespace

CostTerms cost_terms(const BezierTrajectory& traj, const CostContext& ctx) {
  return evaluate_terms(make_quadrature(traj.degree(), ctx.samples()), traj, ctx);
}

BezierTrajectory initialize_from_path(const Polyline& path, int degree, double cruise_speed) {
  if (path.size() < 2) throw ValidationError("seed_path", "needs at least two points");
  if (degree < 3) throw ValidationError("bezier_degree", "must be >= 3");
  std::vector<double> arc(path.size(), 0.0);
  for (std::size_t k = 1; k < path.size(); ++k) arc[k] = arc[k - 1] + (path[k] - path[k - 1]).norm();
  const double length = arc.back();

  BezierTrajectory traj;
  traj.control.reserve(degree + 1);
  traj.control.push_back(path.front());
  std::size_t seg = 0;
  for (int k = 1; k < degree; ++k) {
    const double target = length * k / degree;
    while (seg + 2 < path.size() && arc[seg + 1] < target) ++seg;
    const double span = arc[seg + 1] - arc[seg];
    const double a = span > 0.0 ? std::clamp((target - arc[seg]) / span, 0.0, 1.0) : 0.0;
    traj.control.push_back((1.0 - a) * path[seg] + a * path[seg + 1]);
  }
  traj.control.push_back(path.back());
  traj.T = std::max(length, 1e-3) / cruise_speed;
  return traj;
}

std::vector<Box> boxes_around(const BezierTrajectory& traj, double half_width) {
  std::vector<Box> boxes;
  boxes.reserve(traj.control.size());
  const Vec2 h(half_width, half_width);
  for (std::size_t k = 0; k < traj.control.size(); ++k) {
    const bool endpoint = k == 0 || k + 1 == traj.control.size();
    const Vec2& p = traj.control[k];
    boxes.push_back(endpoint ? Box{p, p} : Box{p - h, p + h});
  }
  return boxes;
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

// Golden-section search of f on [lo, hi]; returns the best point it evaluated.
template <typename F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, int iterations) {
  double best_x = lo, best_f = f(lo);
  auto consider = [&](double x, double fx) {
    if (fx < best_f) best_f = fx, best_x = x;
  };
  const double f_hi = f(hi);
  consider(hi, f_hi);
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  consider(x1, f1);
  consider(x2, f2);
  for (int it = 0; it < iterations; ++it) {
    if (f1 <= f2) {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
      consider(x1, f1);
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
      consider(x2, f2);
    }
  }
  return {best_x, best_f};
}

}  // namespace

OptimizeResult optimize(const BezierTrajectory& initial, const ObjectiveWeights& weights,
                        const std::vector<Box>& boxes, const CostContext& ctx, const OptimizeOptions& opts) {
  if (boxes.size() != initial.control.size())
    throw ValidationError("boxes", "need one box per control point");
  const Quadrature q = make_quadrature(initial.degree(), ctx.samples());
  const double T0 = initial.T;
  const double T_lo = opts.T_min > 0 ? opts.T_min : T0 / 1.5;
  const double T_hi = opts.T_max > 0 ? opts.T_max : T0 * 1.5;

  OptimizeResult res;
  res.traj = initial;
  res.traj.T = std::clamp(res.traj.T, T_lo, T_hi);
  auto objective = [&](const BezierTrajectory& t) { return evaluate_terms(q, t, ctx).total(weights); };
  double J = objective(res.traj);
  if (!std::isfinite(J)) throw Error(ErrorCode::NonFiniteObjective, "optimize: initial objective is not finite");
  res.history.push_back(J);

  BezierTrajectory trial = res.traj;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const double J_before = J;
    for (std::size_t k = 1; k + 1 < res.traj.control.size(); ++k) {
      for (int axis = 0; axis < 2; ++axis) {
        const double lo = boxes[k].lo[axis], hi = boxes[k].hi[axis];
        if (!(hi > lo)) continue;
        trial = res.traj;
        auto line = [&](double x) {
          trial.control[k][axis] = x;
          const double v = objective(trial);
          return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        };
        const auto [x, fx] = golden_section(line, lo, hi, opts.golden_iterations);
        if (fx < J) {
          res.traj.control[k][axis] = x;
          J = fx;
        }
      }
    }
    if (T_hi > T_lo) {
      trial = res.traj;
      auto line = [&](double T) {
        trial.T = T;
        const double v = objective(trial);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
      };
      const auto [T, fT] = golden_section(line, T_lo, T_hi, opts.golden_iterations);
      if (fT < J) {
        res.traj.T = T;
        J = fT;
      }
    }
    res.history.push_back(J);
    res.sweeps = sweep + 1;
    if (J_before - J <= opts.rel_tol * std::max(std::abs(J_before), 1e-300)) break;
  }
  res.terms = evaluate_terms(q, res.traj, ctx);
  return res;
}

double integrated_cell_cost(const BezierTrajectory& traj, const CostMap& cmap, int samples) {
  double total = 0.0;
  Vec2 prev = evaluate(traj, 0.0);
  for (int k = 1; k <= samples; ++k) {
    const Vec2 p = evaluate(traj, static_cast<double>(k) / samples);
    const Vec2 mid = 0.5 * (p + prev);
    const Cell c = cmap.geom.cell_of(mid);
    const double cost = cmap.geom.contains(c) ? cmap.at(c) : cmap.c_wall;
    total += cost * (p - prev).norm();
    prev = p;
  }
  return total;
}

}  // namespace windplan
