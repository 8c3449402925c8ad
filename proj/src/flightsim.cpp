#include "windplan/flightsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace windplan {

Reference Reference::from_bezier(const BezierTrajectory& traj) {
  return Reference(
      [traj](double t) {
        const KinematicState k = derivatives(traj, t);
        return ReferenceSample{k.pos, k.vel, k.acc};
      },
      traj.T);
}

Reference Reference::from_polyline(const Polyline& pts, double duration) {
  if (pts.size() < 2) throw ValidationError("reference", "polyline needs at least two points");
  if (!(duration > 0)) throw ValidationError("reference", "duration must be > 0");
  std::vector<double> arc(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) arc[k] = arc[k - 1] + (pts[k] - pts[k - 1]).norm();
  const double speed = arc.back() / duration;
  return Reference(
      [pts, arc, speed](double t) {
        const double s = std::clamp(t * speed, 0.0, arc.back());
        auto it = std::upper_bound(arc.begin(), arc.end(), s);
        std::size_t seg = it == arc.begin() ? 0 : static_cast<std::size_t>(it - arc.begin()) - 1;
        seg = std::min(seg, pts.size() - 2);
        while (seg + 2 < pts.size() && arc[seg + 1] - arc[seg] <= 0.0) ++seg;
        const double span = arc[seg + 1] - arc[seg];
        const double a = span > 0.0 ? std::clamp((s - arc[seg]) / span, 0.0, 1.0) : 0.0;
        const Vec2 dir = span > 0.0 ? Vec2((pts[seg + 1] - pts[seg]) / span) : Vec2::Zero();
        return ReferenceSample{(1.0 - a) * pts[seg] + a * pts[seg + 1], dir * speed, Vec2::Zero()};
      },
      duration);
}

ReferenceSample Reference::at(double t) const {
  if (t <= duration_) return fn_(t);
  return ReferenceSample{fn_(duration_).pos, Vec2::Zero(), Vec2::Zero()};
}

void DroneModel::validate() const {
  if (!(mass > 0)) throw ValidationError("mass", "must be > 0");
  if (!(K >= 0)) throw ValidationError("drag_gain", "must be >= 0");
  if (!(a_max > 0)) throw ValidationError("a_max", "must be > 0");
  if (!(dt > 0 && dt <= 0.02)) throw ValidationError("dt", "must be in (0, 0.02]");
}

Polyline FlightLog::positions() const {
  Polyline p;
  p.reserve(samples.size());
  for (const auto& s : samples) p.push_back(s.pos);
  return p;
}

FlightLog simulate_flight(const Reference& ref, const WindField& field, const DroneModel& drone,
                          const TrackingGains& gains, const ReplayNoise& noise) {
  drone.validate();
  if (gains.kp < 0 || gains.kd < 0) throw ValidationError("gains", "must be >= 0");

  const auto& geom = field.geometry();
  const Vec2 lo(-0.5 * geom.extent_x(), -0.5 * geom.extent_y());
  const Vec2 hi(1.5 * geom.extent_x(), 1.5 * geom.extent_y());
  const double drag_rate = drone.K / drone.mass;

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto steps = static_cast<long>(std::ceil(ref.duration() / drone.dt - 1e-9));
  FlightLog log;
  log.dt = drone.dt;
  log.samples.reserve(steps + 1);

  const ReferenceSample r0 = ref.at(0.0);
  Vec2 x = r0.pos, v = r0.vel;
  for (long k = 0; k <= steps; ++k) {
    const double t = k * drone.dt;
    const ReferenceSample r = ref.at(t);
    Vec2 a_cmd = r.acc + gains.kp * (r.pos - x) + gains.kd * (r.vel - v);
    const double mag = a_cmd.norm();
    if (mag > drone.a_max) a_cmd *= drone.a_max / mag;
    log.samples.push_back({t, x, v, a_cmd});
    if (!geom.contains_point(x)) log.left_domain = true;
    if (k == steps) break;

    const Vec2 accel = a_cmd + drag_rate * (field.sample(x) - v);
    v += accel * drone.dt;
    if (noise.std_dev > 0) v += noise.std_dev * Vec2(normal(rng), normal(rng));
    x += v * drone.dt;
    if (!std::isfinite(x.x()) || !std::isfinite(x.y()) || x.x() < lo.x() || x.y() < lo.y() ||
        x.x() > hi.x() || x.y() > hi.y())
      throw Error(ErrorCode::DivergedSimulation,
                  "simulate_flight: vehicle left the 2x domain box at t = " + std::to_string(t + drone.dt));
  }
  return log;
}

CollisionReport detect_collision(const FlightLog& log, const OccupancyGrid& grid) {
  const auto& geom = grid.geometry();
  for (std::size_t k = 0; k < log.samples.size(); ++k) {
    const Cell c = geom.cell_of(log.samples[k].pos);
    if (geom.contains(c) && grid.solid(c)) return {true, k};
  }
  return {};
}

}  // namespace windplan
