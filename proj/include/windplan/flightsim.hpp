#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "windplan/bezier.hpp"
#include "windplan/env.hpp"
#include "windplan/lbm.hpp"
#include "windplan/types.hpp"

namespace windplan {

struct ReferenceSample {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 acc = Vec2::Zero();
};

/// Time-parameterised setpoint source for the tracking controller. Past its
/// duration the reference holds the final position at rest.
class Reference {
 public:
  Reference(std::function<ReferenceSample(double)> fn, double duration)
      : fn_(std::move(fn)), duration_(duration) {}

  static Reference from_bezier(const BezierTrajectory& traj);
  /// Constant speed along the polyline over `duration`; velocity is piecewise
  /// constant and acceleration zero.
  static Reference from_polyline(const Polyline& pts, double duration);

  ReferenceSample at(double t) const;
  double duration() const { return duration_; }

 private:
  std::function<ReferenceSample(double)> fn_;
  double duration_;
};

struct DroneModel {
  double mass = 1.0;    // kg
  double K = 0.3;       // drag gain, kg/s
  double a_max = 4.0;   // m/s^2, controller saturation
  double dt = 0.01;     // s

  void validate() const;
};

struct TrackingGains {
  double kp = 4.0;
  double kd = 3.0;
};

/// Zero-mean velocity perturbation added every step; off when std_dev is 0.
struct ReplayNoise {
  double std_dev = 0.0;
  std::uint64_t seed = 0;
};

struct FlightSample {
  double t = 0.0;
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 acc_cmd = Vec2::Zero();
};

struct FlightLog {
  double dt = 0.01;
  std::vector<FlightSample> samples;
  bool left_domain = false;  // some sample flew outside the wind raster

  Polyline positions() const;
};

/// Semi-implicit Euler replay of
///   x'' = sat(a_ref + kp (x_ref - x) + kd (v_ref - v), a_max) + (K/m)(u_wind(x) - v)
/// from the reference's initial state over [0, duration]. Throws DivergedSimulation
/// if the vehicle leaves the domain box scaled 2x about its centre.
FlightLog simulate_flight(const Reference& ref, const WindField& field, const DroneModel& drone,
                          const TrackingGains& gains, const ReplayNoise& noise = {});

struct CollisionReport {
  bool collided = false;
  std::size_t first_sample = 0;
};

/// True iff some sample lies on a Solid cell of the (undilated) grid.
CollisionReport detect_collision(const FlightLog& log, const OccupancyGrid& grid);

}  // namespace windplan
