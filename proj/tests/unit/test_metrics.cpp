#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "windplan/metrics.hpp"

using namespace windplan;

namespace {

FlightLog log_from(const std::function<Vec2(double)>& pos, double dt, int n) {
  FlightLog log;
  log.dt = dt;
  for (int k = 0; k < n; ++k) log.samples.push_back({k * dt, pos(k * dt), Vec2::Zero(), Vec2::Zero()});
  return log;
}

BezierTrajectory reference_curve() {
  return BezierTrajectory{{{0.2, 0.2}, {0.8, 1.0}, {1.6, 0.0}, {2.2, 0.6}}, 4.0};
}

// Minimum over every monotone coupling of the largest coupled distance.
void enumerate(const Polyline& a, const Polyline& b, std::size_t i, std::size_t j, double so_far, double& best) {
  so_far = std::max(so_far, (a[i] - b[j]).norm());
  if (so_far >= best) return;
  if (i + 1 == a.size() && j + 1 == b.size()) {
    best = so_far;
    return;
  }
  if (i + 1 < a.size()) enumerate(a, b, i + 1, j, so_far, best);
  if (j + 1 < b.size()) enumerate(a, b, i, j + 1, so_far, best);
  if (i + 1 < a.size() && j + 1 < b.size()) enumerate(a, b, i + 1, j + 1, so_far, best);
}

double brute_frechet(const Polyline& a, const Polyline& b) {
  double best = std::numeric_limits<double>::infinity();
  enumerate(a, b, 0, 0, 0.0, best);
  return best;
}

Polyline random_polyline(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Polyline p;
  for (int k = 0; k < n; ++k) p.emplace_back(u(rng), u(rng));
  return p;
}

}  // namespace

TEST_CASE("deviation of a perfect replay is zero and of a shifted one is the shift") {
  const BezierTrajectory c = reference_curve();
  const Reference ref = Reference::from_bezier(c);
  const FlightLog exact = log_from([&](double t) { return ref.at(t).pos; }, 0.01, 401);
  for (double d : deviation_series(exact, c)) CHECK(d == 0.0);
  const FlightLog shifted = log_from([&](double t) { return Vec2(ref.at(t).pos + Vec2(0.1, 0)); }, 0.01, 401);
  for (double d : deviation_series(shifted, c)) CHECK(d == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(deviation_series(FlightLog{}, c), Error);
}

TEST_CASE("maximum deviation under a gust pulse equals the pulse peak") {
  const BezierTrajectory c = reference_curve();
  const Reference ref = Reference::from_bezier(c);
  auto pulse = [](double t) { return 0.23 * std::exp(-std::pow((t - 2.0) / 0.3, 2)); };
  const FlightLog log = log_from([&](double t) { return Vec2(ref.at(t).pos + Vec2(0, pulse(t))); }, 0.01, 401);
  const auto dev = deviation_series(log, c);
  CHECK(*std::max_element(dev.begin(), dev.end()) == doctest::Approx(0.23).epsilon(1e-12));
}

TEST_CASE("past the reference duration the goal is held") {
  const BezierTrajectory c = reference_curve();
  const FlightLog log = log_from([&](double) { return c.control.back(); }, 0.5, 12);
  const auto dev = deviation_series(log, c);
  CHECK(dev.back() == 0.0);
  CHECK(dev[9] == 0.0);  // t = 4.5
}

TEST_CASE("spatial deviation ignores timing") {
  const Polyline ref{{0, 0}, {1, 0}};
  const FlightLog log = log_from([](double t) { return Vec2(t * t, 0.05); }, 0.1, 11);
  for (double d : spatial_deviation_series(log, ref)) CHECK(d == doctest::Approx(0.05));
}

TEST_CASE("percentiles with linear interpolation") {
  std::vector<double> s;
  for (int k = 1; k <= 100; ++k) s.push_back(k);
  std::shuffle(s.begin(), s.end(), std::mt19937(1));
  CHECK(p95(s) == doctest::Approx(95.05).epsilon(1e-12));
  CHECK(p95(std::vector<double>(7, 2.5)) == 2.5);
  CHECK(p95({4.25}) == 4.25);
  CHECK(percentile({1, 3}, 0.5) == 2.0);
  CHECK_THROWS_AS(p95({}), Error);
}

TEST_CASE("Frechet distance examples") {
  const Polyline a{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  CHECK(discrete_frechet(a, a) == 0.0);
  Polyline b = a;
  for (auto& p : b) p.y() += 0.37;
  CHECK(discrete_frechet(a, b) == doctest::Approx(0.37));
  CHECK(discrete_frechet({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));
}

TEST_CASE("Frechet DP equals exhaustive coupling enumeration") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> len(1, 8);
  for (int k = 0; k < 200; ++k) {
    const Polyline a = random_polyline(rng, len(rng)), b = random_polyline(rng, len(rng));
    CHECK(discrete_frechet(a, b) == brute_frechet(a, b));
  }
}

TEST_CASE("Frechet distance is a pseudometric") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> len(2, 10);
  for (int k = 0; k < 100; ++k) {
    const Polyline a = random_polyline(rng, len(rng)), b = random_polyline(rng, len(rng)),
                   c = random_polyline(rng, len(rng));
    const double ab = discrete_frechet(a, b);
    CHECK(ab == discrete_frechet(b, a));
    CHECK(ab <= discrete_frechet(a, c) + discrete_frechet(c, b) + 1e-12);
    CHECK(ab >= (a.front() - b.front()).norm());
    CHECK(ab >= (a.back() - b.back()).norm());
  }
}

TEST_CASE("jerk of a cubic is six") {
  const FlightLog cubic = log_from([](double t) { return Vec2(t * t * t, 0.0); }, 0.01, 200);
  const JerkStats raw = jerk_stats(cubic, 1);
  for (double j : raw.series) CHECK(j == doctest::Approx(6.0).epsilon(1e-6));
  // A moving average keeps the leading cubic coefficient.
  const JerkStats filt = jerk_stats(cubic, 5);
  for (double j : filt.series) CHECK(j == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(filt.series.size() == 200 - 4 - 3);
}

TEST_CASE("jerk of a sinusoid peaks at omega cubed") {
  const double w = 5.0, dt = 0.01;  // dt * w = 0.05
  const FlightLog s = log_from([&](double t) { return Vec2(std::sin(w * t), 0.0); }, dt, 800);
  CHECK(jerk_stats(s, 1).max == doctest::Approx(w * w * w).epsilon(0.01));
  CHECK(jerk_stats(s, 5).max == doctest::Approx(w * w * w).epsilon(0.01));
}

TEST_CASE("constant velocity has no jerk") {
  const FlightLog lin = log_from([](double t) { return Vec2(0.3 + 0.5 * t, 0.2 - 0.1 * t); }, 0.01, 300);
  CHECK(jerk_stats(lin).max < 1e-6);
  CHECK_THROWS_AS(jerk_stats(log_from([](double) { return Vec2::Zero(); }, 0.01, 3)), Error);
}

TEST_CASE("displacement between wind and calm logs") {
  const auto path = [](double t) { return Vec2(t, std::sin(t)); };
  const FlightLog a = log_from(path, 0.01, 300);
  CHECK(displacement(a, a) == 0.0);
  const FlightLog b = log_from([&](double t) { return Vec2(path(t) + Vec2(0.03, -0.04)); }, 0.01, 300);
  CHECK(displacement(b, a) == doctest::Approx(0.05).epsilon(1e-12));
  // Coarser calm log is interpolated linearly onto the wind log's times.
  const FlightLog line = log_from([](double t) { return Vec2(2 * t, 0.0); }, 0.01, 101);
  const FlightLog coarse = log_from([](double t) { return Vec2(2 * t, 0.0); }, 0.1, 11);
  CHECK(displacement(line, coarse) < 1e-12);
  // Only the overlapping time span counts.
  FlightLog late = log_from([](double) { return Vec2(5, 5); }, 0.01, 10);
  for (auto& s : late.samples) s.t += 100.0;
  CHECK_THROWS_AS(displacement(late, a), Error);
}

TEST_CASE("relative reduction and wind penalty arithmetic") {
  CHECK(relative_reduction(0.199, 0.082) == doctest::Approx(100.0 * 0.117 / 0.199).epsilon(1e-12));
  CHECK(relative_reduction(0.199, 0.082) == doctest::Approx(58.8).epsilon(0.0015 / 0.588));
  CHECK(relative_reduction(0.260, 0.228) == doctest::Approx(12.3).epsilon(0.01));
  CHECK(relative_reduction(0.3, 0.3) == 0.0);
  CHECK_THROWS_AS(relative_reduction(0.0, 0.1), Error);
  CHECK(wind_penalty(0.6, 0.4) == doctest::Approx(50.0));
  CHECK(wind_penalty(0.4, 0.4) == 0.0);
  CHECK(wind_penalty(0.3, 0.4) == doctest::Approx(-25.0));
  CHECK_THROWS_AS(wind_penalty(0.3, 0.0), Error);
}

TEST_CASE("penalties are scale invariant and reductions antisymmetric in sign") {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), s = u(rng);
    CHECK(wind_penalty(s * a, s * b) == doctest::Approx(wind_penalty(a, b)));
    CHECK(relative_reduction(s * a, s * b) == doctest::Approx(relative_reduction(a, b)));
    CHECK((relative_reduction(a, b) > 0) == (b < a));
  }
}

TEST_CASE("comparison aggregates trials and writes null for undefined penalties") {
  MetricsReport calm, wind;
  calm.max_dev = 0.2;
  wind.max_dev = 0.3;
  calm.path_length = wind.path_length = 2.0;
  wind.collided = true;
  const PlannerComparison pc = compare_planner({calm, calm}, {wind, wind}, 0.1);
  CHECK(pc.max_dev.no_wind == doctest::Approx(0.2));
  CHECK(pc.max_dev.penalty_pct == doctest::Approx(50.0));
  CHECK(std::isnan(pc.mean_jerk.penalty_pct));
  CHECK(pc.collided_wind);
  CHECK_FALSE(pc.collided_no_wind);
  ComparisonReport r{pc, pc, 0.0, 2};
  const std::string js = to_json(r);
  CHECK(js.find("null") != std::string::npos);
  CHECK(js.find("nan") == std::string::npos);
}
