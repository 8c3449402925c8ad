#pragma once

#include <string>
#include <vector>

#include "windplan/bezier.hpp"
#include "windplan/flightsim.hpp"
#include "windplan/types.hpp"

namespace windplan {

/// Per-sample distance between the flown position at t and the reference at t
/// (reference held at its end state past its duration). Throws EmptyLog.
std::vector<double> deviation_series(const FlightLog& actual, const Reference& reference);
std::vector<double> deviation_series(const FlightLog& actual, const BezierTrajectory& reference);

/// Distance from each flown sample to the closest point of a reference polyline.
std::vector<double> spatial_deviation_series(const FlightLog& actual, const Polyline& reference);

/// Percentile with linear interpolation between order statistics (rank q (n - 1)).
double percentile(std::vector<double> series, double q);
inline double p95(const std::vector<double>& series) { return percentile(series, 0.95); }

/// Discrete Frechet coupling distance between two non-empty polylines.
double discrete_frechet(const Polyline& a, const Polyline& b);

struct JerkStats {
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> series;  // |jerk| per stencil position
};

/// Moving-average prefilter of `window` samples, then the central third difference
/// (x[k+3] - 3x[k+2] + 3x[k+1] - x[k]) / dt^3. window = 1 is unfiltered. Needs >= 4 samples.
JerkStats jerk_stats(const FlightLog& log, int window = 5);

/// max_t |p_wind(t) - p_no_wind(t)| over the overlapping time span, with the
/// no-wind log linearly interpolated onto the wind log's sample times. Throws NoOverlap.
double displacement(const FlightLog& log_wind, const FlightLog& log_no_wind);

/// (delta_base - delta_wespr) / delta_base * 100. Throws ZeroBaseline.
double relative_reduction(double delta_base, double delta_wespr);

/// (m_wind - m_no_wind) / m_no_wind * 100. Throws ZeroBaseline.
double wind_penalty(double m_wind, double m_no_wind);

struct MetricsReport {
  double max_dev = 0.0;
  double p95_dev = 0.0;
  double frechet = 0.0;
  double mean_jerk = 0.0;
  double max_jerk = 0.0;
  double path_length = 0.0;
  bool collided = false;
};

/// Full tracking report of one flight against its reference.
MetricsReport evaluate_flight(const FlightLog& log, const Reference& reference, const OccupancyGrid& grid,
                              int jerk_window = 5);

struct MetricComparison {
  double no_wind = 0.0;
  double wind = 0.0;
  double penalty_pct = 0.0;  // NaN when no_wind is 0
};

struct PlannerComparison {
  MetricComparison max_dev, p95_dev, frechet, mean_jerk, max_jerk, path_length;
  double displacement = 0.0;
  bool collided_wind = false;
  bool collided_no_wind = false;
};

/// Averages per-trial reports and fills in the wind-induced penalties.
PlannerComparison compare_planner(const std::vector<MetricsReport>& no_wind,
                                  const std::vector<MetricsReport>& wind, double mean_displacement);

struct ComparisonReport {
  PlannerComparison base;
  PlannerComparison wespr;
  double relative_reduction_pct = 0.0;  // on trajectory displacement; NaN when delta_base is 0
  int trials = 1;
};

std::string to_json(const MetricsReport& r);
std::string to_json(const ComparisonReport& r);

}  // namespace windplan
