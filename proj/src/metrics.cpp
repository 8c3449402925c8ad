#include "windplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>

#include "windplan/planner.hpp"

namespace windplan {

std::vector<double> deviation_series(const FlightLog& actual, const Reference& reference) {
  if (actual.samples.empty()) throw Error(ErrorCode::EmptyLog, "deviation_series: empty log");
  std::vector<double> out;
  out.reserve(actual.samples.size());
  for (const auto& s : actual.samples) out.push_back((s.pos - reference.at(s.t).pos).norm());
  return out;
}

std::vector<double> deviation_series(const FlightLog& actual, const BezierTrajectory& reference) {
  return deviation_series(actual, Reference::from_bezier(reference));
}

std::vector<double> spatial_deviation_series(const FlightLog& actual, const Polyline& reference) {
  if (actual.samples.empty()) throw Error(ErrorCode::EmptyLog, "spatial_deviation_series: empty log");
  if (reference.empty()) throw Error(ErrorCode::EmptyLog, "spatial_deviation_series: empty reference");
  std::vector<double> out;
  out.reserve(actual.samples.size());
  for (const auto& s : actual.samples) {
    double best = (s.pos - reference.front()).norm();
    for (std::size_t k = 0; k + 1 < reference.size(); ++k) {
      const Vec2 ab = reference[k + 1] - reference[k];
      const double len2 = ab.squaredNorm();
      const double t = len2 > 0 ? std::clamp((s.pos - reference[k]).dot(ab) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, (reference[k] + t * ab - s.pos).norm());
    }
    out.push_back(best);
  }
  return out;
}

double percentile(std::vector<double> series, double q) {
  if (series.empty()) throw Error(ErrorCode::EmptyLog, "percentile: empty series");
  std::sort(series.begin(), series.end());
  const double rank = q * static_cast<double>(series.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, series.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return series[lo] + frac * (series[hi] - series[lo]);
}

double discrete_frechet(const Polyline& a, const Polyline& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyLog, "discrete_frechet: empty polyline");
  const std::size_t m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = (a[i] - b[j]).norm();
      double reach;
      if (i == 0 && j == 0) {
        reach = 0.0;
      } else if (i == 0) {
        reach = cur[j - 1];
      } else if (j == 0) {
        reach = prev[0];
      } else {
        reach = std::min({prev[j], cur[j - 1], prev[j - 1]});
      }
      cur[j] = std::max(d, reach);
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

JerkStats jerk_stats(const FlightLog& log, int window) {
  const std::size_t n = log.samples.size();
  if (n < 4) throw Error(ErrorCode::TooFewSamples, "jerk_stats: needs at least 4 samples");
  window = std::clamp(window, 1, static_cast<int>(n) - 3);

  std::vector<Vec2> smooth(n - window + 1, Vec2::Zero());
  for (std::size_t k = 0; k < smooth.size(); ++k) {
    for (int w = 0; w < window; ++w) smooth[k] += log.samples[k + w].pos;
    smooth[k] /= window;
  }
  const double inv_dt3 = 1.0 / (log.dt * log.dt * log.dt);
  JerkStats st;
  st.series.reserve(smooth.size() - 3);
  for (std::size_t k = 0; k + 3 < smooth.size(); ++k) {
    const Vec2 j = (smooth[k + 3] - 3.0 * smooth[k + 2] + 3.0 * smooth[k + 1] - smooth[k]) * inv_dt3;
    st.series.push_back(j.norm());
  }
  st.mean = std::accumulate(st.series.begin(), st.series.end(), 0.0) / static_cast<double>(st.series.size());
  st.max = *std::max_element(st.series.begin(), st.series.end());
  return st;
}

double displacement(const FlightLog& log_wind, const FlightLog& log_no_wind) {
  if (log_wind.samples.empty() || log_no_wind.samples.empty())
    throw Error(ErrorCode::EmptyLog, "displacement: empty log");
  const auto& ref = log_no_wind.samples;
  const double t0 = std::max(log_wind.samples.front().t, ref.front().t);
  const double t1 = std::min(log_wind.samples.back().t, ref.back().t);
  if (t1 < t0) throw Error(ErrorCode::NoOverlap, "displacement: logs do not overlap in time");

  double worst = 0.0;
  bool any = false;
  std::size_t seg = 0;
  for (const auto& s : log_wind.samples) {
    if (s.t < t0 || s.t > t1) continue;
    while (seg + 1 < ref.size() && ref[seg + 1].t < s.t) ++seg;
    Vec2 p = ref[seg].pos;
    if (seg + 1 < ref.size()) {
      const double span = ref[seg + 1].t - ref[seg].t;
      const double a = span > 0 ? std::clamp((s.t - ref[seg].t) / span, 0.0, 1.0) : 0.0;
      p = (1.0 - a) * ref[seg].pos + a * ref[seg + 1].pos;
    }
    worst = std::max(worst, (s.pos - p).norm());
    any = true;
  }
  if (!any) throw Error(ErrorCode::NoOverlap, "displacement: no common samples");
  return worst;
}

double relative_reduction(double delta_base, double delta_wespr) {
  if (delta_base == 0.0) throw Error(ErrorCode::ZeroBaseline, "relative_reduction: baseline displacement is 0");
  return (delta_base - delta_wespr) / delta_base * 100.0;
}

double wind_penalty(double m_wind, double m_no_wind) {
  if (m_no_wind == 0.0) throw Error(ErrorCode::ZeroBaseline, "wind_penalty: no-wind metric is 0");
  return (m_wind - m_no_wind) / m_no_wind * 100.0;
}

MetricsReport evaluate_flight(const FlightLog& log, const Reference& reference, const OccupancyGrid& grid,
                              int jerk_window) {
  MetricsReport r;
  const std::vector<double> dev = deviation_series(log, reference);
  r.max_dev = *std::max_element(dev.begin(), dev.end());
  r.p95_dev = p95(dev);

  Polyline ref_pts;
  ref_pts.reserve(log.samples.size());
  for (const auto& s : log.samples) ref_pts.push_back(reference.at(s.t).pos);
  const Polyline flown = log.positions();
  r.frechet = discrete_frechet(flown, ref_pts);

  const JerkStats js = jerk_stats(log, jerk_window);
  r.mean_jerk = js.mean;
  r.max_jerk = js.max;
  r.path_length = polyline_length(flown);
  r.collided = detect_collision(log, grid).collided;
  return r;
}

namespace {

double safe_penalty(double wind, double no_wind) {
  return no_wind == 0.0 ? std::numeric_limits<double>::quiet_NaN() : wind_penalty(wind, no_wind);
}

template <typename Field>
MetricComparison summarize(const std::vector<MetricsReport>& no_wind, const std::vector<MetricsReport>& wind,
                           Field field) {
  auto mean = [&](const std::vector<MetricsReport>& v) {
    double s = 0.0;
    for (const auto& r : v) s += r.*field;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  MetricComparison c;
  c.no_wind = mean(no_wind);
  c.wind = mean(wind);
  c.penalty_pct = safe_penalty(c.wind, c.no_wind);
  return c;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json comparison_json(const MetricComparison& c) {
  return {{"no_wind", number_or_null(c.no_wind)},
          {"wind", number_or_null(c.wind)},
          {"penalty_pct", number_or_null(c.penalty_pct)}};
}

nlohmann::json planner_json(const PlannerComparison& p) {
  return {{"max_dev", comparison_json(p.max_dev)},
          {"p95_dev", comparison_json(p.p95_dev)},
          {"frechet", comparison_json(p.frechet)},
          {"mean_jerk", comparison_json(p.mean_jerk)},
          {"max_jerk", comparison_json(p.max_jerk)},
          {"path_length", comparison_json(p.path_length)},
          {"displacement", number_or_null(p.displacement)},
          {"collided_wind", p.collided_wind},
          {"collided_no_wind", p.collided_no_wind}};
}

}  // namespace

PlannerComparison compare_planner(const std::vector<MetricsReport>& no_wind,
                                  const std::vector<MetricsReport>& wind, double mean_displacement) {
  PlannerComparison p;
  p.max_dev = summarize(no_wind, wind, &MetricsReport::max_dev);
  p.p95_dev = summarize(no_wind, wind, &MetricsReport::p95_dev);
  p.frechet = summarize(no_wind, wind, &MetricsReport::frechet);
  p.mean_jerk = summarize(no_wind, wind, &MetricsReport::mean_jerk);
  p.max_jerk = summarize(no_wind, wind, &MetricsReport::max_jerk);
  p.path_length = summarize(no_wind, wind, &MetricsReport::path_length);
  p.displacement = mean_displacement;
  p.collided_wind = std::any_of(wind.begin(), wind.end(), [](const auto& r) { return r.collided; });
  p.collided_no_wind = std::any_of(no_wind.begin(), no_wind.end(), [](const auto& r) { return r.collided; });
  return p;
}

std::string to_json(const MetricsReport& r) {
  const nlohmann::json j = {{"max_dev", number_or_null(r.max_dev)},
                            {"p95_dev", number_or_null(r.p95_dev)},
                            {"frechet", number_or_null(r.frechet)},
                            {"mean_jerk", number_or_null(r.mean_jerk)},
                            {"max_jerk", number_or_null(r.max_jerk)},
                            {"path_length", number_or_null(r.path_length)},
                            {"collided", r.collided}};
  return j.dump(2);
}

std::string to_json(const ComparisonReport& r) {
  const nlohmann::json j = {{"trials", r.trials},
                            {"base", planner_json(r.base)},
                            {"wespr", planner_json(r.wespr)},
                            {"relative_reduction_pct", number_or_null(r.relative_reduction_pct)}};
  return j.dump(2);
}

}  // namespace windplan
