#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "windplan/bezier.hpp"
#include "windplan/costmap.hpp"
#include "windplan/env.hpp"
#include "windplan/flightsim.hpp"
#include "windplan/lbm.hpp"
#include "windplan/metrics.hpp"
#include "windplan/planner.hpp"

namespace windplan {

enum class PlanMode { Wespr, Base };

PlanMode parse_mode(const std::string& s);
const char* to_string(PlanMode m);

struct PlanOptions {
  PlanMode mode = PlanMode::Wespr;
  bool flow_aware = true;  // ignored in base mode, which is never flow-aware
};

struct PlanResult {
  PlanMode mode = PlanMode::Wespr;
  OccupancyGrid dilated;
  CostMap costmap;
  double mean_alpha = 0.0;
  bool against_flow = false;
  GridPath path;
  Polyline raw_polyline;   // cell centres with exact endpoints
  Polyline seed_polyline;  // collinear vertices removed
  BezierTrajectory initial;
  OptimizeResult optimized;
  double integrated_cost = 0.0;  // cost-map line integral of the optimized curve

  const BezierTrajectory& trajectory() const { return optimized.traj; }
};

/// Objective weights, drag model, boxes and BCD options derived from the parameters.
ObjectiveWeights objective_weights(const PipelineParams& p, PlanMode mode);
DroneModel drone_model(const PipelineParams& p);
TrackingGains tracking_gains(const PipelineParams& p);

/// Dilation, cost map, A* seeding and Bezier refinement against a given wind field.
/// Throws DilationSwallowsEndpoint when the buffer covers the start or goal.
PlanResult plan(const Scenario& sc, const WindField& field, const PlanOptions& opts = {});

/// Wind-on and wind-off replays of one reference, trial k seeded with seed + k.
struct ReplayPair {
  FlightLog wind;
  FlightLog no_wind;
  MetricsReport wind_report;
  MetricsReport no_wind_report;
  double displacement = 0.0;
};

std::vector<ReplayPair> replay_trials(const Scenario& sc, const WindField& field, const Reference& ref,
                                      int trials, std::uint64_t seed);

struct CompareResult {
  PlanResult base;
  PlanResult wespr;
  std::vector<ReplayPair> base_trials;
  std::vector<ReplayPair> wespr_trials;
  ComparisonReport report;
};

/// Plans both modes and replays each under wind-on and wind-off conditions.
CompareResult compare(const Scenario& sc, const WindField& field, int trials = 1, std::uint64_t seed = 0);

/// Replays the optimized Bezier and the raw A* polyline (same duration) under wind.
struct AblationResult {
  double bezier_mean_jerk = 0.0;
  double polyline_mean_jerk = 0.0;
  double reduction_pct = 0.0;
};

AblationResult bezier_vs_polyline(const Scenario& sc, const WindField& field, const PlanResult& plan);

/// Hash of the canonical scenario document.
std::string scenario_hash(const Scenario& sc);

struct RunManifest {
  std::string command;
  std::string scenario_hash;
  std::string scenario_name;
  std::vector<std::pair<std::string, double>> durations;  // seconds, in stage order
  std::vector<std::string> outputs;                       // relative to the output directory
  std::string params_json;                                // parameter snapshot
  std::string details_json = "{}";                        // command-specific facts

  std::string to_json() const;
};

/// Wall-clock stage timer that appends to a manifest.
class StageClock {
 public:
  explicit StageClock(RunManifest& m);
  void lap(const std::string& stage);

 private:
  RunManifest& manifest_;
  double last_;
};

struct CommandOptions {
  std::filesystem::path out_dir = "out";
  int threads = 1;
  PlanOptions plan;
  std::optional<std::filesystem::path> field_csv;  // reuse a written field instead of solving
  int trials = 1;
  std::uint64_t seed = 0;
};

/// Commands behind the CLI. Each writes its artifacts and manifest.json into out_dir
/// and returns the manifest.
RunManifest run_simulate_wind(const Scenario& sc, const CommandOptions& opts);
RunManifest run_plan(const Scenario& sc, const CommandOptions& opts);
RunManifest run_compare(const Scenario& sc, const CommandOptions& opts);

}  // namespace windplan
