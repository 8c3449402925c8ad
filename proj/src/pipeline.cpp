#include "windplan/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "windplan/io.hpp"

namespace windplan {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Cell endpoint_cell(const GridGeometry& g, const Vec2& p) { return g.cell_of(p); }

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double mean_of(const std::vector<ReplayPair>& v, double ReplayPair::*field) {
  double s = 0.0;
  for (const auto& r : v) s += r.*field;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

nlohmann::json params_snapshot(const Scenario& sc) {
  return nlohmann::json::parse(scenario_to_json(sc)).at("params");
}

void write_plan_artifacts(const PlanResult& r, const std::filesystem::path& dir, const std::string& prefix,
                          double dt, RunManifest& m) {
  auto add = [&](const std::string& name) {
    m.outputs.push_back(name);
    return dir / name;
  };
  write_costmap_csv(add(prefix + "costmap.csv"), r.costmap);
  write_costmap_pgm(add(prefix + "costmap.pgm"), r.costmap);
  write_path_csv(add(prefix + "astar_path.csv"), r.path, r.costmap);
  write_trajectory_csv(add(prefix + "trajectory.csv"), r.trajectory(), dt);
  write_control_polygon_csv(add(prefix + "control_polygon.csv"), r.trajectory());
}

nlohmann::json plan_details(const PlanResult& r) {
  nlohmann::json hist = nlohmann::json::array();
  for (double j : r.optimized.history) hist.push_back(j);
  return {{"mode", to_string(r.mode)},
          {"against_flow", r.against_flow},
          {"mean_alignment", r.mean_alpha},
          {"astar_cost", r.path.total_cost},
          {"astar_length_m", r.path.length_m},
          {"bezier_degree", r.trajectory().degree()},
          {"duration_s", r.trajectory().T},
          {"objective_history", hist},
          {"sweeps", r.optimized.sweeps},
          {"integrated_cell_cost", r.integrated_cost}};
}

WindField obtain_field(const Scenario& sc, const CommandOptions& opts, StageClock& clock,
                       nlohmann::json& details) {
  WindField field;
  if (opts.field_csv) {
    field = read_field_csv(*opts.field_csv);
    details["field_source"] = opts.field_csv->filename().string();
  } else {
    const SteadyResult res = simulate_wind(sc, opts.threads);
    field = res.field;
    details["lbm"] = {{"steps_run", res.steps_run},
                      {"converged", res.converged},
                      {"last_residual", res.last_residual}};
  }
  clock.lap("simulate");
  return field;
}

RunManifest start_manifest(const std::string& command, const Scenario& sc) {
  RunManifest m;
  m.command = command;
  m.scenario_hash = scenario_hash(sc);
  m.scenario_name = sc.name;
  m.params_json = params_snapshot(sc).dump();
  return m;
}

void finish_manifest(RunManifest& m, const nlohmann::json& details, const std::filesystem::path& dir) {
  m.details_json = details.dump();
  m.outputs.push_back("manifest.json");
  write_text(dir / "manifest.json", m.to_json());
}

}  // namespace

PlanMode parse_mode(const std::string& s) {
  if (s == "wespr") return PlanMode::Wespr;
  if (s == "base") return PlanMode::Base;
  throw ValidationError("mode", "expected 'wespr' or 'base', got '" + s + "'");
}

const char* to_string(PlanMode m) { return m == PlanMode::Wespr ? "wespr" : "base"; }

ObjectiveWeights objective_weights(const PipelineParams& p, PlanMode mode) {
  return {p.lambda_p, p.lambda_s, mode == PlanMode::Base ? 0.0 : p.lambda_t, p.lambda_w};
}

DroneModel drone_model(const PipelineParams& p) { return {p.mass, p.drag_gain, p.a_max, p.dt}; }

TrackingGains tracking_gains(const PipelineParams& p) { return {p.kp, p.kd}; }

PlanResult plan(const Scenario& sc, const WindField& field, const PlanOptions& opts) {
  const auto& p = sc.params;
  const bool flow_aware = opts.mode == PlanMode::Wespr && opts.flow_aware;
  sc.validate(flow_aware);

  PlanResult r;
  r.mode = opts.mode;
  r.dilated = dilate_obstacles(sc.grid, p.b);
  const GridGeometry& g = r.dilated.geometry();
  const Cell s = endpoint_cell(g, sc.start), e = endpoint_cell(g, sc.goal);
  if (r.dilated.solid(s))
    throw Error(ErrorCode::DilationSwallowsEndpoint, "plan: wall buffer covers the start cell");
  if (r.dilated.solid(e))
    throw Error(ErrorCode::DilationSwallowsEndpoint, "plan: wall buffer covers the goal cell");

  r.costmap = build_costmap(field, r.dilated, sc.start, sc.goal, p, flow_aware);
  r.mean_alpha = mean_alignment(r.costmap);
  r.against_flow = flow_aware && select_against_flow(r.mean_alpha);
  r.path = astar(r.costmap, s, e, r.against_flow);
  r.raw_polyline = path_polyline(r.path, g, sc.start, sc.goal);
  r.seed_polyline = simplify_collinear(r.raw_polyline);

  r.initial = initialize_from_path(r.seed_polyline, p.bezier_degree, p.cruise_speed);
  const auto boxes = boxes_around(r.initial, p.box_half_width_cells * g.cell_size);
  const CostContext ctx(r.seed_polyline, &field, r.costmap, DragModel{p.drag_gain, p.mass}, p.quadrature_samples,
                        p.wall_margin);
  OptimizeOptions oo;
  oo.max_sweeps = p.max_sweeps;
  oo.T_min = r.initial.T / p.time_scale_range;
  oo.T_max = r.initial.T * p.time_scale_range;
  r.optimized = optimize(r.initial, objective_weights(p, opts.mode), boxes, ctx, oo);
  r.integrated_cost = integrated_cell_cost(r.optimized.traj, r.costmap);
  return r;
}

std::vector<ReplayPair> replay_trials(const Scenario& sc, const WindField& field, const Reference& ref,
                                      int trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials", "must be >= 1");
  const auto& p = sc.params;
  const DroneModel drone = drone_model(p);
  const TrackingGains gains = tracking_gains(p);
  const WindField calm = WindField::still_air(field.geometry());

  std::vector<ReplayPair> out(trials);
  for (int k = 0; k < trials; ++k) {
    const ReplayNoise noise{p.noise_std, seed + static_cast<std::uint64_t>(k)};
    auto& t = out[k];
    t.wind = simulate_flight(ref, field, drone, gains, noise);
    t.no_wind = simulate_flight(ref, calm, drone, gains, noise);
    t.wind_report = evaluate_flight(t.wind, ref, sc.grid);
    t.no_wind_report = evaluate_flight(t.no_wind, ref, sc.grid);
    t.displacement = displacement(t.wind, t.no_wind);
  }
  return out;
}

namespace {

PlannerComparison summarize_trials(const std::vector<ReplayPair>& trials) {
  std::vector<MetricsReport> no_wind, wind;
  for (const auto& t : trials) {
    no_wind.push_back(t.no_wind_report);
    wind.push_back(t.wind_report);
  }
  return compare_planner(no_wind, wind, mean_of(trials, &ReplayPair::displacement));
}

CompareResult compare_timed(const Scenario& sc, const WindField& field, int trials, std::uint64_t seed,
                            StageClock* clock) {
  auto lap = [&](const char* stage) {
    if (clock) clock->lap(stage);
  };
  CompareResult c;
  c.base = plan(sc, field, {PlanMode::Base, false});
  c.wespr = plan(sc, field, {PlanMode::Wespr, true});
  lap("plan");
  c.base_trials = replay_trials(sc, field, Reference::from_bezier(c.base.trajectory()), trials, seed);
  c.wespr_trials = replay_trials(sc, field, Reference::from_bezier(c.wespr.trajectory()), trials, seed);
  lap("replay");
  c.report.trials = trials;
  c.report.base = summarize_trials(c.base_trials);
  c.report.wespr = summarize_trials(c.wespr_trials);
  c.report.relative_reduction_pct =
      c.report.base.displacement == 0.0 ? nan()
                                        : relative_reduction(c.report.base.displacement, c.report.wespr.displacement);
  lap("metrics");
  return c;
}

}  // namespace

CompareResult compare(const Scenario& sc, const WindField& field, int trials, std::uint64_t seed) {
  return compare_timed(sc, field, trials, seed, nullptr);
}

AblationResult bezier_vs_polyline(const Scenario& sc, const WindField& field, const PlanResult& pr) {
  const auto& p = sc.params;
  const DroneModel drone = drone_model(p);
  const TrackingGains gains = tracking_gains(p);
  const FlightLog smooth = simulate_flight(Reference::from_bezier(pr.trajectory()), field, drone, gains);
  const FlightLog raw =
      simulate_flight(Reference::from_polyline(pr.raw_polyline, pr.trajectory().T), field, drone, gains);
  AblationResult a;
  a.bezier_mean_jerk = jerk_stats(smooth).mean;
  a.polyline_mean_jerk = jerk_stats(raw).mean;
  a.reduction_pct = a.polyline_mean_jerk > 0 ? (a.polyline_mean_jerk - a.bezier_mean_jerk) / a.polyline_mean_jerk * 100
                                             : 0.0;
  return a;
}

std::string scenario_hash(const Scenario& sc) { return fnv1a_hex(scenario_to_json(sc)); }

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["scenario"] = scenario_name;
  j["scenario_hash"] = scenario_hash;
  nlohmann::ordered_json d = nlohmann::ordered_json::object();
  double total = 0.0;
  for (const auto& [stage, secs] : durations) {
    d[stage] = secs;
    total += secs;
  }
  d["total"] = total;
  j["durations_s"] = d;
  j["outputs"] = outputs;
  j["params"] = nlohmann::ordered_json::parse(params_json);
  j["details"] = nlohmann::ordered_json::parse(details_json);
  return j.dump(2) + "\n";
}

StageClock::StageClock(RunManifest& m) : manifest_(m), last_(now_seconds()) {}

void StageClock::lap(const std::string& stage) {
  const double t = now_seconds();
  manifest_.durations.emplace_back(stage, std::max(0.0, t - last_));
  last_ = t;
}

RunManifest run_simulate_wind(const Scenario& sc, const CommandOptions& opts) {
  RunManifest m = start_manifest("simulate-wind", sc);
  StageClock clock(m);
  clock.lap("load");
  nlohmann::json details;
  CommandOptions direct = opts;
  direct.field_csv.reset();
  const WindField field = obtain_field(sc, direct, clock, details);
  details["max_speed"] = field.max_speed();

  std::filesystem::create_directories(opts.out_dir);
  write_field_vtk(opts.out_dir / "field.vtk", field);
  write_field_csv(opts.out_dir / "field.csv", field);
  m.outputs = {"field.vtk", "field.csv"};
  clock.lap("write");
  finish_manifest(m, details, opts.out_dir);
  return m;
}

RunManifest run_plan(const Scenario& sc, const CommandOptions& opts) {
  RunManifest m = start_manifest("plan", sc);
  m.command += std::string(" --mode ") + to_string(opts.plan.mode);
  StageClock clock(m);
  clock.lap("load");
  nlohmann::json details;
  const WindField field = obtain_field(sc, opts, clock, details);

  const PlanResult r = plan(sc, field, opts.plan);
  clock.lap("plan");
  details["plan"] = plan_details(r);

  std::filesystem::create_directories(opts.out_dir);
  write_plan_artifacts(r, opts.out_dir, "", sc.params.dt, m);
  clock.lap("write");
  finish_manifest(m, details, opts.out_dir);
  return m;
}

RunManifest run_compare(const Scenario& sc, const CommandOptions& opts) {
  RunManifest m = start_manifest("compare", sc);
  StageClock clock(m);
  clock.lap("load");
  nlohmann::json details;
  const WindField field = obtain_field(sc, opts, clock, details);
  const auto& dir = opts.out_dir;
  std::filesystem::create_directories(dir);

  const CompareResult c = compare_timed(sc, field, opts.trials, opts.seed, &clock);

  details["base"] = plan_details(c.base);
  details["wespr"] = plan_details(c.wespr);
  write_plan_artifacts(c.base, dir, "base_", sc.params.dt, m);
  write_plan_artifacts(c.wespr, dir, "wespr_", sc.params.dt, m);

  const std::string hash = m.scenario_hash;
  std::string rows = "env,planner,wind,trial,max_dev,p95_dev,frechet,mean_jerk,max_jerk,path_length,collided,displacement\n";
  auto emit = [&](const char* planner, const std::vector<ReplayPair>& trials) {
    for (std::size_t k = 0; k < trials.size(); ++k) {
      for (const bool wind : {false, true}) {
        const MetricsReport& r = wind ? trials[k].wind_report : trials[k].no_wind_report;
        rows += (sc.name.empty() ? hash : sc.name) + ',' + planner + ',' + (wind ? "on" : "off") + ',' +
                std::to_string(k) + ',' + format_double(r.max_dev) + ',' + format_double(r.p95_dev) + ',' +
                format_double(r.frechet) + ',' + format_double(r.mean_jerk) + ',' + format_double(r.max_jerk) + ',' +
                format_double(r.path_length) + ',' + (r.collided ? "1" : "0") + ',' +
                format_double(trials[k].displacement) + '\n';
        const std::string name = std::string("flight_") + planner + (wind ? "_wind_" : "_calm_") + std::to_string(k) +
                                 ".csv";
        write_flight_log_csv(dir / name, wind ? trials[k].wind : trials[k].no_wind, hash, wind);
        m.outputs.push_back(name);
      }
    }
  };
  emit("base", c.base_trials);
  emit("wespr", c.wespr_trials);
  write_text(dir / "metrics.csv", rows);
  write_text(dir / "comparison.json", to_json(c.report) + "\n");
  m.outputs.push_back("metrics.csv");
  m.outputs.push_back("comparison.json");
  clock.lap("write");
  finish_manifest(m, details, dir);
  return m;
}

}  // namespace windplan
