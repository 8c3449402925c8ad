// windplan: wind-aware trajectory planning from the command line.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "windplan/io.hpp"
#include "windplan/lbm.hpp"
#include "windplan/metrics.hpp"
#include "windplan/pipeline.hpp"

using namespace windplan;

namespace {

int thread_cap() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("WINDPLAN_THREADS");
  if (!env || !*env) return static_cast<int>(hw);
  try {
    const int n = std::stoi(env);
    return std::clamp(n, 1, static_cast<int>(hw));
  } catch (const std::exception&) {
    throw ValidationError("WINDPLAN_THREADS", "must be a positive integer");
  }
}

void apply_overrides(Scenario& sc, const std::vector<std::string>& kvs) {
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("params", "expected key=value, got '" + kv + "'");
    double v;
    try {
      std::size_t used = 0;
      v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError(kv.substr(0, eq), "value is not a number");
    }
    sc.params.set(kv.substr(0, eq), v);
  }
  sc.params.validate();
}

void print_manifest_summary(const RunManifest& m) {
  std::cout << m.command << " scenario=" << (m.scenario_name.empty() ? m.scenario_hash : m.scenario_name) << "\n";
  for (const auto& [stage, secs] : m.durations) std::cout << "  " << stage << ": " << secs << " s\n";
}

// Analytic lattice checks: force-driven channel and closed-box conservation.
int run_validate() {
  bool ok = true;
  {
    const int W = 64, H = 32;
    const double tau = 0.9, force = 1e-6;
    Lattice lat(W, H, tau, EdgeMode::Periodic, EdgeMode::Open);
    for (int i = 0; i < W; ++i) {
      lat.set_solid(i, 0);
      lat.set_solid(i, H - 1);
    }
    lat.set_body_force({force, 0.0});
    lat.initialize_equilibrium(1.0, Vec2::Zero());
    for (int s = 0; s < 20000; ++s) lat.step();
    const double nu = lattice_viscosity(tau), half = (H - 2) / 2.0;
    double num = 0.0, den = 0.0;
    for (int j = 1; j < H - 1; ++j) {
      const double y = j - 0.5;
      const double exact = force / (2.0 * nu) * y * (2.0 * half - y);
      const double u = lat.moments_at(W / 2, j).u.x();
      num += (u - exact) * (u - exact);
      den += exact * exact;
    }
    const double err = std::sqrt(num / den);
    std::cout << "poiseuille relative L2 error: " << err << (err < 0.02 ? " ok" : " FAIL") << "\n";
    ok = ok && err < 0.02;
  }
  {
    Lattice lat(32, 32, 0.8, EdgeMode::Periodic, EdgeMode::Periodic);
    for (int i = 10; i < 20; ++i) lat.set_solid(i, 15);
    lat.initialize_equilibrium(1.0, Vec2(0.05, 0.02));
    const double m0 = lat.total_mass();
    for (int s = 0; s < 1000; ++s) lat.step();
    const double drift = std::abs(lat.total_mass() - m0) / m0;
    std::cout << "closed-box mass drift: " << drift << (drift < 1e-10 ? " ok" : " FAIL") << "\n";
    ok = ok && drift < 1e-10;
  }
  return ok ? 0 : 5;
}

int run_evaluate(const std::string& log_path, const std::string& ref_path, const std::string& calm_path,
                 const std::string& scenario_path, int jerk_window) {
  const FlightLog log = read_flight_log_csv(log_path);
  const BezierTrajectory ref = read_control_polygon_csv(ref_path);
  nlohmann::ordered_json out;
  const auto dev = deviation_series(log, ref);
  out["max_dev"] = *std::max_element(dev.begin(), dev.end());
  out["p95_dev"] = p95(dev);
  Polyline ref_pts;
  for (const auto& s : log.samples) ref_pts.push_back(Reference::from_bezier(ref).at(s.t).pos);
  out["frechet"] = discrete_frechet(log.positions(), ref_pts);
  const JerkStats js = jerk_stats(log, jerk_window);
  out["mean_jerk"] = js.mean;
  out["max_jerk"] = js.max;
  out["path_length"] = polyline_length(log.positions());
  if (!scenario_path.empty()) out["collided"] = detect_collision(log, load_scenario(scenario_path).grid).collided;
  if (!calm_path.empty()) out["displacement"] = displacement(log, read_flight_log_csv(calm_path));
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wind-aware trajectory planning: wind simulation, planning, replay and metrics"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", mode = "wespr", field_path;
  std::vector<std::string> overrides;
  int trials = 1;
  std::uint64_t seed = 0;
  bool no_flow_aware = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--params", overrides, "Parameter overrides as key=value")->take_all();
  };

  auto* sim = app.add_subcommand("simulate-wind", "Solve the steady wind field");
  add_common(sim);

  auto* pl = app.add_subcommand("plan", "Plan a trajectory");
  add_common(pl);
  pl->add_option("--mode", mode, "wespr or base")->check(CLI::IsMember({"wespr", "base"}));
  pl->add_flag("--no-flow-aware", no_flow_aware, "Use the constant base cost in wespr mode");
  pl->add_option("--field", field_path, "Reuse a field.csv written by simulate-wind")->check(CLI::ExistingFile);

  auto* cmp = app.add_subcommand("compare", "Plan both modes and replay with and without wind");
  add_common(cmp);
  cmp->add_option("--trials", trials, "Replays per condition")->check(CLI::PositiveNumber);
  cmp->add_option("--seed", seed, "Base seed for replay noise");
  cmp->add_option("--field", field_path, "Reuse a field.csv written by simulate-wind")->check(CLI::ExistingFile);

  std::string log_path, ref_path, calm_path, eval_scenario;
  int jerk_window = 5;
  auto* ev = app.add_subcommand("evaluate", "Metrics for an externally supplied flight log");
  ev->add_option("log", log_path, "Flight log CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--reference", ref_path, "Control polygon CSV of the reference")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--calm", calm_path, "Wind-off log of the same plan, for displacement")->check(CLI::ExistingFile);
  ev->add_option("--scenario", eval_scenario, "Scenario, for collision checks")->check(CLI::ExistingFile);
  ev->add_option("--jerk-window", jerk_window, "Moving-average window for jerk")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "Analytic lattice Boltzmann checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*val) return run_validate();
    if (*ev) return run_evaluate(log_path, ref_path, calm_path, eval_scenario, jerk_window);

    Scenario sc = load_scenario(scenario_path);
    apply_overrides(sc, overrides);
    CommandOptions opts;
    opts.out_dir = out_dir;
    opts.threads = thread_cap();
    opts.trials = trials;
    opts.seed = seed;
    opts.plan.mode = parse_mode(mode);
    opts.plan.flow_aware = !no_flow_aware;
    if (!field_path.empty()) opts.field_csv = field_path;

    RunManifest m;
    if (*sim) m = run_simulate_wind(sc, opts);
    else if (*pl) m = run_plan(sc, opts);
    else m = run_compare(sc, opts);
    print_manifest_summary(m);
    if (*cmp) std::cout << read_text(std::filesystem::path(out_dir) / "comparison.json");
    return 0;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
