// Acceptance checks. Run one criterion per invocation: `acceptance AC-7`.
// Prints a single "AC-n PASS|FAIL: detail" line and exits 0 on PASS.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <sstream>

#include "windplan/io.hpp"
#include "windplan/pipeline.hpp"

using namespace windplan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "[failed] ") << what << "; ";
  }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scenario_path(const std::string& name) {
  return fs::path(WINDPLAN_SOURCE_DIR) / "scenarios" / (name + ".json");
}

const std::vector<std::string> kScenarios = {"crosswind-corridor", "headwind-avoidance", "tailwind-assist"};

fs::path work_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "windplan_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------

Outcome lbm_analytic() {
  Outcome o;
  const auto t0 = Clock::now();
  {
    const int W = 64, H = 32;
    const double tau = 0.9, g = 1e-6;
    Lattice lat(W, H, tau, EdgeMode::Periodic, EdgeMode::Open);
    for (int i = 0; i < W; ++i) {
      lat.set_solid(i, 0);
      lat.set_solid(i, H - 1);
    }
    lat.set_body_force({g, 0.0});
    lat.initialize_equilibrium(1.0, Vec2::Zero());
    for (int s = 0; s < 20000; ++s) lat.step();
    const double nu = (tau - 0.5) / 3.0, width = H - 2.0, u_max = g * width * width / (8.0 * nu);
    double num = 0, den = 0;
    for (int j = 1; j < H - 1; ++j) {
      const double y = (j - 0.5 - width / 2.0) / (width / 2.0);
      const double exact = u_max * (1.0 - y * y);
      const double u = lat.moments_at(W / 2, j).u.x();
      num += (u - exact) * (u - exact);
      den += exact * exact;
    }
    const double err = std::sqrt(num / den);
    o.require(err < 0.02, "poiseuille L2 error " + std::to_string(err) + " < 0.02");
  }
  {
    Scenario sc;
    sc.grid = OccupancyGrid(64, 32, 0.05);
    WindSource s;
    s.segment = WindSource::Segment{Side::West, 0, 32};
    s.direction = Vec2(1, 0);
    s.speed = 1.0;
    sc.sources = {s};
    sc.start = Vec2(0.5, 0.5);
    sc.goal = Vec2(2.5, 1.0);
    sc.params.n_steps = 6000;
    const WindField f = simulate_wind(sc).field;
    double worst = 0;
    for (int j = 3; j < 29; ++j)
      for (int i = 3; i < 61; ++i) worst = std::max(worst, (f.velocity(i, j) - Vec2(1.0, 0.0)).norm());
    o.require(worst < 1e-2, "uniform inlet max error " + std::to_string(worst) + " m/s < 1e-2");
  }
  const double secs = seconds_since(t0);
  o.require(secs < 30, "runtime " + std::to_string(secs) + " s < 30");
  return o;
}

Outcome lbm_conservation() {
  Outcome o;
  {
    Lattice lat(48, 48, 0.8, EdgeMode::Periodic, EdgeMode::Periodic);
    for (int i = 10; i < 30; ++i) lat.set_solid(i, 20);
    for (int j = 5; j < 15; ++j) lat.set_solid(40, j);
    lat.initialize_equilibrium(1.0, Vec2(0.06, 0.02));
    const double m0 = lat.total_mass();
    for (int s = 0; s < 1000; ++s) lat.step();
    const double drift = std::abs(lat.total_mass() - m0) / m0;
    std::ostringstream d;
    d << "mass drift " << drift << " < 1e-10";
    o.require(drift < 1e-10, d.str());
  }
  {
    Lattice lat(32, 32, 0.7, EdgeMode::Periodic, EdgeMode::Periodic);
    const Vec2 u(0.05, -0.03);
    lat.initialize_equilibrium(1.0, u);
    const Populations f0 = equilibrium(1.0, u);
    for (int s = 0; s < 100; ++s) lat.step();
    double worst = 0;
    for (int j = 0; j < 32; ++j)
      for (int i = 0; i < 32; ++i) {
        const Populations f = lat.populations(i, j);
        for (int q = 0; q < d2q9::Q; ++q) worst = std::max(worst, std::abs(f[q] - f0[q]));
      }
    std::ostringstream d;
    d << "equilibrium drift " << worst << " < 1e-12";
    o.require(worst < 1e-12, d.str());
  }
  return o;
}

double dijkstra(const CostMap& cm, Cell s, Cell t) {
  const auto& g = cm.geom;
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.index(s)] = 0;
  pq.push({0.0, g.index(s)});
  while (!pq.empty()) {
    const auto [d, k] = pq.top();
    pq.pop();
    if (d > dist[k]) continue;
    const Cell c{static_cast<int>(k % g.width), static_cast<int>(k / g.width)};
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const Cell n{c.i + di, c.j + dj};
        if ((!di && !dj) || !g.contains(n) || cm.is_obstacle(n)) continue;
        const double w = (di && dj ? std::sqrt(2.0) : 1.0) * g.cell_size * (cm.at(c) + cm.at(n)) / 2.0;
        if (d + w < dist[g.index(n)]) {
          dist[g.index(n)] = d + w;
          pq.push({d + w, g.index(n)});
        }
      }
  }
  return dist[g.index(t)];
}

Outcome planner_optimality() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(20240);
  std::uniform_real_distribution<double> cost(0.1, 20.0);
  std::bernoulli_distribution wall(0.15);
  int exact = 0, compared = 0;
  while (compared < 50) {
    CostMap cm;
    cm.geom = {32, 32, 0.01};
    cm.cost.resize(cm.geom.size());
    cm.obstacle.assign(cm.geom.size(), 0);
    cm.speed_norm.assign(cm.geom.size(), 0.0);
    cm.alignment.assign(cm.geom.size(), 0.0);
    for (std::size_t k = 0; k < cm.geom.size(); ++k) {
      cm.cost[k] = cost(rng);
      if (wall(rng) && k != 0 && k + 1 != cm.geom.size()) {
        cm.obstacle[k] = 1;
        cm.cost[k] = cm.c_wall;
      }
    }
    const double oracle = dijkstra(cm, {0, 0}, {31, 31});
    if (std::isinf(oracle)) continue;
    ++compared;
    if (astar(cm, {0, 0}, {31, 31}, false).total_cost == oracle) ++exact;
  }
  o.require(exact == compared,
            std::to_string(exact) + "/" + std::to_string(compared) + " random maps match Dijkstra exactly");

  // Constant base cost: the planned cost is the base cost times the octile (8-connected Euclidean) length.
  CostMap flat;
  flat.geom = {32, 32, 0.01};
  flat.cost.assign(flat.geom.size(), 0.5);
  flat.obstacle.assign(flat.geom.size(), 0);
  flat.speed_norm.assign(flat.geom.size(), 0.0);
  flat.alignment.assign(flat.geom.size(), 0.0);
  std::uniform_int_distribution<int> u(0, 31);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const Cell a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const int dx = std::abs(a.i - b.i), dy = std::abs(a.j - b.j);
    const double octile = 0.01 * (std::sqrt(2.0) * std::min(dx, dy) + (std::max(dx, dy) - std::min(dx, dy)));
    const GridPath p = astar(flat, a, b, false);
    worst = std::max({worst, std::abs(p.total_cost - 0.5 * octile), std::abs(p.length_m - octile)});
  }
  o.require(worst < 1e-12, "base-cost paths match the octile shortest length");
  const double secs = seconds_since(t0);
  o.require(secs < 5, "runtime " + std::to_string(secs) + " s < 5");
  return o;
}

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

Outcome frechet_oracle() {
  Outcome o;
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::uniform_int_distribution<int> len(1, 8);
  int exact = 0;
  for (int k = 0; k < 200; ++k) {
    Polyline a(len(rng)), b(len(rng));
    for (auto& p : a) p = Vec2(c(rng), c(rng));
    for (auto& p : b) p = Vec2(c(rng), c(rng));
    double best = std::numeric_limits<double>::infinity();
    enumerate(a, b, 0, 0, 0.0, best);
    if (discrete_frechet(a, b) == best) ++exact;
  }
  o.require(exact == 200, std::to_string(exact) + "/200 pairs equal the exhaustive coupling minimum");
  return o;
}

double hull_cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool in_hull(std::vector<Vec2> pts, const Vec2& p) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& q : pts) {
    while (k >= 2 && hull_cross(h[k - 2], h[k - 1], q) <= 0) --k;
    h[k++] = q;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && hull_cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  for (std::size_t e = 0; e < h.size(); ++e)
    if (hull_cross(h[e], h[(e + 1) % h.size()], p) < -1e-12) return false;
  return true;
}

Outcome bezier_correctness() {
  Outcome o;
  std::mt19937 rng(55);
  std::uniform_real_distribution<double> c(-1.0, 1.0), s01(0.0, 1.0), Ts(0.5, 5.0);
  auto random_curve = [&](int n) {
    BezierTrajectory b;
    for (int k = 0; k <= n; ++k) b.control.emplace_back(c(rng), c(rng));
    b.T = Ts(rng);
    return b;
  };
  bool endpoints = true, hull = true;
  double fd_err = 0, scale_err = 0;
  for (int k = 0; k < 10000; ++k) {
    const BezierTrajectory b = random_curve(3 + k % 10);
    endpoints = endpoints && evaluate(b, 0.0) == b.control.front() && evaluate(b, 1.0) == b.control.back();
    hull = hull && in_hull(b.control, evaluate(b, s01(rng)));
    if (k % 20 == 0) {
      const double t = (0.1 + 0.8 * s01(rng)) * b.T, h = 1e-3 * b.T;
      auto pos = [&](double tt) { return derivatives(b, tt).pos; };
      auto d1 = [&](double hh) { return Vec2((pos(t + hh) - pos(t - hh)) / (2 * hh)); };
      const Vec2 fd = (4.0 * d1(h / 2) - d1(h)) / 3.0;
      const Vec2 v = derivatives(b, t).vel;
      fd_err = std::max(fd_err, (fd - v).norm() / std::max(1.0, v.norm()));

      const double scale = 0.3 + 2.7 * s01(rng);
      BezierTrajectory d = b;
      d.T *= scale;
      const KinematicState a0 = derivatives(b, t), a1 = derivatives(d, t * scale);
      auto rel = [](const Vec2& x, const Vec2& y) { return (x - y).norm() / std::max(1e-300, y.norm()); };
      scale_err = std::max({scale_err, rel(a1.vel, Vec2(a0.vel / scale)),
                            rel(a1.acc, Vec2(a0.acc / (scale * scale))),
                            rel(a1.jerk, Vec2(a0.jerk / std::pow(scale, 3)))});
      if (b.degree() >= 4) scale_err = std::max(scale_err, rel(a1.snap, Vec2(a0.snap / std::pow(scale, 4))));
    }
  }
  o.require(endpoints, "endpoint interpolation exact");
  o.require(hull, "convex hull holds on 10000 curves");
  std::ostringstream d1, d2;
  d1 << "hodograph vs finite difference rel. error " << fd_err << " < 1e-6";
  d2 << "time-scaling rel. error " << scale_err << " < 1e-12";
  o.require(fd_err < 1e-6, d1.str());
  o.require(scale_err < 1e-12, d2.str());

  for (const auto& name : kScenarios) {
    const Scenario sc = load_scenario(scenario_path(name));
    const WindField f = simulate_wind(sc).field;
    for (PlanMode mode : {PlanMode::Wespr, PlanMode::Base}) {
      const PlanResult r = plan(sc, f, {mode, mode == PlanMode::Wespr});
      const auto& h = r.optimized.history;
      bool mono = h.size() >= 2;
      for (std::size_t k = 1; k < h.size(); ++k) mono = mono && h[k] <= h[k - 1];
      o.require(mono, name + "/" + to_string(mode) + " objective non-increasing over " +
                          std::to_string(r.optimized.sweeps) + " sweeps");
    }
  }
  return o;
}

Outcome metric_arithmetic() {
  Outcome o;
  struct Row {
    const char* label;
    double base, wespr, printed;
  };
  const Row rows[] = {
      {"ENV6 max dev", 0.199, 0.082, 58.7}, {"ENV6 p95 dev", 0.171, 0.072, 57.9},
      {"ENV6 frechet", 0.128, 0.068, 46.9}, {"ENV3 max dev", 0.228, 0.127, 44.3},
      {"ENV3 p95 dev", 0.197, 0.100, 49.5}, {"ENV3 frechet", 0.226, 0.127, 43.8},
      {"ENV4 max dev", 0.260, 0.228, 12.5}, {"ENV4 p95 dev", 0.222, 0.190, 14.8},
      {"ENV4 frechet", 0.250, 0.158, 36.9},
  };
  const double headline = relative_reduction(0.199, 0.082);
  std::ostringstream h;
  h.precision(4);
  h << "(0.199, 0.082) -> " << headline << " vs 58.8 +/- 0.15";
  o.require(std::abs(headline - 58.8) <= 0.15, h.str());
  for (const Row& r : rows) {
    const double eta = relative_reduction(r.base, r.wespr);
    std::ostringstream d;
    d.precision(4);
    d << r.label << " " << eta << " vs printed " << r.printed << " (+/- 0.3)";
    o.require(std::abs(eta - r.printed) <= 0.3, d.str());
  }
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  Scenario sc = load_scenario(scenario_path("crosswind-corridor"));
  sc.params.noise_std = 0.0;
  const WindField f = simulate_wind(sc).field;
  const CompareResult c = compare(sc, f, 1, 0);
  const auto& b = c.report.base;
  const auto& w = c.report.wespr;
  std::ostringstream a;
  a.precision(4);
  a << "max-dev penalty wespr " << w.max_dev.penalty_pct << "% < base " << b.max_dev.penalty_pct << "%";
  o.require(w.max_dev.penalty_pct < b.max_dev.penalty_pct, a.str());
  o.require(b.collided_wind, std::string("base collides under wind: ") + (b.collided_wind ? "yes" : "no"));
  o.require(!w.collided_wind, std::string("wespr collides under wind: ") + (w.collided_wind ? "yes" : "no"));
  std::ostringstream j;
  j.precision(4);
  j << "mean jerk under wind wespr " << w.mean_jerk.wind << " < base " << b.mean_jerk.wind;
  o.require(w.mean_jerk.wind < b.mean_jerk.wind, j.str());
  const double secs = seconds_since(t0);
  o.require(secs < 180, "runtime " + std::to_string(secs) + " s < 180");
  return o;
}

Outcome smoothing_ablation() {
  Outcome o;
  const Scenario sc = load_scenario(scenario_path("crosswind-corridor"));
  const WindField f = simulate_wind(sc).field;
  const PlanResult r = plan(sc, f);
  const AblationResult a = bezier_vs_polyline(sc, f, r);
  std::ostringstream d;
  d.precision(4);
  d << "mean jerk bezier " << a.bezier_mean_jerk << " vs polyline " << a.polyline_mean_jerk << ": "
    << a.reduction_pct << "% lower (>= 10%)";
  o.require(a.reduction_pct >= 10.0, d.str());
  return o;
}

Outcome pipeline_budget() {
  Outcome o;
  const Scenario sc = load_scenario(scenario_path("crosswind-corridor"));
  o.require(sc.grid.width() == 300 && sc.grid.height() == 180 && sc.params.n_steps == 10000,
            "300x180 grid with 10000 lattice steps");
  for (int threads : {1, 8}) {
    CommandOptions opts;
    opts.out_dir = work_dir("budget_" + std::to_string(threads));
    opts.threads = threads;
    const auto t0 = Clock::now();
    run_plan(sc, opts);
    const double secs = seconds_since(t0);
    const double limit = threads == 1 ? 120.0 : 40.0;
    std::ostringstream d;
    d.precision(3);
    d << "plan with " << threads << " thread(s): " << secs << " s < " << limit;
    o.require(secs < limit, d.str());
  }
  return o;
}

std::map<std::string, std::string> artifacts(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string text = read_text(e.path());
    if (e.path().filename() == "manifest.json") {
      auto js = nlohmann::ordered_json::parse(text);
      js.erase("durations_s");
      text = js.dump();
    }
    out[e.path().filename().string()] = text;
  }
  return out;
}

Outcome determinism() {
  Outcome o;
  const Scenario sc = load_scenario(scenario_path("tailwind-assist"));
  std::vector<std::map<std::string, std::string>> runs;
  for (int k = 0; k < 2; ++k) {
    CommandOptions opts;
    opts.out_dir = work_dir("determinism_" + std::to_string(k));
    opts.trials = 2;
    run_compare(sc, opts);
    runs.push_back(artifacts(opts.out_dir));
  }
  o.require(runs[0].size() == runs[1].size() && runs[0].size() > 5,
            std::to_string(runs[0].size()) + " artifacts per run");
  int differing = 0;
  for (const auto& [name, text] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != text) {
      ++differing;
      o.detail << "differs: " << name << "; ";
    }
  }
  o.require(differing == 0, "byte-identical trajectory, flight log and metrics artifacts");
  o.require(runs[0].count("metrics.csv") && runs[0].count("wespr_trajectory.csv"), "metrics and trajectories present");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> checks = {
      {"AC-1", {"lattice analytic validation", lbm_analytic}},
      {"AC-2", {"lattice conservation and stationarity", lbm_conservation}},
      {"AC-3", {"planner optimality", planner_optimality}},
      {"AC-4", {"Frechet oracle equivalence", frechet_oracle}},
      {"AC-5", {"Bezier correctness", bezier_correctness}},
      {"AC-6", {"relative reduction arithmetic", metric_arithmetic}},
      {"AC-7", {"end-to-end direction on crosswind-corridor", end_to_end}},
      {"AC-8", {"Bezier vs polyline jerk", smoothing_ablation}},
      {"AC-9", {"plan command budget", pipeline_budget}},
      {"AC-10", {"compare determinism", determinism}},
  };
  std::vector<std::string> ids;
  for (int k = 1; k < argc; ++k) ids.emplace_back(argv[k]);
  if (ids.empty())
    for (int k = 1; k <= 10; ++k) ids.push_back("AC-" + std::to_string(k));

  bool all = true;
  for (const auto& id : ids) {
    const auto it = checks.find(id);
    if (it == checks.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::cout << id << (o.pass ? " PASS" : " FAIL") << ": " << it->second.first << ": " << o.detail.str()
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
