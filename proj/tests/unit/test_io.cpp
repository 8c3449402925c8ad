#include <doctest.h>

#include <filesystem>
#include <limits>
#include <random>

#include "windplan/bezier.hpp"
#include "windplan/flightsim.hpp"
#include "windplan/io.hpp"
#include "windplan/lbm.hpp"
#include "windplan/planner.hpp"

using namespace windplan;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "windplan_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("doubles format to the shortest round-trip text") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("PGM round trip at 8 and 16 bits") {
  for (int maxval : {255, 65535}) {
    PgmImage img;
    img.width = 7;
    img.height = 3;
    img.maxval = maxval;
    for (int k = 0; k < 21; ++k) img.pixels.push_back(static_cast<std::uint16_t>((k * 977) % (maxval + 1)));
    write_pgm(scratch("img.pgm"), img);
    const PgmImage back = read_pgm(scratch("img.pgm"));
    CHECK(back.width == 7);
    CHECK(back.height == 3);
    CHECK(back.maxval == maxval);
    CHECK(back.pixels == img.pixels);
  }
  write_text(scratch("comment.pgm"), std::string("P5\n# made by hand\n2 1\n255\n") + '\x07' + '\xff');
  const PgmImage c = read_pgm(scratch("comment.pgm"));
  CHECK(c.pixels == std::vector<std::uint16_t>{7, 255});
  write_text(scratch("bad.pgm"), "P2\n2 1\n255\n0 0\n");
  CHECK_THROWS_AS(read_pgm(scratch("bad.pgm")), Error);
}

TEST_CASE("field CSV round trip is exact") {
  WindField f(9, 5, 0.05);
  std::mt19937 rng(2);
  std::normal_distribution<double> n(0, 1);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 9; ++i) f.set(i, j, Vec2(n(rng), n(rng)), (i + j) % 7 == 0);
  write_field_csv(scratch("field.csv"), f);
  CHECK(read_field_csv(scratch("field.csv")) == f);
  write_field_vtk(scratch("field.vtk"), f);
  const std::string vtk = read_text(scratch("field.vtk"));
  CHECK(vtk.find("DIMENSIONS 9 5 1") != std::string::npos);
  CHECK(vtk.find("VECTORS") != std::string::npos);
}

TEST_CASE("control polygon and flight log round trips") {
  const BezierTrajectory c{{{0.1, 0.2}, {0.30000000000000004, 1.0 / 3.0}, {1.5, 0.25}}, 3.7};
  write_control_polygon_csv(scratch("poly.csv"), c);
  const BezierTrajectory back = read_control_polygon_csv(scratch("poly.csv"));
  CHECK(back.T == c.T);
  CHECK(back.control == c.control);

  FlightLog log;
  log.dt = 0.01;
  for (int k = 0; k < 50; ++k)
    log.samples.push_back({k * 0.01, Vec2(std::sin(k), std::cos(k)), Vec2(k / 3.0, -k / 7.0), Vec2(0.1, 0.2)});
  write_flight_log_csv(scratch("log.csv"), log, "abc", true);
  const FlightLog lb = read_flight_log_csv(scratch("log.csv"));
  CHECK(lb.dt == log.dt);
  REQUIRE(lb.samples.size() == log.samples.size());
  for (std::size_t k = 0; k < log.samples.size(); ++k) {
    CHECK(lb.samples[k].t == log.samples[k].t);
    CHECK(lb.samples[k].pos == log.samples[k].pos);
    CHECK(lb.samples[k].vel == log.samples[k].vel);
  }
  CHECK(read_text(scratch("log.csv")).rfind("# dt=0.01,scenario=abc,wind=on", 0) == 0);
}

TEST_CASE("malformed tables are parse errors") {
  write_text(scratch("broken.csv"), "# T=1\nk,x,y\n0,0.1\n");
  try {
    read_control_polygon_csv(scratch("broken.csv"));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
  }
  write_text(scratch("backwards.csv"), "# dt=0.01,scenario=x,wind=off\nt,x,y,vx,vy,ax_cmd,ay_cmd\n"
                                       "0.02,0,0,0,0,0,0\n0.01,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_flight_log_csv(scratch("backwards.csv")), Error);
  CHECK_THROWS_AS(read_text(scratch("missing-file.csv")), Error);
}

TEST_CASE("cost map and path tables") {
  OccupancyGrid g = dilate_obstacles(OccupancyGrid(12, 8, 0.1), 0.0);
  const CostMap cm = build_costmap(WindField::still_air(g.geometry()), g, {0.25, 0.25}, {0.95, 0.55},
                                   PipelineParams{}, false);
  write_costmap_csv(scratch("cost.csv"), cm);
  const std::string csv = read_text(scratch("cost.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 96);
  write_costmap_pgm(scratch("cost.pgm"), cm);
  const PgmImage img = read_pgm(scratch("cost.pgm"));
  CHECK(img.width == 12);
  CHECK(img.pixels[0] == 255);  // top-left corner is on the ring

  const GridPath p = astar(cm, {2, 2}, {9, 5}, false);
  write_path_csv(scratch("path.csv"), p, cm);
  const std::string pc = read_text(scratch("path.csv"));
  CHECK(std::count(pc.begin(), pc.end(), '\n') == static_cast<long>(1 + p.cells.size()));

  const BezierTrajectory c{{{0.2, 0.2}, {0.5, 0.6}, {0.9, 0.5}}, 1.0};
  write_trajectory_csv(scratch("traj.csv"), c, 0.1);
  const std::string tc = read_text(scratch("traj.csv"));
  CHECK(std::count(tc.begin(), tc.end(), '\n') == 1 + 11);
}
