#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "windplan/io.hpp"
#include "windplan/pipeline.hpp"

namespace py = pybind11;
using namespace windplan;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

Polyline to_polyline(const Points& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw py::value_error("expected an (N, 2) array of points");
  Polyline out;
  out.reserve(a.shape(0));
  auto r = a.unchecked<2>();
  for (py::ssize_t k = 0; k < a.shape(0); ++k) out.emplace_back(r(k, 0), r(k, 1));
  return out;
}

py::array_t<double> to_array(const Polyline& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    w(k, 0) = pts[k].x();
    w(k, 1) = pts[k].y();
  }
  return out;
}

template <typename T>
py::array_t<T> raster(const std::vector<T>& v, const GridGeometry& g) {
  py::array_t<T> out({static_cast<py::ssize_t>(g.height), static_cast<py::ssize_t>(g.width)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

FlightLog to_log(const Points& positions, double dt) {
  FlightLog log;
  log.dt = dt;
  const Polyline pts = to_polyline(positions);
  for (std::size_t k = 0; k < pts.size(); ++k) log.samples.push_back({k * dt, pts[k], Vec2::Zero(), Vec2::Zero()});
  return log;
}

BezierTrajectory to_curve(const Points& control, double T) { return BezierTrajectory{to_polyline(control), T}; }

py::dict plan_dict(const PlanResult& r) {
  py::dict d;
  d["mode"] = to_string(r.mode);
  d["against_flow"] = r.against_flow;
  d["mean_alignment"] = r.mean_alpha;
  d["control_points"] = to_array(r.trajectory().control);
  d["duration"] = r.trajectory().T;
  d["astar_path"] = to_array(r.raw_polyline);
  d["astar_cost"] = r.path.total_cost;
  d["objective_history"] = r.optimized.history;
  d["integrated_cost"] = r.integrated_cost;
  d["cost"] = raster(r.costmap.cost, r.costmap.geom);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wind-aware trajectory planning core";

  static py::exception<Error> error(m, "WindplanError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      PyErr_SetObject(exc.ptr(), py::make_tuple(to_string(e.code()), e.what()).ptr());
    }
  });

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("name", [](const Scenario& s) { return s.name; })
      .def_property_readonly("width", [](const Scenario& s) { return s.grid.width(); })
      .def_property_readonly("height", [](const Scenario& s) { return s.grid.height(); })
      .def_property_readonly("cell_size", [](const Scenario& s) { return s.grid.cell_size(); })
      .def_property_readonly("start", [](const Scenario& s) { return s.start; })
      .def_property_readonly("goal", [](const Scenario& s) { return s.goal; })
      .def_property_readonly("solid",
                             [](const Scenario& s) {
                               std::vector<std::uint8_t> v;
                               for (CellState c : s.grid.cells()) v.push_back(c == CellState::Solid);
                               return raster(v, s.grid.geometry());
                             })
      .def("set_param", [](Scenario& s, const std::string& k, double v) { s.params.set(k, v); }, py::arg("key"),
           py::arg("value"))
      .def("to_json", &scenario_to_json)
      .def("hash", &scenario_hash);

  m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); }, py::arg("path"));
  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); }, py::arg("text"));

  py::class_<WindField>(m, "WindField")
      .def_property_readonly("width", &WindField::width)
      .def_property_readonly("height", &WindField::height)
      .def_property_readonly("cell_size", &WindField::cell_size)
      .def_property_readonly("vx", [](const WindField& f) { return raster(f.vx(), f.geometry()); })
      .def_property_readonly("vy", [](const WindField& f) { return raster(f.vy(), f.geometry()); })
      .def_property_readonly("speed", [](const WindField& f) { return raster(f.speed(), f.geometry()); })
      .def_property_readonly("wall", [](const WindField& f) { return raster(f.wall_mask(), f.geometry()); })
      .def("sample", [](const WindField& f, double x, double y) { return f.sample(Vec2(x, y)); })
      .def("max_speed", &WindField::max_speed);

  m.def(
      "simulate_wind",
      [](const Scenario& sc, int threads) {
        py::gil_scoped_release release;
        return simulate_wind(sc, threads).field;
      },
      py::arg("scenario"), py::arg("threads") = 1);
  m.def("still_air", [](const Scenario& sc) { return WindField::still_air(sc.grid.geometry()); });
  m.def("read_field_csv", [](const std::filesystem::path& p) { return read_field_csv(p); });
  m.def("reynolds_tau", &reynolds_tau, py::arg("Re"), py::arg("u_lat"), py::arg("length_lat"));
  m.def("equilibrium", [](double rho, double ux, double uy) {
    const Populations f = equilibrium(rho, Vec2(ux, uy));
    return std::vector<double>(f.begin(), f.end());
  });

  m.def(
      "plan",
      [](const Scenario& sc, const WindField& f, const std::string& mode, bool flow_aware) {
        PlanResult r;
        {
          py::gil_scoped_release release;
          r = plan(sc, f, {parse_mode(mode), flow_aware});
        }
        return plan_dict(r);
      },
      py::arg("scenario"), py::arg("field"), py::arg("mode") = "wespr", py::arg("flow_aware") = true);

  m.def(
      "compare_json",
      [](const Scenario& sc, const WindField& f, int trials, std::uint64_t seed) {
        py::gil_scoped_release release;
        return to_json(compare(sc, f, trials, seed).report);
      },
      py::arg("scenario"), py::arg("field"), py::arg("trials") = 1, py::arg("seed") = 0);

  m.def("evaluate_curve", [](const Points& control, double s) { return evaluate(to_curve(control, 1.0), s); },
        py::arg("control"), py::arg("s"));
  m.def(
      "fly",
      [](const Points& control, double T, const WindField& f, const Scenario& sc) {
        const FlightLog log = simulate_flight(Reference::from_bezier(to_curve(control, T)), f, drone_model(sc.params),
                                              tracking_gains(sc.params));
        return to_array(log.positions());
      },
      py::arg("control"), py::arg("duration"), py::arg("field"), py::arg("scenario"));

  m.def("discrete_frechet", [](const Points& a, const Points& b) { return discrete_frechet(to_polyline(a), to_polyline(b)); });
  m.def("percentile", &percentile, py::arg("series"), py::arg("q"));
  m.def("p95", &p95, py::arg("series"));
  m.def("relative_reduction", &relative_reduction, py::arg("delta_base"), py::arg("delta_wespr"));
  m.def("wind_penalty", &wind_penalty, py::arg("m_wind"), py::arg("m_no_wind"));
  m.def(
      "jerk_stats",
      [](const Points& positions, double dt, int window) {
        const JerkStats s = jerk_stats(to_log(positions, dt), window);
        return py::make_tuple(s.mean, s.max, s.series);
      },
      py::arg("positions"), py::arg("dt"), py::arg("window") = 5);
  m.def(
      "displacement",
      [](const Points& wind, const Points& calm, double dt) { return displacement(to_log(wind, dt), to_log(calm, dt)); },
      py::arg("wind"), py::arg("calm"), py::arg("dt"));

  auto command = [](RunManifest (*fn)(const Scenario&, const CommandOptions&)) {
    return [fn](const Scenario& sc, const std::filesystem::path& out_dir, const std::string& mode, int threads,
                int trials, std::uint64_t seed) {
      CommandOptions o;
      o.out_dir = out_dir;
      o.plan.mode = parse_mode(mode);
      o.threads = threads;
      o.trials = trials;
      o.seed = seed;
      py::gil_scoped_release release;
      return fn(sc, o).to_json();
    };
  };
  for (const auto& [name, fn] : {std::pair{"run_simulate_wind", &run_simulate_wind}, std::pair{"run_plan", &run_plan},
                                 std::pair{"run_compare", &run_compare}})
    m.def(name, command(fn), py::arg("scenario"), py::arg("out_dir"), py::arg("mode") = "wespr", py::arg("threads") = 1,
          py::arg("trials") = 1, py::arg("seed") = 0);
}
