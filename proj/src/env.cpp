#include "windplan/env.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <queue>
#include <variant>

#include "windplan/io.hpp"

namespace windplan {

using nlohmann::json;

Cell GridGeometry::cell_of(const Vec2& p) const {
  return {static_cast<int>(std::floor(p.x() / cell_size)),
          static_cast<int>(std::floor(p.y() / cell_size))};
}

double sample_bilinear(const GridGeometry& geom, const std::vector<double>& values, const Vec2& p) {
  const double gx = std::clamp(p.x() / geom.cell_size - 0.5, 0.0, geom.width - 1.0);
  const double gy = std::clamp(p.y() / geom.cell_size - 0.5, 0.0, geom.height - 1.0);
  const int i0 = std::min(static_cast<int>(gx), geom.width - 2 < 0 ? 0 : geom.width - 2);
  const int j0 = std::min(static_cast<int>(gy), geom.height - 2 < 0 ? 0 : geom.height - 2);
  const int i1 = std::min(i0 + 1, geom.width - 1);
  const int j1 = std::min(j0 + 1, geom.height - 1);
  const double fx = gx - i0;
  const double fy = gy - j0;
  const double v00 = values[geom.index(i0, j0)];
  const double v10 = values[geom.index(i1, j0)];
  const double v01 = values[geom.index(i0, j1)];
  const double v11 = values[geom.index(i1, j1)];
  return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::DilationSwallowsEndpoint: return "DilationSwallowsEndpoint";
    case ErrorCode::NoFluidCells: return "NoFluidCells";
    case ErrorCode::InletOnSolid: return "InletOnSolid";
    case ErrorCode::UnstableTau: return "UnstableTau";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::DegenerateGoal: return "DegenerateGoal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::StartOrGoalBlocked: return "StartOrGoalBlocked";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::DivergedSimulation: return "DivergedSimulation";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
  }
  return "Error";
}

// ---------------------------------------------------------------------------
// OccupancyGrid

OccupancyGrid::OccupancyGrid(int width, int height, double cell_size)
    : geom_{width, height, cell_size} {
  if (width < 4 || height < 4) throw ValidationError("grid", "width and height must be >= 4");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw ValidationError("grid.cell_size", "must be > 0");
  cells_.assign(geom_.size(), CellState::Free);
}

void OccupancyGrid::fill_rect(int i0, int j0, int w, int h, CellState s) {
  for (int j = std::max(j0, 0); j < std::min(j0 + h, height()); ++j)
    for (int i = std::max(i0, 0); i < std::min(i0 + w, width()); ++i) set(i, j, s);
}

std::size_t OccupancyGrid::solid_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), CellState::Solid));
}

// ---------------------------------------------------------------------------
// WindSource

std::vector<Cell> WindSource::cells(const GridGeometry& geom) const {
  std::vector<Cell> out;
  if (segment) {
    const auto& s = *segment;
    const bool vertical = s.side == Side::West || s.side == Side::East;
    const int side_len = vertical ? geom.height : geom.width;
    for (int k = s.start; k < s.start + s.length; ++k) {
      if (k <= 0 || k >= side_len - 1) continue;  // corners stay open boundary
      switch (s.side) {
        case Side::West: out.push_back({0, k}); break;
        case Side::East: out.push_back({geom.width - 1, k}); break;
        case Side::South: out.push_back({k, 0}); break;
        case Side::North: out.push_back({k, geom.height - 1}); break;
      }
    }
  } else if (rect) {
    for (int j = rect->j0; j < rect->j0 + rect->h; ++j)
      for (int i = rect->i0; i < rect->i0 + rect->w; ++i) out.push_back({i, j});
  }
  return out;
}

// ---------------------------------------------------------------------------
// PipelineParams

namespace {

using ParamField = std::variant<double PipelineParams::*, int PipelineParams::*>;

struct ParamEntry {
  const char* name;
  ParamField field;
};

const std::vector<ParamEntry>& param_table() {
  static const std::vector<ParamEntry> table = {
      {"h_min", &PipelineParams::h_min},
      {"Re", &PipelineParams::Re},
      {"n_steps", &PipelineParams::n_steps},
      {"u_lat_max", &PipelineParams::u_lat_max},
      {"ref_length_cells", &PipelineParams::ref_length_cells},
      {"speed_anchor", &PipelineParams::speed_anchor},
      {"conv_tol", &PipelineParams::conv_tol},
      {"conv_interval", &PipelineParams::conv_interval},
      {"w_s", &PipelineParams::w_s},
      {"w_d", &PipelineParams::w_d},
      {"w_a", &PipelineParams::w_a},
      {"c_wall", &PipelineParams::c_wall},
      {"b", &PipelineParams::b},
      {"sigma_smooth", &PipelineParams::sigma_smooth},
      {"base_cost", &PipelineParams::base_cost},
      {"lambda_p", &PipelineParams::lambda_p},
      {"lambda_s", &PipelineParams::lambda_s},
      {"lambda_t", &PipelineParams::lambda_t},
      {"lambda_w", &PipelineParams::lambda_w},
      {"bezier_degree", &PipelineParams::bezier_degree},
      {"box_half_width_cells", &PipelineParams::box_half_width_cells},
      {"cruise_speed", &PipelineParams::cruise_speed},
      {"time_scale_range", &PipelineParams::time_scale_range},
      {"wall_margin", &PipelineParams::wall_margin},
      {"quadrature_samples", &PipelineParams::quadrature_samples},
      {"max_sweeps", &PipelineParams::max_sweeps},
      {"drag_gain", &PipelineParams::drag_gain},
      {"mass", &PipelineParams::mass},
      {"a_max", &PipelineParams::a_max},
      {"dt", &PipelineParams::dt},
      {"kp", &PipelineParams::kp},
      {"kd", &PipelineParams::kd},
      {"noise_std", &PipelineParams::noise_std},
  };
  return table;
}

}  // namespace

void PipelineParams::set(const std::string& key, double value) {
  for (const auto& e : param_table()) {
    if (key != e.name) continue;
    if (auto* d = std::get_if<double PipelineParams::*>(&e.field)) {
      this->*(*d) = value;
    } else {
      const auto ip = std::get<int PipelineParams::*>(e.field);
      if (value != std::floor(value)) throw ValidationError("params." + key, "must be an integer");
      this->*ip = static_cast<int>(value);
    }
    return;
  }
  throw ValidationError("params." + key, "unknown parameter");
}

void PipelineParams::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ValidationError(std::string("params.") + field, what);
  };
  require(h_min >= 0, "h_min", "must be >= 0");
  require(Re > 0, "Re", "must be > 0");
  require(n_steps >= 1, "n_steps", "must be >= 1");
  require(u_lat_max > 0 && u_lat_max <= 0.3, "u_lat_max", "must be in (0, 0.3]");
  require(ref_length_cells >= 0, "ref_length_cells", "must be >= 0");
  require(speed_anchor > 0, "speed_anchor", "must be > 0");
  require(conv_tol >= 0, "conv_tol", "must be >= 0");
  require(conv_interval >= 1, "conv_interval", "must be >= 1");
  require(w_s >= 0 && w_d >= 0 && w_a >= 0, "w_s", "cost weights must be >= 0");
  require(c_wall >= 0, "c_wall", "must be >= 0");
  require(b >= 0, "b", "must be >= 0");
  require(sigma_smooth >= 0, "sigma_smooth", "must be >= 0");
  require(base_cost >= 0.1 && base_cost <= 20, "base_cost", "must be in [0.1, 20]");
  require(lambda_p >= 0 && lambda_s >= 0 && lambda_t >= 0 && lambda_w >= 0, "lambda_p",
          "objective weights must be >= 0");
  require(lambda_p + lambda_s + lambda_t + lambda_w > 0, "lambda_p",
          "at least one objective weight must be > 0");
  require(bezier_degree >= 3 && bezier_degree <= 30, "bezier_degree", "must be in [3, 30]");
  require(box_half_width_cells >= 0, "box_half_width_cells", "must be >= 0");
  require(cruise_speed > 0, "cruise_speed", "must be > 0");
  require(time_scale_range >= 1, "time_scale_range", "must be >= 1");
  require(wall_margin >= 0, "wall_margin", "must be >= 0");
  require(quadrature_samples >= 32, "quadrature_samples", "must be >= 32");
  require(max_sweeps >= 1, "max_sweeps", "must be >= 1");
  require(drag_gain >= 0, "drag_gain", "must be >= 0");
  require(mass > 0, "mass", "must be > 0");
  require(a_max > 0, "a_max", "must be > 0");
  require(dt > 0 && dt <= 0.02, "dt", "must be in (0, 0.02]");
  require(kp >= 0 && kd >= 0, "kp", "gains must be >= 0");
  require(noise_std >= 0, "noise_std", "must be >= 0");
}

// ---------------------------------------------------------------------------
// Scenario

void Scenario::validate(bool flow_aware) const {
  params.validate();
  const auto& g = grid.geometry();
  auto check_point = [&](const Vec2& p, const char* field) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()) || !g.contains_point(p))
      throw ValidationError(field, "lies outside the domain");
    if (grid.solid(g.cell_of(p))) throw ValidationError(field, "lies on a Solid cell");
  };
  check_point(start, "start");
  check_point(goal, "goal");
  if (flow_aware && sources.empty())
    throw ValidationError("sources", "flow-aware planning needs at least one wind source");

  for (std::size_t k = 0; k < sources.size(); ++k) {
    const auto& s = sources[k];
    const std::string field = "sources[" + std::to_string(k) + "]";
    if (s.segment.has_value() == s.rect.has_value())
      throw ValidationError(field, "needs exactly one of side or rect");
    if (!(s.speed >= 0) || !std::isfinite(s.speed))
      throw ValidationError(field + ".speed", "must be >= 0");
    if (std::abs(s.direction.norm() - 1.0) > 1e-9)
      throw ValidationError(field + ".direction", "must be a unit vector");
    if (s.segment) {
      const auto& seg = *s.segment;
      const bool vertical = seg.side == Side::West || seg.side == Side::East;
      const int side_len = vertical ? g.height : g.width;
      if (seg.start < 0 || seg.length < 1 || seg.start + seg.length > side_len)
        throw ValidationError(field, "segment does not lie on its boundary side");
      Vec2 inward;
      switch (seg.side) {
        case Side::West: inward = {1, 0}; break;
        case Side::East: inward = {-1, 0}; break;
        case Side::South: inward = {0, 1}; break;
        case Side::North: inward = {0, -1}; break;
      }
      if (s.direction.dot(inward) <= 0)
        throw ValidationError(field + ".direction", "must point into the domain");
    } else {
      const auto& r = *s.rect;
      if (r.w < 1 || r.h < 1 || !g.contains(r.i0, r.j0) || !g.contains(r.i0 + r.w - 1, r.j0 + r.h - 1))
        throw ValidationError(field + ".rect", "must lie inside the domain");
    }
  }
}

namespace {

const char* side_name(Side s) {
  switch (s) {
    case Side::North: return "N";
    case Side::South: return "S";
    case Side::East: return "E";
    case Side::West: return "W";
  }
  return "W";
}

Side parse_side(const std::string& s, const std::string& field) {
  if (s == "N") return Side::North;
  if (s == "S") return Side::South;
  if (s == "E") return Side::East;
  if (s == "W") return Side::West;
  throw ValidationError(field, "side must be one of N, S, E, W");
}

Vec2 parse_vec2(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::Parse, field + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T get_number(const json& obj, const char* key, const std::string& field) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw Error(ErrorCode::Parse, field + "." + key + ": expected a number");
  return obj[key].get<T>();
}

OccupancyGrid grid_from_pgm(const PgmImage& img, double cell_size) {
  OccupancyGrid g(img.width, img.height, cell_size);
  const int threshold = (img.maxval + 1) / 2;
  for (int r = 0; r < img.height; ++r)
    for (int i = 0; i < img.width; ++i)
      if (img.pixels[static_cast<std::size_t>(r) * img.width + i] >= threshold)
        g.set(i, img.height - 1 - r, CellState::Solid);
  return g;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("scenario: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "scenario: top level must be an object");

  Scenario sc;
  try {
    sc.name = doc.value("name", std::string{});

    if (doc.contains("params")) {
      const auto& p = doc["params"];
      if (!p.is_object()) throw Error(ErrorCode::Parse, "params: expected an object");
      for (auto it = p.begin(); it != p.end(); ++it) {
        if (!it.value().is_number())
          throw Error(ErrorCode::Parse, "params." + it.key() + ": expected a number");
        sc.params.set(it.key(), it.value().get<double>());
      }
    }

    if (!doc.contains("grid") || !doc["grid"].is_object())
      throw Error(ErrorCode::Parse, "grid: missing");
    const auto& gj = doc["grid"];
    const double cell_size = get_number<double>(gj, "cell_size", "grid");

    if (doc.contains("heightmap")) {
      const auto& hj = doc["heightmap"];
      if (!hj.is_object() || !hj.contains("path") || !hj["path"].is_string())
        throw Error(ErrorCode::Parse, "heightmap.path: expected a string");
      const double scale = get_number<double>(hj, "scale", "heightmap");
      const PgmImage img = read_pgm(base_dir / hj["path"].get<std::string>());
      HeightMap hm{img.width, img.height, cell_size, {}};
      hm.heights.resize(static_cast<std::size_t>(img.width) * img.height);
      for (int r = 0; r < img.height; ++r)
        for (int i = 0; i < img.width; ++i)
          hm.heights[static_cast<std::size_t>(img.height - 1 - r) * img.width + i] =
              img.pixels[static_cast<std::size_t>(r) * img.width + i] * scale;
      sc.grid = occupancy_from_heightmap(hm, sc.params.h_min);
    } else if (gj.contains("pgm")) {
      if (!gj["pgm"].is_string()) throw Error(ErrorCode::Parse, "grid.pgm: expected a string");
      sc.grid = grid_from_pgm(read_pgm(base_dir / gj["pgm"].get<std::string>()), cell_size);
    } else {
      sc.grid = OccupancyGrid(get_number<int>(gj, "width", "grid"),
                              get_number<int>(gj, "height", "grid"), cell_size);
    }

    if (gj.contains("solid")) {
      for (const auto& run : gj["solid"]) {
        if (!run.is_array() || run.size() != 3)
          throw Error(ErrorCode::Parse, "grid.solid: each run is [j, i_start, length]");
        const int j = run[0].get<int>(), i0 = run[1].get<int>(), len = run[2].get<int>();
        if (j < 0 || j >= sc.grid.height() || i0 < 0 || len < 0 || i0 + len > sc.grid.width())
          throw ValidationError("grid.solid", "run outside the grid");
        sc.grid.fill_rect(i0, j, len, 1, CellState::Solid);
      }
    }
    if (gj.contains("solid_rects")) {
      for (const auto& r : gj["solid_rects"]) {
        if (!r.is_array() || r.size() != 4)
          throw Error(ErrorCode::Parse, "grid.solid_rects: each rect is [i0, j0, w, h]");
        sc.grid.fill_rect(r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), r[3].get<int>(),
                          CellState::Solid);
      }
    }

    if (doc.contains("sources")) {
      if (!doc["sources"].is_array()) throw Error(ErrorCode::Parse, "sources: expected an array");
      int k = 0;
      for (const auto& sj : doc["sources"]) {
        const std::string field = "sources[" + std::to_string(k++) + "]";
        WindSource src;
        if (sj.contains("side")) {
          WindSource::Segment seg;
          seg.side = parse_side(sj["side"].get<std::string>(), field + ".side");
          seg.start = get_number<int>(sj, "start", field);
          seg.length = get_number<int>(sj, "length", field);
          src.segment = seg;
        }
        if (sj.contains("rect")) {
          const auto& r = sj["rect"];
          if (!r.is_array() || r.size() != 4)
            throw Error(ErrorCode::Parse, field + ".rect: expected [i0, j0, w, h]");
          src.rect = WindSource::Rect{r[0].get<int>(), r[1].get<int>(), r[2].get<int>(),
                                      r[3].get<int>()};
        }
        if (!sj.contains("direction")) throw Error(ErrorCode::Parse, field + ".direction: missing");
        src.direction = parse_vec2(sj["direction"], field + ".direction");
        const double n = src.direction.norm();
        if (!(n > 0)) throw ValidationError(field + ".direction", "must be nonzero");
        if (std::abs(n - 1.0) > 1e-9) src.direction /= n;
        src.speed = get_number<double>(sj, "speed", field);
        sc.sources.push_back(src);
      }
    }

    if (!doc.contains("start")) throw Error(ErrorCode::Parse, "start: missing");
    if (!doc.contains("goal")) throw Error(ErrorCode::Parse, "goal: missing");
    sc.start = parse_vec2(doc["start"], "start");
    sc.goal = parse_vec2(doc["goal"], "goal");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("scenario: ") + e.what());
  }

  sc.validate(!sc.sources.empty());
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
  return parse_scenario(text, path.parent_path());
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  json runs = json::array();
  for (int j = 0; j < s.grid.height(); ++j) {
    int i = 0;
    while (i < s.grid.width()) {
      if (!s.grid.solid(i, j)) {
        ++i;
        continue;
      }
      const int i0 = i;
      while (i < s.grid.width() && s.grid.solid(i, j)) ++i;
      runs.push_back({j, i0, i - i0});
    }
  }
  doc["grid"] = {{"width", s.grid.width()},
                 {"height", s.grid.height()},
                 {"cell_size", s.grid.cell_size()},
                 {"solid", runs}};
  json sources = json::array();
  for (const auto& src : s.sources) {
    json sj;
    if (src.segment) {
      sj["side"] = side_name(src.segment->side);
      sj["start"] = src.segment->start;
      sj["length"] = src.segment->length;
    } else if (src.rect) {
      sj["rect"] = {src.rect->i0, src.rect->j0, src.rect->w, src.rect->h};
    }
    sj["direction"] = {src.direction.x(), src.direction.y()};
    sj["speed"] = src.speed;
    sources.push_back(sj);
  }
  doc["sources"] = sources;
  doc["start"] = {s.start.x(), s.start.y()};
  doc["goal"] = {s.goal.x(), s.goal.y()};
  json params;
  for (const auto& e : param_table()) {
    std::visit([&](auto member) { params[e.name] = s.params.*member; }, e.field);
  }
  doc["params"] = params;
  return doc.dump(2);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  write_text(path, scenario_to_json(s));
}

// ---------------------------------------------------------------------------
// Grid preprocessing

OccupancyGrid occupancy_from_heightmap(const HeightMap& hm, double h_min) {
  if (hm.heights.size() != static_cast<std::size_t>(hm.width) * hm.height)
    throw ValidationError("heightmap", "heights array does not match dimensions");
  OccupancyGrid g(hm.width, hm.height, hm.cell_size);
  for (int j = 0; j < hm.height; ++j) {
    for (int i = 0; i < hm.width; ++i) {
      const double h = hm.heights[static_cast<std::size_t>(j) * hm.width + i];
      if (!std::isfinite(h) || h < 0) throw ValidationError("heightmap", "heights must be finite and >= 0");
      if (h >= h_min) g.set(i, j, CellState::Solid);
    }
  }
  return g;
}

int dilation_radius_cells(double b, double cell_size) {
  // The small slack keeps exact multiples (0.1 / 0.01) from rounding up a cell.
  return static_cast<int>(std::ceil(b / cell_size - 1e-9));
}

OccupancyGrid dilate_obstacles(const OccupancyGrid& grid, double b) {
  if (b < 0) throw ValidationError("b", "must be >= 0");
  const int r = dilation_radius_cells(b, grid.cell_size());
  const int w = grid.width(), h = grid.height();

  // Separable square structuring element: horizontal pass, then vertical.
  std::vector<CellState> horiz(grid.cells().size(), CellState::Free);
  for (int j = 0; j < h; ++j) {
    int last_solid = -1'000'000;
    std::vector<int> next(w + 1, 1'000'000);
    for (int i = w - 1; i >= 0; --i) next[i] = grid.solid(i, j) ? i : next[i + 1];
    for (int i = 0; i < w; ++i) {
      if (grid.solid(i, j)) last_solid = i;
      if (i - last_solid <= r || next[i] - i <= r)
        horiz[static_cast<std::size_t>(j) * w + i] = CellState::Solid;
    }
  }
  OccupancyGrid out = grid;
  for (int i = 0; i < w; ++i) {
    int last_solid = -1'000'000;
    std::vector<int> next(h + 1, 1'000'000);
    for (int j = h - 1; j >= 0; --j)
      next[j] = horiz[static_cast<std::size_t>(j) * w + i] == CellState::Solid ? j : next[j + 1];
    for (int j = 0; j < h; ++j) {
      if (horiz[static_cast<std::size_t>(j) * w + i] == CellState::Solid) last_solid = j;
      out.set(i, j, (j - last_solid <= r || next[j] - j <= r) ? CellState::Solid : CellState::Free);
    }
  }
  for (int i = 0; i < w; ++i) {
    out.set(i, 0, CellState::Solid);
    out.set(i, h - 1, CellState::Solid);
  }
  for (int j = 0; j < h; ++j) {
    out.set(0, j, CellState::Solid);
    out.set(w - 1, j, CellState::Solid);
  }
  return out;
}

int widest_obstacle_cells(const OccupancyGrid& grid) {
  const auto& g = grid.geometry();
  std::vector<char> seen(g.size(), 0);
  int widest = 0;
  std::queue<Cell> q;
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      if (!grid.solid(i, j) || seen[g.index(i, j)]) continue;
      int imin = i, imax = i, jmin = j, jmax = j;
      seen[g.index(i, j)] = 1;
      q.push({i, j});
      while (!q.empty()) {
        const Cell c = q.front();
        q.pop();
        imin = std::min(imin, c.i), imax = std::max(imax, c.i);
        jmin = std::min(jmin, c.j), jmax = std::max(jmax, c.j);
        const Cell nbrs[4] = {{c.i + 1, c.j}, {c.i - 1, c.j}, {c.i, c.j + 1}, {c.i, c.j - 1}};
        for (const Cell& n : nbrs) {
          if (!g.contains(n) || !grid.solid(n) || seen[g.index(n)]) continue;
          seen[g.index(n)] = 1;
          q.push(n);
        }
      }
      widest = std::max({widest, imax - imin + 1, jmax - jmin + 1});
    }
  }
  return widest;
}

}  // namespace windplan
