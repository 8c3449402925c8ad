#include "windplan/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "windplan/bezier.hpp"
#include "windplan/costmap.hpp"
#include "windplan/error.hpp"
#include "windplan/flightsim.hpp"
#include "windplan/lbm.hpp"
#include "windplan/planner.hpp"

namespace windplan {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorCode::Parse, path.string() + ": " + what);
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::Validation, "cannot open for writing: " + path.string());
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const std::filesystem::path& path) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) parse_fail(path, "bad number '" + std::string(s) + "'");
  return v;
}

// Parses `key=value` pairs from a `# a=1,b=2` comment line.
std::vector<std::pair<std::string, std::string>> header_pairs(const std::string& line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string_view body(line);
  body.remove_prefix(std::min<std::size_t>(body.find_first_not_of("# "), body.size()));
  for (auto item : split(body, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace_back(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
  }
  return out;
}

std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      tok.push_back(c);
      break;
    }
  }
  while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
  return tok;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) out[k] = digits[h & 0xf];
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, true);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail(path, "cannot open");
  if (next_token(in) != "P5") parse_fail(path, "not a binary PGM (P5)");
  PgmImage img;
  try {
    img.width = std::stoi(next_token(in));
    img.height = std::stoi(next_token(in));
    img.maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    parse_fail(path, "bad PGM header");
  }
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535)
    parse_fail(path, "bad PGM dimensions or maxval");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  const int bytes = img.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(n * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) parse_fail(path, "truncated pixel data");
  img.pixels.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    img.pixels[k] = bytes == 2 ? static_cast<std::uint16_t>(raw[2 * k] << 8 | raw[2 * k + 1]) : raw[k];
  return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& img) {
  auto out = open_out(path, true);
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  const bool wide = img.maxval > 255;
  for (auto p : img.pixels) {
    if (wide) out.put(static_cast<char>(p >> 8));
    out.put(static_cast<char>(p & 0xff));
  }
}

void write_field_vtk(const std::filesystem::path& path, const WindField& field) {
  auto out = open_out(path);
  const auto& g = field.geometry();
  const double h = g.cell_size;
  out << "# vtk DataFile Version 3.0\nwind field\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << g.width << ' ' << g.height << " 1\n";
  out << "ORIGIN " << format_double(0.5 * h) << ' ' << format_double(0.5 * h) << " 0\n";
  out << "SPACING " << format_double(h) << ' ' << format_double(h) << " 1\n";
  out << "POINT_DATA " << g.size() << "\nVECTORS velocity double\n";
  for (std::size_t k = 0; k < g.size(); ++k)
    out << format_double(field.vx()[k]) << ' ' << format_double(field.vy()[k]) << " 0\n";
  out << "SCALARS wall_mask int 1\nLOOKUP_TABLE default\n";
  for (auto w : field.wall_mask()) out << static_cast<int>(w) << '\n';
}

void write_field_csv(const std::filesystem::path& path, const WindField& field) {
  auto out = open_out(path);
  const auto& g = field.geometry();
  out << "# width=" << g.width << ",height=" << g.height << ",cell_size=" << format_double(g.cell_size) << '\n';
  out << "i,j,x_m,y_m,vx,vy,speed,wall\n";
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      const Vec2 c = g.center({i, j});
      const Vec2 u = field.velocity(i, j);
      out << i << ',' << j << ',' << format_double(c.x()) << ',' << format_double(c.y()) << ','
          << format_double(u.x()) << ',' << format_double(u.y()) << ',' << format_double(field.speed(i, j)) << ','
          << (field.wall(i, j) ? 1 : 0) << '\n';
    }
}

WindField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line) || line.rfind('#', 0) != 0) parse_fail(path, "missing geometry header");
  int w = 0, h = 0;
  double cs = 0.0;
  for (const auto& [k, v] : header_pairs(line)) {
    if (k == "width") w = parse_number<int>(v, path);
    else if (k == "height") h = parse_number<int>(v, path);
    else if (k == "cell_size") cs = parse_number<double>(v, path);
  }
  if (w <= 0 || h <= 0 || !(cs > 0)) parse_fail(path, "bad geometry header");
  if (!std::getline(in, line)) parse_fail(path, "missing column header");
  WindField field(w, h, cs);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 8) parse_fail(path, "expected 8 columns");
    const int i = parse_number<int>(cols[0], path), j = parse_number<int>(cols[1], path);
    if (i < 0 || j < 0 || i >= w || j >= h) parse_fail(path, "cell index out of range");
    field.set(i, j, Vec2(parse_number<double>(cols[4], path), parse_number<double>(cols[5], path)),
              parse_number<int>(cols[7], path) != 0);
    ++rows;
  }
  if (rows != static_cast<std::size_t>(w) * h) parse_fail(path, "row count does not match geometry");
  return field;
}

void write_costmap_csv(const std::filesystem::path& path, const CostMap& cmap) {
  auto out = open_out(path);
  out << "i,j,cost,obstacle\n";
  for (int j = 0; j < cmap.geom.height; ++j)
    for (int i = 0; i < cmap.geom.width; ++i) {
      const auto k = cmap.geom.index(i, j);
      out << i << ',' << j << ',' << format_double(cmap.cost[k]) << ',' << static_cast<int>(cmap.obstacle[k])
          << '\n';
    }
}

void write_costmap_pgm(const std::filesystem::path& path, const CostMap& cmap) {
  PgmImage img;
  img.width = cmap.geom.width;
  img.height = cmap.geom.height;
  img.maxval = 255;
  img.pixels.resize(cmap.geom.size());
  for (int j = 0; j < img.height; ++j)
    for (int i = 0; i < img.width; ++i) {
      const auto k = cmap.geom.index(i, j);
      const auto r = static_cast<std::size_t>(img.height - 1 - j) * img.width + i;
      if (cmap.obstacle[k]) {
        img.pixels[r] = 255;
      } else {
        const double a = std::clamp((cmap.cost[k] - kCostFloor) / (kCostCeiling - kCostFloor), 0.0, 1.0);
        img.pixels[r] = static_cast<std::uint16_t>(std::lround(a * 254.0));
      }
    }
  write_pgm(path, img);
}

void write_path_csv(const std::filesystem::path& path, const GridPath& gp, const CostMap& cmap) {
  auto out = open_out(path);
  out << "i,j,x_m,y_m,cumulative_cost\n";
  for (std::size_t k = 0; k < gp.cells.size(); ++k) {
    const Vec2 c = cmap.geom.center(gp.cells[k]);
    const double cum = k < gp.cumulative.size() ? gp.cumulative[k] : 0.0;
    out << gp.cells[k].i << ',' << gp.cells[k].j << ',' << format_double(c.x()) << ',' << format_double(c.y())
        << ',' << format_double(cum) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const BezierTrajectory& traj, double dt) {
  if (!(dt > 0)) throw ValidationError("dt", "must be > 0");
  auto out = open_out(path);
  out << "t,x,y,vx,vy,ax,ay,jx,jy\n";
  const auto steps = static_cast<long>(std::ceil(traj.T / dt - 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(k * dt, traj.T);
    const KinematicState s = derivatives(traj, t);
    out << format_double(t) << ',' << format_double(s.pos.x()) << ',' << format_double(s.pos.y()) << ','
        << format_double(s.vel.x()) << ',' << format_double(s.vel.y()) << ',' << format_double(s.acc.x()) << ','
        << format_double(s.acc.y()) << ',' << format_double(s.jerk.x()) << ',' << format_double(s.jerk.y())
        << '\n';
  }
}

void write_control_polygon_csv(const std::filesystem::path& path, const BezierTrajectory& traj) {
  auto out = open_out(path);
  out << "# T=" << format_double(traj.T) << "\nk,x,y\n";
  for (std::size_t k = 0; k < traj.control.size(); ++k)
    out << k << ',' << format_double(traj.control[k].x()) << ',' << format_double(traj.control[k].y()) << '\n';
}

BezierTrajectory read_control_polygon_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail(path, "cannot open");
  BezierTrajectory traj;
  std::string line;
  bool have_T = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& [k, v] : header_pairs(line))
        if (k == "T") {
          traj.T = parse_number<double>(v, path);
          have_T = true;
        }
      continue;
    }
    if (line.rfind("k,", 0) == 0) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 3) parse_fail(path, "expected 3 columns");
    traj.control.emplace_back(parse_number<double>(cols[1], path), parse_number<double>(cols[2], path));
  }
  if (!have_T || !(traj.T > 0)) parse_fail(path, "missing or invalid T");
  if (traj.control.size() < 2) parse_fail(path, "need at least two control points");
  return traj;
}

void write_flight_log_csv(const std::filesystem::path& path, const FlightLog& log, const std::string& scenario_hash,
                          bool wind_on) {
  auto out = open_out(path);
  out << "# dt=" << format_double(log.dt) << ",scenario=" << scenario_hash << ",wind=" << (wind_on ? "on" : "off")
      << '\n';
  out << "t,x,y,vx,vy,ax_cmd,ay_cmd\n";
  for (const auto& s : log.samples)
    out << format_double(s.t) << ',' << format_double(s.pos.x()) << ',' << format_double(s.pos.y()) << ','
        << format_double(s.vel.x()) << ',' << format_double(s.vel.y()) << ',' << format_double(s.acc_cmd.x())
        << ',' << format_double(s.acc_cmd.y()) << '\n';
}

FlightLog read_flight_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail(path, "cannot open");
  FlightLog log;
  bool have_dt = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& [k, v] : header_pairs(line))
        if (k == "dt") {
          log.dt = parse_number<double>(v, path);
          have_dt = true;
        }
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 7) parse_fail(path, "expected 7 columns");
    FlightSample s;
    s.t = parse_number<double>(cols[0], path);
    s.pos = {parse_number<double>(cols[1], path), parse_number<double>(cols[2], path)};
    s.vel = {parse_number<double>(cols[3], path), parse_number<double>(cols[4], path)};
    s.acc_cmd = {parse_number<double>(cols[5], path), parse_number<double>(cols[6], path)};
    if (!log.samples.empty() && !(s.t > log.samples.back().t)) parse_fail(path, "time is not strictly increasing");
    log.samples.push_back(s);
  }
  if (!have_dt && log.samples.size() >= 2) log.dt = log.samples[1].t - log.samples[0].t;
  if (!(log.dt > 0)) parse_fail(path, "invalid dt");
  return log;
}

}  // namespace windplan
