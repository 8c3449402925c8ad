#include "windplan/lbm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace windplan {

using namespace d2q9;

namespace {

// |u| above the lattice sound-speed bound means the run has left the BGK validity window.
constexpr double kBlowupSpeed = 0.57;

}  // namespace

Populations equilibrium(double rho, const Vec2& u) {
  Populations feq;
  const double usq = 1.5 * (u.x() * u.x() + u.y() * u.y());
  for (int q = 0; q < Q; ++q) {
    const double cu = 3.0 * (cx[q] * u.x() + cy[q] * u.y());
    feq[q] = weight[q] * rho * (1.0 + cu + 0.5 * cu * cu - usq);
  }
  return feq;
}

double reynolds_tau(double Re, double u_lat, double length_lat) {
  if (!(Re > 0) || !(u_lat > 0) || !(length_lat >= 1))
    throw Error(ErrorCode::UnstableTau, "reynolds_tau: needs Re > 0, U_lat > 0, L_lat >= 1");
  const double nu = u_lat * length_lat / Re;
  const double tau = 3.0 * nu + 0.5;
  if (!(tau > 0.5) || tau > 2.0)
    throw Error(ErrorCode::UnstableTau,
                "tau = " + std::to_string(tau) + " is outside (0.5, 2.0]; change resolution or U_lat");
  return tau;
}

Moments moments(const Populations& f, const Vec2& force) {
  Moments m;
  double jx = 0.0, jy = 0.0;
  for (int q = 0; q < Q; ++q) {
    m.rho += f[q];
    jx += f[q] * cx[q];
    jy += f[q] * cy[q];
  }
  m.u = Vec2(jx + 0.5 * force.x(), jy + 0.5 * force.y()) / m.rho;
  return m;
}

// ---------------------------------------------------------------------------
// Lattice

Lattice::Lattice(int width, int height, double tau, EdgeMode x_edges, EdgeMode y_edges)
    : width_(width), height_(height), tau_(tau), x_edges_(x_edges), y_edges_(y_edges) {
  if (width < 2 || height < 2) throw ValidationError("lattice", "needs at least 2x2 cells");
  if (!(tau > 0.5)) throw Error(ErrorCode::UnstableTau, "tau must exceed 0.5");
  type_.assign(size(), NodeType::Fluid);
  inlet_ux_.assign(size(), 0.0);
  inlet_uy_.assign(size(), 0.0);
  f_.assign(Q * size(), 0.0);
  f_next_.assign(Q * size(), 0.0);
  initialize_equilibrium(1.0, Vec2::Zero());
}

Vec2 Lattice::inlet_velocity(int i, int j) const {
  const auto k = index(i, j);
  return {inlet_ux_[k], inlet_uy_[k]};
}

void Lattice::set_solid(int i, int j) {
  const auto k = index(i, j);
  type_[k] = NodeType::Solid;
  for (int q = 0; q < Q; ++q) f_[q * size() + k] = 0.0;
  tables_dirty_ = true;
}

void Lattice::set_fluid(int i, int j) {
  type_[index(i, j)] = NodeType::Fluid;
  tables_dirty_ = true;
}

void Lattice::set_inlet(int i, int j, const Vec2& u) {
  const auto k = index(i, j);
  type_[k] = NodeType::Inlet;
  inlet_ux_[k] = u.x();
  inlet_uy_[k] = u.y();
  set_populations(i, j, equilibrium(1.0, u));
  tables_dirty_ = true;
}

void Lattice::initialize_equilibrium(double rho, const Vec2& u) {
  for (int j = 0; j < height_; ++j) {
    for (int i = 0; i < width_; ++i) {
      const auto k = index(i, j);
      if (type_[k] == NodeType::Solid) continue;
      const Vec2 uc = type_[k] == NodeType::Inlet ? inlet_velocity(i, j) : u;
      set_populations(i, j, equilibrium(type_[k] == NodeType::Inlet ? 1.0 : rho, uc));
    }
  }
}

Populations Lattice::populations(int i, int j) const {
  Populations f;
  const auto k = index(i, j);
  for (int q = 0; q < Q; ++q) f[q] = f_[q * size() + k];
  return f;
}

void Lattice::set_populations(int i, int j, const Populations& f) {
  const auto k = index(i, j);
  for (int q = 0; q < Q; ++q) f_[q * size() + k] = f[q];
}

Moments Lattice::moments_at(int i, int j) const { return moments(populations(i, j), force_); }

double Lattice::total_mass() const {
  double m = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    if (type_[k] == NodeType::Solid) continue;
    for (int q = 0; q < Q; ++q) m += f_[q * size() + k];
  }
  return m;
}

void Lattice::rebuild_tables() {
  const auto n = static_cast<std::int32_t>(size());
  stream_dst_.assign(Q * size(), -1);
  inlet_cells_.clear();
  open_cells_.clear();
  for (int j = 0; j < height_; ++j) {
    for (int i = 0; i < width_; ++i) {
      const auto k = static_cast<std::int32_t>(index(i, j));
      if (type_[k] == NodeType::Solid) continue;
      if (type_[k] == NodeType::Inlet) inlet_cells_.push_back(k);
      for (int q = 0; q < Q; ++q) {
        int ti = i + cx[q], tj = j + cy[q];
        if (x_edges_ == EdgeMode::Periodic) ti = (ti + width_) % width_;
        if (y_edges_ == EdgeMode::Periodic) tj = (tj + height_) % height_;
        if (ti < 0 || tj < 0 || ti >= width_ || tj >= height_) continue;  // leaves through an open edge
        const auto t = static_cast<std::int32_t>(index(ti, tj));
        stream_dst_[q * size() + k] =
            type_[t] == NodeType::Solid ? opposite[q] * n + k : q * n + t;
      }
      if (type_[k] != NodeType::Fluid) continue;
      int di = 0, dj = 0;
      if (x_edges_ == EdgeMode::Open) di = i == 0 ? 1 : (i == width_ - 1 ? -1 : 0);
      if (y_edges_ == EdgeMode::Open) dj = j == 0 ? 1 : (j == height_ - 1 ? -1 : 0);
      if (di == 0 && dj == 0) continue;
      const auto inward = static_cast<std::int32_t>(index(i + di, j + dj));
      open_cells_.emplace_back(k, type_[inward] == NodeType::Solid ? -1 : inward);
    }
  }
  tables_dirty_ = false;
}

void Lattice::step() {
  if (tables_dirty_) rebuild_tables();
  const auto n = static_cast<std::int64_t>(size());
  const double omega = 1.0 / tau_;
  const double force_scale = 1.0 - 0.5 * omega;
  const double fx = force_.x(), fy = force_.y();
  const bool forced = fx != 0.0 || fy != 0.0;
  const double* src = f_.data();
  double* dst = f_next_.data();
  const NodeType* type = type_.data();
  const std::int32_t* table = stream_dst_.data();
  bool bad = false;

  // Each (q, destination) pair has exactly one writer, so any cell partition is race-free.
#pragma omp parallel for schedule(static) num_threads(threads_) reduction(|| : bad) if (threads_ > 1)
  for (std::int64_t k = 0; k < n; ++k) {
    if (type[k] == NodeType::Solid) continue;
    double f[Q];
    double rho = 0.0, jx = 0.0, jy = 0.0;
    for (int q = 0; q < Q; ++q) {
      f[q] = src[q * n + k];
      rho += f[q];
      jx += f[q] * cx[q];
      jy += f[q] * cy[q];
    }
    const double ux = (jx + 0.5 * fx) / rho;
    const double uy = (jy + 0.5 * fy) / rho;
    if (!(rho > 0.0) || !(ux * ux + uy * uy <= kBlowupSpeed * kBlowupSpeed)) bad = true;
    const double usq = 1.5 * (ux * ux + uy * uy);
    for (int q = 0; q < Q; ++q) {
      const double cu = 3.0 * (cx[q] * ux + cy[q] * uy);
      const double feq = weight[q] * rho * (1.0 + cu + 0.5 * cu * cu - usq);
      double post = f[q] - omega * (f[q] - feq);
      if (forced) {
        const double cf = cx[q] * fx + cy[q] * fy;
        const double uf = ux * fx + uy * fy;
        post += force_scale * weight[q] * (3.0 * (cf - uf) + 3.0 * cu * cf);
      }
      const std::int32_t d = table[q * n + k];
      if (d >= 0) dst[d] = post;
    }
  }

  ++steps_;
  if (bad)
    throw Error(ErrorCode::NumericalBlowup,
                "lattice blew up at step " + std::to_string(steps_) +
                    " (non-finite populations or |u| > 0.57)");

  for (const std::int32_t k : inlet_cells_) {
    const Populations feq = equilibrium(1.0, {inlet_ux_[k], inlet_uy_[k]});
    for (int q = 0; q < Q; ++q) dst[q * n + k] = feq[q];
  }
  // Open edges: zero-gradient velocity and non-equilibrium part, density held at ambient.
  for (const auto& [k, inward] : open_cells_) {
    if (inward < 0) {
      for (int q = 0; q < Q; ++q) dst[q * n + k] = weight[q];
      continue;
    }
    Populations f;
    for (int q = 0; q < Q; ++q) f[q] = dst[q * n + inward];
    const Moments m = moments(f, Vec2::Zero());
    const Populations eq_in = equilibrium(m.rho, m.u);
    const Populations eq_out = equilibrium(1.0, m.u);
    for (int q = 0; q < Q; ++q) dst[q * n + k] = eq_out[q] + (f[q] - eq_in[q]);
  }
  f_.swap(f_next_);
}

// ---------------------------------------------------------------------------
// WindField

WindField::WindField(int width, int height, double cell_size) : geom_{width, height, cell_size} {
  vx_.assign(geom_.size(), 0.0);
  vy_.assign(geom_.size(), 0.0);
  speed_.assign(geom_.size(), 0.0);
  wall_.assign(geom_.size(), 0);
}

WindField WindField::uniform(const GridGeometry& geom, const Vec2& u) {
  WindField f(geom.width, geom.height, geom.cell_size);
  for (int j = 0; j < geom.height; ++j)
    for (int i = 0; i < geom.width; ++i) f.set(i, j, u);
  return f;
}

void WindField::set(int i, int j, const Vec2& u, bool wall) {
  const auto k = geom_.index(i, j);
  wall_[k] = wall ? 1 : 0;
  vx_[k] = wall ? 0.0 : u.x();
  vy_[k] = wall ? 0.0 : u.y();
  speed_[k] = std::hypot(vx_[k], vy_[k]);
}

Vec2 WindField::sample(const Vec2& p) const {
  if (!geom_.contains_point(p)) return Vec2::Zero();
  return {sample_bilinear(geom_, vx_, p), sample_bilinear(geom_, vy_, p)};
}

double WindField::max_speed() const {
  return speed_.empty() ? 0.0 : *std::max_element(speed_.begin(), speed_.end());
}

// ---------------------------------------------------------------------------
// Setup and steady runs

BuiltLattice build_lattice(const OccupancyGrid& grid, const std::vector<WindSource>& sources,
                           double Re, const LatticeSetup& setup) {
  if (grid.solid_count() == grid.geometry().size())
    throw Error(ErrorCode::NoFluidCells, "build_lattice: the grid has no fluid cells");
  if (!(setup.u_lat_max > 0) || setup.u_lat_max > 0.3)
    throw ValidationError("u_lat_max", "must be in (0, 0.3]");

  double length = setup.length_lat;
  if (!(length > 0)) length = widest_obstacle_cells(grid);
  if (!(length > 0)) length = std::min(grid.width(), grid.height());
  const double tau = reynolds_tau(Re, setup.u_lat_max, length);

  double fastest = 0.0;
  for (const auto& s : sources) fastest = std::max(fastest, s.speed);

  BuiltLattice out{Lattice(grid.width(), grid.height(), tau), 0.0, length};
  out.ms_per_lattice = fastest > 0 ? fastest / setup.u_lat_max : 0.0;
  out.lattice.set_threads(setup.threads);
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i)
      if (grid.solid(i, j)) out.lattice.set_solid(i, j);

  for (std::size_t k = 0; k < sources.size(); ++k) {
    const auto& s = sources[k];
    const Vec2 u_lat = fastest > 0 ? Vec2(s.direction * (s.speed / out.ms_per_lattice)) : Vec2::Zero();
    for (const Cell& c : s.cells(grid.geometry())) {
      if (grid.solid(c))
        throw Error(ErrorCode::InletOnSolid, "sources[" + std::to_string(k) + "] overlaps a Solid cell at (" +
                                                 std::to_string(c.i) + ", " + std::to_string(c.j) + ")");
      out.lattice.set_inlet(c.i, c.j, u_lat);
    }
  }
  out.lattice.initialize_equilibrium(1.0, Vec2::Zero());
  return out;
}

namespace {

WindField read_field(const Lattice& lat, double scale, double cell_size) {
  WindField field(lat.width(), lat.height(), cell_size);
  for (int j = 0; j < lat.height(); ++j) {
    for (int i = 0; i < lat.width(); ++i) {
      if (lat.node(i, j) == NodeType::Solid) {
        field.set(i, j, Vec2::Zero(), true);
      } else {
        field.set(i, j, lat.moments_at(i, j).u * scale);
      }
    }
  }
  return field;
}

}  // namespace

SteadyResult run_steady(Lattice& lattice, const SteadyOptions& opts, double u_lat_max) {
  if (opts.n_steps < 1) throw ValidationError("n_steps", "must be >= 1");
  SteadyResult result;
  const bool check = opts.conv_tol > 0.0;
  const int interval = std::max(1, opts.conv_interval);
  std::vector<double> prev_ux, prev_uy;

  auto snapshot = [&](std::vector<double>& ux, std::vector<double>& uy) {
    ux.resize(lattice.size());
    uy.resize(lattice.size());
    for (int j = 0; j < lattice.height(); ++j)
      for (int i = 0; i < lattice.width(); ++i) {
        const Vec2 u = lattice.node(i, j) == NodeType::Solid ? Vec2::Zero() : lattice.moments_at(i, j).u;
        ux[lattice.index(i, j)] = u.x();
        uy[lattice.index(i, j)] = u.y();
      }
  };
  if (check) snapshot(prev_ux, prev_uy);

  std::vector<double> ux, uy;
  for (int s = 1; s <= opts.n_steps; ++s) {
    lattice.step();
    result.steps_run = s;
    if (!check || s % interval != 0) continue;
    snapshot(ux, uy);
    double worst = 0.0;
    for (std::size_t k = 0; k < ux.size(); ++k)
      worst = std::max(worst, std::hypot(ux[k] - prev_ux[k], uy[k] - prev_uy[k]));
    result.last_residual = worst / u_lat_max;
    std::swap(ux, prev_ux);
    std::swap(uy, prev_uy);
    if (result.last_residual < opts.conv_tol) {
      result.converged = true;
      break;
    }
  }
  result.field = read_field(lattice, opts.ms_per_lattice * opts.speed_anchor, opts.cell_size);
  return result;
}

SteadyResult simulate_wind(const Scenario& sc, int threads) {
  const auto& p = sc.params;
  const bool moving_air = std::any_of(sc.sources.begin(), sc.sources.end(),
                                      [](const WindSource& s) { return s.speed > 0; });
  if (!moving_air) {
    SteadyResult r;
    r.field = WindField::still_air(sc.grid.geometry());
    for (int j = 0; j < sc.grid.height(); ++j)
      for (int i = 0; i < sc.grid.width(); ++i)
        if (sc.grid.solid(i, j)) r.field.set(i, j, Vec2::Zero(), true);
    r.converged = true;
    return r;
  }
  BuiltLattice built = build_lattice(sc.grid, sc.sources, p.Re, {p.u_lat_max, p.ref_length_cells, threads});
  SteadyOptions opts;
  opts.n_steps = p.n_steps;
  opts.conv_tol = p.conv_tol;
  opts.conv_interval = p.conv_interval;
  opts.ms_per_lattice = built.ms_per_lattice;
  opts.speed_anchor = p.speed_anchor;
  opts.cell_size = sc.grid.cell_size();
  return run_steady(built.lattice, opts, p.u_lat_max);
}

}  // namespace windplan
