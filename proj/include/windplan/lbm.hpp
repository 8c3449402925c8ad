#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "windplan/env.hpp"
#include "windplan/types.hpp"

namespace windplan {

/// D2Q9 velocity set. Index 0 is rest, 1-4 axis-aligned (E, N, W, S), 5-8 diagonals (NE, NW, SW, SE).
namespace d2q9 {
inline constexpr int Q = 9;
inline constexpr std::array<int, Q> cx = {0, 1, 0, -1, 0, 1, -1, -1, 1};
inline constexpr std::array<int, Q> cy = {0, 0, 1, 0, -1, 1, 1, -1, -1};
inline constexpr std::array<int, Q> opposite = {0, 3, 4, 1, 2, 7, 8, 5, 6};
inline constexpr std::array<double, Q> weight = {4.0 / 9,  1.0 / 9,  1.0 / 9,  1.0 / 9, 1.0 / 9,
                                                 1.0 / 36, 1.0 / 36, 1.0 / 36, 1.0 / 36};
}  // namespace d2q9

using Populations = std::array<double, d2q9::Q>;

/// f_i^eq = w_i rho (1 + 3 c.u + 4.5 (c.u)^2 - 1.5 |u|^2).
Populations equilibrium(double rho, const Vec2& u);

/// Kinematic viscosity in lattice units: nu = (tau - 1/2) / 3.
inline double lattice_viscosity(double tau) { return (tau - 0.5) / 3.0; }

/// Relaxation time preserving Re = U L / nu. Throws UnstableTau outside (0.5, 2.0].
double reynolds_tau(double Re, double u_lat, double length_lat);

struct Moments {
  double rho = 0.0;
  Vec2 u{0.0, 0.0};
};

/// Density and velocity of a population vector (the velocity includes the
/// half-step force shift when `force` is nonzero).
Moments moments(const Populations& f, const Vec2& force = Vec2::Zero());

enum class NodeType : std::uint8_t { Fluid, Solid, Inlet };
enum class EdgeMode : std::uint8_t { Open, Periodic };

/// Two-buffer BGK lattice with halfway bounce-back walls, equilibrium inlet
/// nodes and zero-gradient open edges (or periodic wrap per axis).
class Lattice {
 public:
  Lattice(int width, int height, double tau, EdgeMode x_edges = EdgeMode::Open,
          EdgeMode y_edges = EdgeMode::Open);

  int width() const { return width_; }
  int height() const { return height_; }
  double tau() const { return tau_; }
  std::size_t size() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width_ + i; }
  long steps_taken() const { return steps_; }

  NodeType node(int i, int j) const { return type_[index(i, j)]; }
  Vec2 inlet_velocity(int i, int j) const;

  void set_solid(int i, int j);
  void set_fluid(int i, int j);
  void set_inlet(int i, int j, const Vec2& u);
  /// Uniform body force density (lattice units), applied with Guo forcing.
  void set_body_force(const Vec2& g) { force_ = g; }
  const Vec2& body_force() const { return force_; }
  void set_threads(int n) { threads_ = n < 1 ? 1 : n; }

  /// Every non-solid node to equilibrium(rho, u); inlets to their own velocity.
  void initialize_equilibrium(double rho, const Vec2& u);

  Populations populations(int i, int j) const;
  void set_populations(int i, int j, const Populations& f);
  Moments moments_at(int i, int j) const;
  /// Sum of rho over non-solid cells.
  double total_mass() const;

  /// One collide -> stream -> boundary cycle. Throws NumericalBlowup naming the step.
  void step();

 private:
  void rebuild_tables();

  int width_, height_;
  double tau_;
  EdgeMode x_edges_, y_edges_;
  Vec2 force_{0.0, 0.0};
  int threads_ = 1;
  long steps_ = 0;

  std::vector<NodeType> type_;
  std::vector<double> inlet_ux_, inlet_uy_;
  std::vector<double> f_, f_next_;  // structure of arrays: f[q * N + cell]

  bool tables_dirty_ = true;
  std::vector<std::int32_t> stream_dst_;  // flat destination for (q, cell), -1 when dropped
  std::vector<std::int32_t> inlet_cells_;
  std::vector<std::pair<std::int32_t, std::int32_t>> open_cells_;  // (cell, inward neighbour or -1)
};

/// Steady planar wind in physical units on the lattice raster.
class WindField {
 public:
  WindField() = default;
  WindField(int width, int height, double cell_size);
  static WindField still_air(const GridGeometry& geom) {
    return WindField(geom.width, geom.height, geom.cell_size);
  }
  /// Uniform velocity everywhere (no walls).
  static WindField uniform(const GridGeometry& geom, const Vec2& u);

  const GridGeometry& geometry() const { return geom_; }
  int width() const { return geom_.width; }
  int height() const { return geom_.height; }
  double cell_size() const { return geom_.cell_size; }

  /// Sets velocity and derived speed; wall cells are forced to zero.
  void set(int i, int j, const Vec2& u, bool wall = false);
  Vec2 velocity(int i, int j) const {
    const auto k = geom_.index(i, j);
    return {vx_[k], vy_[k]};
  }
  double speed(int i, int j) const { return speed_[geom_.index(i, j)]; }
  bool wall(int i, int j) const { return wall_[geom_.index(i, j)] != 0; }

  /// Bilinear velocity at a point in meters; zero outside the domain.
  Vec2 sample(const Vec2& p) const;
  double max_speed() const;

  const std::vector<double>& vx() const { return vx_; }
  const std::vector<double>& vy() const { return vy_; }
  const std::vector<double>& speed() const { return speed_; }
  const std::vector<std::uint8_t>& wall_mask() const { return wall_; }

  friend bool operator==(const WindField&, const WindField&) = default;

 private:
  GridGeometry geom_;
  std::vector<double> vx_, vy_, speed_;
  std::vector<std::uint8_t> wall_;
};

struct LatticeSetup {
  double u_lat_max = 0.1;
  double length_lat = 0.0;  // 0: widest obstacle footprint, falling back to min(width, height)
  int threads = 1;
};

/// Lattice plus the scale needed to map lattice speeds back to m/s.
struct BuiltLattice {
  Lattice lattice;
  double ms_per_lattice = 0.0;  // physical m/s per lattice speed unit (before the anchor)
  double length_lat = 0.0;
};

/// Solid nodes from the grid, inlet nodes from the sources with the fastest
/// source mapped to `u_lat_max`, tau from Re, rest equilibrium everywhere.
BuiltLattice build_lattice(const OccupancyGrid& grid, const std::vector<WindSource>& sources,
                           double Re, const LatticeSetup& setup = {});

struct SteadyOptions {
  int n_steps = 10000;
  double conv_tol = 0.0;  // 0 disables early stop
  int conv_interval = 200;
  double ms_per_lattice = 1.0;
  double speed_anchor = 1.0;
  double cell_size = 1.0;
};

struct SteadyResult {
  WindField field;
  long steps_run = 0;
  bool converged = false;
  double last_residual = 0.0;  // max |du| / u_lat_max over the last check interval
};

SteadyResult run_steady(Lattice& lattice, const SteadyOptions& opts, double u_lat_max);

/// Whole wind stage for a scenario; a scenario without moving air yields still air.
SteadyResult simulate_wind(const Scenario& sc, int threads = 1);

}  // namespace windplan
