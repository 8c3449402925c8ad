#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "windplan/error.hpp"
#include "windplan/types.hpp"

namespace windplan {

enum class CellState : std::uint8_t { Free = 0, Solid = 1 };

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  /// All-Free grid. Throws ValidationError unless width, height >= 4 and cell_size > 0.
  OccupancyGrid(int width, int height, double cell_size);

  const GridGeometry& geometry() const { return geom_; }
  int width() const { return geom_.width; }
  int height() const { return geom_.height; }
  double cell_size() const { return geom_.cell_size; }

  bool solid(int i, int j) const { return cells_[geom_.index(i, j)] == CellState::Solid; }
  bool solid(Cell c) const { return solid(c.i, c.j); }
  void set(int i, int j, CellState s) { cells_[geom_.index(i, j)] = s; }
  void fill_rect(int i0, int j0, int w, int h, CellState s);

  std::size_t solid_count() const;
  const std::vector<CellState>& cells() const { return cells_; }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  GridGeometry geom_;
  std::vector<CellState> cells_;
};

struct HeightMap {
  int width = 0;
  int height = 0;
  double cell_size = 1.0;
  std::vector<double> heights;  // meters, row-major like OccupancyGrid
};

enum class Side { North, South, East, West };

/// A wind source. Either a run of cells along one domain side, or an interior
/// axis-aligned rectangle of inlet cells.
struct WindSource {
  struct Segment {
    Side side = Side::West;
    int start = 0;   // index along the side (j for W/E, i for N/S)
    int length = 0;  // cell count
    friend bool operator==(const Segment&, const Segment&) = default;
  };
  struct Rect {
    int i0 = 0, j0 = 0, w = 0, h = 0;
    friend bool operator==(const Rect&, const Rect&) = default;
  };

  std::optional<Segment> segment;
  std::optional<Rect> rect;
  Vec2 direction{1.0, 0.0};  // unit
  double speed = 0.0;        // m/s

  /// Cells covered by this source. Side segments never include domain corners.
  std::vector<Cell> cells(const GridGeometry& geom) const;

  friend bool operator==(const WindSource& a, const WindSource& b) {
    return a.segment == b.segment && a.rect == b.rect && a.direction == b.direction &&
           a.speed == b.speed;
  }
};

/// Every tunable of the pipeline. Defaults that come from the method itself:
/// Re = 250, n_steps = 10000, base_cost = 0.5, cost clamp [0.1, 20].
struct PipelineParams {
  // occupancy
  double h_min = 0.3;  // m
  // lattice Boltzmann
  double Re = 250.0;
  int n_steps = 10000;
  double u_lat_max = 0.1;
  double ref_length_cells = 0.0;  // 0: widest obstacle footprint
  double speed_anchor = 1.0;      // lattice -> m/s anchor factor
  double conv_tol = 0.0;          // 0 disables the early-stop check
  int conv_interval = 200;
  // cost map
  double w_s = 1.0;
  double w_d = 1.0;
  double w_a = 1.0;
  double c_wall = 1000.0;
  double b = 0.1;  // wall buffer, m
  double sigma_smooth = 1.5;  // cells
  double base_cost = 0.5;
  // trajectory
  double lambda_p = 1.0;
  double lambda_s = 1.0;
  double lambda_t = 1.0;
  double lambda_w = 10.0;
  int bezier_degree = 7;
  double box_half_width_cells = 3.0;
  double cruise_speed = 0.5;      // m/s, sets the initial T
  double time_scale_range = 1.5;  // T searched in [T0 / r, T0 * r]
  double wall_margin = 0.05;      // m, clearance beyond the dilated obstacle set
  int quadrature_samples = 96;
  int max_sweeps = 40;
  // vehicle
  double drag_gain = 0.3;  // K, kg/s
  double mass = 1.0;       // kg
  double a_max = 4.0;      // m/s^2
  double dt = 0.01;        // s
  double kp = 4.0;
  double kd = 3.0;
  double noise_std = 0.0;  // m/s, velocity perturbation per step during replay

  /// Sets one field by name; throws ValidationError for unknown keys.
  void set(const std::string& key, double value);
  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const PipelineParams&, const PipelineParams&) = default;
};

struct Scenario {
  OccupancyGrid grid;
  std::vector<WindSource> sources;
  Vec2 start{0.0, 0.0};
  Vec2 goal{0.0, 0.0};
  PipelineParams params;
  std::string name;

  /// Full invariant check; throws ValidationError.
  void validate(bool flow_aware = true) const;

  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.grid == b.grid && a.sources == b.sources && a.start == b.start &&
           a.goal == b.goal && a.params == b.params && a.name == b.name;
  }
};

/// Parses a scenario JSON document. Relative PGM paths resolve against `base_dir`.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
/// Canonical JSON form (grid as run-length rows). load(save(s)) == s.
std::string scenario_to_json(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Depth filter: Solid iff height >= h_min.
OccupancyGrid occupancy_from_heightmap(const HeightMap& hm, double h_min);

/// Chebyshev dilation by ceil(b / cell_size) cells; the outermost ring is always Solid.
OccupancyGrid dilate_obstacles(const OccupancyGrid& grid, double b);

int dilation_radius_cells(double b, double cell_size);

/// Largest bounding-box extent (cells) over 4-connected Solid components; 0 if none.
int widest_obstacle_cells(const OccupancyGrid& grid);

}  // namespace windplan
