#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace windplan {

using Vec2 = Eigen::Vector2d;
using Polyline = std::vector<Vec2>;

/// Integer cell coordinate; `i` runs along x (columns), `j` along y (rows).
struct Cell {
  int i = 0;
  int j = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Row-major planar raster with cell (i, j) at flat index j * width + i.
/// Cell centers sit at ((i + 0.5) * cell_size, (j + 0.5) * cell_size).
struct GridGeometry {
  int width = 0;
  int height = 0;
  double cell_size = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width + i; }
  std::size_t index(Cell c) const { return index(c.i, c.j); }
  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < width && j < height; }
  bool contains(Cell c) const { return contains(c.i, c.j); }
  Vec2 center(Cell c) const { return {(c.i + 0.5) * cell_size, (c.j + 0.5) * cell_size}; }
  Cell cell_of(const Vec2& p) const;
  bool contains_point(const Vec2& p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width * cell_size && p.y() < height * cell_size;
  }
  double extent_x() const { return width * cell_size; }
  double extent_y() const { return height * cell_size; }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Bilinear sample of a cell-centered scalar raster. Points outside the raster
/// clamp to the border cells.
double sample_bilinear(const GridGeometry& geom, const std::vector<double>& values, const Vec2& p);

}  // namespace windplan
