#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace windplan {

class WindField;
struct CostMap;
struct GridPath;
struct BezierTrajectory;
struct FlightLog;

/// Binary PGM (P5). Row 0 of `pixels` is the top image row; 8- or 16-bit (big-endian).
struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;
};

PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& img);

/// Legacy-VTK STRUCTURED_POINTS ASCII with VECTORS velocity and SCALARS wall_mask.
void write_field_vtk(const std::filesystem::path& path, const WindField& field);
/// Columns: i,j,x_m,y_m,vx,vy,speed,wall. Values are written round-trip exact.
void write_field_csv(const std::filesystem::path& path, const WindField& field);
WindField read_field_csv(const std::filesystem::path& path);

/// Columns: i,j,cost,obstacle.
void write_costmap_csv(const std::filesystem::path& path, const CostMap& cmap);
/// 8-bit heat rendering; obstacles are white, free cells scale cost 0.1..20 to 0..254.
void write_costmap_pgm(const std::filesystem::path& path, const CostMap& cmap);

/// Columns: i,j,x_m,y_m,cumulative_cost.
void write_path_csv(const std::filesystem::path& path, const GridPath& gp, const CostMap& cmap);

/// Sampled trajectory, columns t,x,y,vx,vy,ax,ay,jx,jy.
void write_trajectory_csv(const std::filesystem::path& path, const BezierTrajectory& traj, double dt);
/// Control polygon, columns k,x,y, preceded by a `# T=<seconds>` line.
void write_control_polygon_csv(const std::filesystem::path& path, const BezierTrajectory& traj);
BezierTrajectory read_control_polygon_csv(const std::filesystem::path& path);

/// Flight log with a `# dt=...,scenario=...,wind=on|off` header line,
/// then columns t,x,y,vx,vy,ax_cmd,ay_cmd.
void write_flight_log_csv(const std::filesystem::path& path, const FlightLog& log,
                          const std::string& scenario_hash, bool wind_on);
FlightLog read_flight_log_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace windplan
