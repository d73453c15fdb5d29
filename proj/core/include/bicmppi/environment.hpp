#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace bicmppi {

class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Binary occupancy grid over a rectangular arena.
 *
 * Cells are stored row-major with row 0 at the minimum-y edge. The grid is
 * immutable after construction, so a single instance can be shared by any
 * number of rollout workers.
 *
 * Positions outside the closed extent [origin, origin + size] collide. A
 * position exactly on the maximum edge belongs to the last row/column so
 * that targets placed on the arena boundary remain reachable.
 */
class OccupancyGrid {
 public:
  OccupancyGrid(int width_cells, int height_cells, double resolution, Eigen::Vector2d origin,
                std::vector<std::uint8_t> cells);

  static OccupancyGrid empty(int width_cells, int height_cells, double resolution,
                             Eigen::Vector2d origin = Eigen::Vector2d::Zero());

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  Eigen::Vector2d extent() const { return {width_ * resolution_, height_ * resolution_}; }

  bool occupied(int col, int row) const { return cells_[index(col, row)] != 0; }
  Eigen::Vector2d cell_center(int col, int row) const;
  std::size_t occupied_count() const;
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  /// Collision test for a position of dimension >= 2; only x and y are used.
  template <typename Derived>
  bool is_colliding(const Eigen::MatrixBase<Derived>& position) const {
    return is_colliding_xy(position(0), position(1));
  }
  bool is_colliding_xy(double x, double y) const;

  bool operator==(const OccupancyGrid& other) const;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_;
  int height_;
  double resolution_;
  Eigen::Vector2d origin_;
  std::vector<std::uint8_t> cells_;
};

struct Obstacle {
  Eigen::Vector2d center;
  double radius;
};

/// Procedural BARN-style arena: a base obstacle field centred horizontally in
/// a taller arena with obstacle-free start/goal bands along the bottom/top.
struct MapSpec {
  Eigen::Vector2d base_size{3.0, 3.0};
  Eigen::Vector2d extended_size{3.0, 5.0};
  int obstacle_count = 10;
  double obstacle_radius = 0.15;
  double inflation_radius = 0.15;
  double margin_bottom = 1.0;
  double margin_top = 1.0;
  double resolution = 0.1;
  std::uint64_t seed = 0;
  int max_attempts_per_obstacle = 2000;

  void validate() const;
};

/// Obstacle discs for `spec` (pre-inflation). Deterministic in spec.seed.
/// Discs do not overlap once grown by the inflation radius.
std::vector<Obstacle> generate_obstacles(const MapSpec& spec);

/// Marks every cell whose center lies inside one of the discs.
OccupancyGrid rasterize(const MapSpec& spec, const std::vector<Obstacle>& obstacles);

/// Rasterized and inflated obstacles with both margin bands kept free.
OccupancyGrid generate_map(const MapSpec& spec);

/// A cell is occupied in the result iff some occupied input cell center lies
/// within `radius` of its own center.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

// Text format: header `width height resolution origin_x origin_y`, then one
// line of `0`/`1` per row starting at row 0 (minimum y).
OccupancyGrid read_map(std::istream& in);
void write_map(const OccupancyGrid& grid, std::ostream& out);
OccupancyGrid load_map(const std::filesystem::path& path);
void save_map(const OccupancyGrid& grid, const std::filesystem::path& path);

}  // namespace bicmppi
