#include "bicmppi/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "bicmppi/rng.hpp"

namespace bicmppi {

OccupancyGrid::OccupancyGrid(int width_cells, int height_cells, double resolution,
                             Eigen::Vector2d origin, std::vector<std::uint8_t> cells)
    : width_(width_cells),
      height_(height_cells),
      resolution_(resolution),
      origin_(std::move(origin)),
      cells_(std::move(cells)) {
  if (width_ <= 0 || height_ <= 0) throw MapError("grid dimensions must be positive");
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    throw MapError("grid resolution must be positive");
  }
  if (cells_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw MapError("cell count does not match width * height");
  }
  for (auto& c : cells_) c = c != 0 ? 1 : 0;
}

OccupancyGrid OccupancyGrid::empty(int width_cells, int height_cells, double resolution,
                                   Eigen::Vector2d origin) {
  std::vector<std::uint8_t> cells(
      static_cast<std::size_t>(std::max(width_cells, 0)) * std::max(height_cells, 0), 0);
  return OccupancyGrid(width_cells, height_cells, resolution, std::move(origin), std::move(cells));
}

Eigen::Vector2d OccupancyGrid::cell_center(int col, int row) const {
  return origin_ + resolution_ * Eigen::Vector2d(col + 0.5, row + 0.5);
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool OccupancyGrid::is_colliding_xy(double x, double y) const {
  const double gx = (x - origin_.x()) / resolution_;
  const double gy = (y - origin_.y()) / resolution_;
  // NaN fails both comparisons and is treated as out of bounds.
  if (!(gx >= 0.0 && gx <= width_) || !(gy >= 0.0 && gy <= height_)) return true;
  const int col = std::min(static_cast<int>(gx), width_ - 1);
  const int row = std::min(static_cast<int>(gy), height_ - 1);
  return occupied(col, row);
}

bool OccupancyGrid::operator==(const OccupancyGrid& other) const {
  return width_ == other.width_ && height_ == other.height_ &&
         resolution_ == other.resolution_ && origin_ == other.origin_ && cells_ == other.cells_;
}

void MapSpec::validate() const {
  if (!(base_size.array() > 0.0).all()) throw MapError("base_size must be positive");
  if (!(extended_size.array() >= base_size.array()).all()) {
    throw MapError("extended_size must be >= base_size componentwise");
  }
  if (obstacle_count < 0) throw MapError("obstacle_count must be >= 0");
  if (!(obstacle_radius > 0.0)) throw MapError("obstacle_radius must be positive");
  if (!(inflation_radius >= 0.0)) throw MapError("inflation_radius must be >= 0");
  if (!(resolution > 0.0)) throw MapError("resolution must be positive");
  if (margin_bottom < 0.0 || margin_top < 0.0 ||
      margin_bottom + base_size.y() + margin_top > extended_size.y() + 1e-12) {
    throw MapError("margins and base height exceed the extended arena");
  }
  if (max_attempts_per_obstacle < 1) throw MapError("max_attempts_per_obstacle must be >= 1");
}

std::vector<Obstacle> generate_obstacles(const MapSpec& spec) {
  spec.validate();
  const double grown = spec.obstacle_radius + spec.inflation_radius;
  const double x0 = 0.5 * (spec.extended_size.x() - spec.base_size.x());
  const double y_lo = spec.margin_bottom + grown;
  const double y_hi = spec.margin_bottom + spec.base_size.y() - grown;
  if (spec.obstacle_count > 0 && y_lo > y_hi) {
    throw MapError("obstacles do not fit between the free margins");
  }

  Rng rng(derive_seed(spec.seed, {fnv1a("obstacles")}));
  std::uniform_real_distribution<double> ux(x0, x0 + spec.base_size.x());
  std::uniform_real_distribution<double> uy(y_lo, y_hi);

  std::vector<Obstacle> obstacles;
  obstacles.reserve(static_cast<std::size_t>(spec.obstacle_count));
  for (int i = 0; i < spec.obstacle_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_attempts_per_obstacle && !placed; ++attempt) {
      const Eigen::Vector2d c(ux(rng), uy(rng));
      const bool overlaps = std::any_of(obstacles.begin(), obstacles.end(), [&](const Obstacle& o) {
        return (o.center - c).norm() < 2.0 * grown;
      });
      if (!overlaps) {
        obstacles.push_back({c, spec.obstacle_radius});
        placed = true;
      }
    }
    if (!placed) {
      throw MapError("could not place obstacle " + std::to_string(i) + " after " +
                     std::to_string(spec.max_attempts_per_obstacle) + " attempts");
    }
  }
  return obstacles;
}

OccupancyGrid rasterize(const MapSpec& spec, const std::vector<Obstacle>& obstacles) {
  const int w = static_cast<int>(std::lround(spec.extended_size.x() / spec.resolution));
  const int h = static_cast<int>(std::lround(spec.extended_size.y() / spec.resolution));
  auto grid = OccupancyGrid::empty(w, h, spec.resolution);
  std::vector<std::uint8_t> cells(grid.cells());
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const Eigen::Vector2d p = grid.cell_center(col, row);
      for (const auto& o : obstacles) {
        if ((p - o.center).norm() <= o.radius) {
          cells[static_cast<std::size_t>(row) * w + col] = 1;
          break;
        }
      }
    }
  }
  return OccupancyGrid(w, h, spec.resolution, grid.origin(), std::move(cells));
}

OccupancyGrid generate_map(const MapSpec& spec) {
  const auto obstacles = generate_obstacles(spec);
  const OccupancyGrid inflated = inflate(rasterize(spec, obstacles), spec.inflation_radius);

  std::vector<std::uint8_t> cells(inflated.cells());
  const double res = inflated.resolution();
  for (int row = 0; row < inflated.height(); ++row) {
    const double yc = (row + 0.5) * res;
    if (yc < spec.margin_bottom || yc > spec.extended_size.y() - spec.margin_top) {
      std::fill_n(cells.begin() + static_cast<std::ptrdiff_t>(row) * inflated.width(),
                  inflated.width(), std::uint8_t{0});
    }
  }
  return OccupancyGrid(inflated.width(), inflated.height(), res, inflated.origin(),
                       std::move(cells));
}

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  if (radius < 0.0) throw MapError("inflation radius must be >= 0");
  if (radius == 0.0) return grid;

  const int w = grid.width();
  const int h = grid.height();
  const int reach = static_cast<int>(std::floor(radius / grid.resolution()));
  const double r2 = (radius / grid.resolution()) * (radius / grid.resolution());

  // Stencil of cell offsets whose centers lie within the radius.
  std::vector<std::pair<int, int>> stencil;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      if (static_cast<double>(dx * dx + dy * dy) <= r2) stencil.emplace_back(dx, dy);
    }
  }

  std::vector<std::uint8_t> out(grid.cells());
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      if (!grid.occupied(col, row)) continue;
      for (const auto& [dx, dy] : stencil) {
        const int c = col + dx;
        const int r = row + dy;
        if (c >= 0 && c < w && r >= 0 && r < h) out[static_cast<std::size_t>(r) * w + c] = 1;
      }
    }
  }
  return OccupancyGrid(w, h, grid.resolution(), grid.origin(), std::move(out));
}

namespace {

std::string shortest(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace

OccupancyGrid read_map(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw MapError("map: missing header");
  std::istringstream hs(header);
  long long width = 0;
  long long height = 0;
  double resolution = 0.0;
  double ox = 0.0;
  double oy = 0.0;
  if (!(hs >> width >> height >> resolution >> ox >> oy)) {
    throw MapError("map: malformed header '" + header + "'");
  }
  std::string trailing;
  if (hs >> trailing) throw MapError("map: trailing tokens in header");
  if (width <= 0 || height <= 0) throw MapError("map: dimensions must be positive");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw MapError("map: resolution must be positive");
  }

  std::vector<std::uint8_t> cells;
  cells.reserve(static_cast<std::size_t>(width * height));
  std::string line;
  for (long long row = 0; row < height; ++row) {
    if (!std::getline(in, line)) {
      throw MapError("map: expected " + std::to_string(height) + " rows, got " +
                     std::to_string(row));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<long long>(line.size()) != width) {
      throw MapError("map: row " + std::to_string(row) + " has " + std::to_string(line.size()) +
                     " cells, header says " + std::to_string(width));
    }
    for (char c : line) {
      if (c != '0' && c != '1') throw MapError(std::string("map: invalid cell symbol '") + c + "'");
      cells.push_back(c == '1' ? 1 : 0);
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw MapError("map: unexpected content after last row");
    }
  }
  return OccupancyGrid(static_cast<int>(width), static_cast<int>(height), resolution, {ox, oy},
                       std::move(cells));
}

void write_map(const OccupancyGrid& grid, std::ostream& out) {
  out << grid.width() << ' ' << grid.height() << ' ' << shortest(grid.resolution()) << ' '
      << shortest(grid.origin().x()) << ' ' << shortest(grid.origin().y()) << '\n';
  std::string line(static_cast<std::size_t>(grid.width()), '0');
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) line[col] = grid.occupied(col, row) ? '1' : '0';
    out << line << '\n';
  }
}

OccupancyGrid load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapError("cannot open map file " + path.string());
  try {
    return read_map(in);
  } catch (const MapError& e) {
    throw MapError(path.string() + ": " + e.what());
  }
}

void save_map(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MapError("cannot write map file " + path.string());
  write_map(grid, out);
  if (!out) throw MapError("write failed for " + path.string());
}

}  // namespace bicmppi
