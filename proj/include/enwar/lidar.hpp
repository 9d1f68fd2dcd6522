// Copyright 2026 The Enwar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "enwar/error.hpp"
#include "enwar/geo.hpp"

namespace enwar::lidar {

/// Sensor-frame point: x forward, y left, z up (meters).
struct Point {
  float x = 0.0F;
  float y = 0.0F;
  float z = 0.0F;
  float intensity = 0.0F;

  bool operator==(const Point&) const = default;
};

struct PointCloud {
  std::vector<Point> points;

  bool operator==(const PointCloud&) const = default;
};

struct GridConfig {
  double cell_size_m = 0.2;
  double x_min = -50.0;
  double x_max = 50.0;
  double y_min = -50.0;
  double y_max = 50.0;
  // Height band relative to the sensor; drops the ground plane and overhangs.
  double z_min = -1.5;
  double z_max = 3.0;
};

struct BevCell {
  std::uint32_t count = 0;
  float min_z = std::numeric_limits<float>::max();
  float max_z = std::numeric_limits<float>::lowest();
  double sum_x = 0.0;
  double sum_y = 0.0;
};

class BevGrid {
 public:
  BevGrid(const GridConfig& config, std::size_t cols, std::size_t rows)
      : config_(config), cols_(cols), rows_(rows), cells_(cols * rows) {}

  const GridConfig& config() const noexcept { return config_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return iy * cols_ + ix; }

  const BevCell& at(std::size_t ix, std::size_t iy) const { return cells_[index(ix, iy)]; }
  BevCell& at(std::size_t ix, std::size_t iy) { return cells_[index(ix, iy)]; }
  const std::vector<BevCell>& cells() const noexcept { return cells_; }

  std::uint64_t total_count() const {
    std::uint64_t total = 0;
    for (const auto& cell : cells_) total += cell.count;
    return total;
  }

  /// Cell containing (x, y), or false when outside the extent.
  bool locate(double x, double y, std::size_t& ix, std::size_t& iy) const noexcept {
    if (!(x >= config_.x_min && x < config_.x_max && y >= config_.y_min && y < config_.y_max)) {
      return false;
    }
    ix = std::min(cols_ - 1, static_cast<std::size_t>((x - config_.x_min) / config_.cell_size_m));
    iy = std::min(rows_ - 1, static_cast<std::size_t>((y - config_.y_min) / config_.cell_size_m));
    return true;
  }

  /// Adds a point sample to the given cell.
  void accumulate(std::size_t ix, std::size_t iy, const Point& p) {
    BevCell& cell = at(ix, iy);
    ++cell.count;
    cell.min_z = std::min(cell.min_z, p.z);
    cell.max_z = std::max(cell.max_z, p.z);
    cell.sum_x += p.x;
    cell.sum_y += p.y;
  }

 private:
  GridConfig config_;
  std::size_t cols_;
  std::size_t rows_;
  std::vector<BevCell> cells_;
};

enum class ObjectClass { kPedestrian, kCyclist, kVehicle, kUnknown };

inline std::string_view class_name(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::kPedestrian: return "pedestrian";
    case ObjectClass::kCyclist: return "cyclist";
    case ObjectClass::kVehicle: return "vehicle";
    case ObjectClass::kUnknown: return "unknown";
  }
  return "unknown";
}

/// Axis-aligned box; length is the longer footprint side.
struct BoxDims {
  double length_m = 0.0;
  double width_m = 0.0;
  double height_m = 0.0;
};

struct Footprint {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

struct DetectedObject {
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double range_m = 0.0;
  double bearing_deg = 0.0;  // clockwise from the sensor's forward axis
  BoxDims bbox;
  Footprint footprint;
  ObjectClass cls = ObjectClass::kUnknown;
  double confidence = 0.0;
  std::uint32_t point_count = 0;
};

struct ClusterConfig {
  std::uint32_t min_points = 5;
  std::uint32_t saturation_count = 100;
};

inline BevGrid project_bev(const PointCloud& cloud, const GridConfig& config = {}) {
  if (!(config.cell_size_m > 0.0) || !std::isfinite(config.cell_size_m)) {
    throw Error(ErrorCode::kInvalidGrid, "sensing_lidar", "cell size must be positive");
  }
  if (!(config.x_max > config.x_min) || !(config.y_max > config.y_min) ||
      !(config.z_max >= config.z_min)) {
    throw Error(ErrorCode::kInvalidGrid, "sensing_lidar", "grid extent is inverted or empty");
  }
  const auto cols = static_cast<std::size_t>(
      std::ceil((config.x_max - config.x_min) / config.cell_size_m));
  const auto rows = static_cast<std::size_t>(
      std::ceil((config.y_max - config.y_min) / config.cell_size_m));
  BevGrid grid(config, cols, rows);
  for (const Point& p : cloud.points) {
    if (p.z < config.z_min || p.z > config.z_max) continue;
    std::size_t ix = 0;
    std::size_t iy = 0;
    if (grid.locate(p.x, p.y, ix, iy)) grid.accumulate(ix, iy, p);
  }
  return grid;
}

/// Component id per cell (row-major), -1 for empty cells. Ids are assigned in
/// row-major scan order of each component's first cell; 8-connectivity.
inline std::vector<std::int32_t> label_components(const BevGrid& grid) {
  const std::size_t cols = grid.cols();
  const std::size_t rows = grid.rows();
  std::vector<std::int32_t> labels(grid.cells().size(), -1);
  std::vector<std::size_t> stack;
  std::int32_t next = 0;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (labels[start] >= 0 || grid.cells()[start].count == 0) continue;
    labels[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const std::size_t cx = cur % cols;
      const std::size_t cy = cur / cols;
      const std::size_t y0 = cy > 0 ? cy - 1 : 0;
      const std::size_t y1 = std::min(rows - 1, cy + 1);
      const std::size_t x0 = cx > 0 ? cx - 1 : 0;
      const std::size_t x1 = std::min(cols - 1, cx + 1);
      for (std::size_t ny = y0; ny <= y1; ++ny) {
        for (std::size_t nx = x0; nx <= x1; ++nx) {
          const std::size_t n = ny * cols + nx;
          if (labels[n] < 0 && grid.cells()[n].count > 0) {
            labels[n] = next;
            stack.push_back(n);
          }
        }
      }
    }
    ++next;
  }
  return labels;
}

/// Rules are evaluated in order: pedestrian, cyclist, vehicle, unknown.
inline ObjectClass classify_object(const BoxDims& bbox) {
  if (bbox.length_m <= 0.8 && bbox.width_m <= 0.8 && bbox.height_m >= 1.0) {
    return ObjectClass::kPedestrian;
  }
  if (bbox.length_m <= 2.2 && bbox.width_m <= 1.0) return ObjectClass::kCyclist;
  if (bbox.length_m >= 2.2) return ObjectClass::kVehicle;
  return ObjectClass::kUnknown;
}

/// Bearing of a sensor-frame position, clockwise from forward (x) in [0, 360).
inline double sensor_bearing(double x, double y) {
  return geo::detail::wrap_degrees(std::atan2(-y, x) * 180.0 / std::numbers::pi);
}

inline std::vector<DetectedObject> cluster_objects(const BevGrid& grid,
                                                   const ClusterConfig& config = {}) {
  struct Accum {
    std::uint64_t count = 0;
    double sum_x = 0.0;
    double sum_y = 0.0;
    std::size_t ix_min = std::numeric_limits<std::size_t>::max();
    std::size_t ix_max = 0;
    std::size_t iy_min = std::numeric_limits<std::size_t>::max();
    std::size_t iy_max = 0;
    float z_min = std::numeric_limits<float>::max();
    float z_max = std::numeric_limits<float>::lowest();
  };

  const std::vector<std::int32_t> labels = label_components(grid);
  std::vector<Accum> accums;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    const auto id = static_cast<std::size_t>(labels[i]);
    if (id >= accums.size()) accums.resize(id + 1);
    const BevCell& cell = grid.cells()[i];
    Accum& acc = accums[id];
    const std::size_t ix = i % grid.cols();
    const std::size_t iy = i / grid.cols();
    acc.count += cell.count;
    acc.sum_x += cell.sum_x;
    acc.sum_y += cell.sum_y;
    acc.ix_min = std::min(acc.ix_min, ix);
    acc.ix_max = std::max(acc.ix_max, ix);
    acc.iy_min = std::min(acc.iy_min, iy);
    acc.iy_max = std::max(acc.iy_max, iy);
    acc.z_min = std::min(acc.z_min, cell.min_z);
    acc.z_max = std::max(acc.z_max, cell.max_z);
  }

  const GridConfig& gc = grid.config();
  std::vector<DetectedObject> objects;
  for (const Accum& acc : accums) {
    if (acc.count < config.min_points) continue;
    DetectedObject obj;
    obj.point_count = static_cast<std::uint32_t>(acc.count);
    obj.centroid_x = acc.sum_x / static_cast<double>(acc.count);
    obj.centroid_y = acc.sum_y / static_cast<double>(acc.count);
    obj.range_m = std::hypot(obj.centroid_x, obj.centroid_y);
    obj.bearing_deg = sensor_bearing(obj.centroid_x, obj.centroid_y);
    obj.footprint.x_min = gc.x_min + static_cast<double>(acc.ix_min) * gc.cell_size_m;
    obj.footprint.x_max = gc.x_min + static_cast<double>(acc.ix_max + 1) * gc.cell_size_m;
    obj.footprint.y_min = gc.y_min + static_cast<double>(acc.iy_min) * gc.cell_size_m;
    obj.footprint.y_max = gc.y_min + static_cast<double>(acc.iy_max + 1) * gc.cell_size_m;
    // Extents from cell counts so that equal-sized blobs get identical
    // dimensions wherever they sit in the grid.
    const double extent_x = static_cast<double>(acc.ix_max - acc.ix_min + 1) * gc.cell_size_m;
    const double extent_y = static_cast<double>(acc.iy_max - acc.iy_min + 1) * gc.cell_size_m;
    obj.bbox.length_m = std::max(extent_x, extent_y);
    obj.bbox.width_m = std::min(extent_x, extent_y);
    obj.bbox.height_m =
        std::max(static_cast<double>(acc.z_max) - static_cast<double>(acc.z_min), gc.cell_size_m);
    obj.cls = classify_object(obj.bbox);
    obj.confidence = std::min(1.0, static_cast<double>(acc.count) /
                                       static_cast<double>(std::max<std::uint32_t>(1, config.saturation_count)));
    objects.push_back(obj);
  }
  std::stable_sort(objects.begin(), objects.end(),
                   [](const DetectedObject& a, const DetectedObject& b) {
                     if (a.range_m != b.range_m) return a.range_m < b.range_m;
                     return a.bearing_deg < b.bearing_deg;
                   });
  return objects;
}

inline constexpr std::string_view kNoObjectsSentence = "LiDAR scan: no objects detected.";

inline std::string lidar_to_text(const std::vector<DetectedObject>& objects) {
  if (objects.empty()) return std::string(kNoObjectsSentence) + "\n";
  std::string out;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const DetectedObject& obj = objects[i];
    double bearing = std::round(obj.bearing_deg);
    if (bearing >= 360.0) bearing -= 360.0;
    out += fmt::format(
        "Object {}: {} at range {:.1f} m, bearing {:.0f} deg ({}), size {:.1f} m x {:.1f} m x "
        "{:.1f} m, confidence {:.2f}.\n",
        i + 1, class_name(obj.cls), obj.range_m, bearing, geo::cardinal_sector(bearing),
        obj.bbox.length_m, obj.bbox.width_m, obj.bbox.height_m, obj.confidence);
  }
  return out;
}

/// Full LiDAR path: projection, clustering, text.
inline std::string cloud_to_text(const PointCloud& cloud, const GridConfig& grid = {},
                                 const ClusterConfig& cluster = {}) {
  return lidar_to_text(cluster_objects(project_bev(cloud, grid), cluster));
}

inline constexpr std::string_view kCloudMagic = "LIDR";

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void check_finite(const Point& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
      !std::isfinite(p.intensity)) {
    throw Error(ErrorCode::kInvalidInput, "sensing_lidar", "point cloud has non-finite values");
  }
}

}  // namespace detail

/// Binary form: "LIDR", uint32 LE point count, then float32 LE (x, y, z, intensity).
inline std::string encode_cloud(const PointCloud& cloud) {
  std::string out(kCloudMagic);
  detail::put_u32(out, static_cast<std::uint32_t>(cloud.points.size()));
  out.reserve(out.size() + cloud.points.size() * 16);
  for (const Point& p : cloud.points) {
    for (float v : {p.x, p.y, p.z, p.intensity}) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

/// Accepts the binary form or plain-text `x y z intensity` lines.
inline PointCloud decode_cloud(std::string_view bytes) {
  PointCloud cloud;
  if (bytes.substr(0, kCloudMagic.size()) == kCloudMagic) {
    if (bytes.size() < 8) {
      throw Error(ErrorCode::kInvalidInput, "sensing_lidar", "truncated point cloud header");
    }
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t count = detail::get_u32(data + 4);
    if (bytes.size() != 8 + static_cast<std::size_t>(count) * 16) {
      throw Error(ErrorCode::kInvalidInput, "sensing_lidar",
                  fmt::format("point cloud size does not match header count {}", count));
    }
    cloud.points.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const unsigned char* rec = data + 8 + static_cast<std::size_t>(i) * 16;
      Point& p = cloud.points[i];
      p.x = std::bit_cast<float>(detail::get_u32(rec));
      p.y = std::bit_cast<float>(detail::get_u32(rec + 4));
      p.z = std::bit_cast<float>(detail::get_u32(rec + 8));
      p.intensity = std::bit_cast<float>(detail::get_u32(rec + 12));
      detail::check_finite(p);
    }
    return cloud;
  }
  std::istringstream in{std::string(bytes)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream fields(line);
    Point p;
    if (!(fields >> p.x >> p.y >> p.z >> p.intensity)) {
      throw Error(ErrorCode::kInvalidInput, "sensing_lidar",
                  fmt::format("malformed point on line {}", line_no));
    }
    detail::check_finite(p);
    cloud.points.push_back(p);
  }
  return cloud;
}

inline PointCloud read_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "sensing_lidar", "cannot open point cloud " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_cloud(buffer.str());
}

inline void write_cloud(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "sensing_lidar", "cannot write point cloud " + path);
  const std::string bytes = encode_cloud(cloud);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace enwar::lidar
