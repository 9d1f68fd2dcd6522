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

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "enwar/error.hpp"

namespace enwar::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kStationarySpeedMps = 0.5;
inline constexpr std::string_view kColocated = "colocated";

class GeoFix {
 public:
  // Longitude accepts the closed range so that the antimeridian itself can be
  // expressed as +180.
  GeoFix(double latitude, double longitude, double timestamp = 0.0)
      : latitude_(latitude), longitude_(longitude), timestamp_(timestamp) {
    if (!std::isfinite(latitude) || latitude < -90.0 || latitude > 90.0) {
      throw Error(ErrorCode::kInvalidFix, "sensing_geo",
                  fmt::format("latitude {} outside [-90, 90]", latitude));
    }
    if (!std::isfinite(longitude) || longitude < -180.0 || longitude > 180.0) {
      throw Error(ErrorCode::kInvalidFix, "sensing_geo",
                  fmt::format("longitude {} outside [-180, 180]", longitude));
    }
    if (!std::isfinite(timestamp) || timestamp < 0.0) {
      throw Error(ErrorCode::kInvalidFix, "sensing_geo",
                  fmt::format("timestamp {} is negative", timestamp));
    }
  }

  double latitude() const noexcept { return latitude_; }
  double longitude() const noexcept { return longitude_; }
  double timestamp() const noexcept { return timestamp_; }

  bool same_position(const GeoFix& other) const noexcept {
    return latitude_ == other.latitude_ && longitude_ == other.longitude_;
  }

  bool operator==(const GeoFix&) const = default;

 private:
  double latitude_;
  double longitude_;
  double timestamp_;
};

using Track = std::vector<GeoFix>;

struct RelativeGeometry {
  double distance_m = 0.0;
  double bearing_deg = 0.0;
  std::string cardinal;
};

struct MotionEstimate {
  double speed_mps = 0.0;
  double heading_deg = 0.0;
  bool stationary = true;
};

namespace detail {

constexpr double to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline double wrap_degrees(double deg) {
  double wrapped = std::fmod(deg, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  // fmod of a tiny negative value can round back up to exactly 360.
  if (wrapped >= 360.0) wrapped = 0.0;
  return wrapped;
}

}  // namespace detail

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
inline double haversine_distance(const GeoFix& a, const GeoFix& b) {
  const double phi1 = detail::to_rad(a.latitude());
  const double phi2 = detail::to_rad(b.latitude());
  const double dphi = phi2 - phi1;
  const double dlambda = detail::to_rad(b.longitude() - a.longitude());
  const double s_phi = std::sin(dphi / 2.0);
  const double s_lambda = std::sin(dlambda / 2.0);
  const double h = s_phi * s_phi + std::cos(phi1) * std::cos(phi2) * s_lambda * s_lambda;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Forward azimuth from a to b in [0, 360), clockwise from true north.
inline double initial_bearing(const GeoFix& a, const GeoFix& b) {
  if (a.same_position(b)) {
    throw Error(ErrorCode::kCoincidentPoints, "sensing_geo",
                "bearing between identical coordinates is undefined");
  }
  const double phi1 = detail::to_rad(a.latitude());
  const double phi2 = detail::to_rad(b.latitude());
  const double dlambda = detail::to_rad(b.longitude() - a.longitude());
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return detail::wrap_degrees(detail::to_deg(std::atan2(y, x)));
}

inline constexpr std::array<std::string_view, 16> kCompassSectors = {
    "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE",
    "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW"};

/// 16-point compass label; each sector is 22.5 degrees wide and N is centered on 0.
inline std::string_view cardinal_sector(double bearing_deg) {
  const double wrapped = detail::wrap_degrees(bearing_deg);
  const auto index = static_cast<std::size_t>(std::floor((wrapped + 11.25) / 22.5)) % 16;
  return kCompassSectors[index];
}

inline RelativeGeometry describe_relative(const GeoFix& self, const GeoFix& other) {
  if (self.same_position(other)) {
    return RelativeGeometry{0.0, 0.0, std::string(kColocated)};
  }
  const double bearing = initial_bearing(self, other);
  return RelativeGeometry{haversine_distance(self, other), bearing,
                          std::string(cardinal_sector(bearing))};
}

/// Speed and heading between the first and last fix of the trailing `window`
/// fixes of the track.
inline MotionEstimate estimate_motion(std::span<const GeoFix> track, std::size_t window) {
  if (track.size() < 2) {
    throw Error(ErrorCode::kInsufficientTrack, "sensing_geo",
                fmt::format("motion needs at least 2 fixes, got {}", track.size()));
  }
  if (window < 2) {
    throw Error(ErrorCode::kInvalidInput, "sensing_geo", "motion window must be >= 2");
  }
  const std::size_t n = std::min(window, track.size());
  const GeoFix& first = track[track.size() - n];
  const GeoFix& last = track.back();
  const double elapsed = last.timestamp() - first.timestamp();
  if (!(elapsed > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "sensing_geo",
                "track timestamps must be strictly increasing");
  }
  MotionEstimate motion;
  motion.speed_mps = haversine_distance(first, last) / elapsed;
  motion.heading_deg = first.same_position(last) ? 0.0 : initial_bearing(first, last);
  motion.stationary = motion.speed_mps < kStationarySpeedMps;
  return motion;
}

inline std::string describe_motion(std::string_view unit, const MotionEstimate& motion) {
  if (motion.stationary) {
    return fmt::format("{} is stationary ({:.1f} m/s).", unit, motion.speed_mps);
  }
  return fmt::format("{} is moving at {:.1f} m/s with heading {:.1f} deg ({}).", unit,
                     motion.speed_mps, motion.heading_deg, cardinal_sector(motion.heading_deg));
}

/// Textual description of two units: latest positions, relative geometry
/// from unit 1 to unit 2, and each unit's motion over its whole track.
inline std::string geo_to_text(std::span<const GeoFix> self_track,
                               std::span<const GeoFix> other_track) {
  if (self_track.empty() || other_track.empty()) {
    throw Error(ErrorCode::kInsufficientTrack, "sensing_geo", "GPS track is empty");
  }
  const MotionEstimate self_motion = estimate_motion(self_track, self_track.size());
  const MotionEstimate other_motion = estimate_motion(other_track, other_track.size());
  const GeoFix& self = self_track.back();
  const GeoFix& other = other_track.back();
  const RelativeGeometry rel = describe_relative(self, other);

  std::string out;
  out += fmt::format("Unit 1 (receiver) position: latitude {:.6f}, longitude {:.6f}.\n",
                     self.latitude(), self.longitude());
  out += fmt::format("Unit 2 (transmitter) position: latitude {:.6f}, longitude {:.6f}.\n",
                     other.latitude(), other.longitude());
  if (rel.cardinal == kColocated) {
    out += fmt::format("Unit 2 is {} with unit 1 ({:.1f} m apart).\n", kColocated,
                       rel.distance_m);
  } else {
    out += fmt::format("Unit 2 is {:.1f} m from unit 1 at a bearing of {:.1f} deg ({}).\n",
                       rel.distance_m, rel.bearing_deg, rel.cardinal);
  }
  out += describe_motion("Unit 1", self_motion) + "\n";
  out += describe_motion("Unit 2", other_motion) + "\n";
  return out;
}

/// Parses `timestamp,latitude,longitude` lines. Blank lines and lines starting
/// with '#' are skipped; timestamps must be strictly increasing.
inline Track parse_track(std::string_view text) {
  Track track;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::array<double, 3> fields{};
    std::size_t field = 0;
    bool ok = true;
    for (std::size_t start = 0; ok && start <= line.size(); ++field) {
      std::size_t comma = std::min(line.find(',', start), line.size());
      std::string_view token = line.substr(start, comma - start);
      while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
      while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
      if (field >= fields.size() || token.empty()) {
        ok = false;
        break;
      }
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), fields[field]);
      ok = ec == std::errc() && ptr == token.data() + token.size();
      start = comma + 1;
    }
    if (!ok || field != fields.size()) {
      throw Error(ErrorCode::kInvalidInput, "sensing_geo",
                  fmt::format("malformed GPS record on line {}", line_no));
    }
    GeoFix fix(fields[1], fields[2], fields[0]);
    if (!track.empty() && !(fix.timestamp() > track.back().timestamp())) {
      throw Error(ErrorCode::kInvalidInput, "sensing_geo",
                  fmt::format("timestamps not strictly increasing at line {}", line_no));
    }
    track.push_back(fix);
    if (end == text.size()) break;
  }
  return track;
}

inline Track read_track(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "sensing_geo", "cannot open GPS file " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_track(buffer.str());
}

}  // namespace enwar::geo
