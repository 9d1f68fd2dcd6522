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


#include <random>
#include <regex>

#include <gtest/gtest.h>

#include "enwar/geo.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

using enwar::Error;
using enwar::ErrorCode;
using enwar::geo::GeoFix;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an enwar::Error";
  return ErrorCode::kIo;
}

GeoFix random_fix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lat(-89.0, 89.0);
  std::uniform_real_distribution<double> lon(-180.0, 179.999);
  return GeoFix(lat(rng), lon(rng));
}

TEST(GeoFix, RejectsOutOfRangeCoordinates) {
  EXPECT_EQ(code_of([] { GeoFix(90.5, 0.0); }), ErrorCode::kInvalidFix);
  EXPECT_EQ(code_of([] { GeoFix(-90.5, 0.0); }), ErrorCode::kInvalidFix);
  EXPECT_EQ(code_of([] { GeoFix(0.0, 180.5); }), ErrorCode::kInvalidFix);
  EXPECT_EQ(code_of([] { GeoFix(std::nan(""), 0.0); }), ErrorCode::kInvalidFix);
  EXPECT_EQ(code_of([] { GeoFix(0.0, 0.0, -1.0); }), ErrorCode::kInvalidFix);
  EXPECT_NO_THROW(GeoFix(90.0, -180.0));
}

TEST(Haversine, IdenticalPointsAreZero) {
  const GeoFix a(33.42, -111.93);
  EXPECT_EQ(enwar::geo::haversine_distance(a, a), 0.0);
}

TEST(Haversine, HalfCircumference) {
  const double d = enwar::geo::haversine_distance(GeoFix(0, 0), GeoFix(0, 180));
  EXPECT_NEAR(d, std::numbers::pi * 6'371'000.0, 1e-6);
  EXPECT_NEAR(d, 20'015'086.8, 0.1);
}

TEST(Haversine, OneDegreeOfLongitudeMatchesOracles) {
  const double d = enwar::geo::haversine_distance(GeoFix(0, 0), GeoFix(0, 1));
  EXPECT_NEAR(d / oracle::slc_distance(0, 0, 0, 1), 1.0, 1e-6);
  EXPECT_NEAR(d / oracle::chord_distance(0, 0, 0, 1), 1.0, 1e-9);
}

TEST(Haversine, SymmetricAndAgreesWithLawOfCosines) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 1000; ++i) {
    const GeoFix a = random_fix(rng);
    const GeoFix b = random_fix(rng);
    const double ab = enwar::geo::haversine_distance(a, b);
    EXPECT_EQ(ab, enwar::geo::haversine_distance(b, a));
    EXPECT_GE(ab, 0.0);
    const double ref = oracle::slc_distance(a.latitude(), a.longitude(), b.latitude(), b.longitude());
    EXPECT_NEAR(ab / ref, 1.0, 1e-6);
  }
}

TEST(Haversine, TriangleInequality) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const GeoFix a = random_fix(rng);
    const GeoFix b = random_fix(rng);
    const GeoFix c = random_fix(rng);
    const double ac = enwar::geo::haversine_distance(a, c);
    const double via = enwar::geo::haversine_distance(a, b) + enwar::geo::haversine_distance(b, c);
    EXPECT_LE(ac, via * (1.0 + 1e-6));
  }
}

TEST(Bearing, CardinalDirections) {
  EXPECT_NEAR(enwar::geo::initial_bearing(GeoFix(0, 0), GeoFix(1, 0)), 0.0, 1e-12);
  EXPECT_NEAR(enwar::geo::initial_bearing(GeoFix(0, 0), GeoFix(0, 1)), 90.0, 1e-12);
  EXPECT_NEAR(enwar::geo::initial_bearing(GeoFix(0, 0), GeoFix(-1, 0)), 180.0, 1e-12);
  EXPECT_NEAR(enwar::geo::initial_bearing(GeoFix(0, 0), GeoFix(0, -1)), 270.0, 1e-12);
}

TEST(Bearing, DiagonalMatchesTangentPlaneOracle) {
  const double b = enwar::geo::initial_bearing(GeoFix(10, 10), GeoFix(11, 11));
  EXPECT_NEAR(b, oracle::tangent_azimuth(10, 10, 11, 11), 1e-6);
}

TEST(Bearing, RandomPairsInRangeAndMatchOracle) {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 1000; ++i) {
    const GeoFix a = random_fix(rng);
    const GeoFix b = random_fix(rng);
    const double bearing = enwar::geo::initial_bearing(a, b);
    EXPECT_GE(bearing, 0.0);
    EXPECT_LT(bearing, 360.0);
    const double ref = oracle::tangent_azimuth(a.latitude(), a.longitude(), b.latitude(), b.longitude());
    EXPECT_LT(oracle::angle_gap(bearing, ref), 1e-6);
  }
}

TEST(Bearing, CoincidentPointsThrow) {
  EXPECT_EQ(code_of([] { enwar::geo::initial_bearing(GeoFix(5, 5), GeoFix(5, 5)); }),
            ErrorCode::kCoincidentPoints);
}

TEST(Cardinal, SectorBoundaries) {
  using enwar::geo::cardinal_sector;
  EXPECT_EQ(cardinal_sector(11.24), "N");
  EXPECT_EQ(cardinal_sector(11.26), "NNE");
  EXPECT_EQ(cardinal_sector(348.75), "N");
  EXPECT_EQ(cardinal_sector(348.74), "NNW");
  EXPECT_EQ(cardinal_sector(0.0), "N");
  EXPECT_EQ(cardinal_sector(359.999), "N");
}

TEST(Cardinal, MidpointsMapToTheirLabels) {
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(enwar::geo::cardinal_sector(22.5 * static_cast<double>(i)),
              enwar::geo::kCompassSectors[i]);
  }
}

TEST(Cardinal, TotalOverCircle) {
  for (double b = 0.0; b < 360.0; b += 0.01) {
    const auto label = enwar::geo::cardinal_sector(b);
    const auto* it = std::find(enwar::geo::kCompassSectors.begin(),
                               enwar::geo::kCompassSectors.end(), label);
    ASSERT_NE(it, enwar::geo::kCompassSectors.end());
  }
}

TEST(DescribeRelative, EastAlongEquator) {
  const auto rel = enwar::geo::describe_relative(GeoFix(0, 0), GeoFix(0, 1));
  EXPECT_NEAR(rel.distance_m / oracle::slc_distance(0, 0, 0, 1), 1.0, 1e-6);
  EXPECT_NEAR(rel.distance_m, 111'195.0, 1.0);
  EXPECT_NEAR(rel.bearing_deg, 90.0, 1e-12);
  EXPECT_EQ(rel.cardinal, "E");
}

TEST(DescribeRelative, ColocatedSentinel) {
  const auto rel = enwar::geo::describe_relative(GeoFix(1, 2), GeoFix(1, 2));
  EXPECT_EQ(rel.distance_m, 0.0);
  EXPECT_EQ(rel.cardinal, enwar::geo::kColocated);
}

TEST(Motion, StationaryWhenNotMoving) {
  const std::vector<GeoFix> track{GeoFix(3, 4, 0), GeoFix(3, 4, 1)};
  const auto m = enwar::geo::estimate_motion(track, 2);
  EXPECT_EQ(m.speed_mps, 0.0);
  EXPECT_TRUE(m.stationary);
}

TEST(Motion, SpeedFromOracleDistance) {
  const std::vector<GeoFix> track{GeoFix(0, 0, 0), GeoFix(0, 0.001, 10)};
  const auto m = enwar::geo::estimate_motion(track, 2);
  EXPECT_NEAR(m.speed_mps / (oracle::chord_distance(0, 0, 0, 0.001) / 10.0), 1.0, 1e-6);
  EXPECT_NEAR(m.heading_deg, 90.0, 1e-9);
  EXPECT_FALSE(m.stationary);
}

TEST(Motion, ThresholdIsStrict) {
  // 0.5 m/s exactly is moving; just below is stationary.
  const double deg_per_m = 1.0 / (6'371'000.0 * std::numbers::pi / 180.0);
  const std::vector<GeoFix> at{GeoFix(0, 0, 0), GeoFix(0, 0.5 * deg_per_m * 1.000001, 1)};
  const std::vector<GeoFix> below{GeoFix(0, 0, 0), GeoFix(0, 0.49 * deg_per_m, 1)};
  EXPECT_FALSE(enwar::geo::estimate_motion(at, 2).stationary);
  EXPECT_TRUE(enwar::geo::estimate_motion(below, 2).stationary);
}

TEST(Motion, UsesTrailingWindow) {
  const std::vector<GeoFix> track{GeoFix(0, 0, 0), GeoFix(0, 0.01, 1), GeoFix(0, 0.01, 2),
                                  GeoFix(0, 0.01, 3)};
  EXPECT_TRUE(enwar::geo::estimate_motion(track, 2).stationary);
  EXPECT_FALSE(enwar::geo::estimate_motion(track, 4).stationary);
}

TEST(Motion, SingleFixIsInsufficient) {
  const std::vector<GeoFix> track{GeoFix(0, 0, 0)};
  EXPECT_EQ(code_of([&] { enwar::geo::estimate_motion(track, 2); }), ErrorCode::kInsufficientTrack);
}

TEST(GeoText, StationaryColocated) {
  const std::vector<GeoFix> track{GeoFix(10, 20, 0), GeoFix(10, 20, 1)};
  const std::string text = enwar::geo::geo_to_text(track, track);
  EXPECT_NE(text.find("stationary"), std::string::npos);
  EXPECT_NE(text.find(std::string(enwar::geo::kColocated)), std::string::npos);
}

TEST(GeoText, SingleFixPropagatesInsufficientTrack) {
  const std::vector<GeoFix> one{GeoFix(10, 20, 0)};
  const std::vector<GeoFix> two{GeoFix(10, 20, 0), GeoFix(10, 20, 1)};
  EXPECT_EQ(code_of([&] { enwar::geo::geo_to_text(one, two); }), ErrorCode::kInsufficientTrack);
}

double bearing_in_text(const std::string& text) {
  static const std::regex re("bearing of ([0-9.]+) deg");
  std::smatch m;
  EXPECT_TRUE(std::regex_search(text, m, re)) << text;
  return std::stod(m[1]);
}

TEST(GeoText, SwappedEquatorialUnitsReverseBearing) {
  const std::vector<GeoFix> west{GeoFix(0, 0, 0), GeoFix(0, 0.0001, 1)};
  const std::vector<GeoFix> east{GeoFix(0, 0.0005, 0), GeoFix(0, 0.0006, 1)};
  const double forward = bearing_in_text(enwar::geo::geo_to_text(west, east));
  const double back = bearing_in_text(enwar::geo::geo_to_text(east, west));
  EXPECT_NEAR(std::fmod(forward + 180.0, 360.0), back, 1e-9);
}

TEST(GeoText, DeterministicAndGolden) {
  const auto record = testing_support::fixture_record("s01");
  const std::string a = enwar::geo::geo_to_text(record.unit1_track, record.unit2_track);
  const std::string b = enwar::geo::geo_to_text(record.unit1_track, record.unit2_track);
  EXPECT_EQ(a, b);
  testing_support::expect_golden("geo_s01.txt", a);
}

TEST(ParseTrack, SkipsCommentsAndBlankLines) {
  const auto track = enwar::geo::parse_track("# t,lat,lon\n\n0,1.5,2.5\r\n1, 1.6 ,2.6\n");
  ASSERT_EQ(track.size(), 2U);
  EXPECT_EQ(track[1].latitude(), 1.6);
  EXPECT_EQ(track[1].timestamp(), 1.0);
}

TEST(ParseTrack, RejectsMalformedAndNonIncreasing) {
  EXPECT_EQ(code_of([] { enwar::geo::parse_track("0,1\n"); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { enwar::geo::parse_track("0,1,2,3\n"); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { enwar::geo::parse_track("0,x,2\n"); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { enwar::geo::parse_track("1,1,2\n1,1,2\n"); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { enwar::geo::parse_track("0,95,2\n"); }), ErrorCode::kInvalidFix);
}

}  // namespace
