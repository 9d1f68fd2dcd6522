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


// Library-versus-oracle comparisons shared by the unit tests and the
// acceptance binary. Each returns an empty string on agreement, otherwise a
// description of the first disagreement.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "enwar/knowledge_base.hpp"
#include "enwar/lidar.hpp"
#include "enwar/textproc.hpp"
#include "oracles.hpp"

namespace checks {

// ---------------------------------------------------------------- LiDAR

/// Blobs of points around random centers plus scattered noise, some of it
/// outside the height band or the grid.
inline enwar::lidar::PointCloud random_sparse_cloud(std::mt19937_64& rng, double half_extent) {
  std::uniform_real_distribution<double> center(-half_extent * 0.9, half_extent * 0.9);
  std::uniform_real_distribution<double> spread(0.1, 1.2);
  std::uniform_int_distribution<int> blobs(0, 8);
  std::uniform_int_distribution<int> blob_size(1, 120);
  std::uniform_real_distribution<double> height(-2.0, 3.5);
  std::uniform_real_distribution<double> wide(-half_extent * 1.2, half_extent * 1.2);
  enwar::lidar::PointCloud cloud;
  const int n_blobs = blobs(rng);
  for (int b = 0; b < n_blobs; ++b) {
    std::normal_distribution<double> dx(center(rng), spread(rng));
    std::normal_distribution<double> dy(center(rng), spread(rng));
    const int n = blob_size(rng);
    for (int i = 0; i < n; ++i) {
      cloud.points.push_back({static_cast<float>(dx(rng)), static_cast<float>(dy(rng)),
                              static_cast<float>(height(rng)), 0.5F});
    }
  }
  for (int i = 0; i < 40; ++i) {
    cloud.points.push_back({static_cast<float>(wide(rng)), static_cast<float>(wide(rng)),
                            static_cast<float>(height(rng)), 0.1F});
  }
  return cloud;
}

struct OracleObject {
  std::uint64_t count = 0;
  double cx = 0.0;
  double cy = 0.0;
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::vector<std::size_t> members;
};

inline std::string classify_by_rule(double l, double w, double h) {
  if (l <= 0.8 && w <= 0.8 && h >= 1.0) return "pedestrian";
  if (l <= 2.2 && w <= 1.0) return "cyclist";
  if (l >= 2.2) return "vehicle";
  return "unknown";
}

/// Compares projection, labelling and clustering against naive binning plus
/// union-find, and checks the partition and footprint invariants.
inline std::string compare_lidar(const enwar::lidar::PointCloud& cloud,
                                 const enwar::lidar::GridConfig& gc,
                                 const enwar::lidar::ClusterConfig& cc) {
  std::vector<oracle::RawPoint> raw;
  for (const auto& p : cloud.points) raw.push_back({p.x, p.y, p.z});
  const auto bins = oracle::naive_binning(raw, gc.cell_size_m, gc.x_min, gc.x_max, gc.y_min,
                                          gc.y_max, gc.z_min, gc.z_max);
  const auto grid = enwar::lidar::project_bev(cloud, gc);
  if (grid.cols() != bins.cols || grid.rows() != bins.rows) return "grid dimensions differ";
  for (std::size_t i = 0; i < bins.counts.size(); ++i) {
    if (grid.cells()[i].count != bins.counts[i]) {
      return fmt::format("cell {} count {} vs oracle {}", i, grid.cells()[i].count, bins.counts[i]);
    }
  }
  if (grid.total_count() > cloud.points.size()) return "more binned points than input points";

  // Partition: library labels and union-find roots must induce the same classes.
  const auto labels = enwar::lidar::label_components(grid);
  const auto roots = oracle::union_find_components(bins.counts, bins.cols, bins.rows);
  std::map<std::int32_t, std::size_t> label_to_root;
  std::map<std::size_t, std::int32_t> root_to_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool occupied = bins.counts[i] > 0;
    if ((labels[i] >= 0) != occupied) return fmt::format("cell {} occupancy mismatch", i);
    if (!occupied) continue;
    const auto [a, fresh_a] = label_to_root.emplace(labels[i], roots[i]);
    const auto [b, fresh_b] = root_to_label.emplace(roots[i], labels[i]);
    if (a->second != roots[i] || b->second != labels[i]) {
      return fmt::format("cell {} joins different components", i);
    }
  }

  // Oracle objects straight from the raw member points.
  std::map<std::size_t, OracleObject> comps;
  std::map<std::size_t, std::array<std::size_t, 4>> extents;  // ix_min, ix_max, iy_min, iy_max
  std::map<std::size_t, std::pair<double, double>> zs;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (roots[i] == SIZE_MAX) continue;
    auto& comp = comps[roots[i]];
    const std::size_t ix = i % bins.cols;
    const std::size_t iy = i / bins.cols;
    auto [ext, fresh] = extents.try_emplace(roots[i], std::array<std::size_t, 4>{ix, ix, iy, iy});
    if (!fresh) {
      ext->second[0] = std::min(ext->second[0], ix);
      ext->second[1] = std::max(ext->second[1], ix);
      ext->second[2] = std::min(ext->second[2], iy);
      ext->second[3] = std::max(ext->second[3], iy);
    }
    for (std::size_t m : bins.members[i]) {
      comp.members.push_back(m);
      comp.cx += raw[m].x;
      comp.cy += raw[m].y;
      auto [z, zfresh] = zs.try_emplace(roots[i], raw[m].z, raw[m].z);
      if (!zfresh) {
        z->second.first = std::min(z->second.first, raw[m].z);
        z->second.second = std::max(z->second.second, raw[m].z);
      }
    }
  }
  std::vector<OracleObject> expected;
  for (auto& [root, comp] : comps) {
    comp.count = comp.members.size();
    if (comp.count < cc.min_points) continue;
    comp.cx /= static_cast<double>(comp.count);
    comp.cy /= static_cast<double>(comp.count);
    const auto& e = extents[root];
    const double ex = static_cast<double>(e[1] - e[0] + 1) * gc.cell_size_m;
    const double ey = static_cast<double>(e[3] - e[2] + 1) * gc.cell_size_m;
    comp.length = std::max(ex, ey);
    comp.width = std::min(ex, ey);
    comp.height = std::max(zs[root].second - zs[root].first, gc.cell_size_m);
    expected.push_back(comp);
  }
  auto objects = enwar::lidar::cluster_objects(grid, cc);
  if (objects.size() != expected.size()) {
    return fmt::format("{} objects vs oracle {}", objects.size(), expected.size());
  }
  // Order check on the library output, then match by sorted point counts and centroids.
  for (std::size_t i = 1; i < objects.size(); ++i) {
    const auto& a = objects[i - 1];
    const auto& b = objects[i];
    if (a.range_m > b.range_m || (a.range_m == b.range_m && a.bearing_deg > b.bearing_deg)) {
      return "objects not ordered by range then bearing";
    }
  }
  auto key = [](double x, double y) { return std::make_pair(std::hypot(x, y), std::atan2(-y, x)); };
  std::sort(expected.begin(), expected.end(),
            [&](const auto& a, const auto& b) { return key(a.cx, a.cy) < key(b.cx, b.cy); });
  std::sort(objects.begin(), objects.end(), [&](const auto& a, const auto& b) {
    return key(a.centroid_x, a.centroid_y) < key(b.centroid_x, b.centroid_y);
  });
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const auto& x = expected[i];
    if (o.point_count != x.count) return fmt::format("object {} has {} points vs {}", i, o.point_count, x.count);
    if (std::fabs(o.centroid_x - x.cx) > 1e-9 || std::fabs(o.centroid_y - x.cy) > 1e-9) {
      return fmt::format("object {} centroid differs", i);
    }
    if (std::fabs(o.range_m - std::hypot(o.centroid_x, o.centroid_y)) > 1e-12) return "range is not |centroid|";
    if (o.bbox.length_m != x.length || o.bbox.width_m != x.width) {
      return fmt::format("object {} footprint {}x{} vs {}x{}", i, o.bbox.length_m, o.bbox.width_m,
                         x.length, x.width);
    }
    if (std::fabs(o.bbox.height_m - x.height) > 1e-6) return fmt::format("object {} height differs", i);
    if (!(o.bbox.length_m > 0 && o.bbox.width_m > 0 && o.bbox.height_m > 0)) return "non-positive bbox";
    if (std::string(enwar::lidar::class_name(o.cls)) != classify_by_rule(x.length, x.width, x.height)) {
      return fmt::format("object {} class {}", i, enwar::lidar::class_name(o.cls));
    }
    const double conf = std::min(1.0, static_cast<double>(x.count) / cc.saturation_count);
    if (std::fabs(o.confidence - conf) > 1e-12) return "confidence differs";
    const double slack = gc.cell_size_m;
    for (std::size_t m : x.members) {
      if (raw[m].x < o.footprint.x_min - slack || raw[m].x > o.footprint.x_max + slack ||
          raw[m].y < o.footprint.y_min - slack || raw[m].y > o.footprint.y_max + slack) {
        return fmt::format("member point outside object {} footprint", i);
      }
    }
  }
  return {};
}

// ---------------------------------------------------------------- chunking

inline std::string random_text(std::mt19937_64& rng, std::size_t length) {
  static constexpr std::string_view kAlphabet =
      "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJ.,!?0123456789\n\t#";
  std::uniform_int_distribution<std::size_t> pick(0, kAlphabet.size() - 1);
  std::string s(length, ' ');
  for (char& c : s) c = kAlphabet[pick(rng)];
  return s;
}

/// Size, stride, range and reconstruction laws for one text.
inline std::string check_chunk_laws(const std::string& text, const enwar::text::ChunkConfig& cfg) {
  const auto chunks = enwar::text::chunk_text(text, cfg, "doc", "## GPS");
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    if (c.text.empty() || c.text.size() > cfg.chunk_size) return fmt::format("chunk {} size {}", i, c.text.size());
    if (c.start != i * cfg.stride()) return fmt::format("chunk {} starts at {}", i, c.start);
    if (c.end - c.start != c.text.size() || text.compare(c.start, c.text.size(), c.text) != 0) {
      return fmt::format("chunk {} range inconsistent", i);
    }
    if (i + 1 < chunks.size() && c.text.size() != cfg.chunk_size) return "non-final chunk is short";
    parts.push_back(c.text);
  }
  if (chunks.back().end != text.size()) return "last chunk does not reach the end";
  if (chunks.size() != enwar::text::chunk_count(text.size(), cfg)) return "chunk_count disagrees";
  if (oracle::reconstruct(parts, cfg.overlap) != text) return "reconstruction differs from source";
  return {};
}

// ---------------------------------------------------------------- retrieval

/// Knowledge base of random short texts over a small vocabulary so that
/// duplicate scores and ties occur.
inline enwar::kb::KnowledgeBase random_kb(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  static const std::vector<std::string> vocab = {
      "car",   "truck", "pedestrian", "cyclist", "north", "south", "left", "right",
      "near",  "far",   "building",   "tree",    "lane",  "unit",  "gps",  "lidar"};
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_int_distribution<int> source(0, 39);
  enwar::kb::KnowledgeBase kb;
  kb.modalities = enwar::scene::kAllModalities;
  kb.dim = dim;
  enwar::text::EmbedderSpec spec;
  spec.dim = dim;
  kb.fingerprint = spec.fingerprint();
  static const std::array<std::string_view, 3> sections = {
      enwar::scene::kGpsHeader, enwar::scene::kLidarHeader, enwar::scene::kCameraHeader};
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const int words = len(rng);
    for (int w = 0; w < words; ++w) text += (w ? " " : "") + vocab[word(rng)];
    enwar::text::Chunk chunk{text, fmt::format("s{:02d}", source(rng)),
                             std::string(sections[i % 3]), i * 7, i * 7 + text.size()};
    kb.entries.push_back({chunk, enwar::text::embed_local(text, dim)});
  }
  return kb;
}

/// Full scan, then repeated selection of the best remaining candidate.
inline std::string compare_search(const enwar::kb::KnowledgeBase& kb,
                                  const enwar::text::EmbeddingVector& query, std::size_t k) {
  struct Cand {
    double score;
    std::string source;
    std::size_t start;
  };
  std::vector<Cand> pool;
  for (const auto& e : kb.entries) {
    pool.push_back({oracle::cosine(query.values, e.vector.values), e.chunk.source_id, e.chunk.start});
  }
  std::vector<Cand> expected;
  while (expected.size() < k && !pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      const auto& a = pool[i];
      const auto& b = pool[best];
      const bool better = a.score > b.score ||
                          (a.score == b.score && (a.source < b.source ||
                                                  (a.source == b.source && a.start < b.start)));
      if (better) best = i;
    }
    expected.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  enwar::kb::RetrievalConfig cfg;
  cfg.k = k;
  const auto hits = enwar::kb::semantic_search(kb, query, cfg);
  if (hits.size() != expected.size()) return fmt::format("{} hits vs oracle {}", hits.size(), expected.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].score != expected[i].score) {
      return fmt::format("rank {} score {} vs oracle {}", i + 1, hits[i].score, expected[i].score);
    }
    if (hits[i].chunk.source_id != expected[i].source || hits[i].chunk.start != expected[i].start) {
      return fmt::format("rank {} entry differs", i + 1);
    }
    if (hits[i].rank != i + 1) return "ranks not contiguous";
  }
  return {};
}

/// Filter laws on one score set.
inline std::string check_percentile(const std::vector<double>& scores, double p) {
  std::vector<enwar::kb::RetrievedHit> hits;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    hits.push_back({enwar::text::Chunk{"", fmt::format("s{}", i), "## GPS", i, i + 1}, scores[i], i + 1});
  }
  const auto kept = enwar::kb::percentile_filter(hits, p);
  if (!scores.empty() && kept.empty()) return "filter emptied a non-empty input";
  const double threshold = oracle::counting_percentile(scores, p);
  std::multiset<double> kept_scores;
  for (const auto& h : kept) kept_scores.insert(h.score);
  double kept_min = std::numeric_limits<double>::infinity();
  double dropped_max = -std::numeric_limits<double>::infinity();
  std::size_t expected_kept = 0;
  for (double s : scores) {
    if (s >= threshold) ++expected_kept;
  }
  for (const auto& h : kept) kept_min = std::min(kept_min, h.score);
  std::multiset<double> all(scores.begin(), scores.end());
  for (double s : kept_scores) all.erase(all.find(s));
  for (double s : all) dropped_max = std::max(dropped_max, s);
  if (!all.empty() && !kept.empty() && kept_min < dropped_max) return "a dropped score beats a kept one";
  if (kept.size() != expected_kept) return fmt::format("kept {} vs oracle {}", kept.size(), expected_kept);
  if (!kept.empty() && kept_min < threshold) return "kept score below oracle threshold";
  return {};
}

}  // namespace checks
