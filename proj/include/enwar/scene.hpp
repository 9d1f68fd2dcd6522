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
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "enwar/error.hpp"
#include "enwar/geo.hpp"
#include "enwar/http_client.hpp"
#include "enwar/lidar.hpp"

namespace enwar::scene {

inline constexpr std::string_view kGpsHeader = "## GPS";
inline constexpr std::string_view kLidarHeader = "## LIDAR";
inline constexpr std::string_view kCameraHeader = "## CAMERA";
inline constexpr std::size_t kMaxCaptionChars = 2048;

struct ModalitySet {
  bool gps = false;
  bool lidar = false;
  bool camera = false;

  bool empty() const noexcept { return !gps && !lidar && !camera; }
  unsigned mask() const noexcept {
    return (gps ? 1U : 0U) | (lidar ? 2U : 0U) | (camera ? 4U : 0U);
  }
  static ModalitySet from_mask(unsigned mask) {
    return ModalitySet{(mask & 1U) != 0, (mask & 2U) != 0, (mask & 4U) != 0};
  }
  bool contains(const ModalitySet& other) const noexcept {
    return (mask() & other.mask()) == other.mask();
  }

  /// Canonical name, e.g. "gps+lidar+cam".
  std::string name() const {
    std::string out;
    auto add = [&out](std::string_view part) {
      if (!out.empty()) out += '+';
      out += part;
    };
    if (gps) add("gps");
    if (lidar) add("lidar");
    if (camera) add("cam");
    return out.empty() ? "none" : out;
  }

  /// Accepts '+' or ',' separated names; "camera" is an alias of "cam".
  static ModalitySet parse(std::string_view text) {
    ModalitySet set;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find_first_of("+,", start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view part = text.substr(start, end - start);
      while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
      while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
      if (part == "gps") {
        set.gps = true;
      } else if (part == "lidar") {
        set.lidar = true;
      } else if (part == "cam" || part == "camera") {
        set.camera = true;
      } else {
        throw Error(ErrorCode::kInvalidInput, "scene",
                    "unknown modality '" + std::string(part) + "'");
      }
      start = end + 1;
    }
    return set;
  }

  bool operator==(const ModalitySet&) const = default;
};

inline constexpr ModalitySet kAllModalities{true, true, true};

/// The seven non-empty combinations in canonical order.
inline std::vector<ModalitySet> all_combinations() {
  return {ModalitySet::from_mask(1), ModalitySet::from_mask(2), ModalitySet::from_mask(4),
          ModalitySet::from_mask(3), ModalitySet::from_mask(5), ModalitySet::from_mask(6),
          ModalitySet::from_mask(7)};
}

enum class CameraId { kFront, kRear };

inline std::string_view camera_name(CameraId id) {
  return id == CameraId::kFront ? "front" : "rear";
}

inline CameraId parse_camera(std::string_view name) {
  if (name == "front") return CameraId::kFront;
  if (name == "rear" || name == "back") return CameraId::kRear;
  throw Error(ErrorCode::kInvalidInput, "scene", "unknown camera '" + std::string(name) + "'");
}

struct Caption {
  CameraId camera = CameraId::kFront;
  std::string text;
};

struct SceneRecord {
  std::string scene_id;
  double timestamp = 0.0;
  std::string split = "build";
  geo::Track unit1_track;
  geo::Track unit2_track;
  std::optional<lidar::PointCloud> cloud;
  std::optional<std::string> cloud_path;
  std::vector<Caption> captions;
  std::map<CameraId, std::string> image_paths;
  std::optional<std::string> ground_truth;

  const Caption* caption(CameraId camera) const {
    for (const auto& c : captions) {
      if (c.camera == camera) return &c;
    }
    return nullptr;
  }
};

/// Image-to-text source used when a scene lacks caption sidecars.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string caption(const SceneRecord& record, CameraId camera) const = 0;
};

class StubCaptioner : public Captioner {
 public:
  explicit StubCaptioner(std::string text) : text_(std::move(text)) {}
  std::string caption(const SceneRecord&, CameraId) const override { return text_; }

 private:
  std::string text_;
};

/// POSTs {"scene_id", "camera", "image_path"} as JSON; the response body is
/// the caption text.
class HttpCaptioner : public Captioner {
 public:
  explicit HttpCaptioner(http::RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::string caption(const SceneRecord& record, CameraId camera) const override {
    const auto image = record.image_paths.find(camera);
    nlohmann::json request = {
        {"scene_id", record.scene_id},
        {"camera", camera_name(camera)},
        {"image_path", image == record.image_paths.end() ? "" : image->second}};
    const auto response = http::post(endpoint_, request.dump(), "application/json");
    if (!response) {
      throw Error(ErrorCode::kCaptionerUnavailable, "scene", "no response from " + endpoint_.url);
    }
    if (response->status < 200 || response->status >= 300) {
      throw Error(ErrorCode::kCaptionerUnavailable, "scene",
                  fmt::format("HTTP {} from {}", response->status, endpoint_.url));
    }
    return response->body;
  }

 private:
  http::RemoteEndpoint endpoint_;
};

inline std::string ingest_caption(const SceneRecord& record, CameraId camera,
                                  const Captioner* captioner = nullptr) {
  std::string text;
  if (const Caption* sidecar = record.caption(camera)) {
    text = sidecar->text;
  } else if (captioner != nullptr) {
    text = captioner->caption(record, camera);
  } else {
    throw Error(ErrorCode::kMissingCaption, "scene",
                fmt::format("scene {} has no {} caption and no captioner is configured",
                            record.scene_id, camera_name(camera)));
  }
  if (text.size() > kMaxCaptionChars) text.resize(kMaxCaptionChars);
  return text;
}

struct SceneDocument {
  std::string scene_id;
  std::string split = "build";
  ModalitySet modalities;
  std::optional<std::string> gps_text;
  std::optional<std::string> lidar_text;
  std::optional<std::string> camera_text;
  std::string unified_text;
  std::optional<std::string> ground_truth;

  bool operator==(const SceneDocument&) const = default;
};

struct Section {
  std::string_view header;
  std::string text;    // header line plus body
  std::size_t offset;  // position of `text` inside unified_text
};

/// Sections present in the document, in GPS, LIDAR, CAMERA order, with their
/// offsets in unified_text.
inline std::vector<Section> sections(const SceneDocument& doc) {
  std::vector<Section> out;
  std::size_t offset = 0;
  auto add = [&](std::string_view header, const std::optional<std::string>& body) {
    if (!body) return;
    if (!out.empty()) offset += out.back().text.size() + 1;  // blank separator line
    out.push_back(Section{header, std::string(header) + "\n" + *body, offset});
  };
  add(kGpsHeader, doc.gps_text);
  add(kLidarHeader, doc.lidar_text);
  add(kCameraHeader, doc.camera_text);
  return out;
}

inline std::string compose_unified(const SceneDocument& doc) {
  std::string unified;
  for (const auto& section : sections(doc)) {
    if (!unified.empty()) unified += '\n';
    unified += section.text;
  }
  return unified;
}

struct SynthesisOptions {
  lidar::GridConfig grid;
  lidar::ClusterConfig cluster;
  const Captioner* captioner = nullptr;
};

namespace detail {

inline std::string single_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  while (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

[[noreturn]] inline void missing(std::string_view modality, const std::string& why) {
  throw Error(ErrorCode::kModalityDataMissing, "scene",
              fmt::format("{}: {}", modality, why));
}

}  // namespace detail

inline SceneDocument synthesize_scene(const SceneRecord& record, const ModalitySet& modalities,
                                      const SynthesisOptions& options = {}) {
  if (modalities.empty()) {
    throw Error(ErrorCode::kInvalidInput, "scene", "no modality selected");
  }
  SceneDocument doc;
  doc.scene_id = record.scene_id;
  doc.split = record.split;
  doc.modalities = modalities;
  doc.ground_truth = record.ground_truth;

  if (modalities.gps) {
    if (record.unit1_track.empty() || record.unit2_track.empty()) {
      detail::missing("gps", "scene " + record.scene_id + " lacks a GPS track");
    }
    doc.gps_text = geo::geo_to_text(record.unit1_track, record.unit2_track);
  }
  if (modalities.lidar) {
    lidar::PointCloud loaded;
    const lidar::PointCloud* cloud = nullptr;
    if (record.cloud) {
      cloud = &*record.cloud;
    } else if (record.cloud_path) {
      try {
        loaded = lidar::read_cloud(*record.cloud_path);
      } catch (const Error& e) {
        detail::missing("lidar", e.what());
      }
      cloud = &loaded;
    } else {
      detail::missing("lidar", "scene " + record.scene_id + " has no point cloud");
    }
    doc.lidar_text = lidar::cloud_to_text(*cloud, options.grid, options.cluster);
  }
  if (modalities.camera) {
    std::string text;
    for (CameraId camera : {CameraId::kFront, CameraId::kRear}) {
      if (record.caption(camera) == nullptr && options.captioner == nullptr) continue;
      std::string caption = detail::single_line(ingest_caption(record, camera, options.captioner));
      std::string label(camera_name(camera));
      label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
      text += fmt::format("{} camera: {}\n", label, caption);
    }
    if (text.empty()) detail::missing("camera", "scene " + record.scene_id + " has no captions");
    doc.camera_text = std::move(text);
  }
  doc.unified_text = compose_unified(doc);
  return doc;
}

/// The extracted-information block embedded in the instructional prompt.
inline std::string render_extracted_info(const SceneDocument& doc) {
  std::string out = fmt::format("Extracted information for scene {}:\n", doc.scene_id);
  if (doc.gps_text) out += "Unit positions and bearings:\n" + *doc.gps_text;
  if (doc.lidar_text) out += "Object inventory:\n" + *doc.lidar_text;
  if (doc.camera_text) out += "Camera observations:\n" + *doc.camera_text;
  return out;
}

inline nlohmann::json to_json(const SceneDocument& doc) {
  auto optional = [](const std::optional<std::string>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return nlohmann::json{{"scene_id", doc.scene_id},
                        {"split", doc.split},
                        {"modalities", doc.modalities.name()},
                        {"gps_text", optional(doc.gps_text)},
                        {"lidar_text", optional(doc.lidar_text)},
                        {"camera_text", optional(doc.camera_text)},
                        {"unified_text", doc.unified_text},
                        {"ground_truth", optional(doc.ground_truth)}};
}

inline SceneDocument document_from_json(const nlohmann::json& j) {
  auto optional = [&j](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
  };
  try {
    SceneDocument doc;
    doc.scene_id = j.at("scene_id").get<std::string>();
    doc.split = j.value("split", std::string("build"));
    doc.modalities = ModalitySet::parse(j.at("modalities").get<std::string>());
    doc.gps_text = optional("gps_text");
    doc.lidar_text = optional("lidar_text");
    doc.camera_text = optional("camera_text");
    doc.unified_text = j.at("unified_text").get<std::string>();
    doc.ground_truth = optional("ground_truth");
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, "scene", std::string("bad scene document: ") + e.what());
  }
}

inline std::string dump_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline void save_documents(const std::string& path, const std::vector<SceneDocument>& docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "scene", "cannot write " + path);
  for (const auto& doc : docs) out << dump_line(to_json(doc)) << '\n';
}

inline std::vector<SceneDocument> load_documents(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "scene", "cannot open " + path);
  std::vector<SceneDocument> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      docs.push_back(document_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kInvalidInput, "scene", std::string("bad JSON line: ") + e.what());
    }
  }
  return docs;
}

/// One manifest line with paths resolved against the manifest's directory.
struct ManifestEntry {
  std::string scene_id;
  double timestamp = 0.0;
  std::string split = "build";
  std::optional<std::string> gps_unit1;
  std::optional<std::string> gps_unit2;
  std::optional<std::string> cloud;
  std::map<CameraId, std::string> captions;
  std::map<CameraId, std::string> images;
  std::optional<std::string> ground_truth;

  ModalitySet referenced() const {
    return ModalitySet{gps_unit1.has_value() || gps_unit2.has_value(), cloud.has_value(),
                       !captions.empty() || !images.empty()};
  }
};

inline std::string read_text_file(const std::string& path, std::string_view module,
                                  ErrorCode code = ErrorCode::kIo) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, module, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
  const std::string text = read_text_file(path, "scene");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const nlohmann::json& v) {
    std::filesystem::path p(v.get<std::string>());
    return (p.is_absolute() ? p : base / p).lexically_normal().string();
  };
  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry entry;
      entry.scene_id = j.at("scene_id").get<std::string>();
      entry.timestamp = j.value("timestamp", 0.0);
      entry.split = j.value("split", std::string("build"));
      if (j.contains("gps")) {
        const auto& gps = j.at("gps");
        if (gps.contains("unit1")) entry.gps_unit1 = resolve(gps.at("unit1"));
        if (gps.contains("unit2")) entry.gps_unit2 = resolve(gps.at("unit2"));
      }
      if (j.contains("cloud")) entry.cloud = resolve(j.at("cloud"));
      if (j.contains("captions")) {
        for (const auto& [camera, p] : j.at("captions").items()) {
          entry.captions[parse_camera(camera)] = resolve(p);
        }
      }
      if (j.contains("images")) {
        for (const auto& [camera, p] : j.at("images").items()) {
          entry.images[parse_camera(camera)] = resolve(p);
        }
      }
      if (j.contains("ground_truth")) entry.ground_truth = resolve(j.at("ground_truth"));
      for (const auto& seen : entries) {
        if (seen.scene_id == entry.scene_id) {
          throw Error(ErrorCode::kInvalidInput, "scene",
                      "duplicate scene_id " + entry.scene_id);
        }
      }
      entries.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidInput, "scene",
                  fmt::format("manifest line {}: {}", line_no, e.what()));
    }
  }
  return entries;
}

/// Reads GPS tracks, caption sidecars, and ground truth. The point cloud stays
/// a path and is read during synthesis.
inline SceneRecord load_record(const ManifestEntry& entry) {
  SceneRecord record;
  record.scene_id = entry.scene_id;
  record.timestamp = entry.timestamp;
  record.split = entry.split;
  if (entry.gps_unit1) record.unit1_track = geo::read_track(*entry.gps_unit1);
  if (entry.gps_unit2) record.unit2_track = geo::read_track(*entry.gps_unit2);
  record.cloud_path = entry.cloud;
  for (const auto& [camera, path] : entry.captions) {
    record.captions.push_back(
        Caption{camera, read_text_file(path, "scene", ErrorCode::kMissingCaption)});
  }
  record.image_paths = entry.images;
  if (entry.ground_truth) record.ground_truth = read_text_file(*entry.ground_truth, "scene");
  return record;
}

}  // namespace enwar::scene
