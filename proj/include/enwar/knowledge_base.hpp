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
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <zlib.h>

#include "enwar/error.hpp"
#include "enwar/scene.hpp"
#include "enwar/textproc.hpp"

namespace enwar::kb {

struct KbEntry {
  text::Chunk chunk;
  text::EmbeddingVector vector;

  bool operator==(const KbEntry&) const = default;
};

struct KnowledgeBase {
  scene::ModalitySet modalities;
  std::size_t dim = 0;
  std::string fingerprint;
  std::vector<KbEntry> entries;

  bool operator==(const KnowledgeBase&) const = default;
};

struct RetrievalConfig {
  std::size_t k = 20;
  double top_p_percentile = 95.0;
  std::vector<std::string> section_priority = {std::string(scene::kCameraHeader),
                                               std::string(scene::kLidarHeader),
                                               std::string(scene::kGpsHeader)};
};

struct RetrievedHit {
  text::Chunk chunk;
  double score = 0.0;
  std::size_t rank = 0;
};

inline bool section_selected(std::string_view header, const scene::ModalitySet& modalities) {
  return (header == scene::kGpsHeader && modalities.gps) ||
         (header == scene::kLidarHeader && modalities.lidar) ||
         (header == scene::kCameraHeader && modalities.camera);
}

/// Chunks and embeds the selected sections of every document. Documents that
/// lack some selected section contribute the sections they have.
inline KnowledgeBase build_kb(const std::vector<scene::SceneDocument>& docs,
                              const scene::ModalitySet& modalities, const text::Embedder& embedder,
                              const text::ChunkConfig& chunking = {}) {
  if (modalities.empty()) {
    throw Error(ErrorCode::kInvalidInput, "knowledge_base", "modality set is empty");
  }
  const bool usable = std::any_of(docs.begin(), docs.end(), [&](const auto& doc) {
    return doc.modalities.contains(modalities);
  });
  if (!usable) {
    throw Error(ErrorCode::kNoUsableDocuments, "knowledge_base",
                "no document carries every section of " + modalities.name());
  }
  KnowledgeBase kb;
  kb.modalities = modalities;
  kb.dim = embedder.spec().dim;
  kb.fingerprint = embedder.spec().fingerprint();
  for (const auto& doc : docs) {
    for (const auto& section : scene::sections(doc)) {
      if (!section_selected(section.header, modalities)) continue;
      for (auto& chunk :
           text::chunk_text(section.text, chunking, doc.scene_id, section.header, section.offset)) {
        kb.entries.push_back(KbEntry{std::move(chunk), {}});
      }
    }
  }
  constexpr std::size_t kBatch = 64;
  for (std::size_t begin = 0; begin < kb.entries.size(); begin += kBatch) {
    const std::size_t end = std::min(kb.entries.size(), begin + kBatch);
    std::vector<std::string> texts;
    for (std::size_t i = begin; i < end; ++i) texts.push_back(kb.entries[i].chunk.text);
    auto vectors = embedder.embed_batch(texts);
    for (std::size_t i = begin; i < end; ++i) kb.entries[i].vector = std::move(vectors[i - begin]);
  }
  return kb;
}

/// Orders hits by score descending, then (source_id, start) ascending.
inline bool score_order(const RetrievedHit& a, const RetrievedHit& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.chunk.source_id != b.chunk.source_id) return a.chunk.source_id < b.chunk.source_id;
  return a.chunk.start < b.chunk.start;
}

inline void assign_ranks(std::vector<RetrievedHit>& hits) {
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
}

/// Exhaustive cosine scoring of every entry, truncated to config.k.
inline std::vector<RetrievedHit> semantic_search(const KnowledgeBase& kb,
                                                 const text::EmbeddingVector& query,
                                                 const RetrievalConfig& config = {}) {
  if (kb.entries.empty()) {
    throw Error(ErrorCode::kEmptyKnowledgeBase, "knowledge_base", "knowledge base has no entries");
  }
  if (query.dim() != kb.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "knowledge_base",
                fmt::format("query dim {} vs knowledge base dim {}", query.dim(), kb.dim));
  }
  if (config.k == 0) throw Error(ErrorCode::kInvalidInput, "knowledge_base", "k must be > 0");
  std::vector<RetrievedHit> hits;
  hits.reserve(kb.entries.size());
  for (const auto& entry : kb.entries) {
    hits.push_back(RetrievedHit{entry.chunk, text::cosine_similarity(query, entry.vector), 0});
  }
  const std::size_t keep = std::min(config.k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    score_order);
  hits.resize(keep);
  assign_ranks(hits);
  return hits;
}

/// Nearest-rank p-th percentile of the scores: the ceil(p/100 * n)-th
/// smallest value (1-based, at least the first).
inline double nearest_rank_threshold(std::vector<double> scores, double p) {
  std::sort(scores.begin(), scores.end());
  const auto n = static_cast<double>(scores.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, scores.size());
  return scores[rank - 1];
}

/// Keeps hits scoring at or above the p-th percentile. The top hit always
/// survives since the threshold never exceeds the maximum score.
inline std::vector<RetrievedHit> percentile_filter(const std::vector<RetrievedHit>& hits,
                                                   double p = 95.0) {
  if (!(p > 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::kInvalidInput, "knowledge_base",
                fmt::format("percentile {} outside (0, 100]", p));
  }
  if (hits.empty()) return {};
  std::vector<double> scores;
  scores.reserve(hits.size());
  for (const auto& h : hits) scores.push_back(h.score);
  const double threshold = nearest_rank_threshold(std::move(scores), p);
  std::vector<RetrievedHit> kept;
  for (const auto& h : hits) {
    if (h.score >= threshold) kept.push_back(h);
  }
  assign_ranks(kept);
  return kept;
}

/// Stable re-sort by section priority (unlisted sections last), then score.
inline std::vector<RetrievedHit> rank_by_section(std::vector<RetrievedHit> hits,
                                                 const RetrievalConfig& config = {}) {
  auto priority = [&config](const RetrievedHit& hit) {
    const auto& order = config.section_priority;
    const auto it = std::find(order.begin(), order.end(), hit.chunk.section);
    return static_cast<std::size_t>(it - order.begin());
  };
  std::stable_sort(hits.begin(), hits.end(), [&](const RetrievedHit& a, const RetrievedHit& b) {
    const std::size_t pa = priority(a);
    const std::size_t pb = priority(b);
    if (pa != pb) return pa < pb;
    return a.score > b.score;
  });
  assign_ranks(hits);
  return hits;
}

/// Search, percentile filter, then section ranking.
inline std::vector<RetrievedHit> retrieve(const KnowledgeBase& kb,
                                          const text::EmbeddingVector& query,
                                          const RetrievalConfig& config = {}) {
  return rank_by_section(percentile_filter(semantic_search(kb, query, config),
                                           config.top_p_percentile),
                         config);
}

inline constexpr std::string_view kKbMagic = "ENWARKB1";

namespace detail {

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::string& data() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    if (n > data_.size() - pos_) fail("unexpected end of data");
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  std::uint32_t u32() {
    const std::string_view b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint64_t u64() {
    const std::string_view b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::string str() { return std::string(bytes(u32())); }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const noexcept { return pos_ == data_.size(); }

  [[noreturn]] static void fail(const std::string& why) {
    throw Error(ErrorCode::kCorruptIndex, "knowledge_base", why);
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::string encode_kb(const KnowledgeBase& kb) {
  detail::Writer w;
  w.bytes(kKbMagic);
  w.str(kb.fingerprint);
  w.u32(static_cast<std::uint32_t>(kb.dim));
  w.u64(kb.entries.size());
  w.u8(static_cast<std::uint8_t>(kb.modalities.mask()));
  for (const auto& entry : kb.entries) {
    if (entry.vector.dim() != kb.dim) {
      throw Error(ErrorCode::kDimensionMismatch, "knowledge_base",
                  "entry vector dim differs from knowledge base dim");
    }
    w.str(entry.chunk.source_id);
    w.str(entry.chunk.section);
    w.u64(entry.chunk.start);
    w.u64(entry.chunk.end);
    w.str(entry.chunk.text);
    for (float v : entry.vector.values) w.f32(v);
  }
  w.u32(detail::crc32_of(w.data()));
  return std::move(w.data());
}

inline KnowledgeBase decode_kb(std::string_view data) {
  if (data.size() < kKbMagic.size() + 4) detail::Reader::fail("file too short");
  if (data.substr(0, kKbMagic.size()) != kKbMagic) detail::Reader::fail("bad magic");
  const std::string_view body = data.substr(0, data.size() - 4);
  detail::Reader trailer(data.substr(data.size() - 4));
  if (trailer.u32() != detail::crc32_of(body)) detail::Reader::fail("checksum mismatch");

  detail::Reader r(body.substr(kKbMagic.size()));
  KnowledgeBase kb;
  kb.fingerprint = r.str();
  kb.dim = r.u32();
  const std::uint64_t count = r.u64();
  kb.modalities = scene::ModalitySet::from_mask(r.u8());
  // Each entry needs at least its fixed-size fields and vector.
  if (count > body.size() / (28 + 4 * std::max<std::size_t>(kb.dim, 1))) {
    detail::Reader::fail("entry count exceeds file size");
  }
  kb.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    KbEntry entry;
    entry.chunk.source_id = r.str();
    entry.chunk.section = r.str();
    entry.chunk.start = r.u64();
    entry.chunk.end = r.u64();
    entry.chunk.text = r.str();
    entry.vector.values.resize(kb.dim);
    for (auto& v : entry.vector.values) v = r.f32();
    kb.entries.push_back(std::move(entry));
  }
  if (!r.done()) detail::Reader::fail("trailing bytes after entries");
  return kb;
}

inline void save_kb(const KnowledgeBase& kb, const std::string& path) {
  const std::string bytes = encode_kb(kb);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "knowledge_base", "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "knowledge_base", "short write to " + path);
}

/// Loads a knowledge base; when `expected` is given, its dim and fingerprint
/// must match the file.
inline KnowledgeBase load_kb(const std::string& path,
                             const std::optional<text::EmbedderSpec>& expected = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "knowledge_base", "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  KnowledgeBase kb = decode_kb(buffer.str());
  if (expected && (expected->dim != kb.dim || expected->fingerprint() != kb.fingerprint)) {
    throw Error(ErrorCode::kFingerprintMismatch, "knowledge_base",
                fmt::format("{} was built with '{}' but the embedder is '{}'", path,
                            kb.fingerprint, expected->fingerprint()));
  }
  return kb;
}

}  // namespace enwar::kb
