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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "enwar/error.hpp"
#include "enwar/http_client.hpp"

namespace enwar::text {

struct ChunkConfig {
  std::size_t chunk_size = 1024;
  std::size_t overlap = 100;

  std::size_t stride() const noexcept { return chunk_size - overlap; }
};

/// A character span of a source document. `start`/`end` are offsets into the
/// source the chunk was cut from.
struct Chunk {
  std::string text;
  std::string source_id;
  std::string section;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Chunk&) const = default;
};

/// Fixed-stride character chunking. Chunks start at multiples of
/// chunk_size - overlap and the last one ends at the end of the text.
/// `base_offset` shifts the reported ranges, e.g. when `text` is one section
/// of a larger document.
inline std::vector<Chunk> chunk_text(std::string_view text, const ChunkConfig& config = {},
                                     std::string_view source_id = {},
                                     std::string_view section = {},
                                     std::size_t base_offset = 0) {
  if (config.chunk_size == 0 || config.overlap >= config.chunk_size) {
    throw Error(ErrorCode::kInvalidChunkConfig, "textproc",
                fmt::format("overlap {} must be smaller than chunk size {}", config.overlap,
                            config.chunk_size));
  }
  if (text.empty()) throw Error(ErrorCode::kEmptyText, "textproc", "cannot chunk empty text");

  std::vector<Chunk> chunks;
  for (std::size_t start = 0;; start += config.stride()) {
    const std::size_t end = std::min(start + config.chunk_size, text.size());
    chunks.push_back(Chunk{std::string(text.substr(start, end - start)), std::string(source_id),
                           std::string(section), base_offset + start, base_offset + end});
    if (end == text.size()) break;
  }
  return chunks;
}

/// Number of chunks chunk_text produces for a text of `length` characters.
inline std::size_t chunk_count(std::size_t length, const ChunkConfig& config = {}) {
  if (length == 0) return 0;
  if (length <= config.chunk_size) return 1;
  return 1 + (length - config.chunk_size + config.stride() - 1) / config.stride();
}

/// Sentence segmentation shared by claim extraction, context recall and the
/// stub generator. Markdown header lines ('#'-prefixed) are structure, not
/// prose, and are skipped. A sentence ends at '.', '!' or '?' followed by
/// whitespace or the end of text, so decimals such as "12.3" never split.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::string prose;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    const std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] != '#') {
      prose.append(line);
      prose.push_back('\n');
    }
    pos = end + 1;
  }

  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::vector<std::string> sentences;
  auto flush = [&](std::size_t begin, std::size_t end) {
    while (begin < end && is_space(prose[begin])) ++begin;
    while (end > begin && is_space(prose[end - 1])) --end;
    if (end > begin) sentences.emplace_back(prose.substr(begin, end - begin));
  };
  std::size_t begin = 0;
  for (std::size_t i = 0; i < prose.size(); ++i) {
    const char c = prose[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < prose.size() && !is_space(prose[i + 1])) continue;
    flush(begin, i + 1);
    begin = i + 1;
  }
  flush(begin, prose.size());
  return sentences;
}

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool is_zero() const noexcept {
    return std::all_of(values.begin(), values.end(), [](float v) { return v == 0.0F; });
  }

  bool operator==(const EmbeddingVector&) const = default;
};

enum class EmbedderKind { kLocal, kRemote };

struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::kLocal;
  std::size_t dim = 256;
  std::size_t max_tokens = 8192;
  http::RemoteEndpoint remote;

  /// Stable identity persisted with every knowledge base.
  std::string fingerprint() const {
    if (kind == EmbedderKind::kLocal) return fmt::format("local-fnv1a-char3/dim={}", dim);
    return fmt::format("remote:{}/dim={}", remote.model, dim);
  }
};

inline double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "textproc",
                fmt::format("cosine over dims {} and {}", u.size(), v.size()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    nu += static_cast<double>(u[i]) * static_cast<double>(u[i]);
    nv += static_cast<double>(v[i]) * static_cast<double>(v[i]);
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine_similarity(std::span<const float>(u.values), std::span<const float>(v.values));
}

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = kFnvOffset) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= kFnvPrime;
  }
  return hash;
}

inline EmbeddingVector normalized(const std::vector<double>& raw) {
  double norm = 0.0;
  for (double v : raw) norm += v * v;
  norm = std::sqrt(norm);
  EmbeddingVector out;
  out.values.resize(raw.size());
  if (norm == 0.0) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out.values[i] = static_cast<float>(raw[i] / norm);
  return out;
}

/// Feature-hashed character trigrams of the ASCII-lowercased text. Texts of
/// one or two characters hash as a single gram; the empty text maps to the
/// zero vector.
inline EmbeddingVector embed_local(std::string_view text, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidInput, "textproc", "embedding dim must be > 0");
  std::string lowered(text);
  for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::vector<double> counts(dim, 0.0);
  if (lowered.size() < 3) {
    if (!lowered.empty()) counts[fnv1a64(lowered) % dim] += 1.0;
  } else {
    const std::string_view view(lowered);
    for (std::size_t i = 0; i + 3 <= view.size(); ++i) counts[fnv1a64(view.substr(i, 3)) % dim] += 1.0;
  }
  return normalized(counts);
}

class Embedder {
 public:
  explicit Embedder(EmbedderSpec spec) : spec_(std::move(spec)) {
    if (spec_.kind == EmbedderKind::kRemote) {
      client_ = std::make_shared<http::OpenAiClient>(spec_.remote);
    }
  }

  const EmbedderSpec& spec() const noexcept { return spec_; }

  EmbeddingVector embed(std::string_view text) const {
    if (spec_.kind == EmbedderKind::kLocal) return embed_local(text, spec_.dim);
    return embed_batch({std::string(text)}).front();
  }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    if (spec_.kind == EmbedderKind::kLocal) {
      for (const auto& t : texts) out.push_back(embed_local(t, spec_.dim));
      return out;
    }
    // Token counts are estimated at four characters per token.
    const std::size_t max_chars = spec_.max_tokens * 4;
    std::vector<std::string> inputs;
    std::vector<std::size_t> nonempty;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (texts[i].empty()) continue;
      std::string input = texts[i];
      if (input.size() > max_chars) {
        spdlog::warn("[textproc] truncating embedder input from {} to {} characters",
                     input.size(), max_chars);
        input.resize(max_chars);
      }
      inputs.push_back(std::move(input));
      nonempty.push_back(i);
    }
    out.assign(texts.size(), EmbeddingVector{std::vector<float>(spec_.dim, 0.0F)});
    if (inputs.empty()) return out;
    const auto vectors = client_->embeddings(inputs);
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      if (vectors[j].size() != spec_.dim) {
        throw Error(ErrorCode::kDimensionMismatch, "textproc",
                    fmt::format("remote embedder returned dim {}, expected {}", vectors[j].size(),
                                spec_.dim));
      }
      out[nonempty[j]] = normalized(vectors[j]);
    }
    return out;
  }

 private:
  EmbedderSpec spec_;
  std::shared_ptr<http::OpenAiClient> client_;
};

inline EmbeddingVector embed(std::string_view text, const EmbedderSpec& spec) {
  return Embedder(spec).embed(text);
}

}  // namespace enwar::text
