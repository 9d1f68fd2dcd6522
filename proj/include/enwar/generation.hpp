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

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "enwar/error.hpp"
#include "enwar/http_client.hpp"
#include "enwar/knowledge_base.hpp"
#include "enwar/scene.hpp"
#include "enwar/textproc.hpp"

namespace enwar::gen {

inline constexpr std::string_view kContextHeader = "## RETRIEVED CONTEXT";
inline constexpr std::string_view kNoContext = "no retrieved context";
inline constexpr std::size_t kDefaultContextBudget = 24'000;

inline constexpr std::string_view kTaskInstructions =
    "You are given information extracted from the GPS, LiDAR and camera sensors of a vehicular "
    "wireless scene. Unit 1 is the receiving vehicle and unit 2 is the transmitting vehicle. "
    "Complete the following tasks using only the extracted information and the retrieved "
    "context. First, analyze the environment and describe the positions of both units and of "
    "every detected entity. Second, detect potential blockages between unit 1 and unit 2. "
    "Third, assess whether line-of-sight exists between unit 1 and unit 2.";

inline constexpr std::string_view kSystemMessage =
    "You are an environment-aware assistant that interprets multi-modal sensing data for "
    "wireless network management. Ground every statement in the provided information.";

inline constexpr std::string_view kStubPreamble = "## GROUNDED ASSESSMENT";

struct PromptBundle {
  std::string extracted_info;
  std::string task_instructions;
  std::vector<std::string> retrieved_contexts;
  std::string assembled;
  std::size_t dropped_contexts = 0;
};

struct GenerationParams {
  double sampling_top_p = 0.95;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::string model = "stub";
  std::optional<int> seed = 0;
};

struct Answer {
  std::string text;
  std::string model;
  std::optional<long> input_tokens;
  std::optional<long> output_tokens;
  double latency_ms = 0.0;
};

struct QueryInput {
  scene::SceneDocument document;
  std::string extracted_text;
  text::EmbeddingVector vector;
};

/// Mirrors the knowledge-base side: synthesize the scene, render its
/// extracted information, embed it.
inline QueryInput preprocess_query(const scene::SceneRecord& record,
                                   const scene::ModalitySet& modalities,
                                   const text::Embedder& embedder,
                                   const scene::SynthesisOptions& options = {}) {
  QueryInput query;
  query.document = scene::synthesize_scene(record, modalities, options);
  query.extracted_text = scene::render_extracted_info(query.document);
  query.vector = embedder.embed(query.extracted_text);
  return query;
}

namespace detail {

inline std::string section_label(std::string_view header) {
  if (header.rfind("## ", 0) == 0) header.remove_prefix(3);
  return std::string(header);
}

inline std::string layout(std::string_view instructions, std::string_view extracted,
                          const std::vector<kb::RetrievedHit>& hits, std::size_t count) {
  std::string out;
  out += "## INSTRUCTIONS\n";
  out += instructions;
  out += "\n\n## EXTRACTED INFORMATION\n";
  out += extracted;
  if (!extracted.empty() && extracted.back() != '\n') out += '\n';
  out += '\n';
  out += kContextHeader;
  out += '\n';
  if (count == 0) {
    out += kNoContext;
    out += '\n';
  }
  for (std::size_t i = 0; i < count; ++i) {
    const auto& hit = hits[i];
    out += fmt::format("[{}] scene {}, {} section, score {:.4f}\n", i + 1, hit.chunk.source_id,
                       section_label(hit.chunk.section), hit.score);
    out += hit.chunk.text;
    if (hit.chunk.text.empty() || hit.chunk.text.back() != '\n') out += '\n';
    if (i + 1 < count) out += '\n';
  }
  return out;
}

}  // namespace detail

/// Instructions, extracted information, then contexts in rank order. When the
/// layout exceeds `budget` characters, lowest-ranked contexts are dropped
/// first; if nothing is left to drop the prompt is cut at the budget.
inline PromptBundle assemble_prompt(std::string extracted, const std::vector<kb::RetrievedHit>& hits,
                                    std::string_view instructions = kTaskInstructions,
                                    std::size_t budget = kDefaultContextBudget) {
  std::vector<kb::RetrievedHit> ordered = hits;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.rank < b.rank; });

  PromptBundle bundle;
  bundle.extracted_info = std::move(extracted);
  bundle.task_instructions = std::string(instructions);
  std::size_t count = ordered.size();
  bundle.assembled = detail::layout(instructions, bundle.extracted_info, ordered, count);
  while (bundle.assembled.size() > budget && count > 0) {
    --count;
    bundle.assembled = detail::layout(instructions, bundle.extracted_info, ordered, count);
  }
  bundle.dropped_contexts = ordered.size() - count;
  if (bundle.dropped_contexts > 0) {
    spdlog::warn("[generation] prompt budget {} reached; dropped {} lowest-ranked context(s)",
                 budget, bundle.dropped_contexts);
  }
  if (bundle.assembled.size() > budget) {
    spdlog::warn("[generation] prompt without context exceeds budget {}; truncating", budget);
    bundle.assembled.resize(budget);
  }
  for (std::size_t i = 0; i < count; ++i) bundle.retrieved_contexts.push_back(ordered[i].chunk.text);
  return bundle;
}

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual Answer complete(const PromptBundle& bundle, const GenerationParams& params) const = 0;
};

/// Deterministic stand-in: a header line followed by the first sentence of
/// each retrieved context, so every claim is copied from the context.
class StubBackend : public ChatBackend {
 public:
  Answer complete(const PromptBundle& bundle, const GenerationParams& params) const override {
    Answer answer;
    answer.model = params.model.empty() ? "stub" : params.model;
    answer.text = std::string(kStubPreamble) + "\n";
    for (const auto& context : bundle.retrieved_contexts) {
      const auto sentences = text::split_sentences(context);
      if (sentences.empty()) continue;
      std::string sentence = sentences.front();
      // A chunk may end mid-sentence; terminate it so claims stay separable.
      const char last = sentence.back();
      if (last != '.' && last != '!' && last != '?') sentence += '.';
      answer.text += sentence + "\n";
    }
    return answer;
  }
};

class RemoteChatBackend : public ChatBackend {
 public:
  explicit RemoteChatBackend(http::RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}

  Answer complete(const PromptBundle& bundle, const GenerationParams& params) const override {
    http::ChatRequest request;
    request.messages = {{"system", std::string(kSystemMessage)}, {"user", bundle.assembled}};
    request.top_p = params.sampling_top_p;
    request.temperature = params.temperature;
    request.max_tokens = params.max_output_tokens;
    request.seed = params.seed;
    const http::ChatResult result = client_.chat(request);
    if (result.text.empty()) {
      throw Error(ErrorCode::kBackendRejected, "generation", "backend returned an empty answer");
    }
    Answer answer;
    answer.text = result.text;
    answer.model = result.model;
    answer.input_tokens = result.prompt_tokens;
    answer.output_tokens = result.completion_tokens;
    return answer;
  }

 private:
  http::OpenAiClient client_;
};

inline Answer generate(const PromptBundle& bundle, const GenerationParams& params,
                       const ChatBackend& backend) {
  if (!(params.sampling_top_p > 0.0 && params.sampling_top_p <= 1.0) || params.temperature < 0.0) {
    throw Error(ErrorCode::kInvalidInput, "generation", "top_p must be in (0, 1], temperature >= 0");
  }
  const auto start = std::chrono::steady_clock::now();
  Answer answer = backend.complete(bundle, params);
  answer.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return answer;
}

}  // namespace enwar::gen
