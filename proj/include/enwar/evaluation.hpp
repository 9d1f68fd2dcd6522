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
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "enwar/error.hpp"
#include "enwar/http_client.hpp"
#include "enwar/textproc.hpp"

namespace enwar::eval {

inline constexpr double kSupportThreshold = 0.6;

struct EvalSample {
  std::string scene_id;
  std::string generated_answer;
  std::string ground_truth;
  std::string extracted_prompt;
  std::vector<std::string> retrieved_contexts;
};

struct EvalWeights {
  double omega = 0.25;
};

struct ClaimSet {
  std::vector<std::string> claims;
  std::size_t supported_count = 0;
  std::size_t total_count = 0;
};

/// Lowercased ASCII alphanumeric runs.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace detail {

inline std::unordered_map<std::string, std::size_t> counts(const std::vector<std::string>& tokens) {
  std::unordered_map<std::string, std::size_t> out;
  for (const auto& t : tokens) ++out[t];
  return out;
}

/// Size of the multiset intersection.
inline std::size_t overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto cb = counts(b);
  std::size_t common = 0;
  for (const auto& [token, n] : counts(a)) {
    const auto it = cb.find(token);
    if (it != cb.end()) common += std::min(n, it->second);
  }
  return common;
}

}  // namespace detail

inline double token_f1(std::string_view answer, std::string_view truth) {
  const auto a = tokenize(answer);
  const auto t = tokenize(truth);
  if (a.empty() || t.empty()) return 0.0;
  const auto common = static_cast<double>(detail::overlap(a, t));
  const double precision = common / static_cast<double>(a.size());
  const double recall = common / static_cast<double>(t.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

/// Fraction of the claim's tokens (as a multiset) found in the context.
inline double support_score(std::string_view claim, std::string_view context) {
  const auto c = tokenize(claim);
  if (c.empty()) return 0.0;
  return static_cast<double>(detail::overlap(c, tokenize(context))) / static_cast<double>(c.size());
}

/// Decides whether a statement can be inferred from a context.
class SupportJudge {
 public:
  virtual ~SupportJudge() = default;
  virtual bool supported(std::string_view claim, std::string_view context) const = 0;
  virtual std::string name() const = 0;
};

class TokenRecallJudge : public SupportJudge {
 public:
  explicit TokenRecallJudge(double threshold = kSupportThreshold) : threshold_(threshold) {}
  bool supported(std::string_view claim, std::string_view context) const override {
    return support_score(claim, context) >= threshold_;
  }
  std::string name() const override { return fmt::format("token-recall(tau={})", threshold_); }

 private:
  double threshold_;
};

/// Asks a chat model for a yes/no verdict per (claim, context) pair.
class LlmJudge : public SupportJudge {
 public:
  explicit LlmJudge(http::RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}

  bool supported(std::string_view claim, std::string_view context) const override {
    http::ChatRequest request;
    request.temperature = 0.0;
    request.top_p = 1.0;
    request.max_tokens = 4;
    request.messages = {
        {"system",
         "Answer strictly 'yes' or 'no': can the statement be inferred from the context?"},
        {"user", fmt::format("Context:\n{}\n\nStatement:\n{}", context, claim)}};
    const auto result = client_.chat(request);
    const auto tokens = tokenize(result.text);
    return !tokens.empty() && tokens.front() == "yes";
  }
  std::string name() const override { return "llm-judge:" + client_.endpoint().model; }

 private:
  http::OpenAiClient client_;
};

namespace detail {

inline bool supported_by_any(const SupportJudge& judge, std::string_view claim,
                             const std::vector<std::string>& contexts) {
  return std::any_of(contexts.begin(), contexts.end(),
                     [&](const std::string& ctx) { return judge.supported(claim, ctx); });
}

}  // namespace detail

/// One claim per sentence; supported_count is left at zero.
inline ClaimSet extract_claims(std::string_view answer) {
  ClaimSet set;
  set.claims = text::split_sentences(answer);
  set.total_count = set.claims.size();
  return set;
}

struct FaithfulnessResult {
  double score = 1.0;
  ClaimSet claims;
  bool vacuous = false;
};

inline FaithfulnessResult faithfulness_detail(std::string_view answer,
                                              const std::vector<std::string>& contexts,
                                              const SupportJudge& judge) {
  FaithfulnessResult result;
  result.claims = extract_claims(answer);
  for (const auto& claim : result.claims.claims) {
    if (detail::supported_by_any(judge, claim, contexts)) ++result.claims.supported_count;
  }
  if (result.claims.total_count == 0) {
    spdlog::debug("[evaluation] answer has no claims; faithfulness is vacuously 1.0");
    result.vacuous = true;
    result.score = 1.0;
    return result;
  }
  result.score = static_cast<double>(result.claims.supported_count) /
                 static_cast<double>(result.claims.total_count);
  return result;
}

inline double faithfulness(std::string_view answer, const std::vector<std::string>& contexts) {
  return faithfulness_detail(answer, contexts, TokenRecallJudge{}).score;
}

/// Share of ground-truth sentences attributable to some retrieved context.
inline double context_recall(std::string_view ground_truth, const std::vector<std::string>& contexts,
                             const SupportJudge& judge) {
  const auto sentences = text::split_sentences(ground_truth);
  if (sentences.empty() || contexts.empty()) return 0.0;
  std::size_t attributed = 0;
  for (const auto& s : sentences) {
    if (detail::supported_by_any(judge, s, contexts)) ++attributed;
  }
  return static_cast<double>(attributed) / static_cast<double>(sentences.size());
}

inline double context_recall(const EvalSample& sample) {
  return context_recall(sample.ground_truth, sample.retrieved_contexts, TokenRecallJudge{});
}

/// omega * cosine + (1 - omega) * F1.
inline double correctness(double cosine, double f1, const EvalWeights& weights = {}) {
  if (!(weights.omega >= 0.0 && weights.omega <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "evaluation", "omega must lie in [0, 1]");
  }
  // f1 + omega * (cosine - f1): exact at both endpoints and monotone in omega.
  return std::lerp(f1, cosine, weights.omega);
}

inline double correctness(const EvalSample& sample, const EvalWeights& weights,
                          const text::Embedder& embedder) {
  const double cosine = text::cosine_similarity(embedder.embed(sample.generated_answer),
                                                embedder.embed(sample.ground_truth));
  return correctness(cosine, token_f1(sample.generated_answer, sample.ground_truth), weights);
}

using VectorPair = std::pair<text::EmbeddingVector, text::EmbeddingVector>;

/// Mean cosine over (prompt, ground truth) embedding pairs.
inline double answer_relevancy(std::span<const VectorPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyEvalSet, "evaluation", "no samples");
  double sum = 0.0;
  for (const auto& [prompt, truth] : pairs) sum += text::cosine_similarity(prompt, truth);
  return sum / static_cast<double>(pairs.size());
}

inline double answer_relevancy(const std::vector<EvalSample>& samples, const text::Embedder& embedder) {
  std::vector<VectorPair> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) {
    pairs.emplace_back(embedder.embed(s.extracted_prompt), embedder.embed(s.ground_truth));
  }
  return answer_relevancy(pairs);
}

struct SampleScores {
  std::string scene_id;
  double answer_relevancy_raw = 0.0;
  double context_recall = 0.0;
  double correctness = 0.0;
  double correctness_cosine = 0.0;
  double correctness_f1 = 0.0;
  double faithfulness = 0.0;
  std::size_t claims_total = 0;
  std::size_t claims_supported = 0;
  bool faithfulness_vacuous = false;
};

struct Aggregates {
  double answer_relevancy_raw = 0.0;
  double answer_relevancy = 0.0;  // clamped to [0, 1]
  double context_recall = 0.0;
  double correctness = 0.0;
  double faithfulness = 0.0;

  bool any_nan() const {
    return std::isnan(answer_relevancy_raw) || std::isnan(context_recall) ||
           std::isnan(correctness) || std::isnan(faithfulness);
  }
};

struct EvalReport {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<SampleScores> samples;
  Aggregates aggregate;
};

struct EvalConfig {
  const SupportJudge* judge = nullptr;  // token-recall judge when null
  nlohmann::json metadata = nlohmann::json::object();
};

inline SampleScores score_sample(const EvalSample& sample, const EvalWeights& weights,
                                 const text::Embedder& embedder, const SupportJudge& judge) {
  if (sample.ground_truth.empty()) {
    throw Error(ErrorCode::kInvalidInput, "evaluation",
                "sample " + sample.scene_id + " has an empty ground truth");
  }
  SampleScores s;
  s.scene_id = sample.scene_id;
  const auto truth = embedder.embed(sample.ground_truth);
  s.answer_relevancy_raw = text::cosine_similarity(embedder.embed(sample.extracted_prompt), truth);
  s.context_recall = context_recall(sample.ground_truth, sample.retrieved_contexts, judge);
  s.correctness_cosine = text::cosine_similarity(embedder.embed(sample.generated_answer), truth);
  s.correctness_f1 = token_f1(sample.generated_answer, sample.ground_truth);
  s.correctness = correctness(s.correctness_cosine, s.correctness_f1, weights);
  const auto faith = faithfulness_detail(sample.generated_answer, sample.retrieved_contexts, judge);
  s.faithfulness = faith.score;
  s.claims_total = faith.claims.total_count;
  s.claims_supported = faith.claims.supported_count;
  s.faithfulness_vacuous = faith.vacuous;
  return s;
}

inline EvalReport evaluate_run(const std::vector<EvalSample>& samples, const EvalWeights& weights,
                               const text::Embedder& embedder, const EvalConfig& config = {}) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyEvalSet, "evaluation", "no samples to evaluate");
  const TokenRecallJudge default_judge;
  const SupportJudge& judge = config.judge != nullptr ? *config.judge : default_judge;

  EvalReport report;
  report.metadata = config.metadata;
  report.metadata["judge"] = judge.name();
  report.metadata["embedder"] = embedder.spec().fingerprint();
  report.metadata["omega"] = weights.omega;
  report.metadata["sample_count"] = samples.size();
  for (const auto& sample : samples) {
    report.samples.push_back(score_sample(sample, weights, embedder, judge));
  }
  const auto n = static_cast<double>(report.samples.size());
  Aggregates& agg = report.aggregate;
  std::size_t vacuous = 0;
  for (const auto& s : report.samples) {
    agg.answer_relevancy_raw += s.answer_relevancy_raw;
    agg.context_recall += s.context_recall;
    agg.correctness += s.correctness;
    agg.faithfulness += s.faithfulness;
    if (s.faithfulness_vacuous) ++vacuous;
  }
  agg.answer_relevancy_raw /= n;
  agg.context_recall /= n;
  agg.correctness /= n;
  agg.faithfulness /= n;
  agg.answer_relevancy = std::clamp(agg.answer_relevancy_raw, 0.0, 1.0);
  report.metadata["vacuous_faithfulness_samples"] = vacuous;
  return report;
}

inline nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"scene_id", s.scene_id},
                       {"answer_relevancy_raw", s.answer_relevancy_raw},
                       {"answer_relevancy", std::clamp(s.answer_relevancy_raw, 0.0, 1.0)},
                       {"context_recall", s.context_recall},
                       {"correctness", s.correctness},
                       {"correctness_cosine", s.correctness_cosine},
                       {"correctness_f1", s.correctness_f1},
                       {"faithfulness", s.faithfulness},
                       {"claims_total", s.claims_total},
                       {"claims_supported", s.claims_supported},
                       {"faithfulness_vacuous", s.faithfulness_vacuous}});
  }
  const auto& a = report.aggregate;
  return {{"metadata", report.metadata},
          {"samples", samples},
          {"aggregate",
           {{"answer_relevancy_raw", a.answer_relevancy_raw},
            {"answer_relevancy", a.answer_relevancy},
            {"context_recall", a.context_recall},
            {"correctness", a.correctness},
            {"faithfulness", a.faithfulness}}}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport report;
  try {
    report.metadata = j.at("metadata");
    for (const auto& s : j.at("samples")) {
      SampleScores scores;
      scores.scene_id = s.at("scene_id").get<std::string>();
      scores.answer_relevancy_raw = s.at("answer_relevancy_raw").get<double>();
      scores.context_recall = s.at("context_recall").get<double>();
      scores.correctness = s.at("correctness").get<double>();
      scores.correctness_cosine = s.value("correctness_cosine", 0.0);
      scores.correctness_f1 = s.value("correctness_f1", 0.0);
      scores.faithfulness = s.at("faithfulness").get<double>();
      scores.claims_total = s.value("claims_total", std::size_t{0});
      scores.claims_supported = s.value("claims_supported", std::size_t{0});
      scores.faithfulness_vacuous = s.value("faithfulness_vacuous", false);
      report.samples.push_back(std::move(scores));
    }
    const auto& a = j.at("aggregate");
    report.aggregate.answer_relevancy_raw = a.at("answer_relevancy_raw").get<double>();
    report.aggregate.answer_relevancy = a.at("answer_relevancy").get<double>();
    report.aggregate.context_recall = a.at("context_recall").get<double>();
    report.aggregate.correctness = a.at("correctness").get<double>();
    report.aggregate.faithfulness = a.at("faithfulness").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, "evaluation", std::string("bad report: ") + e.what());
  }
  return report;
}

namespace detail {

inline std::string percent(double v) { return fmt::format("{:.1f} %", 100.0 * v); }

}  // namespace detail

/// Fixed-width per-sample table with a closing mean row.
inline std::string render_table(const EvalReport& report) {
  std::string out = fmt::format("{:<16}{:>12}{:>16}{:>14}{:>15}\n", "scene", "Relevancy",
                                "Context recall", "Correctness", "Faithfulness");
  for (const auto& s : report.samples) {
    out += fmt::format("{:<16}{:>12}{:>16}{:>14}{:>15}\n", s.scene_id,
                       detail::percent(std::clamp(s.answer_relevancy_raw, 0.0, 1.0)),
                       detail::percent(s.context_recall), detail::percent(s.correctness),
                       detail::percent(s.faithfulness));
  }
  const auto& a = report.aggregate;
  out += fmt::format("{:<16}{:>12}{:>16}{:>14}{:>15}\n", "MEAN", detail::percent(a.answer_relevancy),
                     detail::percent(a.context_recall), detail::percent(a.correctness),
                     detail::percent(a.faithfulness));
  return out;
}

/// One row per modality combination, one column per KPI.
inline std::string render_summary(const std::vector<std::pair<std::string, Aggregates>>& rows) {
  std::string out = fmt::format("{:<16}{:>12}{:>16}{:>14}{:>15}\n", "modalities", "Relevancy",
                                "Context recall", "Correctness", "Faithfulness");
  for (const auto& [name, a] : rows) {
    out += fmt::format("{:<16}{:>12}{:>16}{:>14}{:>15}\n", name, detail::percent(a.answer_relevancy),
                       detail::percent(a.context_recall), detail::percent(a.correctness),
                       detail::percent(a.faithfulness));
  }
  return out;
}

inline EvalSample sample_from_json(const nlohmann::json& j) {
  try {
    EvalSample s;
    s.scene_id = j.at("scene_id").get<std::string>();
    s.generated_answer = j.at("answer").get<std::string>();
    s.ground_truth = j.contains("ground_truth") && !j.at("ground_truth").is_null()
                         ? j.at("ground_truth").get<std::string>()
                         : std::string();
    s.extracted_prompt = j.at("prompt").get<std::string>();
    s.retrieved_contexts = j.at("contexts").get<std::vector<std::string>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, "evaluation", std::string("bad eval record: ") + e.what());
  }
}

/// Line-delimited records with scene_id, answer, ground_truth, prompt, contexts.
inline std::vector<EvalSample> load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "evaluation", "cannot open " + path);
  std::vector<EvalSample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kInvalidInput, "evaluation", std::string("bad JSON line: ") + e.what());
    }
  }
  return samples;
}

}  // namespace enwar::eval
