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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "enwar/error.hpp"
#include "enwar/evaluation.hpp"
#include "enwar/generation.hpp"
#include "enwar/knowledge_base.hpp"
#include "enwar/scene.hpp"
#include "enwar/textproc.hpp"

namespace enwar::cli {

namespace fs = std::filesystem;

inline constexpr std::string_view kDocumentsFile = "documents.jsonl";
inline constexpr std::string_view kKbExtension = ".kb";

/// Fully resolved settings for one command invocation.
struct RunConfig {
  std::string manifest;
  std::string output_dir = "out";
  std::optional<scene::ModalitySet> modalities;
  text::EmbedderSpec embedder;
  text::ChunkConfig chunking;
  kb::RetrievalConfig retrieval;
  gen::GenerationParams generation;
  std::size_t context_budget = gen::kDefaultContextBudget;
  std::string backend = "stub";
  http::RemoteEndpoint llm;
  std::optional<http::RemoteEndpoint> captioner;
  eval::EvalWeights weights;
  std::string judge = "token";
  bool verbose = false;

  /// Settings only; paths and credentials are left out so that the same
  /// semantic configuration always fingerprints identically.
  nlohmann::json semantic_json() const {
    nlohmann::json j;
    j["modalities"] = modalities ? modalities->name() : "auto";
    j["embedder"] = {{"kind", embedder.kind == text::EmbedderKind::kLocal ? "local" : "remote"},
                     {"dim", embedder.dim},
                     {"max_tokens", embedder.max_tokens},
                     {"fingerprint", embedder.fingerprint()}};
    if (embedder.kind == text::EmbedderKind::kRemote) {
      j["embedder"]["url"] = embedder.remote.url;
      j["embedder"]["model"] = embedder.remote.model;
    }
    j["chunking"] = {{"chunk_size", chunking.chunk_size}, {"overlap", chunking.overlap}};
    j["retrieval"] = {{"k", retrieval.k},
                      {"top_p_percentile", retrieval.top_p_percentile},
                      {"section_priority", retrieval.section_priority}};
    j["generation"] = {{"backend", backend},
                       {"top_p", generation.sampling_top_p},
                       {"temperature", generation.temperature},
                       {"max_output_tokens", generation.max_output_tokens},
                       {"model", generation.model},
                       {"context_budget", context_budget}};
    j["generation"]["seed"] = generation.seed ? nlohmann::json(*generation.seed) : nlohmann::json();
    if (backend == "remote") j["generation"]["url"] = llm.url;
    j["evaluation"] = {{"omega", weights.omega}, {"judge", judge}};
    j["captioner"] = captioner ? nlohmann::json(captioner->url) : nlohmann::json();
    return j;
  }

  std::string fingerprint() const {
    return fmt::format("{:016x}", text::fnv1a64(semantic_json().dump()));
  }

  /// Everything, with credentials redacted.
  nlohmann::json echo() const {
    nlohmann::json j = semantic_json();
    j["manifest"] = manifest;
    j["output_dir"] = output_dir;
    j["fingerprint"] = fingerprint();
    j["credentials"] = {{"embedder_key_set", !embedder.remote.api_key.empty()},
                        {"llm_key_set", !llm.api_key.empty()}};
    return j;
  }
};

/// Command-line values; unset fields fall through to env, file, defaults.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> manifest;
  std::optional<std::string> output_dir;
  std::optional<std::string> modalities;
  std::optional<std::string> embedder;
  std::optional<std::string> backend;
  std::optional<std::string> judge;
  bool verbose = false;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

namespace detail {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

inline text::EmbedderKind parse_embedder_kind(const std::string& kind) {
  if (kind == "local") return text::EmbedderKind::kLocal;
  if (kind == "remote") return text::EmbedderKind::kRemote;
  throw Error(ErrorCode::kInvalidInput, "cli", "embedder must be local or remote, got " + kind);
}

inline void apply_file(RunConfig& cfg, const nlohmann::json& j) {
  take(j, "manifest", cfg.manifest);
  take(j, "output_dir", cfg.output_dir);
  if (j.contains("modalities") && j.at("modalities").is_string()) {
    const auto m = j.at("modalities").get<std::string>();
    if (m != "auto") cfg.modalities = scene::ModalitySet::parse(m);
  }
  if (j.contains("embedder")) {
    const auto& e = j.at("embedder");
    if (e.contains("kind")) cfg.embedder.kind = parse_embedder_kind(e.at("kind").get<std::string>());
    take(e, "dim", cfg.embedder.dim);
    take(e, "max_tokens", cfg.embedder.max_tokens);
    take(e, "url", cfg.embedder.remote.url);
    take(e, "key", cfg.embedder.remote.api_key);
    take(e, "model", cfg.embedder.remote.model);
    take(e, "max_in_flight", cfg.embedder.remote.max_in_flight);
  }
  if (j.contains("chunking")) {
    take(j.at("chunking"), "chunk_size", cfg.chunking.chunk_size);
    take(j.at("chunking"), "overlap", cfg.chunking.overlap);
  }
  if (j.contains("retrieval")) {
    const auto& r = j.at("retrieval");
    take(r, "k", cfg.retrieval.k);
    take(r, "top_p_percentile", cfg.retrieval.top_p_percentile);
    take(r, "section_priority", cfg.retrieval.section_priority);
  }
  if (j.contains("generation")) {
    const auto& g = j.at("generation");
    take(g, "backend", cfg.backend);
    take(g, "top_p", cfg.generation.sampling_top_p);
    take(g, "temperature", cfg.generation.temperature);
    take(g, "max_output_tokens", cfg.generation.max_output_tokens);
    take(g, "model", cfg.generation.model);
    if (g.contains("seed")) {
      cfg.generation.seed = g.at("seed").is_null() ? std::nullopt
                                                   : std::optional<int>(g.at("seed").get<int>());
    }
    take(g, "context_budget", cfg.context_budget);
    take(g, "url", cfg.llm.url);
    take(g, "key", cfg.llm.api_key);
    take(g, "max_in_flight", cfg.llm.max_in_flight);
  }
  if (j.contains("evaluation")) {
    take(j.at("evaluation"), "omega", cfg.weights.omega);
    take(j.at("evaluation"), "judge", cfg.judge);
  }
  if (j.contains("captioner") && j.at("captioner").is_object()) {
    http::RemoteEndpoint endpoint;
    take(j.at("captioner"), "url", endpoint.url);
    if (!endpoint.url.empty()) cfg.captioner = endpoint;
  }
}

}  // namespace detail

/// Precedence: flags, then environment, then config file, then defaults.
inline RunConfig resolve_config(const Overrides& flags, const EnvLookup& env = process_env) {
  RunConfig cfg;
  if (flags.config_path) {
    try {
      detail::apply_file(cfg, nlohmann::json::parse(scene::read_text_file(*flags.config_path, "cli")));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidInput, "cli",
                  fmt::format("config {}: {}", *flags.config_path, e.what()));
    }
  }
  if (auto v = env("ENWAR_EMBED_URL")) cfg.embedder.remote.url = *v;
  if (auto v = env("ENWAR_EMBED_KEY")) cfg.embedder.remote.api_key = *v;
  if (auto v = env("ENWAR_LLM_URL")) cfg.llm.url = *v;
  if (auto v = env("ENWAR_LLM_KEY")) cfg.llm.api_key = *v;

  if (flags.manifest) cfg.manifest = *flags.manifest;
  if (flags.output_dir) cfg.output_dir = *flags.output_dir;
  if (flags.modalities) cfg.modalities = scene::ModalitySet::parse(*flags.modalities);
  if (flags.embedder) cfg.embedder.kind = detail::parse_embedder_kind(*flags.embedder);
  if (flags.backend) cfg.backend = *flags.backend;
  if (flags.judge) cfg.judge = *flags.judge;
  cfg.verbose = flags.verbose;

  if (cfg.backend != "stub" && cfg.backend != "remote") {
    throw Error(ErrorCode::kInvalidInput, "cli", "backend must be stub or remote");
  }
  if (cfg.judge != "token" && cfg.judge != "llm") {
    throw Error(ErrorCode::kInvalidInput, "cli", "judge must be token or llm");
  }
  if (cfg.backend == "remote" && cfg.llm.url.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cli", "remote backend needs ENWAR_LLM_URL or generation.url");
  }
  if (cfg.embedder.kind == text::EmbedderKind::kRemote && cfg.embedder.remote.url.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cli", "remote embedder needs ENWAR_EMBED_URL or embedder.url");
  }
  if (cfg.backend == "remote" && cfg.llm.model.empty()) cfg.llm.model = cfg.generation.model;
  return cfg;
}

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cli", "cannot write " + path.string());
  out << content;
}

inline void echo_config(const RunConfig& cfg, std::string_view command) {
  write_file(fs::path(cfg.output_dir) / fmt::format("run_config.{}.json", command),
             cfg.echo().dump(2) + "\n");
}

inline std::unique_ptr<scene::Captioner> make_captioner(const RunConfig& cfg) {
  if (!cfg.captioner) return nullptr;
  return std::make_unique<scene::HttpCaptioner>(*cfg.captioner);
}

inline std::unique_ptr<gen::ChatBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "remote") return std::make_unique<gen::RemoteChatBackend>(cfg.llm);
  return std::make_unique<gen::StubBackend>();
}

}  // namespace detail

/// Manifest to one scene document per scene. Failed scenes are reported and
/// make the command fail; the others are still written.
inline int cmd_ingest(const RunConfig& cfg, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  try {
    const auto entries = scene::load_manifest(cfg.manifest);
    if (entries.empty()) {
      err << "error: no scenes in manifest " << cfg.manifest << "\n";
      return 1;
    }
    const auto captioner = detail::make_captioner(cfg);
    scene::SynthesisOptions options;
    options.captioner = captioner.get();
    std::vector<scene::SceneDocument> docs;
    std::size_t failed = 0;
    for (const auto& entry : entries) {
      try {
        const scene::ModalitySet present = entry.referenced();
        const scene::ModalitySet wanted = cfg.modalities.value_or(present);
        docs.push_back(scene::synthesize_scene(scene::load_record(entry), wanted, options));
      } catch (const std::exception& e) {
        ++failed;
        err << "scene " << entry.scene_id << ": " << e.what() << "\n";
      }
    }
    fs::create_directories(cfg.output_dir);
    scene::save_documents((fs::path(cfg.output_dir) / kDocumentsFile).string(), docs);
    detail::echo_config(cfg, "ingest");
    out << fmt::format("ingested {} of {} scenes ({} failed) into {}\n", docs.size(),
                       entries.size(), failed, (fs::path(cfg.output_dir) / kDocumentsFile).string());
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline std::string kb_filename(const scene::ModalitySet& set) {
  return set.name() + std::string(kKbExtension);
}

/// Builds one knowledge base per requested combination ("all" = the seven)
/// from the documents of the build split.
inline int cmd_build_kb(const RunConfig& cfg, const std::string& documents_path,
                        const std::string& which, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  try {
    std::vector<scene::SceneDocument> docs;
    for (auto& doc : scene::load_documents(documents_path)) {
      if (doc.split != "test") docs.push_back(std::move(doc));
    }
    std::vector<scene::ModalitySet> combos;
    if (which == "all") {
      combos = scene::all_combinations();
    } else {
      combos.push_back(scene::ModalitySet::parse(which));
    }
    const text::Embedder embedder(cfg.embedder);
    fs::create_directories(cfg.output_dir);
    int status = 0;
    for (const auto& combo : combos) {
      try {
        const auto kb = kb::build_kb(docs, combo, embedder, cfg.chunking);
        const fs::path path = fs::path(cfg.output_dir) / kb_filename(combo);
        kb::save_kb(kb, path.string());
        out << fmt::format("built {} with {} entries from {} documents\n", path.string(),
                           kb.entries.size(), docs.size());
      } catch (const std::exception& e) {
        status = 1;
        err << "knowledge base " << combo.name() << ": " << e.what() << "\n";
      }
    }
    detail::echo_config(cfg, "build-kb");
    return status;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

struct QueryTrace {
  nlohmann::json record;
  std::string assembled_prompt;
};

/// Runs the query path for one scene against one knowledge base.
inline QueryTrace run_query(const RunConfig& cfg, const scene::SceneRecord& record,
                            const kb::KnowledgeBase& base, const text::Embedder& embedder,
                            const gen::ChatBackend& backend, const scene::Captioner* captioner) {
  const scene::ModalitySet query_modalities = cfg.modalities.value_or(base.modalities);
  scene::SynthesisOptions options;
  options.captioner = captioner;
  const auto query = gen::preprocess_query(record, query_modalities, embedder, options);
  const auto hits = kb::retrieve(base, query.vector, cfg.retrieval);
  const auto bundle = gen::assemble_prompt(query.extracted_text, hits, gen::kTaskInstructions,
                                           cfg.context_budget);
  const auto answer = gen::generate(bundle, cfg.generation, backend);

  nlohmann::json hits_json = nlohmann::json::array();
  for (const auto& hit : hits) {
    hits_json.push_back({{"rank", hit.rank},
                         {"score", hit.score},
                         {"source_id", hit.chunk.source_id},
                         {"section", hit.chunk.section},
                         {"start", hit.chunk.start},
                         {"end", hit.chunk.end}});
  }
  nlohmann::json trace = {{"scene_id", record.scene_id},
                          {"kb", base.modalities.name()},
                          {"query_modalities", query_modalities.name()},
                          {"prompt", query.extracted_text},
                          {"hits", hits_json},
                          {"contexts", bundle.retrieved_contexts},
                          {"dropped_contexts", bundle.dropped_contexts},
                          {"answer", answer.text},
                          {"model", answer.model},
                          {"config_fingerprint", cfg.fingerprint()}};
  trace["ground_truth"] = record.ground_truth ? nlohmann::json(*record.ground_truth) : nlohmann::json();
  if (query_modalities != base.modalities) {
    trace["note"] = fmt::format("query modalities {} differ from knowledge base modalities {}",
                                query_modalities.name(), base.modalities.name());
  }
  if (answer.input_tokens) trace["usage"]["input_tokens"] = *answer.input_tokens;
  if (answer.output_tokens) trace["usage"]["output_tokens"] = *answer.output_tokens;
  return QueryTrace{std::move(trace), bundle.assembled};
}

inline fs::path trace_path(const RunConfig& cfg, const std::string& kb_name,
                           const std::string& scene_id) {
  return fs::path(cfg.output_dir) / "traces" / fmt::format("{}__{}.json", kb_name, scene_id);
}

/// Queries each scene (or every manifest scene for "all") against a knowledge
/// base and writes one trace per scene.
inline int cmd_query(const RunConfig& cfg, const std::vector<std::string>& scene_ids,
                     const std::string& kb_path, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  try {
    const auto entries = scene::load_manifest(cfg.manifest);
    const auto base = kb::load_kb(kb_path, cfg.embedder);
    const text::Embedder embedder(cfg.embedder);
    const auto backend = detail::make_backend(cfg);
    const auto captioner = detail::make_captioner(cfg);

    std::vector<std::string> wanted;
    for (const auto& id : scene_ids) {
      if (id == "all") {
        for (const auto& e : entries) wanted.push_back(e.scene_id);
      } else {
        wanted.push_back(id);
      }
    }
    if (wanted.empty()) {
      err << "error: no scene given\n";
      return 1;
    }
    int status = 0;
    for (const auto& id : wanted) {
      const auto entry = std::find_if(entries.begin(), entries.end(),
                                      [&id](const auto& e) { return e.scene_id == id; });
      if (entry == entries.end()) {
        err << "error: [cli] unknown scene_id " << id << "\n";
        status = 1;
        continue;
      }
      try {
        const auto trace = run_query(cfg, scene::load_record(*entry), base, embedder, *backend,
                                     captioner.get());
        const fs::path path = trace_path(cfg, base.modalities.name(), id);
        detail::write_file(path, scene::dump_line(trace.record) + "\n");
        out << fmt::format("== scene {} against {} ==\n", id, base.modalities.name());
        if (cfg.verbose) out << trace.assembled_prompt << "\n";
        for (const auto& hit : trace.record.at("hits")) {
          out << fmt::format("  [{}] {:.4f} {} {} [{}, {})\n", hit.at("rank").get<std::size_t>(),
                             hit.at("score").get<double>(), hit.at("source_id").get<std::string>(),
                             hit.at("section").get<std::string>(), hit.at("start").get<std::size_t>(),
                             hit.at("end").get<std::size_t>());
        }
        if (trace.record.contains("note")) out << "  note: " << trace.record.at("note").get<std::string>() << "\n";
        out << trace.record.at("answer").get<std::string>() << "\n";
        out << "trace written to " << path.string() << "\n";
      } catch (const std::exception& e) {
        err << "scene " << id << ": " << e.what() << "\n";
        status = 1;
      }
    }
    detail::echo_config(cfg, "query");
    return status;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

/// Expands directories into their *.json / *.jsonl files, sorted by name.
inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".json" || ext == ".jsonl")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

inline std::vector<std::pair<std::string, eval::Aggregates>> order_by_combination(
    const std::map<std::string, eval::Aggregates>& by_name) {
  std::vector<std::pair<std::string, eval::Aggregates>> rows;
  std::set<std::string> used;
  for (const auto& combo : scene::all_combinations()) {
    const auto it = by_name.find(combo.name());
    if (it != by_name.end()) {
      rows.emplace_back(it->first, it->second);
      used.insert(it->first);
    }
  }
  for (const auto& [name, agg] : by_name) {
    if (used.count(name) == 0) rows.emplace_back(name, agg);
  }
  return rows;
}

inline int write_summary(const fs::path& dir,
                         const std::vector<std::pair<std::string, eval::Aggregates>>& rows,
                         std::ostream& out) {
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& [name, a] : rows) {
    summary.push_back({{"modalities", name},
                       {"answer_relevancy", a.answer_relevancy},
                       {"answer_relevancy_raw", a.answer_relevancy_raw},
                       {"context_recall", a.context_recall},
                       {"correctness", a.correctness},
                       {"faithfulness", a.faithfulness}});
  }
  const std::string table = eval::render_summary(rows);
  detail::write_file(dir / "summary.json", summary.dump(2) + "\n");
  detail::write_file(dir / "summary.txt", table);
  out << table;
  return 0;
}

/// Scores traces grouped by knowledge base. Ground truth comes from the
/// manifest when one is configured, otherwise from the trace itself.
inline int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& trace_inputs,
                        std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    std::map<std::string, std::string> truths;
    if (!cfg.manifest.empty()) {
      for (const auto& entry : scene::load_manifest(cfg.manifest)) {
        if (entry.ground_truth) truths[entry.scene_id] = scene::read_text_file(*entry.ground_truth, "cli");
      }
    }
    std::map<std::string, std::vector<eval::EvalSample>> groups;
    std::size_t skipped = 0;
    for (const auto& file : expand_inputs(trace_inputs)) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw Error(ErrorCode::kIo, "cli", "cannot open " + file.string());
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line);
        eval::EvalSample sample = eval::sample_from_json(j);
        if (const auto it = truths.find(sample.scene_id); it != truths.end()) {
          sample.ground_truth = it->second;
        }
        if (sample.ground_truth.empty()) {
          spdlog::warn("[cli] no ground truth for scene {}; skipping", sample.scene_id);
          ++skipped;
          continue;
        }
        groups[j.value("kb", std::string("unknown"))].push_back(std::move(sample));
      }
    }
    if (groups.empty()) {
      err << fmt::format("error: no trace with matching ground truth ({} skipped)\n", skipped);
      return 1;
    }
    const text::Embedder embedder(cfg.embedder);
    std::unique_ptr<eval::SupportJudge> judge;
    if (cfg.judge == "llm") {
      if (cfg.llm.url.empty()) throw Error(ErrorCode::kInvalidInput, "cli", "llm judge needs ENWAR_LLM_URL");
      judge = std::make_unique<eval::LlmJudge>(cfg.llm);
    } else {
      judge = std::make_unique<eval::TokenRecallJudge>();
    }
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    std::map<std::string, eval::Aggregates> aggregates;
    bool nan = false;
    for (const auto& [name, samples] : groups) {
      eval::EvalConfig config;
      config.judge = judge.get();
      config.metadata = {{"modalities", name},
                         {"model", cfg.backend == "stub" ? std::string("stub") : cfg.generation.model},
                         {"config_fingerprint", cfg.fingerprint()},
                         {"judge_backend", cfg.judge == "llm"}};
      const auto report = eval::evaluate_run(samples, cfg.weights, embedder, config);
      detail::write_file(dir / fmt::format("report_{}.json", name), eval::to_json(report).dump(2) + "\n");
      detail::write_file(dir / fmt::format("report_{}.txt", name), eval::render_table(report));
      aggregates[name] = report.aggregate;
      nan = nan || report.aggregate.any_nan();
    }
    write_summary(dir, order_by_combination(aggregates), out);
    detail::echo_config(cfg, "evaluate");
    if (skipped > 0) err << fmt::format("warning: {} trace(s) skipped without ground truth\n", skipped);
    if (nan) {
      err << "error: a KPI aggregate is NaN\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

/// Rebuilds the cross-combination summary from report_*.json files.
inline int cmd_report(const std::string& reports_dir,
                      std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    std::map<std::string, eval::Aggregates> aggregates;
    for (const auto& file : expand_inputs({reports_dir})) {
      const std::string stem = file.stem().string();
      if (stem.rfind("report_", 0) != 0 || file.extension() != ".json") continue;
      const auto report = eval::report_from_json(
          nlohmann::json::parse(scene::read_text_file(file.string(), "cli")));
      aggregates[stem.substr(7)] = report.aggregate;
    }
    if (aggregates.empty()) {
      err << "error: no report_*.json files in " << reports_dir << "\n";
      return 1;
    }
    return write_summary(fs::path(reports_dir), order_by_combination(aggregates), out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace enwar::cli
