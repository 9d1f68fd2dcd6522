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


#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "enwar/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-modal RAG pipeline: ingest scenes, build knowledge bases, query, evaluate"};
  app.require_subcommand(1);
  app.fallthrough();

  enwar::cli::Overrides flags;
  app.add_option_function<std::string>("--config", [&](const std::string& v) { flags.config_path = v; },
                                       "JSON configuration file");
  app.add_option_function<std::string>("--manifest", [&](const std::string& v) { flags.manifest = v; },
                                       "Scene manifest (JSON lines)");
  app.add_option_function<std::string>("--out", [&](const std::string& v) { flags.output_dir = v; },
                                       "Output directory");
  app.add_option_function<std::string>("--modalities", [&](const std::string& v) { flags.modalities = v; },
                                       "Modality set, e.g. gps,lidar,cam");
  app.add_option_function<std::string>("--embedder", [&](const std::string& v) { flags.embedder = v; },
                                       "Embedder kind")
      ->check(CLI::IsMember({"local", "remote"}));
  app.add_option_function<std::string>("--backend", [&](const std::string& v) { flags.backend = v; },
                                       "Generation backend")
      ->check(CLI::IsMember({"stub", "remote"}));
  app.add_option_function<std::string>("--judge", [&](const std::string& v) { flags.judge = v; },
                                       "Claim support judge for evaluation")
      ->check(CLI::IsMember({"token", "llm"}));
  app.add_flag("--verbose", flags.verbose, "Print assembled prompts and debug logs");

  auto* ingest = app.add_subcommand("ingest", "Synthesize scene documents from a manifest");

  auto* build = app.add_subcommand("build-kb", "Build knowledge bases from scene documents");
  std::string which = "all";
  std::string documents;
  build->add_option("combination", which, "Modality combination or 'all'");
  build->add_option("--documents", documents, "Scene documents (default: <out>/documents.jsonl)");

  auto* query = app.add_subcommand("query", "Answer a scene query against a knowledge base");
  std::vector<std::string> scenes;
  std::string kb_path;
  query->add_option("--scene", scenes, "Scene id (repeatable, or 'all')")->required();
  query->add_option("--kb", kb_path, "Knowledge base file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score query traces");
  std::vector<std::string> traces;
  evaluate->add_option("traces", traces, "Trace files or directories")->required();

  auto* report = app.add_subcommand("report", "Summarize evaluation reports");
  std::string reports_dir;
  report->add_option("dir", reports_dir, "Directory holding report_*.json")->required();

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("enwar");
  spdlog::set_default_logger(logger);
  spdlog::set_level(flags.verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    const enwar::cli::RunConfig cfg = enwar::cli::resolve_config(flags);
    if (*ingest) return enwar::cli::cmd_ingest(cfg);
    if (*build) {
      if (documents.empty()) {
        documents = (std::filesystem::path(cfg.output_dir) / enwar::cli::kDocumentsFile).string();
      }
      return enwar::cli::cmd_build_kb(cfg, documents, which);
    }
    if (*query) return enwar::cli::cmd_query(cfg, scenes, kb_path);
    if (*evaluate) return enwar::cli::cmd_evaluate(cfg, traces);
    if (*report) return enwar::cli::cmd_report(reports_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
