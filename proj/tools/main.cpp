#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hypoloop/pipeline.hpp"
#include "hypoloop/rng.hpp"

namespace fs = std::filesystem;
using namespace hypoloop;

namespace {

int cmd_ingest(const std::string& corpus_file, const std::string& out_dir, uint64_t seed) {
  auto documents = evidence::read_corpus_jsonl(corpus_file);
  providers::MockProvider embedder(derive_seed(seed, "mock-provider", 0));
  providers::ProviderGateway gateway(nullptr, &embedder, providers::ProviderConfig{});
  auto store = evidence::ingest_corpus(documents, evidence::ChunkingConfig{}, gateway);
  store.save(out_dir);
  std::printf("ingested %zu documents into %zu chunks (dimension %zu) -> %s\n", documents.size(),
              store.size(), store.dimension(), out_dir.c_str());
  return 0;
}

int cmd_ingest_config(const std::string& corpus_file, const std::string& out_dir,
                      const std::string& config_file) {
  auto config = pipeline::config_from_json_file(config_file);
  auto documents = evidence::read_corpus_jsonl(corpus_file);
  auto owned = pipeline::make_providers(config);
  providers::ProviderGateway gateway(nullptr, owned.bundle.embedder, config.providers.embedding);
  auto store = evidence::ingest_corpus(documents, evidence::ChunkingConfig{}, gateway);
  store.save(out_dir);
  std::printf("ingested %zu documents into %zu chunks (dimension %zu) -> %s\n", documents.size(),
              store.size(), store.dimension(), out_dir.c_str());
  return 0;
}

void print_round(const pipeline::RunState&, const pipeline::IterationRecord& record) {
  std::printf("round %d: H=%.4f%s, refined=%zu\n", record.round, record.shannon_entropy,
              record.elo_delta ? (" elo_delta=" + std::to_string(*record.elo_delta)).c_str() : "",
              record.refinements.size());
}

int cmd_run(const std::string& config_file, const std::string& store_dir, const std::string& out_dir,
            bool resume_flag) {
  auto store = evidence::VectorStore::load(store_dir);
  pipeline::RunState state;
  if (resume_flag) {
    state = pipeline::resume(out_dir);
    auto owned = pipeline::make_providers(state.config);
    state = pipeline::continue_run(std::move(state), owned.bundle, store, out_dir, print_round);
  } else {
    auto config = pipeline::config_from_json_file(config_file);
    auto owned = pipeline::make_providers(config);
    state = pipeline::run(config, owned.bundle, store, out_dir, print_round);
  }
  std::printf("status: %s across %zu rounds\n", pipeline::run_status_name(state.status),
              state.records.size());
  std::fputs(pipeline::report(state, pipeline::ReportFormat::Table).c_str(), stdout);
  return 0;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
  auto state = pipeline::resume(run_dir);
  pipeline::ReportFormat fmt = format == "csv"     ? pipeline::ReportFormat::Csv
                               : format == "jsonl" ? pipeline::ReportFormat::JsonLines
                                                   : pipeline::ReportFormat::Table;
  std::fputs(pipeline::report(state, fmt).c_str(), stdout);
  return 0;
}

int cmd_demo(uint64_t seed, const std::string& out_dir) {
  auto state = pipeline::run_demo(seed, out_dir, print_round);
  std::printf("demo finished: status %s, %zu rounds, run dir %s\n",
              pipeline::run_status_name(state.status), state.records.size(), out_dir.c_str());
  std::fputs(pipeline::report(state, pipeline::ReportFormat::Table).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypoloop: propose, validate, and refine research hypotheses in a Bayesian loop"};
  app.require_subcommand(1);

  std::string corpus_file, store_dir, out_dir, config_file, run_dir;
  std::string format = "table";
  uint64_t seed = 7;
  bool resume_flag = false;

  auto* ingest = app.add_subcommand("ingest", "Chunk, embed, and index a JSONL corpus");
  ingest->add_option("corpus", corpus_file, "corpus file (one JSON document per line)")->required();
  ingest->add_option("--out", store_dir, "store output directory")->required();
  ingest->add_option("--config", config_file, "run config whose provider section supplies the embedder");
  ingest->add_option("--seed", seed, "mock embedder seed when no config is given");

  auto* run = app.add_subcommand("run", "Execute the full loop against a store");
  run->add_option("--config", config_file, "run config JSON file");
  run->add_option("--store", store_dir, "store directory from 'ingest'")->required();
  run->add_option("--out", out_dir, "run directory")->required();
  run->add_flag("--resume", resume_flag, "continue from the run directory's checkpoint");

  auto* report = app.add_subcommand("report", "Render metrics for a finished or running run");
  report->add_option("run_dir", run_dir, "run directory")->required();
  report->add_option("--format", format, "table | csv | jsonl")
      ->check(CLI::IsMember({"table", "csv", "jsonl"}));

  auto* demo = app.add_subcommand("demo", "Offline end-to-end run with mock providers");
  demo->add_option("--seed", seed, "root seed");
  demo->add_option("--out", out_dir, "run directory (default demo-run)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      return config_file.empty() ? cmd_ingest(corpus_file, store_dir, seed)
                                 : cmd_ingest_config(corpus_file, store_dir, config_file);
    }
    if (run->parsed()) {
      if (!resume_flag && config_file.empty()) {
        std::fprintf(stderr, "run needs --config (or --resume)\n");
        return 2;
      }
      return cmd_run(config_file, store_dir, out_dir, resume_flag);
    }
    if (report->parsed()) return cmd_report(run_dir, format);
    if (demo->parsed()) return cmd_demo(seed, out_dir.empty() ? "demo-run" : out_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
