#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypoloop/belief.hpp"
#include "hypoloop/evidence.hpp"
#include "hypoloop/judge.hpp"
#include "hypoloop/proposal.hpp"
#include "hypoloop/providers.hpp"
#include "hypoloop/refinement.hpp"

namespace hypoloop::pipeline {

struct ProvidersConfig {
  std::string mode = "mock";  // "mock" or "http"
  providers::ProviderConfig chat;
  providers::ProviderConfig embedding;
  size_t mock_embedding_dim = 32;
};

struct RunConfig {
  std::string question;
  std::string reference_text;  // tournament baseline
  std::string domain_keyword = "machine learning";

  belief::WeightConfig weights;     // alpha = beta = gamma = 1/3
  int n = 5;                        // hypothesis set size
  int k = 5;                        // evidence chunks per hypothesis
  double tau_s = 0.3;               // refinement threshold on binary entropy
  double epsilon_h = 0.01;          // entropy-convergence threshold
  int t_max = 8;                    // maximum validation rounds
  uint64_t seed = 42;

  proposal::SamplingPlan sampling_plan = proposal::SamplingPlan::default_plan();
  int refinement_cap = 0;           // 0 = ceil(n/2)
  bool belief_inheritance = true;   // refined hypotheses keep the parent's belief
  double evidence_floor = 0.05;     // likelihood used when retrieval yields nothing usable
  refinement::RefinementPolicy refinement_policy;
  judge::JudgeConfig elo;
  ProvidersConfig providers;
};

void validate_config(const RunConfig& config);
RunConfig config_from_json_file(const std::filesystem::path& path);
std::string config_to_json_string(const RunConfig& config);

struct LikelihoodChunkRecord {
  std::string chunk_id;
  double similarity = 0.0;
  double base = 0.0;
  int method_match = 0;
};

struct LikelihoodEntry {
  double aggregate = 0.0;
  bool floor_applied = false;  // retrieval produced nothing usable
  std::vector<LikelihoodChunkRecord> chunks;
};

struct HypothesisSnapshot {
  std::string id;
  std::string text;
};

// Deterministic per-round cost figures: chat calls are never cached, and
// embedded texts count logically so a warm retrieval cache (or a resume with
// a cold one) reports the same work. Wall-clock latency lives in the
// transcript log, not here, so serialized states stay reproducible.
struct RoundTiming {
  int64_t chat_calls = 0;
  int64_t embed_texts = 0;
};

// One row per round: what was validated, what the beliefs became, and what
// the round changed. Round 0 is the proposal round and has no likelihoods,
// tournament, or refinements.
struct IterationRecord {
  int round = 0;
  std::vector<HypothesisSnapshot> hypotheses;        // as validated this round
  std::vector<belief::BeliefEntry> beliefs;          // B_k
  double shannon_entropy = 0.0;                      // H_k
  std::map<std::string, double> binary_entropies;    // S_k per hypothesis
  std::map<std::string, LikelihoodEntry> likelihoods;
  std::map<std::string, double> elo_ratings;
  std::optional<double> elo_delta;
  std::vector<refinement::RefinementAction> refinements;
  std::vector<judge::MatchRecord> matches;
  bool degenerate_evidence = false;  // posterior kept at the prior this round
  RoundTiming timing;
};

enum class RunStatus { Running, ConvergedEntropy, MaxIterations, Failed };

const char* run_status_name(RunStatus status);
RunStatus run_status_from_name(const std::string& name);

struct RunState {
  int version = 1;
  RunConfig config;
  RunStatus status = RunStatus::Running;
  std::vector<IterationRecord> records;  // indexed 0..T contiguously

  // Live set carried between rounds (post-refinement).
  std::vector<belief::Hypothesis> hypotheses;
  std::vector<belief::BeliefEntry> beliefs;
  std::map<std::string, judge::Rating> ratings;
  int next_hypothesis_index = 0;
  std::string failure_reason;
};

std::string serialize_run_state(const RunState& state);  // stable bytes for a given state
RunState deserialize_run_state(const std::string& bytes);

// Writes run_state.json plus the derived views (rounds.jsonl, matches.jsonl)
// into the run directory.
void checkpoint(const RunState& state, const std::filesystem::path& run_dir);

// Errors: CorruptCheckpoint for a missing, unreadable, or version-mismatched
// run_state.json.
RunState resume(const std::filesystem::path& run_dir);

struct ProviderBundle {
  providers::ChatProvider* chat = nullptr;
  providers::EmbeddingProvider* embedder = nullptr;
};

// Providers built from the config's provider section; the bundle points into
// the owned instances.
struct OwnedProviders {
  std::unique_ptr<providers::MockProvider> mock;
  std::unique_ptr<providers::HttpChatProvider> http_chat;
  std::unique_ptr<providers::HttpEmbeddingProvider> http_embed;
  ProviderBundle bundle;
};

OwnedProviders make_providers(const RunConfig& config);

using RoundObserver = std::function<void(const RunState&, const IterationRecord&)>;

// The full loop: one proposal round, then validate / judge / refine rounds
// until entropy converges or t_max is reached. Checkpoints after every round.
// A module failure marks the state failed, checkpoints, and rethrows.
RunState run(const RunConfig& config, const ProviderBundle& bundle, const evidence::VectorStore& store,
             const std::filesystem::path& run_dir, const RoundObserver& observer = {});

// Continues a resumed state to completion with the same providers and store.
RunState continue_run(RunState state, const ProviderBundle& bundle,
                      const evidence::VectorStore& store, const std::filesystem::path& run_dir,
                      const RoundObserver& observer = {});

enum class ReportFormat { Table, Csv, JsonLines };

// Headline metrics (first/final-round ELO delta, their difference, and the
// total entropy change) plus the per-round series. ELO and entropy values
// print with two decimals in the machine formats. Errors: EmptyState.
std::string report(const RunState& state, ReportFormat format);

// Offline end-to-end run against mock providers and a built-in corpus.
RunState run_demo(uint64_t seed, const std::filesystem::path& run_dir,
                  const RoundObserver& observer = {});

// The built-in demo corpus (also used by tests that need a populated store).
std::vector<evidence::Document> demo_corpus();
RunConfig demo_config(uint64_t seed);
evidence::VectorStore build_demo_store(const RunConfig& config, const ProviderBundle& bundle);

}  // namespace hypoloop::pipeline
