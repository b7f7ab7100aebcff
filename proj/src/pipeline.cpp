#include "hypoloop/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hypoloop/parallel.hpp"
#include "hypoloop/rng.hpp"

namespace hypoloop::pipeline {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void validate_config(const RunConfig& config) {
  if (config.question.empty()) throw Error(ErrorCode::EmptyInput, "config.question is empty");
  if (config.reference_text.empty()) throw Error(ErrorCode::EmptyInput, "config.reference_text is empty");
  belief::validate_weights(config.weights);
  if (config.n < 2) throw Error(ErrorCode::OutOfRange, "n must be >= 2 for entropy to be meaningful");
  if (config.k < 1) throw Error(ErrorCode::OutOfRange, "k must be >= 1");
  if (config.tau_s <= 0.0 || config.tau_s > 1.0) throw Error(ErrorCode::OutOfRange, "tau_s must lie in (0,1]");
  if (config.epsilon_h <= 0.0) throw Error(ErrorCode::OutOfRange, "epsilon_h must be > 0");
  if (config.t_max < 1) throw Error(ErrorCode::OutOfRange, "t_max must be >= 1");
  if (config.refinement_cap < 0) throw Error(ErrorCode::OutOfRange, "refinement_cap must be >= 0");
  if (config.evidence_floor < 0.0 || config.evidence_floor > 1.0) {
    throw Error(ErrorCode::OutOfRange, "evidence_floor must lie in [0,1]");
  }
  if (config.elo.k_factor <= 0.0) throw Error(ErrorCode::OutOfRange, "elo.k_factor must be > 0");
  if (config.elo.games_per_round < 1) throw Error(ErrorCode::OutOfRange, "elo.games_per_round must be >= 1");
  proposal::validate_plan(config.sampling_plan);
  if (config.providers.mode != "mock" && config.providers.mode != "http") {
    throw Error(ErrorCode::OutOfRange, "providers.mode must be 'mock' or 'http'");
  }
  if (config.providers.mode == "mock" && config.providers.mock_embedding_dim < 2) {
    throw Error(ErrorCode::OutOfRange, "mock_embedding_dim must be >= 2");
  }
}

namespace {

json provider_config_to_json(const providers::ProviderConfig& c) {
  return json{
      {"endpoint", c.endpoint},
      {"model", c.model},
      {"timeout_ms", c.timeout_ms},
      {"retry_budget", c.retry_budget},
      {"max_parallel", c.max_parallel},
      {"temperature_default", c.temperature_default},
      {"credential_env", c.credential_env},
  };
}

providers::ProviderConfig provider_config_from_json(const json& j) {
  providers::ProviderConfig c;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  c.retry_budget = j.value("retry_budget", c.retry_budget);
  c.max_parallel = j.value("max_parallel", c.max_parallel);
  c.temperature_default = j.value("temperature_default", c.temperature_default);
  c.credential_env = j.value("credential_env", c.credential_env);
  return c;
}

json config_to_json(const RunConfig& c) {
  json plan_rounds = json::array();
  for (const auto& r : c.sampling_plan.rounds) {
    plan_rounds.push_back({{"temperature", r.temperature},
                           {"template_id", r.template_id},
                           {"samples", r.samples}});
  }
  return json{
      {"question", c.question},
      {"reference_text", c.reference_text},
      {"domain_keyword", c.domain_keyword},
      {"weights", {{"alpha", c.weights.alpha}, {"beta", c.weights.beta}, {"gamma", c.weights.gamma}}},
      {"n", c.n},
      {"k", c.k},
      {"tau_s", c.tau_s},
      {"epsilon_h", c.epsilon_h},
      {"t_max", c.t_max},
      {"seed", c.seed},
      {"sampling_plan", {{"rounds", plan_rounds}}},
      {"refinement_cap", c.refinement_cap},
      {"belief_inheritance", c.belief_inheritance},
      {"evidence_floor", c.evidence_floor},
      {"refinement_policy",
       {{"likelihood_low_water", c.refinement_policy.likelihood_low_water},
        {"peer_cosine_threshold", c.refinement_policy.peer_cosine_threshold}}},
      {"elo",
       {{"k_factor", c.elo.k_factor},
        {"initial_elo", c.elo.initial_elo},
        {"games_per_round", c.elo.games_per_round},
        {"hypothesis_vs_hypothesis", c.elo.hypothesis_vs_hypothesis}}},
      {"providers",
       {{"mode", c.providers.mode},
        {"chat", provider_config_to_json(c.providers.chat)},
        {"embedding", provider_config_to_json(c.providers.embedding)},
        {"mock_embedding_dim", c.providers.mock_embedding_dim}}},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.question = j.value("question", "");
  c.reference_text = j.value("reference_text", "");
  c.domain_keyword = j.value("domain_keyword", c.domain_keyword);
  if (j.contains("weights")) {
    c.weights.alpha = j["weights"].value("alpha", c.weights.alpha);
    c.weights.beta = j["weights"].value("beta", c.weights.beta);
    c.weights.gamma = j["weights"].value("gamma", c.weights.gamma);
  }
  c.n = j.value("n", c.n);
  c.k = j.value("k", c.k);
  c.tau_s = j.value("tau_s", c.tau_s);
  c.epsilon_h = j.value("epsilon_h", c.epsilon_h);
  c.t_max = j.value("t_max", c.t_max);
  c.seed = j.value("seed", c.seed);
  if (j.contains("sampling_plan") && j["sampling_plan"].contains("rounds")) {
    c.sampling_plan.rounds.clear();
    for (const auto& r : j["sampling_plan"]["rounds"]) {
      proposal::SamplingRound round;
      round.temperature = r.value("temperature", round.temperature);
      round.template_id = r.value("template_id", round.template_id);
      round.samples = r.value("samples", round.samples);
      c.sampling_plan.rounds.push_back(round);
    }
  }
  c.refinement_cap = j.value("refinement_cap", c.refinement_cap);
  c.belief_inheritance = j.value("belief_inheritance", c.belief_inheritance);
  c.evidence_floor = j.value("evidence_floor", c.evidence_floor);
  if (j.contains("refinement_policy")) {
    c.refinement_policy.likelihood_low_water =
        j["refinement_policy"].value("likelihood_low_water", c.refinement_policy.likelihood_low_water);
    c.refinement_policy.peer_cosine_threshold =
        j["refinement_policy"].value("peer_cosine_threshold", c.refinement_policy.peer_cosine_threshold);
  }
  if (j.contains("elo")) {
    c.elo.k_factor = j["elo"].value("k_factor", c.elo.k_factor);
    c.elo.initial_elo = j["elo"].value("initial_elo", c.elo.initial_elo);
    c.elo.games_per_round = j["elo"].value("games_per_round", c.elo.games_per_round);
    c.elo.hypothesis_vs_hypothesis = j["elo"].value("hypothesis_vs_hypothesis", c.elo.hypothesis_vs_hypothesis);
  }
  if (j.contains("providers")) {
    const auto& p = j["providers"];
    c.providers.mode = p.value("mode", c.providers.mode);
    if (p.contains("chat")) c.providers.chat = provider_config_from_json(p["chat"]);
    if (p.contains("embedding")) c.providers.embedding = provider_config_from_json(p["embedding"]);
    c.providers.mock_embedding_dim = p.value("mock_embedding_dim", c.providers.mock_embedding_dim);
  }
  return c;
}

}  // namespace

std::string config_to_json_string(const RunConfig& config) { return config_to_json(config).dump(2) + "\n"; }

RunConfig config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config file " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::ParseError, "config file " + path.string() + " is not a JSON object");
  }
  RunConfig config = config_from_json(j);
  validate_config(config);
  return config;
}

// ---------------------------------------------------------------------------
// Run state serialization
// ---------------------------------------------------------------------------

const char* run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::Running: return "running";
    case RunStatus::ConvergedEntropy: return "converged-entropy";
    case RunStatus::MaxIterations: return "max-iterations";
    case RunStatus::Failed: return "failed";
  }
  return "running";
}

RunStatus run_status_from_name(const std::string& name) {
  if (name == "running") return RunStatus::Running;
  if (name == "converged-entropy") return RunStatus::ConvergedEntropy;
  if (name == "max-iterations") return RunStatus::MaxIterations;
  if (name == "failed") return RunStatus::Failed;
  throw Error(ErrorCode::CorruptCheckpoint, "unknown run status '" + name + "'");
}

namespace {

json hypothesis_to_json(const belief::Hypothesis& h) {
  json lineage = json::array();
  for (const auto& e : h.lineage) {
    lineage.push_back({{"round", e.round}, {"strategy", e.strategy}, {"parent_ids", e.parent_ids}});
  }
  json out = {
      {"id", h.id},
      {"text", h.text},
      {"lineage", lineage},
      {"sampling_round", h.sampling_round},
      {"scores", nullptr},
      {"embedding", nullptr},
  };
  if (h.scores) {
    out["scores"] = {{"novelty", h.scores->novelty},
                     {"relevance", h.scores->relevance},
                     {"feasibility", h.scores->feasibility}};
  }
  if (h.embedding) out["embedding"] = *h.embedding;
  return out;
}

belief::Hypothesis hypothesis_from_json(const json& j) {
  belief::Hypothesis h;
  h.id = j.at("id").get<std::string>();
  h.text = j.at("text").get<std::string>();
  h.sampling_round = j.value("sampling_round", 0);
  for (const auto& e : j.value("lineage", json::array())) {
    belief::LineageEntry entry;
    entry.round = e.value("round", 0);
    entry.strategy = e.value("strategy", "");
    entry.parent_ids = e.value("parent_ids", std::vector<std::string>{});
    h.lineage.push_back(std::move(entry));
  }
  if (j.contains("scores") && !j["scores"].is_null()) {
    h.scores = belief::ScoreTriple{j["scores"].value("novelty", 0.0),
                                   j["scores"].value("relevance", 0.0),
                                   j["scores"].value("feasibility", 0.0)};
  }
  if (j.contains("embedding") && !j["embedding"].is_null()) {
    h.embedding = j["embedding"].get<std::vector<double>>();
  }
  return h;
}

json beliefs_to_json(const std::vector<belief::BeliefEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) out.push_back({{"id", e.hypothesis_id}, {"belief", e.belief}});
  return out;
}

std::vector<belief::BeliefEntry> beliefs_from_json(const json& j) {
  std::vector<belief::BeliefEntry> out;
  for (const auto& e : j) out.push_back({e.at("id").get<std::string>(), e.at("belief").get<double>()});
  return out;
}

json action_to_json(const refinement::RefinementAction& a) {
  return json{
      {"target_ids", a.target_ids},
      {"strategy", refinement::strategy_name(a.strategy)},
      {"produced_text", a.produced_text},
      {"produced_id", a.produced_id},
      {"round", a.round},
      {"declared_letter", std::string(1, a.declared_letter)},
      {"strategy_mismatch", a.strategy_mismatch},
  };
}

refinement::RefinementAction action_from_json(const json& j) {
  refinement::RefinementAction a;
  a.target_ids = j.value("target_ids", std::vector<std::string>{});
  std::string name = j.value("strategy", "deepening");
  a.strategy = name == "counterfactual" ? refinement::Strategy::Counterfactual
               : name == "hybridization" ? refinement::Strategy::Hybridization
                                         : refinement::Strategy::Deepening;
  a.produced_text = j.value("produced_text", "");
  a.produced_id = j.value("produced_id", "");
  a.round = j.value("round", 0);
  std::string letter = j.value("declared_letter", "A");
  a.declared_letter = letter.empty() ? 'A' : letter[0];
  a.strategy_mismatch = j.value("strategy_mismatch", false);
  return a;
}

json match_to_json(const judge::MatchRecord& m) {
  return json{
      {"a_id", m.a_id},
      {"b_id", m.b_id},
      {"a_presented_first", m.a_presented_first},
      {"outcome", judge::outcome_name(m.outcome)},
      {"round", m.round},
      {"transcript_ref", m.transcript_ref},
  };
}

judge::MatchRecord match_from_json(const json& j) {
  judge::MatchRecord m;
  m.a_id = j.value("a_id", "");
  m.b_id = j.value("b_id", "");
  m.a_presented_first = j.value("a_presented_first", true);
  std::string outcome = j.value("outcome", "draw");
  m.outcome = outcome == "a_wins" ? judge::Outcome::AWins
              : outcome == "b_wins" ? judge::Outcome::BWins
                                    : judge::Outcome::Draw;
  m.round = j.value("round", 0);
  m.transcript_ref = j.value("transcript_ref", "");
  return m;
}

json record_to_json(const IterationRecord& r) {
  json hyps = json::array();
  for (const auto& h : r.hypotheses) hyps.push_back({{"id", h.id}, {"text", h.text}});

  json likelihoods = json::object();
  for (const auto& [id, entry] : r.likelihoods) {
    json chunks = json::array();
    for (const auto& c : entry.chunks) {
      chunks.push_back({{"chunk_id", c.chunk_id},
                        {"similarity", c.similarity},
                        {"base", c.base},
                        {"method_match", c.method_match}});
    }
    likelihoods[id] = {{"aggregate", entry.aggregate},
                       {"floor_applied", entry.floor_applied},
                       {"chunks", chunks}};
  }

  json refinements = json::array();
  for (const auto& a : r.refinements) refinements.push_back(action_to_json(a));
  json matches = json::array();
  for (const auto& m : r.matches) matches.push_back(match_to_json(m));

  json out = {
      {"round", r.round},
      {"hypotheses", hyps},
      {"beliefs", beliefs_to_json(r.beliefs)},
      {"shannon_entropy", r.shannon_entropy},
      {"binary_entropies", r.binary_entropies},
      {"likelihoods", likelihoods},
      {"elo_ratings", r.elo_ratings},
      {"elo_delta", nullptr},
      {"refinements", refinements},
      {"matches", matches},
      {"degenerate_evidence", r.degenerate_evidence},
      {"timing", {{"chat_calls", r.timing.chat_calls}, {"embed_texts", r.timing.embed_texts}}},
  };
  if (r.elo_delta) out["elo_delta"] = *r.elo_delta;
  return out;
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  r.round = j.value("round", 0);
  for (const auto& h : j.value("hypotheses", json::array())) {
    r.hypotheses.push_back({h.value("id", ""), h.value("text", "")});
  }
  r.beliefs = beliefs_from_json(j.value("beliefs", json::array()));
  r.shannon_entropy = j.value("shannon_entropy", 0.0);
  if (j.contains("binary_entropies")) {
    r.binary_entropies = j["binary_entropies"].get<std::map<std::string, double>>();
  }
  const json likelihoods_json = j.value("likelihoods", json::object());
  for (const auto& [id, entry] : likelihoods_json.items()) {
    LikelihoodEntry e;
    e.aggregate = entry.value("aggregate", 0.0);
    e.floor_applied = entry.value("floor_applied", false);
    for (const auto& c : entry.value("chunks", json::array())) {
      e.chunks.push_back({c.value("chunk_id", ""), c.value("similarity", 0.0), c.value("base", 0.0),
                          c.value("method_match", 0)});
    }
    r.likelihoods.emplace(id, std::move(e));
  }
  if (j.contains("elo_ratings")) {
    r.elo_ratings = j["elo_ratings"].get<std::map<std::string, double>>();
  }
  if (j.contains("elo_delta") && !j["elo_delta"].is_null()) r.elo_delta = j["elo_delta"].get<double>();
  for (const auto& a : j.value("refinements", json::array())) r.refinements.push_back(action_from_json(a));
  for (const auto& m : j.value("matches", json::array())) r.matches.push_back(match_from_json(m));
  r.degenerate_evidence = j.value("degenerate_evidence", false);
  if (j.contains("timing")) {
    r.timing.chat_calls = j["timing"].value("chat_calls", int64_t{0});
    r.timing.embed_texts = j["timing"].value("embed_texts", int64_t{0});
  }
  return r;
}

}  // namespace

std::string serialize_run_state(const RunState& state) {
  json records = json::array();
  for (const auto& r : state.records) records.push_back(record_to_json(r));
  json hyps = json::array();
  for (const auto& h : state.hypotheses) hyps.push_back(hypothesis_to_json(h));
  json ratings = json::object();
  for (const auto& [id, rating] : state.ratings) {
    ratings[id] = {{"elo", rating.elo}, {"games_played", rating.games_played}};
  }
  json out = {
      {"version", state.version},
      {"config", config_to_json(state.config)},
      {"status", run_status_name(state.status)},
      {"records", records},
      {"hypotheses", hyps},
      {"beliefs", beliefs_to_json(state.beliefs)},
      {"ratings", ratings},
      {"next_hypothesis_index", state.next_hypothesis_index},
      {"failure_reason", state.failure_reason},
  };
  return out.dump(2) + "\n";
}

RunState deserialize_run_state(const std::string& bytes) {
  json j = json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::CorruptCheckpoint, "run state is not valid JSON");
  }
  if (j.value("version", -1) != 1) {
    throw Error(ErrorCode::CorruptCheckpoint, "run state schema version mismatch");
  }
  RunState state;
  state.version = 1;
  try {
    state.config = config_from_json(j.at("config"));
    state.status = run_status_from_name(j.at("status").get<std::string>());
    for (const auto& r : j.at("records")) state.records.push_back(record_from_json(r));
    for (const auto& h : j.at("hypotheses")) state.hypotheses.push_back(hypothesis_from_json(h));
    state.beliefs = beliefs_from_json(j.at("beliefs"));
    for (const auto& [id, rating] : j.at("ratings").items()) {
      state.ratings[id] = judge::Rating{id, rating.value("elo", 0.0), rating.value("games_played", 0)};
    }
    state.next_hypothesis_index = j.value("next_hypothesis_index", 0);
    state.failure_reason = j.value("failure_reason", "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptCheckpoint, std::string("run state field error: ") + e.what());
  }
  return state;
}

void checkpoint(const RunState& state, const std::filesystem::path& run_dir) {
  std::filesystem::create_directories(run_dir);
  {
    std::ofstream out(run_dir / "run_state.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write run_state.json in " + run_dir.string());
    out << serialize_run_state(state);
  }
  {
    std::ofstream out(run_dir / "rounds.jsonl", std::ios::binary | std::ios::trunc);
    for (const auto& r : state.records) out << record_to_json(r).dump() << "\n";
  }
  {
    std::ofstream out(run_dir / "matches.jsonl", std::ios::binary | std::ios::trunc);
    for (const auto& r : state.records) {
      for (const auto& m : r.matches) out << match_to_json(m).dump() << "\n";
    }
  }
}

RunState resume(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / "run_state.json", std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::CorruptCheckpoint, "no run_state.json in " + run_dir.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_run_state(buffer.str());
}

}  // namespace hypoloop::pipeline
