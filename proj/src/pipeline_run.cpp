#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hypoloop/parallel.hpp"
#include "hypoloop/pipeline.hpp"
#include "hypoloop/rng.hpp"

namespace hypoloop::pipeline {

namespace {

using belief::BeliefDistribution;
using belief::Hypothesis;

class Runner {
 public:
  Runner(RunState state, const ProviderBundle& bundle, const evidence::VectorStore& store,
         std::filesystem::path run_dir, RoundObserver observer)
      : state_(std::move(state)),
        store_(store),
        run_dir_(std::move(run_dir)),
        observer_(std::move(observer)),
        transcripts_((std::filesystem::create_directories(run_dir_),
                      (run_dir_ / "transcripts.jsonl").string())),
        gateway_(bundle.chat, bundle.embedder, state_.config.providers.chat, &transcripts_) {}

  RunState execute() {
    if (store_.size() == 0) throw Error(ErrorCode::EmptyStore, "run needs a nonempty store");
    if (state_.status == RunStatus::Failed) {
      // A failed checkpoint holds the last completed round; retry from there.
      state_.status = RunStatus::Running;
      state_.failure_reason.clear();
    }
    try {
      if (state_.records.empty()) round_zero();
      while (state_.status == RunStatus::Running) {
        validation_round(static_cast<int>(state_.records.size()));
      }
    } catch (const std::exception& e) {
      state_.status = RunStatus::Failed;
      state_.failure_reason = e.what();
      checkpoint(state_, run_dir_);
      throw;
    }
    std::ofstream report_out(run_dir_ / "report.txt", std::ios::binary | std::ios::trunc);
    report_out << report(state_, ReportFormat::Table);
    return std::move(state_);
  }

 private:
  const RunConfig& config() const { return state_.config; }

  void finish_round(IterationRecord record, size_t chat_before, size_t embeds_before) {
    record.timing.chat_calls = static_cast<int64_t>(gateway_.chat_call_count() - chat_before);
    record.timing.embed_texts = static_cast<int64_t>(embedded_texts_ - embeds_before);
    state_.records.push_back(std::move(record));
    checkpoint(state_, run_dir_);
    if (observer_) observer_(state_, state_.records.back());
  }

  void round_zero() {
    size_t chat_before = gateway_.chat_call_count();
    size_t embeds_before = embedded_texts_;

    auto candidates = proposal::generate_candidates(config().question, config().sampling_plan, gateway_,
                                                    static_cast<size_t>(config().n), "h");
    state_.next_hypothesis_index = static_cast<int>(candidates.size());

    std::vector<std::string> texts;
    texts.reserve(candidates.size());
    for (const auto& c : candidates) texts.push_back(c.text);
    auto vectors = proposal::embed_batch(texts, gateway_);
    embedded_texts_ += texts.size();
    for (size_t i = 0; i < candidates.size(); ++i) candidates[i].embedding = std::move(vectors[i]);

    auto assignment = proposal::kmeans_cluster(
        [&] {
          std::vector<std::vector<double>> vs;
          for (const auto& c : candidates) vs.push_back(*c.embedding);
          return vs;
        }(),
        static_cast<size_t>(config().n), derive_seed(config().seed, "kmeans", 0));
    auto selected = proposal::select_representatives(candidates, assignment);

    parallel_for(selected.size(), config().providers.chat.max_parallel, [&](size_t i) {
      auto scores = providers::score_nrf(gateway_, selected[i].text, config().question,
                                         config().domain_keyword);
      selected[i].scores = belief::ScoreTriple{scores.novelty, scores.relevance, scores.feasibility};
    });

    std::vector<std::string> ids;
    std::vector<belief::ScoreTriple> score_list;
    for (const auto& h : selected) {
      ids.push_back(h.id);
      score_list.push_back(*h.scores);
    }
    BeliefDistribution prior = belief::initial_beliefs(ids, score_list, config().weights);

    IterationRecord record;
    record.round = 0;
    for (const auto& h : selected) record.hypotheses.push_back({h.id, h.text});
    record.beliefs = prior.entries();
    record.shannon_entropy = belief::shannon_entropy(prior);
    for (const auto& e : prior.entries()) {
      record.binary_entropies[e.hypothesis_id] = belief::binary_entropy(e.belief);
    }

    state_.hypotheses = std::move(selected);
    state_.beliefs = prior.entries();
    finish_round(std::move(record), chat_before, embeds_before);
  }

  evidence::EvidenceSet retrieve_for(const Hypothesis& h) {
    ++embedded_texts_;  // one logical query embedding, whether or not the cache serves it
    auto cached = retrieval_cache_.find(h.text);
    if (cached != retrieval_cache_.end()) {
      evidence::EvidenceSet set = cached->second;
      set.hypothesis_id = h.id;  // same text may belong to a renamed successor
      return set;
    }
    evidence::EvidenceSet set =
        evidence::retrieve_topk(store_, config().question, h, static_cast<size_t>(config().k), gateway_);
    retrieval_cache_.emplace(h.text, set);
    return set;
  }

  void validation_round(int round) {
    size_t chat_before = gateway_.chat_call_count();
    size_t embeds_before = embedded_texts_;
    const size_t n = state_.hypotheses.size();
    BeliefDistribution prior = BeliefDistribution::from_entries(state_.beliefs);
    for (size_t i = 0; i < n; ++i) {
      if (prior.entries()[i].hypothesis_id != state_.hypotheses[i].id) {
        throw Error(ErrorCode::InvalidDistribution, "belief entries misaligned with the hypothesis set");
      }
    }

    // Evidence retrieval, then likelihood scoring fanned out per chunk.
    std::vector<evidence::EvidenceSet> sets(n);
    for (size_t i = 0; i < n; ++i) sets[i] = retrieve_for(state_.hypotheses[i]);

    std::vector<std::pair<size_t, size_t>> tasks;
    for (size_t i = 0; i < n; ++i) {
      sets[i].likelihoods.resize(sets[i].chunks.size());
      for (size_t j = 0; j < sets[i].chunks.size(); ++j) tasks.emplace_back(i, j);
    }
    parallel_for(tasks.size(), config().providers.chat.max_parallel, [&](size_t t) {
      auto [i, j] = tasks[t];
      const auto& chunk = sets[i].chunks[j].chunk;
      double base = evidence::score_base_likelihood(state_.hypotheses[i], chunk, gateway_,
                                                    config().domain_keyword);
      int match = evidence::score_method_match(config().question, state_.hypotheses[i], chunk,
                                               gateway_, config().domain_keyword);
      sets[i].likelihoods[j] = {base, match, evidence::evidence_likelihood(base, match)};
    });

    std::vector<double> likelihoods(n, 0.0);
    std::map<std::string, LikelihoodEntry> likelihood_table;
    for (size_t i = 0; i < n; ++i) {
      LikelihoodEntry entry;
      if (sets[i].chunks.empty()) {
        entry.aggregate = config().evidence_floor;
        entry.floor_applied = true;
      } else {
        std::vector<double> contributions;
        for (const auto& rec : sets[i].likelihoods) contributions.push_back(rec.contribution);
        entry.aggregate = evidence::aggregate_likelihood(contributions);
      }
      for (size_t j = 0; j < sets[i].chunks.size(); ++j) {
        entry.chunks.push_back({sets[i].chunks[j].chunk.chunk_id, sets[i].chunks[j].similarity,
                                sets[i].likelihoods[j].base, sets[i].likelihoods[j].method_match});
      }
      likelihoods[i] = entry.aggregate;
      likelihood_table.emplace(state_.hypotheses[i].id, std::move(entry));
    }

    bool degenerate = false;
    BeliefDistribution posterior = [&] {
      try {
        return belief::posterior_update(prior, likelihoods);
      } catch (const Error& e) {
        if (e.code != ErrorCode::DegenerateEvidence) throw;
        degenerate = true;  // keep the prior for this round and flag it
        return prior;
      }
    }();

    IterationRecord record;
    record.round = round;
    for (const auto& h : state_.hypotheses) record.hypotheses.push_back({h.id, h.text});
    record.beliefs = posterior.entries();
    record.shannon_entropy = belief::shannon_entropy(posterior);
    for (const auto& e : posterior.entries()) {
      record.binary_entropies[e.hypothesis_id] = belief::binary_entropy(e.belief);
    }
    record.likelihoods = std::move(likelihood_table);
    record.degenerate_evidence = degenerate;

    // Tournament happens before refinement, so the round's ELO rates the
    // texts that were just validated.
    judge::EloTable table;
    table.ratings() = state_.ratings;
    auto tournament = judge::run_tournament(table, state_.hypotheses, config().reference_text,
                                            config().question, config().domain_keyword, gateway_,
                                            config().elo, config().seed, round);
    state_.ratings = table.ratings();
    record.elo_delta = tournament.elo_delta;
    record.matches = std::move(tournament.matches);
    for (const auto& h : state_.hypotheses) record.elo_ratings[h.id] = state_.ratings.at(h.id).elo;
    record.elo_ratings[judge::kReferenceId] = state_.ratings.at(judge::kReferenceId).elo;

    // Termination checks; entropy convergence needs two validation rounds.
    std::optional<RunStatus> terminal;
    if (round >= 2 &&
        std::abs(record.shannon_entropy - state_.records.back().shannon_entropy) < config().epsilon_h) {
      terminal = RunStatus::ConvergedEntropy;
    } else if (round >= config().t_max) {
      terminal = RunStatus::MaxIterations;
    }

    if (!terminal) {
      record.refinements = refine_set(posterior, sets, round);
    } else {
      state_.beliefs = posterior.entries();
    }

    if (terminal) state_.status = *terminal;
    finish_round(std::move(record), chat_before, embeds_before);
  }

  std::vector<refinement::RefinementAction> refine_set(const BeliefDistribution& posterior,
                                                       const std::vector<evidence::EvidenceSet>& sets,
                                                       int round) {
    auto selected = refinement::select_for_refinement(posterior, config().tau_s);
    size_t cap = config().refinement_cap > 0 ? static_cast<size_t>(config().refinement_cap)
                                             : (state_.hypotheses.size() + 1) / 2;
    if (selected.size() > cap) selected.resize(cap);

    std::unordered_map<std::string, size_t> index_of;
    for (size_t i = 0; i < state_.hypotheses.size(); ++i) index_of.emplace(state_.hypotheses[i].id, i);
    auto aggregate_of = [&](const std::string& id) {
      size_t i = index_of.at(id);
      if (sets[i].chunks.empty()) return config().evidence_floor;
      std::vector<double> contributions;
      for (const auto& rec : sets[i].likelihoods) contributions.push_back(rec.contribution);
      return evidence::aggregate_likelihood(contributions);
    };

    std::unordered_set<std::string> used;
    std::vector<refinement::RefinementAction> actions;
    for (const auto& id : selected) {
      if (used.count(id)) continue;
      const Hypothesis& target = state_.hypotheses[index_of.at(id)];

      std::vector<Hypothesis> peers;
      for (const auto& peer_id : selected) {
        if (peer_id == id || used.count(peer_id)) continue;
        peers.push_back(state_.hypotheses[index_of.at(peer_id)]);
      }

      refinement::Strategy strategy =
          refinement::choose_strategy(target, aggregate_of(id), peers, config().refinement_policy);

      std::vector<Hypothesis> targets{target};
      std::vector<evidence::EvidenceSet> target_evidence{sets[index_of.at(id)]};
      if (strategy == refinement::Strategy::Hybridization) {
        const Hypothesis* partner = nullptr;
        double best = -2.0;
        for (const auto& peer : peers) {
          double cosine = refinement::embedding_cosine(target, peer);
          if (cosine >= config().refinement_policy.peer_cosine_threshold &&
              (cosine > best || (cosine == best && partner && peer.id < partner->id))) {
            best = cosine;
            partner = &state_.hypotheses[index_of.at(peer.id)];
          }
        }
        targets.push_back(*partner);
        target_evidence.push_back(sets[index_of.at(partner->id)]);
        used.insert(partner->id);
      }

      std::string new_id = "h" + std::to_string(state_.next_hypothesis_index++);
      actions.push_back(refinement::refine(targets, target_evidence, strategy, config().question,
                                           gateway_, new_id, round));
      used.insert(id);
    }

    auto applied = refinement::apply_refinements(state_.hypotheses, posterior, actions);

    // Successors inherit their parent's rating row.
    for (const auto& [old_id, new_id] : applied.replacements) {
      auto it = state_.ratings.find(old_id);
      if (it == state_.ratings.end()) continue;
      judge::Rating moved = it->second;
      moved.entity_id = new_id;
      state_.ratings.erase(it);
      state_.ratings.emplace(new_id, std::move(moved));
    }

    // Refined texts get fresh embeddings and N/R/F scores. The scores are
    // recorded for analysis; beliefs stay inherited unless the reset switch
    // is on.
    std::unordered_set<std::string> produced;
    for (const auto& a : actions) produced.insert(a.produced_id);
    for (auto& h : applied.hypotheses) {
      if (!produced.count(h.id)) continue;
      h.embedding = proposal::embed_batch({h.text}, gateway_)[0];
      ++embedded_texts_;
      auto scores = providers::score_nrf(gateway_, h.text, config().question, config().domain_keyword);
      h.scores = belief::ScoreTriple{scores.novelty, scores.relevance, scores.feasibility};
    }

    state_.hypotheses = std::move(applied.hypotheses);
    if (config().belief_inheritance) {
      state_.beliefs = applied.beliefs.entries();
    } else {
      std::vector<std::string> ids;
      std::vector<belief::ScoreTriple> score_list;
      for (const auto& h : state_.hypotheses) {
        ids.push_back(h.id);
        score_list.push_back(*h.scores);
      }
      state_.beliefs = belief::initial_beliefs(ids, score_list, config().weights).entries();
    }
    return actions;
  }

  RunState state_;
  const evidence::VectorStore& store_;
  std::filesystem::path run_dir_;
  RoundObserver observer_;
  providers::TranscriptLog transcripts_;
  providers::ProviderGateway gateway_;
  std::unordered_map<std::string, evidence::EvidenceSet> retrieval_cache_;
  size_t embedded_texts_ = 0;
};

}  // namespace

RunState run(const RunConfig& config, const ProviderBundle& bundle, const evidence::VectorStore& store,
             const std::filesystem::path& run_dir, const RoundObserver& observer) {
  validate_config(config);
  std::filesystem::create_directories(run_dir);
  {
    std::ofstream out(run_dir / "config.json", std::ios::binary | std::ios::trunc);
    out << config_to_json_string(config);
  }
  RunState state;
  state.config = config;
  Runner runner(std::move(state), bundle, store, run_dir, observer);
  return runner.execute();
}

RunState continue_run(RunState state, const ProviderBundle& bundle,
                      const evidence::VectorStore& store, const std::filesystem::path& run_dir,
                      const RoundObserver& observer) {
  validate_config(state.config);
  Runner runner(std::move(state), bundle, store, run_dir, observer);
  return runner.execute();
}

}  // namespace hypoloop::pipeline
