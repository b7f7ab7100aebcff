#include "hypoloop/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace hypoloop::refinement {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Deepening: return "deepening";
    case Strategy::Counterfactual: return "counterfactual";
    case Strategy::Hybridization: return "hybridization";
  }
  return "deepening";
}

Strategy strategy_from_letter(char letter) {
  switch (letter) {
    case 'A': return Strategy::Deepening;
    case 'B': return Strategy::Counterfactual;
    case 'C': return Strategy::Hybridization;
  }
  throw Error(ErrorCode::InvalidStrategy, std::string("letter '") + letter + "'");
}

char strategy_letter(Strategy s) {
  switch (s) {
    case Strategy::Deepening: return 'A';
    case Strategy::Counterfactual: return 'B';
    case Strategy::Hybridization: return 'C';
  }
  return 'A';
}

std::vector<std::string> select_for_refinement(const BeliefDistribution& beliefs, double tau_s) {
  if (tau_s <= 0.0 || tau_s > 1.0) {
    throw Error(ErrorCode::OutOfRange, "tau_s must lie in (0,1]");
  }
  struct Selected {
    std::string id;
    double entropy;
  };
  std::vector<Selected> selected;
  for (const auto& entry : beliefs.entries()) {
    double s = belief::binary_entropy(entry.belief);
    if (s >= tau_s) selected.push_back({entry.hypothesis_id, s});
  }
  std::sort(selected.begin(), selected.end(), [](const Selected& a, const Selected& b) {
    if (a.entropy != b.entropy) return a.entropy > b.entropy;
    return a.id < b.id;
  });
  std::vector<std::string> ids;
  ids.reserve(selected.size());
  for (auto& s : selected) ids.push_back(std::move(s.id));
  return ids;
}

double embedding_cosine(const Hypothesis& a, const Hypothesis& b) {
  if (!a.embedding || !b.embedding || a.embedding->size() != b.embedding->size()) {
    throw Error(ErrorCode::DimensionMismatch, "cosine needs embeddings of equal dimension");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.embedding->size(); ++i) {
    dot += (*a.embedding)[i] * (*b.embedding)[i];
    na += (*a.embedding)[i] * (*a.embedding)[i];
    nb += (*b.embedding)[i] * (*b.embedding)[i];
  }
  if (na <= 0.0 || nb <= 0.0) throw Error(ErrorCode::DimensionMismatch, "zero-norm embedding");
  return dot / std::sqrt(na * nb);
}

Strategy choose_strategy(const Hypothesis& hypothesis, double aggregated_likelihood,
                         const std::vector<Hypothesis>& selected_peers, const RefinementPolicy& policy) {
  if (aggregated_likelihood < policy.likelihood_low_water) {
    return Strategy::Counterfactual;
  }
  for (const auto& peer : selected_peers) {
    if (peer.id == hypothesis.id) continue;
    if (embedding_cosine(hypothesis, peer) >= policy.peer_cosine_threshold) {
      return Strategy::Hybridization;
    }
  }
  return Strategy::Deepening;
}

namespace {

std::string join_target_texts(const std::vector<Hypothesis>& targets) {
  if (targets.size() == 1) return targets.front().text;
  std::ostringstream joined;
  for (size_t i = 0; i < targets.size(); ++i) {
    if (i > 0) joined << "\n";
    joined << (i + 1) << ") " << targets[i].text;
  }
  return joined.str();
}

std::string top_snippets(const std::vector<evidence::EvidenceSet>& sets, size_t limit) {
  std::ostringstream out;
  size_t count = 0;
  for (const auto& set : sets) {
    for (const auto& scored : set.chunks) {
      if (count >= limit) return out.str();
      if (count > 0) out << "\n---\n";
      out << scored.chunk.text;
      ++count;
    }
  }
  return count == 0 ? std::string("(no evidence retrieved)") : out.str();
}

}  // namespace

RefinementAction refine(const std::vector<Hypothesis>& targets,
                        const std::vector<evidence::EvidenceSet>& target_evidence, Strategy strategy,
                        const std::string& question, providers::ProviderGateway& gateway,
                        const std::string& new_id, int round) {
  if (strategy == Strategy::Hybridization) {
    if (targets.size() < 2) {
      throw Error(ErrorCode::OutOfRange, "hybridization needs at least two targets");
    }
  } else if (targets.size() != 1) {
    throw Error(ErrorCode::OutOfRange, "single-target strategy got " + std::to_string(targets.size()));
  }

  auto [system, user] = providers::render_prompt("refinement", {
      {"research_question", question},
      {"hypothesis", join_target_texts(targets)},
      {"evidence_snippets", top_snippets(target_evidence, 5)},
  });
  providers::ChatRequest request{system, user, gateway.config().temperature_default, "refinement"};
  providers::RefinementReply reply = gateway.ask_parsed(request, providers::parse_refinement_json);

  RefinementAction action;
  for (const auto& t : targets) action.target_ids.push_back(t.id);
  action.strategy = strategy;
  action.produced_text = reply.optimized_hypothesis;
  action.produced_id = new_id;
  action.round = round;
  action.declared_letter = reply.strategy_letter;
  action.strategy_mismatch = strategy_from_letter(reply.strategy_letter) != strategy;
  return action;
}

Hypothesis build_refined_hypothesis(const std::vector<Hypothesis>& targets,
                                    const RefinementAction& action) {
  // The replaced parent's lineage is inherited; for hybridization that parent
  // is resolved at apply time, so inherit from the first target here and let
  // the new entry list every parent.
  Hypothesis refined;
  refined.id = action.produced_id;
  refined.text = action.produced_text;
  refined.lineage = targets.front().lineage;
  refined.sampling_round = targets.front().sampling_round;
  belief::LineageEntry entry;
  entry.round = action.round;
  entry.strategy = strategy_name(action.strategy);
  entry.parent_ids = action.target_ids;
  refined.lineage.push_back(std::move(entry));
  belief::validate_hypothesis(refined);
  return refined;
}

ApplyResult apply_refinements(const std::vector<Hypothesis>& current, const BeliefDistribution& beliefs,
                              const std::vector<RefinementAction>& actions) {
  std::vector<Hypothesis> next = current;
  BeliefDistribution next_beliefs = beliefs;
  std::vector<std::pair<std::string, std::string>> replacements;

  std::unordered_map<std::string, size_t> slot_of;
  for (size_t i = 0; i < next.size(); ++i) slot_of.emplace(next[i].id, i);

  for (const auto& action : actions) {
    std::vector<const Hypothesis*> targets;
    for (const auto& id : action.target_ids) {
      auto it = slot_of.find(id);
      if (it == slot_of.end()) {
        throw Error(ErrorCode::UnknownTarget, "refinement target " + id + " not in the current set");
      }
      targets.push_back(&next[it->second]);
    }

    // The slot that gets replaced: the single target, or for hybridization
    // the parent with the highest binary entropy (ties by ascending id).
    const Hypothesis* replaced = targets.front();
    if (action.strategy == Strategy::Hybridization) {
      double best = -1.0;
      for (const Hypothesis* t : targets) {
        double s = belief::binary_entropy(next_beliefs.belief_of(t->id));
        if (s > best || (s == best && t->id < replaced->id)) {
          best = s;
          replaced = t;
        }
      }
    }

    std::vector<Hypothesis> ordered_targets;
    ordered_targets.push_back(*replaced);
    for (const Hypothesis* t : targets) {
      if (t != replaced) ordered_targets.push_back(*t);
    }
    Hypothesis refined = build_refined_hypothesis(ordered_targets, action);

    size_t slot = slot_of.at(replaced->id);
    std::string old_id = replaced->id;
    slot_of.erase(old_id);
    slot_of.emplace(refined.id, slot);
    next_beliefs = next_beliefs.with_renamed_id(old_id, refined.id);
    replacements.emplace_back(old_id, refined.id);
    next[slot] = std::move(refined);
  }

  return ApplyResult{std::move(next), std::move(next_beliefs), std::move(replacements)};
}

}  // namespace hypoloop::refinement
