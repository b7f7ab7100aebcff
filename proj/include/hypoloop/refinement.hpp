#pragma once

#include <string>
#include <vector>

#include "hypoloop/belief.hpp"
#include "hypoloop/evidence.hpp"
#include "hypoloop/providers.hpp"

namespace hypoloop::refinement {

using belief::BeliefDistribution;
using belief::Hypothesis;

enum class Strategy { Deepening, Counterfactual, Hybridization };

const char* strategy_name(Strategy s);
Strategy strategy_from_letter(char letter);  // A -> Deepening, B -> Counterfactual, C -> Hybridization
char strategy_letter(Strategy s);

struct RefinementAction {
  std::vector<std::string> target_ids;  // Hybridization >= 2, others exactly 1
  Strategy strategy = Strategy::Deepening;
  std::string produced_text;
  std::string produced_id;
  int round = 0;
  char declared_letter = 'A';      // what the provider said it did
  bool strategy_mismatch = false;  // declared letter differs from the request
};

struct RefinementPolicy {
  double likelihood_low_water = 0.2;    // below this, the evidence contradicts the hypothesis
  double peer_cosine_threshold = 0.85;  // at or above this, two candidates share a theme
};

// Ids whose binary entropy meets tau_s, ordered by descending entropy with
// ties broken by ascending id.
std::vector<std::string> select_for_refinement(const BeliefDistribution& beliefs, double tau_s);

// Rule order: Counterfactual when the aggregated likelihood sits under the
// low-water mark; Hybridization when some selected peer's embedding cosine
// reaches the threshold; Deepening otherwise.
Strategy choose_strategy(const Hypothesis& hypothesis, double aggregated_likelihood,
                         const std::vector<Hypothesis>& selected_peers,
                         const RefinementPolicy& policy = {});

// Rewrites the target(s) through the refinement prompt. The returned
// hypothesis carries a fresh id, the parent lineage plus one new entry, and
// the provider-declared strategy letter; a declaration that differs from the
// requested strategy is recorded, not rejected.
RefinementAction refine(const std::vector<Hypothesis>& targets,
                        const std::vector<evidence::EvidenceSet>& target_evidence, Strategy strategy,
                        const std::string& question, providers::ProviderGateway& gateway,
                        const std::string& new_id, int round);

Hypothesis build_refined_hypothesis(const std::vector<Hypothesis>& targets,
                                    const RefinementAction& action);

struct ApplyResult {
  std::vector<Hypothesis> hypotheses;
  BeliefDistribution beliefs;  // same values, successor ids
  std::vector<std::pair<std::string, std::string>> replacements;  // (replaced id, successor id)
};

// Replaces refined hypotheses in place. Deepening/Counterfactual swap their
// single target's slot; Hybridization replaces only the parent with the
// highest binary entropy and leaves the other parents untouched, so the set
// size never changes. Beliefs carry over to successors unchanged.
// Errors: UnknownTarget.
ApplyResult apply_refinements(const std::vector<Hypothesis>& current, const BeliefDistribution& beliefs,
                              const std::vector<RefinementAction>& actions);

double embedding_cosine(const Hypothesis& a, const Hypothesis& b);

}  // namespace hypoloop::refinement
