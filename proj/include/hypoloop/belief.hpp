#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypoloop/errors.hpp"

namespace hypoloop::belief {

// Novelty / relevance / feasibility judgments, each in [0,1]. Values are
// clamped at the parsing layer; this module rejects out-of-range inputs.
struct ScoreTriple {
  double novelty = 0.0;
  double relevance = 0.0;
  double feasibility = 0.0;
};

bool scores_in_range(const ScoreTriple& s);

// Importance weights for the three score dimensions. Must be nonnegative and
// sum to 1 within 1e-9.
struct WeightConfig {
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  double gamma = 1.0 / 3.0;
};

void validate_weights(const WeightConfig& w);

struct LineageEntry {
  int round = 0;
  std::string strategy;  // "generated", "deepening", "counterfactual", "hybridization"
  std::vector<std::string> parent_ids;
};

struct Hypothesis {
  std::string id;
  std::string text;
  std::optional<ScoreTriple> scores;           // unset until scored
  std::vector<LineageEntry> lineage;           // rounds strictly increasing
  std::optional<std::vector<double>> embedding;  // unset until embedded
  int sampling_round = 0;  // which sampling-plan round produced the text
};

// Throws on empty text or non-increasing lineage rounds.
void validate_hypothesis(const Hypothesis& h);

struct BeliefEntry {
  std::string hypothesis_id;
  double belief = 0.0;
};

// Probability distribution over the current hypothesis set. Construction
// validates (nonnegative, unique ids, sum within 1e-9 of 1) and then
// renormalizes so rounding drift never accumulates across updates.
class BeliefDistribution {
 public:
  static BeliefDistribution from_entries(std::vector<BeliefEntry> entries);

  const std::vector<BeliefEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  // Throws UnknownTarget for ids not in the distribution.
  double belief_of(const std::string& hypothesis_id) const;
  bool contains(const std::string& hypothesis_id) const;

  // Same belief values under new ids, preserving order. Used when refinement
  // replaces a hypothesis and its successor inherits the belief.
  BeliefDistribution with_renamed_id(const std::string& old_id, const std::string& new_id) const;

 private:
  explicit BeliefDistribution(std::vector<BeliefEntry> entries) : entries_(std::move(entries)) {}
  std::vector<BeliefEntry> entries_;
};

// Prior over the hypothesis set: entry i is the weighted N/R/F sum of
// hypothesis i normalized by the total over all hypotheses.
// Errors: EmptyHypothesisSet; AllZeroScores when every weighted sum is zero;
// OutOfRange for scores outside [0,1].
BeliefDistribution initial_beliefs(const std::vector<std::string>& ids,
                                   const std::vector<ScoreTriple>& scores,
                                   const WeightConfig& weights);

// Bayes update: posterior_i = L_i * prior_i / sum_j L_j * prior_j.
// Likelihoods are aligned index-wise with the prior's entries and must be
// nonnegative and finite (any positive scale is accepted; it cancels).
// Errors: DegenerateEvidence when every product L_j * prior_j is zero.
BeliefDistribution posterior_update(const BeliefDistribution& prior,
                                    const std::vector<double>& likelihoods);

// Shannon entropy of the distribution in bits, with 0*log2(0) := 0.
double shannon_entropy(const BeliefDistribution& dist);

// Binary entropy of a single belief in bits; 0 at the endpoints, 1 at 0.5.
// Errors: OutOfRange for belief outside [0,1].
double binary_entropy(double belief);

}  // namespace hypoloop::belief
