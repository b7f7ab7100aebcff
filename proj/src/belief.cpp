#include "hypoloop/belief.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace hypoloop::belief {

namespace {

constexpr double kSumTolerance = 1e-9;

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

bool scores_in_range(const ScoreTriple& s) {
  return in_unit_interval(s.novelty) && in_unit_interval(s.relevance) && in_unit_interval(s.feasibility);
}

void validate_weights(const WeightConfig& w) {
  if (!std::isfinite(w.alpha) || !std::isfinite(w.beta) || !std::isfinite(w.gamma) ||
      w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0) {
    throw Error(ErrorCode::InvalidWeights, "weights must be finite and nonnegative");
  }
  if (std::abs(w.alpha + w.beta + w.gamma - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::InvalidWeights, "weights must sum to 1");
  }
}

void validate_hypothesis(const Hypothesis& h) {
  if (h.text.empty()) {
    throw Error(ErrorCode::EmptyInput, "hypothesis " + h.id + " has empty text");
  }
  for (size_t i = 1; i < h.lineage.size(); ++i) {
    if (h.lineage[i].round <= h.lineage[i - 1].round) {
      throw Error(ErrorCode::OutOfRange, "lineage rounds of " + h.id + " are not strictly increasing");
    }
  }
}

BeliefDistribution BeliefDistribution::from_entries(std::vector<BeliefEntry> entries) {
  if (entries.empty()) {
    throw Error(ErrorCode::EmptyHypothesisSet, "belief distribution needs at least one entry");
  }
  std::unordered_set<std::string> seen;
  double sum = 0.0;
  for (const auto& e : entries) {
    if (!std::isfinite(e.belief) || e.belief < 0.0) {
      throw Error(ErrorCode::InvalidDistribution, "belief of " + e.hypothesis_id + " is negative or non-finite");
    }
    if (!seen.insert(e.hypothesis_id).second) {
      throw Error(ErrorCode::InvalidDistribution, "duplicate hypothesis id " + e.hypothesis_id);
    }
    sum += e.belief;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::InvalidDistribution, "beliefs sum to " + std::to_string(sum) + ", expected 1");
  }
  for (auto& e : entries) e.belief /= sum;
  return BeliefDistribution(std::move(entries));
}

double BeliefDistribution::belief_of(const std::string& hypothesis_id) const {
  for (const auto& e : entries_) {
    if (e.hypothesis_id == hypothesis_id) return e.belief;
  }
  throw Error(ErrorCode::UnknownTarget, "no belief entry for " + hypothesis_id);
}

bool BeliefDistribution::contains(const std::string& hypothesis_id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const BeliefEntry& e) { return e.hypothesis_id == hypothesis_id; });
}

BeliefDistribution BeliefDistribution::with_renamed_id(const std::string& old_id,
                                                       const std::string& new_id) const {
  std::vector<BeliefEntry> renamed = entries_;
  bool found = false;
  for (auto& e : renamed) {
    if (e.hypothesis_id == old_id) {
      e.hypothesis_id = new_id;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::UnknownTarget, "no belief entry for " + old_id);
  return BeliefDistribution(std::move(renamed));
}

BeliefDistribution initial_beliefs(const std::vector<std::string>& ids,
                                   const std::vector<ScoreTriple>& scores,
                                   const WeightConfig& weights) {
  if (ids.empty() || scores.empty()) {
    throw Error(ErrorCode::EmptyHypothesisSet, "initial_beliefs needs at least one hypothesis");
  }
  if (ids.size() != scores.size()) {
    throw Error(ErrorCode::DimensionMismatch, "ids and scores differ in length");
  }
  validate_weights(weights);

  std::vector<double> weighted(scores.size());
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!scores_in_range(scores[i])) {
      throw Error(ErrorCode::OutOfRange, "scores of " + ids[i] + " outside [0,1]");
    }
    weighted[i] = weights.alpha * scores[i].novelty + weights.beta * scores[i].relevance +
                  weights.gamma * scores[i].feasibility;
    total += weighted[i];
  }
  if (total <= 0.0) {
    throw Error(ErrorCode::AllZeroScores, "every weighted score is zero; prior undefined");
  }

  std::vector<BeliefEntry> entries(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    entries[i] = BeliefEntry{ids[i], weighted[i] / total};
  }
  return BeliefDistribution::from_entries(std::move(entries));
}

BeliefDistribution posterior_update(const BeliefDistribution& prior,
                                    const std::vector<double>& likelihoods) {
  const auto& entries = prior.entries();
  if (likelihoods.size() != entries.size()) {
    throw Error(ErrorCode::DimensionMismatch, "likelihood count does not match prior size");
  }
  std::vector<double> products(entries.size());
  double normalizer = 0.0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(likelihoods[i]) || likelihoods[i] < 0.0) {
      throw Error(ErrorCode::OutOfRange, "likelihood for " + entries[i].hypothesis_id +
                                             " is negative or non-finite");
    }
    products[i] = likelihoods[i] * entries[i].belief;
    normalizer += products[i];
  }
  if (normalizer <= 0.0) {
    throw Error(ErrorCode::DegenerateEvidence, "all likelihood-prior products are zero");
  }
  std::vector<BeliefEntry> posterior(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    posterior[i] = BeliefEntry{entries[i].hypothesis_id, products[i] / normalizer};
  }
  return BeliefDistribution::from_entries(std::move(posterior));
}

double shannon_entropy(const BeliefDistribution& dist) {
  double h = 0.0;
  for (const auto& e : dist.entries()) {
    if (e.belief > 0.0) h -= e.belief * std::log2(e.belief);
  }
  return h;
}

double binary_entropy(double belief) {
  if (!std::isfinite(belief) || belief < 0.0 || belief > 1.0) {
    throw Error(ErrorCode::OutOfRange, "belief must lie in [0,1]");
  }
  if (belief == 0.0 || belief == 1.0) return 0.0;
  const double q = 1.0 - belief;
  return -belief * std::log2(belief) - q * std::log2(q);
}

}  // namespace hypoloop::belief
