#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypoloop/belief.hpp"
#include "hypoloop/providers.hpp"

namespace hypoloop::proposal {

using belief::Hypothesis;

struct SamplingRound {
  double temperature = 0.7;
  std::string template_id = "generation";
  int samples = 10;
};

struct SamplingPlan {
  std::vector<SamplingRound> rounds;

  static SamplingPlan default_plan();  // temperatures 0.7 / 1.0 / 1.3, 10 samples each
};

void validate_plan(const SamplingPlan& plan);

struct ClusterAssignment {
  size_t k = 0;
  std::vector<size_t> labels;                       // one per input vector, in [0, k)
  std::vector<std::vector<double>> centroids;      // k centroids
  double inertia = 0.0;                             // sum of squared distances to assigned centroid
  std::vector<double> inertia_trace;               // winning restart, one value per Lloyd iteration
  std::vector<std::vector<double>> restart_traces;  // per-restart iteration traces
};

// Multi-round sampled generation. Empty responses are dropped and texts that
// are identical after whitespace normalization are collapsed to their first
// occurrence. Each hypothesis is tagged with the sampling round that produced
// it; ids are assigned by the caller-supplied prefix and a running index.
// Errors: ProviderError with round context; TooFewCandidates when fewer than
// min_candidates distinct texts survive.
std::vector<Hypothesis> generate_candidates(const std::string& question, const SamplingPlan& plan,
                                            providers::ProviderGateway& gateway,
                                            size_t min_candidates, const std::string& id_prefix = "c");

// Whitespace-normalized text used for exact-duplicate detection.
std::string normalize_text(const std::string& text);

// One vector per text, L2-normalized here. Errors: EmptyInput;
// DimensionMismatch when the provider returns mixed dimensions.
std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts,
                                             providers::ProviderGateway& gateway);

struct KMeansOptions {
  int max_iters = 100;
  int restarts = 10;
  double relative_tolerance = 1e-6;
};

// Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia,
// deterministic for a fixed seed. Empty clusters are repaired by reassigning
// the point farthest from its centroid. Errors: KTooLarge; DimensionMismatch.
ClusterAssignment kmeans_cluster(const std::vector<std::vector<double>>& vectors, size_t k,
                                 uint64_t seed, const KMeansOptions& options = {});

// Per cluster, the member closest to the centroid (ties by lowest input
// index); output order follows cluster index order.
std::vector<Hypothesis> select_representatives(const std::vector<Hypothesis>& hypotheses,
                                               const ClusterAssignment& assignment);

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hypoloop::proposal
