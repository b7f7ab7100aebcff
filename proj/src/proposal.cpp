#include "hypoloop/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "hypoloop/rng.hpp"

namespace hypoloop::proposal {

SamplingPlan SamplingPlan::default_plan() {
  return SamplingPlan{{
      {0.7, "generation", 10},
      {1.0, "generation", 10},
      {1.3, "generation", 10},
  }};
}

void validate_plan(const SamplingPlan& plan) {
  if (plan.rounds.empty()) {
    throw Error(ErrorCode::EmptyInput, "sampling plan needs at least one round");
  }
  for (const auto& round : plan.rounds) {
    if (round.samples < 1) {
      throw Error(ErrorCode::OutOfRange, "samples-per-round must be >= 1");
    }
    if (round.temperature < 0.0) {
      throw Error(ErrorCode::OutOfRange, "temperature must be >= 0");
    }
  }
}

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

std::vector<Hypothesis> generate_candidates(const std::string& question, const SamplingPlan& plan,
                                            providers::ProviderGateway& gateway,
                                            size_t min_candidates, const std::string& id_prefix) {
  if (question.empty()) throw Error(ErrorCode::EmptyInput, "question is empty");
  validate_plan(plan);

  std::vector<Hypothesis> candidates;
  std::unordered_map<std::string, size_t> seen;  // normalized text -> candidate index
  size_t next_id = 0;

  for (size_t round_index = 0; round_index < plan.rounds.size(); ++round_index) {
    const auto& round = plan.rounds[round_index];
    auto [system, user] = providers::render_prompt(round.template_id, {{"research_question", question}});
    for (int sample = 0; sample < round.samples; ++sample) {
      std::string text;
      try {
        text = gateway.chat({system, user, round.temperature, round.template_id});
      } catch (const Error& e) {
        throw Error(e.code, "generation round " + std::to_string(round_index) + " sample " +
                                std::to_string(sample) + ": " + e.what());
      }
      std::string normalized = normalize_text(text);
      if (normalized.empty()) continue;
      if (seen.count(normalized)) continue;
      seen.emplace(normalized, candidates.size());

      Hypothesis h;
      h.id = id_prefix + std::to_string(next_id++);
      h.text = text;
      h.sampling_round = static_cast<int>(round_index);
      h.lineage.push_back({0, "generated", {}});
      candidates.push_back(std::move(h));
    }
  }

  if (candidates.size() < min_candidates) {
    throw Error(ErrorCode::TooFewCandidates,
                std::to_string(candidates.size()) + " distinct candidates, need " +
                    std::to_string(min_candidates));
  }
  return candidates;
}

std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts,
                                             providers::ProviderGateway& gateway) {
  if (texts.empty()) throw Error(ErrorCode::EmptyInput, "embed_batch on empty text list");
  auto vectors = gateway.embed(texts);
  if (vectors.size() != texts.size()) {
    throw Error(ErrorCode::EmbedderError, "provider returned wrong vector count");
  }
  size_t dim = vectors.front().size();
  for (auto& v : vectors) {
    if (v.size() != dim || dim == 0) {
      throw Error(ErrorCode::DimensionMismatch, "embedding dimensions differ within batch");
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm <= 0.0) throw Error(ErrorCode::EmbedderError, "zero-norm embedding");
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return vectors;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

namespace {

struct LloydResult {
  std::vector<size_t> labels;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  std::vector<double> trace;
};

std::vector<std::vector<double>> seed_centroids_plus_plus(const std::vector<std::vector<double>>& points,
                                                          size_t k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[rng.next_index(points.size())]);
  std::vector<double> dist2(points.size(), std::numeric_limits<double>::max());
  while (centroids.size() < k) {
    double total = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      dist2[i] = std::min(dist2[i], squared_distance(points[i], centroids.back()));
      total += dist2[i];
    }
    size_t chosen;
    if (total <= 0.0) {
      chosen = rng.next_index(points.size());  // all points coincide with a centroid
    } else {
      double target = rng.next_double() * total;
      double cumulative = 0.0;
      chosen = points.size() - 1;
      for (size_t i = 0; i < points.size(); ++i) {
        cumulative += dist2[i];
        if (cumulative >= target) {
          chosen = i;
          break;
        }
      }
    }
    centroids.push_back(points[chosen]);
  }
  return centroids;
}

LloydResult run_lloyd(const std::vector<std::vector<double>>& points, size_t k, Rng& rng,
                      const KMeansOptions& options) {
  const size_t dim = points.front().size();
  LloydResult result;
  result.centroids = seed_centroids_plus_plus(points, k, rng);
  result.labels.assign(points.size(), 0);

  double previous_inertia = std::numeric_limits<double>::max();
  for (int iter = 0; iter < options.max_iters; ++iter) {
    // Assign.
    double inertia = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::max();
      size_t label = 0;
      for (size_t c = 0; c < k; ++c) {
        double d = squared_distance(points[i], result.centroids[c]);
        if (d < best) {
          best = d;
          label = c;
        }
      }
      result.labels[i] = label;
      inertia += best;
    }

    // Repair empty clusters: steal the point farthest from its centroid.
    std::vector<size_t> counts(k, 0);
    for (size_t label : result.labels) counts[label]++;
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      size_t farthest = 0;
      double worst = -1.0;
      for (size_t i = 0; i < points.size(); ++i) {
        if (counts[result.labels[i]] <= 1) continue;
        double d = squared_distance(points[i], result.centroids[result.labels[i]]);
        if (d > worst) {
          worst = d;
          farthest = i;
        }
      }
      counts[result.labels[farthest]]--;
      result.labels[farthest] = c;
      counts[c] = 1;
    }

    // Update centroids.
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> sizes(k, 0);
    for (size_t i = 0; i < points.size(); ++i) {
      sizes[result.labels[i]]++;
      for (size_t d = 0; d < dim; ++d) next[result.labels[i]][d] += points[i][d];
    }
    for (size_t c = 0; c < k; ++c) {
      for (size_t d = 0; d < dim; ++d) next[c][d] /= static_cast<double>(sizes[c]);
    }
    result.centroids = std::move(next);

    // Recompute inertia against the updated centroids for the trace.
    inertia = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      inertia += squared_distance(points[i], result.centroids[result.labels[i]]);
    }
    result.trace.push_back(inertia);
    result.inertia = inertia;

    if (previous_inertia - inertia <= options.relative_tolerance * std::max(previous_inertia, 1e-300) ||
        inertia == 0.0) {
      break;
    }
    previous_inertia = inertia;
  }
  return result;
}

}  // namespace

ClusterAssignment kmeans_cluster(const std::vector<std::vector<double>>& vectors, size_t k,
                                 uint64_t seed, const KMeansOptions& options) {
  if (k == 0 || k > vectors.size()) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " with " +
                                          std::to_string(vectors.size()) + " vectors");
  }
  const size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "mixed vector dimensions");
  }

  ClusterAssignment best;
  best.inertia = std::numeric_limits<double>::max();
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    Rng rng(derive_seed(seed, "kmeans-restart", static_cast<uint64_t>(restart)));
    LloydResult result = run_lloyd(vectors, k, rng, options);
    best.restart_traces.push_back(result.trace);
    if (result.inertia < best.inertia) {
      best.k = k;
      best.labels = std::move(result.labels);
      best.centroids = std::move(result.centroids);
      best.inertia = result.inertia;
      best.inertia_trace = result.trace;
    }
  }
  return best;
}

std::vector<Hypothesis> select_representatives(const std::vector<Hypothesis>& hypotheses,
                                               const ClusterAssignment& assignment) {
  if (assignment.labels.size() != hypotheses.size()) {
    throw Error(ErrorCode::DimensionMismatch, "assignment does not cover the hypothesis list");
  }
  std::vector<Hypothesis> representatives;
  representatives.reserve(assignment.k);
  for (size_t c = 0; c < assignment.k; ++c) {
    double best = std::numeric_limits<double>::max();
    size_t best_index = hypotheses.size();
    for (size_t i = 0; i < hypotheses.size(); ++i) {
      if (assignment.labels[i] != c) continue;
      if (!hypotheses[i].embedding) {
        throw Error(ErrorCode::EmptyInput, "hypothesis " + hypotheses[i].id + " has no embedding");
      }
      double d = squared_distance(*hypotheses[i].embedding, assignment.centroids[c]);
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        best_index = i;
      }
    }
    if (best_index == hypotheses.size()) {
      throw Error(ErrorCode::EmptyInput, "cluster " + std::to_string(c) + " is empty");
    }
    representatives.push_back(hypotheses[best_index]);
  }
  return representatives;
}

}  // namespace hypoloop::proposal
