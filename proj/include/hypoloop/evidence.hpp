#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hypoloop/belief.hpp"
#include "hypoloop/providers.hpp"

namespace hypoloop::evidence {

struct EvidenceChunk {
  std::string chunk_id;  // "<doc_id>#<span_lo>-<span_hi>"
  std::string doc_id;
  std::string text;
  std::vector<double> vector;  // unit norm
  size_t span_lo = 0;
  size_t span_hi = 0;
};

struct LikelihoodRecord {
  double base = 0.0;       // continuous plausibility in [0,1]
  int method_match = 0;    // binary methodological gate
  double contribution = 0.0;  // base * method_match
};

struct ScoredChunk {
  EvidenceChunk chunk;
  double similarity = 0.0;
};

// Retrieved evidence for one hypothesis, ordered by similarity descending.
// likelihoods is parallel to chunks once scoring has run.
struct EvidenceSet {
  std::string hypothesis_id;
  std::vector<ScoredChunk> chunks;
  std::vector<LikelihoodRecord> likelihoods;
};

struct ChunkingConfig {
  size_t target_size = 1200;  // characters
  size_t overlap = 150;       // characters
};

struct Document {
  std::string doc_id;
  std::string title;
  std::string text;
};

// In-memory store with exhaustive cosine search. All vectors are unit norm;
// scale is small enough (~10^3 documents) that a linear scan stays exact and
// fast.
class VectorStore {
 public:
  VectorStore() = default;

  // Idempotent per (doc id, span): an existing chunk id is left untouched.
  // Returns true when the chunk was inserted.
  bool add_chunk(EvidenceChunk chunk);

  size_t size() const { return chunks_.size(); }
  size_t dimension() const { return dimension_; }
  const std::vector<EvidenceChunk>& chunks() const { return chunks_; }
  bool contains(const std::string& chunk_id) const;

  void save(const std::filesystem::path& directory) const;
  static VectorStore load(const std::filesystem::path& directory);

 private:
  size_t dimension_ = 0;
  std::vector<EvidenceChunk> chunks_;
};

// Paragraph-preferring splitter: a chunk ends at the last blank-line boundary
// inside its window when one exists past the halfway point, otherwise at the
// window edge. Consecutive chunks overlap by `overlap` characters and spans
// cover the whole document.
std::vector<std::pair<size_t, size_t>> chunk_spans(const std::string& text, const ChunkingConfig& cfg);

// Splits, embeds, and stores every document. Errors: EmptyCorpus;
// EmbedderError annotated with the failing document id.
VectorStore ingest_corpus(const std::vector<Document>& documents, const ChunkingConfig& chunking,
                          providers::ProviderGateway& gateway);

// Adds documents to an existing store (idempotent re-ingest).
void ingest_into(VectorStore& store, const std::vector<Document>& documents,
                 const ChunkingConfig& chunking, providers::ProviderGateway& gateway);

// Line-delimited JSON corpus: {"doc_id": ..., "title": ..., "text": ...}.
std::vector<Document> read_corpus_jsonl(const std::filesystem::path& path);

// Top-k cosine retrieval for the query "<hypothesis text>\n\n<question>".
// Ties break by ascending chunk id; fewer than k chunks come back only when
// the store is smaller than k. Errors: EmptyStore.
EvidenceSet retrieve_topk(const VectorStore& store, const std::string& question,
                          const belief::Hypothesis& hypothesis, size_t k,
                          providers::ProviderGateway& gateway);

// LLM-judged probability that the chunk would be observed if the hypothesis
// were true; parsed from <base_LH> and clamped to [0,1].
double score_base_likelihood(const belief::Hypothesis& hypothesis, const EvidenceChunk& chunk,
                             providers::ProviderGateway& gateway, const std::string& domain_keyword);

// Binary methodological-match gate parsed from <match>; any value other than
// 0 or 1 is a ParseError.
int score_method_match(const std::string& question, const belief::Hypothesis& hypothesis,
                       const EvidenceChunk& chunk, providers::ProviderGateway& gateway,
                       const std::string& domain_keyword);

// Per-chunk contribution: base * method_match.
double evidence_likelihood(double base, int method_match);

// Arithmetic mean over contributions. Errors: EmptyEvidence for an empty list.
double aggregate_likelihood(const std::vector<double>& contributions);

}  // namespace hypoloop::evidence
