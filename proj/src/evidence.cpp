#include "hypoloop/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace hypoloop::evidence {

using nlohmann::json;

namespace {

constexpr int kStoreFormatVersion = 1;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void normalize_unit(std::vector<double>& v, const std::string& what) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm <= 0.0) throw Error(ErrorCode::EmbedderError, "zero-norm vector for " + what);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

}  // namespace

bool VectorStore::add_chunk(EvidenceChunk chunk) {
  if (chunk.text.empty()) {
    throw Error(ErrorCode::EmptyInput, "chunk " + chunk.chunk_id + " has empty text");
  }
  if (dimension_ == 0) {
    dimension_ = chunk.vector.size();
  } else if (chunk.vector.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "chunk " + chunk.chunk_id + " has dimension " +
                                                  std::to_string(chunk.vector.size()) + ", store has " +
                                                  std::to_string(dimension_));
  }
  if (contains(chunk.chunk_id)) return false;
  normalize_unit(chunk.vector, chunk.chunk_id);
  chunks_.push_back(std::move(chunk));
  return true;
}

bool VectorStore::contains(const std::string& chunk_id) const {
  return std::any_of(chunks_.begin(), chunks_.end(),
                     [&](const EvidenceChunk& c) { return c.chunk_id == chunk_id; });
}

void VectorStore::save(const std::filesystem::path& directory) const {
  std::filesystem::create_directories(directory);
  json chunks = json::array();
  for (const auto& c : chunks_) {
    chunks.push_back({
        {"chunk_id", c.chunk_id},
        {"doc_id", c.doc_id},
        {"text", c.text},
        {"vector", c.vector},
        {"span", {c.span_lo, c.span_hi}},
    });
  }
  json body = {
      {"version", kStoreFormatVersion},
      {"dimension", dimension_},
      {"chunks", chunks},
  };
  std::ofstream out(directory / "store.json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (directory / "store.json").string());
  out << body.dump(2) << "\n";
}

VectorStore VectorStore::load(const std::filesystem::path& directory) {
  std::ifstream in(directory / "store.json");
  if (!in) throw Error(ErrorCode::CorruptStore, "no store.json in " + directory.string());
  json body = json::parse(in, nullptr, false);
  if (body.is_discarded() || !body.is_object() || body.value("version", -1) != kStoreFormatVersion) {
    throw Error(ErrorCode::CorruptStore, "unreadable store or version mismatch in " + directory.string());
  }
  VectorStore store;
  for (const auto& item : body["chunks"]) {
    EvidenceChunk chunk;
    chunk.chunk_id = item.at("chunk_id").get<std::string>();
    chunk.doc_id = item.at("doc_id").get<std::string>();
    chunk.text = item.at("text").get<std::string>();
    chunk.vector = item.at("vector").get<std::vector<double>>();
    chunk.span_lo = item.at("span")[0].get<size_t>();
    chunk.span_hi = item.at("span")[1].get<size_t>();
    store.add_chunk(std::move(chunk));
  }
  return store;
}

std::vector<std::pair<size_t, size_t>> chunk_spans(const std::string& text, const ChunkingConfig& cfg) {
  if (cfg.target_size == 0 || cfg.overlap >= cfg.target_size) {
    throw Error(ErrorCode::OutOfRange, "chunking requires target-size > overlap >= 0");
  }
  std::vector<std::pair<size_t, size_t>> spans;
  const size_t len = text.size();
  size_t start = 0;
  while (start < len) {
    size_t window_end = std::min(start + cfg.target_size, len);
    size_t end = window_end;
    if (window_end < len) {
      // Prefer the last paragraph boundary in the second half of the window,
      // as long as the next chunk would still start past the current one.
      size_t boundary = text.rfind("\n\n", window_end);
      if (boundary != std::string::npos && boundary > start + cfg.target_size / 2 &&
          boundary > start + cfg.overlap) {
        end = boundary;
      }
    }
    if (end <= start) end = std::min(start + cfg.target_size, len);
    spans.emplace_back(start, end);
    if (end >= len) break;
    start = end - cfg.overlap;
  }
  return spans;
}

void ingest_into(VectorStore& store, const std::vector<Document>& documents,
                 const ChunkingConfig& chunking, providers::ProviderGateway& gateway) {
  if (documents.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents to ingest");

  for (const auto& doc : documents) {
    if (doc.text.empty()) continue;
    auto spans = chunk_spans(doc.text, chunking);

    std::vector<EvidenceChunk> fresh;
    std::vector<std::string> texts;
    for (const auto& [lo, hi] : spans) {
      EvidenceChunk chunk;
      chunk.chunk_id = doc.doc_id + "#" + std::to_string(lo) + "-" + std::to_string(hi);
      if (store.contains(chunk.chunk_id)) continue;  // idempotent per (doc id, span)
      chunk.doc_id = doc.doc_id;
      chunk.span_lo = lo;
      chunk.span_hi = hi;
      chunk.text = doc.text.substr(lo, hi - lo);
      texts.push_back(doc.title.empty() ? chunk.text : doc.title + "\n" + chunk.text);
      fresh.push_back(std::move(chunk));
    }
    if (fresh.empty()) continue;

    std::vector<std::vector<double>> vectors;
    try {
      vectors = gateway.embed(texts);
    } catch (const Error& e) {
      throw Error(ErrorCode::EmbedderError, "document " + doc.doc_id + ": " + e.what());
    }
    if (vectors.size() != fresh.size()) {
      throw Error(ErrorCode::EmbedderError, "document " + doc.doc_id + ": wrong vector count");
    }
    for (size_t i = 0; i < fresh.size(); ++i) {
      fresh[i].vector = std::move(vectors[i]);
      store.add_chunk(std::move(fresh[i]));
    }
  }
}

VectorStore ingest_corpus(const std::vector<Document>& documents, const ChunkingConfig& chunking,
                          providers::ProviderGateway& gateway) {
  VectorStore store;
  ingest_into(store, documents, chunking, gateway);
  if (store.size() == 0) throw Error(ErrorCode::EmptyCorpus, "corpus produced no chunks");
  return store;
}

std::vector<Document> read_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read corpus file " + path.string());
  std::vector<Document> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw Error(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + " is not a JSON object");
    }
    Document doc;
    doc.doc_id = record.value("doc_id", "");
    doc.title = record.value("title", "");
    doc.text = record.value("text", "");
    if (doc.doc_id.empty()) {
      throw Error(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + " has no doc_id");
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, path.string() + " holds no documents");
  return docs;
}

EvidenceSet retrieve_topk(const VectorStore& store, const std::string& question,
                          const belief::Hypothesis& hypothesis, size_t k,
                          providers::ProviderGateway& gateway) {
  if (store.size() == 0) throw Error(ErrorCode::EmptyStore, "retrieval against an empty store");
  if (k == 0) throw Error(ErrorCode::OutOfRange, "k must be positive");

  std::string query = hypothesis.text + "\n\n" + question;
  auto vectors = gateway.embed({query});
  if (vectors.size() != 1 || vectors[0].size() != store.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "query embedding does not match store dimension");
  }
  normalize_unit(vectors[0], "query");

  std::vector<ScoredChunk> scored;
  scored.reserve(store.size());
  for (const auto& chunk : store.chunks()) {
    scored.push_back({chunk, dot(chunk.vector, vectors[0])});
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.chunk.chunk_id < b.chunk.chunk_id;
  });
  if (scored.size() > k) scored.resize(k);

  EvidenceSet result;
  result.hypothesis_id = hypothesis.id;
  result.chunks = std::move(scored);
  return result;
}

double score_base_likelihood(const belief::Hypothesis& hypothesis, const EvidenceChunk& chunk,
                             providers::ProviderGateway& gateway, const std::string& domain_keyword) {
  auto [system, user] = providers::render_prompt("base_likelihood", {
      {"keyword_content", domain_keyword},
      {"knowledge_content", chunk.text},
      {"hypothesis", hypothesis.text},
  });
  providers::ChatRequest request{system, user, gateway.config().temperature_default, "base_likelihood"};
  return gateway.ask_parsed(request, [](const std::string& response) {
    return providers::parse_tagged_scalar(response, "base_LH", 0.0, 1.0, /*clamp=*/true);
  });
}

int score_method_match(const std::string& question, const belief::Hypothesis& hypothesis,
                       const EvidenceChunk& chunk, providers::ProviderGateway& gateway,
                       const std::string& domain_keyword) {
  auto [system, user] = providers::render_prompt("method_match", {
      {"keyword_content", domain_keyword},
      {"question", question},
      {"knowledge_content", chunk.text},
      {"hypothesis", hypothesis.text},
  });
  providers::ChatRequest request{system, user, gateway.config().temperature_default, "method_match"};
  return gateway.ask_parsed(request, [](const std::string& response) {
    return providers::parse_tagged_binary(response, "match");
  });
}

double evidence_likelihood(double base, int method_match) {
  if (base < 0.0 || base > 1.0 || !(method_match == 0 || method_match == 1)) {
    throw Error(ErrorCode::OutOfRange, "evidence_likelihood inputs out of range");
  }
  return base * static_cast<double>(method_match);
}

double aggregate_likelihood(const std::vector<double>& contributions) {
  if (contributions.empty()) {
    throw Error(ErrorCode::EmptyEvidence, "no evidence contributions to aggregate");
  }
  double sum = 0.0;
  for (double c : contributions) sum += c;
  return sum / static_cast<double>(contributions.size());
}

}  // namespace hypoloop::evidence
