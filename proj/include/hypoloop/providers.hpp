#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypoloop/errors.hpp"

namespace hypoloop::providers {

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

// Role-tagged prompt with {slot} placeholders. A placeholder is "{" + a
// C-identifier + "}"; anything else inside braces is literal text, so JSON
// examples inside a template body survive rendering untouched.
struct PromptTemplate {
  std::string id;
  std::string system;
  std::string user;
  std::vector<std::string> slots;
  // True for templates whose wording is reconstructed by analogy (the
  // relevance/feasibility rubrics and the judge verdict format) rather than
  // shipped from a fixed source text.
  bool reconstructed = false;
};

// Registry of the built-in templates:
//   generation, novelty, relevance, feasibility, base_likelihood,
//   method_match, refinement, judge
const PromptTemplate& get_template(const std::string& template_id);
std::vector<std::string> template_ids();

// Exact substitution of bound slots; no escaping of slot content.
// Errors: UnknownTemplate; MissingSlot naming the first unbound slot.
std::pair<std::string, std::string> render_prompt(const std::string& template_id,
                                                  const std::map<std::string, std::string>& bindings);

// ---------------------------------------------------------------------------
// Structured-output parsers
// ---------------------------------------------------------------------------

// Extracts the first well-formed <tag>...</tag> span and parses a decimal
// scalar; interior whitespace is tolerated. When clamp is set the value is
// clamped into [lo, hi]; otherwise an out-of-range value is an error.
// Errors: ParseError (no tag, empty tag, non-numeric); OutOfRange.
double parse_tagged_scalar(const std::string& response, const std::string& tag,
                           double lo, double hi, bool clamp);

// Strict binary variant: the parsed value must be exactly 0 or 1.
int parse_tagged_binary(const std::string& response, const std::string& tag);

// Parses the first balanced JSON object found in the response (prose and code
// fences around it are ignored) and extracts the refinement fields.
// Errors: ParseError (no object, malformed JSON, missing/empty
// "optimized hypothesis"); InvalidStrategy for a strategy outside {A,B,C}.
struct RefinementReply {
  std::string optimized_hypothesis;
  char strategy_letter = 'A';  // 'A' | 'B' | 'C'
};
RefinementReply parse_refinement_json(const std::string& response);

// Judge verdict: <winner>A</winner> or <winner>B</winner>.
char parse_winner_tag(const std::string& response);

// ---------------------------------------------------------------------------
// Provider interfaces
// ---------------------------------------------------------------------------

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.7;
  std::string template_id;  // context for transcripts only
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string chat(const ChatRequest& request) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

struct ProviderConfig {
  std::string endpoint;        // e.g. http://localhost:8080/v1/chat/completions
  std::string model;
  int timeout_ms = 60000;
  int retry_budget = 2;        // transport retries and parse re-asks
  int max_parallel = 4;
  double temperature_default = 0.7;
  std::string credential_env;  // name of the env var holding the API key
};

// ---------------------------------------------------------------------------
// Deterministic mock provider
// ---------------------------------------------------------------------------

// Offline stand-in for both provider interfaces. Responses are pure functions
// of (seed, prompt) except hypothesis generation, which numbers its outputs so
// repeated generation prompts yield distinct texts. A scripted response list,
// when provided, is consumed in order and errors with ScriptExhausted once
// drained. A rule, when set, is consulted first and may decline by returning
// nullopt.
class MockProvider : public ChatProvider, public EmbeddingProvider {
 public:
  explicit MockProvider(uint64_t seed, std::vector<std::string> script = {}, size_t embedding_dim = 32);

  using Rule = std::function<std::optional<std::string>(const ChatRequest&)>;
  void set_rule(Rule rule);

  std::string chat(const ChatRequest& request) override;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

  // Unit-norm hash projection of the token multiset; identical text gives an
  // identical vector, shared tokens give correlated vectors.
  static std::vector<double> embed_text(const std::string& text, uint64_t seed, size_t dim);

  size_t chat_calls() const { return chat_calls_; }

 private:
  std::string default_response(const ChatRequest& request);

  uint64_t seed_;
  std::vector<std::string> script_;
  bool scripted_;
  size_t script_pos_ = 0;
  size_t embedding_dim_;
  size_t generation_counter_ = 0;
  size_t chat_calls_ = 0;
  Rule rule_;
  std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// HTTP provider (chat-completion message schema)
// ---------------------------------------------------------------------------

class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config);
  std::string chat(const ChatRequest& request) override;

 private:
  ProviderConfig config_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(ProviderConfig config);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  ProviderConfig config_;
};

// ---------------------------------------------------------------------------
// Transcripts and the gateway
// ---------------------------------------------------------------------------

struct TranscriptEntry {
  std::string template_id;
  std::string system;
  std::string user;
  std::string response;
  double latency_ms = 0.0;
  bool parse_ok = true;
  std::string error;
};

// Line-delimited JSON sink; thread-safe.
class TranscriptLog {
 public:
  explicit TranscriptLog(const std::string& path);
  void append(const TranscriptEntry& entry);

 private:
  std::string path_;
  std::mutex mutex_;
};

// Single entry point for every provider call: enforces the global in-flight
// cap, retries transport failures, logs transcripts, and counts calls.
class ProviderGateway {
 public:
  ProviderGateway(ChatProvider* chat, EmbeddingProvider* embedder, ProviderConfig config,
                  TranscriptLog* transcripts = nullptr);
  ~ProviderGateway();

  std::string chat(const ChatRequest& request);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);

  // Asks, parses, and on ParseError re-asks the provider (a fresh call, never
  // a re-parse) up to the retry budget.
  template <typename Parser>
  auto ask_parsed(const ChatRequest& request, Parser&& parse) {
    int attempts = config_.retry_budget + 1;
    for (int attempt = 0;; ++attempt) {
      std::string response = chat(request);
      try {
        return parse(response);
      } catch (const Error& e) {
        if (e.code != ErrorCode::ParseError && e.code != ErrorCode::InvalidStrategy) throw;
        if (attempt + 1 >= attempts) throw;
      }
    }
  }

  const ProviderConfig& config() const { return config_; }
  size_t chat_call_count() const;
  size_t embed_call_count() const;
  void reset_call_counts();

 private:
  struct Slot;
  ChatProvider* chat_;
  EmbeddingProvider* embedder_;
  ProviderConfig config_;
  TranscriptLog* transcripts_;
  std::unique_ptr<Slot> slot_;
};

// ---------------------------------------------------------------------------
// N/R/F scoring
// ---------------------------------------------------------------------------

struct JudgmentScores {
  double novelty = 0.0;
  double relevance = 0.0;
  double feasibility = 0.0;
};

// Three independent calls (novelty, relevance, feasibility), each parsed from
// its tagged response and clamped to [0,1]. A dimension that fails all
// re-asks surfaces an error naming that dimension.
JudgmentScores score_nrf(ProviderGateway& gateway, const std::string& hypothesis_text,
                         const std::string& question, const std::string& domain_keyword);

}  // namespace hypoloop::providers
