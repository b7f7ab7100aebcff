#include <atomic>
#include <cmath>
#include <doctest.h>
#include <functional>
#include <set>

#include "hypoloop/providers.hpp"
#include "hypoloop/rng.hpp"

using namespace hypoloop;
using namespace hypoloop::providers;

namespace hypoloop::providers {
std::vector<std::string> extract_slot_tokens(const std::string& body);
}

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code;
  }
  FAIL("expected an Error");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("registry templates declare every slot they use") {
  for (const auto& id : template_ids()) {
    const auto& tmpl = get_template(id);
    std::set<std::string> declared(tmpl.slots.begin(), tmpl.slots.end());
    for (const auto& token : extract_slot_tokens(tmpl.system + "\n" + tmpl.user)) {
      CHECK_MESSAGE(declared.count(token) == 1, id << " uses undeclared slot " << token);
    }
  }
  CHECK(get_template("relevance").reconstructed);
  CHECK(get_template("feasibility").reconstructed);
  CHECK(get_template("judge").reconstructed);
  CHECK_FALSE(get_template("novelty").reconstructed);
}

TEST_CASE("render_prompt substitutes bound slots verbatim") {
  auto [system, user] = render_prompt("novelty", {
      {"keyword_content", "optimization"},
      {"hypothesis", "H-TEXT with {braces} inside"},
      {"question", "Q-TEXT"},
  });
  CHECK(system.find("professor in the optimization field") != std::string::npos);
  CHECK(user.find("Hypothesis: H-TEXT with {braces} inside") != std::string::npos);
  CHECK(user.find("Question: Q-TEXT") != std::string::npos);
  // The output-format hint is literal text, not a slot.
  CHECK(user.find("<novelty>{your novelty rating}</novelty>") != std::string::npos);
}

TEST_CASE("render_prompt keeps the refinement JSON example intact") {
  auto [system, user] = render_prompt("refinement", {
      {"research_question", "Q"},
      {"hypothesis", "H"},
      {"evidence_snippets", "E"},
  });
  (void)system;
  CHECK(user.find("\"optimized hypothesis\": \"<your optimized hypothesis>\"") != std::string::npos);
  CHECK(user.find("Current Hypothesis: H") != std::string::npos);
}

TEST_CASE("render_prompt errors") {
  CHECK(code_of([] { render_prompt("nope", {}); }) == ErrorCode::UnknownTemplate);
  try {
    render_prompt("novelty", {{"hypothesis", "h"}, {"question", "q"}});
    FAIL("expected MissingSlot");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::MissingSlot);
    CHECK(std::string(e.what()).find("keyword_content") != std::string::npos);
  }
}

TEST_CASE("render_prompt distinct bindings give distinct output") {
  Rng rng(31);
  std::set<std::string> outputs;
  for (int i = 0; i < 50; ++i) {
    auto rendered = render_prompt("base_likelihood", {
        {"keyword_content", "k" + std::to_string(rng.next_u64() % 1000)},
        {"knowledge_content", "e" + std::to_string(i)},
        {"hypothesis", "h" + std::to_string(rng.next_u64() % 1000)},
    });
    outputs.insert(rendered.first + "\x1f" + rendered.second);
  }
  CHECK(outputs.size() == 50);
}

TEST_CASE("parse_tagged_scalar well-formed and wrapped inputs") {
  CHECK(parse_tagged_scalar("<novelty>0.5</novelty>", "novelty", 0, 1, false) == doctest::Approx(0.5));
  CHECK(parse_tagged_scalar("<match>1</match>", "match", 0, 1, false) == doctest::Approx(1.0));
  CHECK(parse_tagged_scalar("reasoning text... <base_LH> 0.72 </base_LH>", "base_LH", 0, 1, false) ==
        doctest::Approx(0.72));
  CHECK(parse_tagged_scalar("prose\n<novelty>\n0.9\n</novelty>\nmore prose", "novelty", 0, 1, false) ==
        doctest::Approx(0.9));
}

TEST_CASE("parse_tagged_scalar clamp versus strict range") {
  CHECK(parse_tagged_scalar("<base_LH>1.4</base_LH>", "base_LH", 0, 1, true) == doctest::Approx(1.0));
  CHECK(parse_tagged_scalar("<base_LH>-0.3</base_LH>", "base_LH", 0, 1, true) == doctest::Approx(0.0));
  CHECK(code_of([] { parse_tagged_scalar("<novelty>1.4</novelty>", "novelty", 0, 1, false); }) ==
        ErrorCode::OutOfRange);
}

TEST_CASE("parse_tagged_scalar malformed inputs") {
  auto parse_err = [](const std::string& text, const std::string& tag) {
    return code_of([&] { parse_tagged_scalar(text, tag, 0, 1, true); });
  };
  CHECK(parse_err("no tag here", "novelty") == ErrorCode::ParseError);
  CHECK(parse_err("<novelty></novelty>", "novelty") == ErrorCode::ParseError);
  CHECK(parse_err("<novelty>high</novelty>", "novelty") == ErrorCode::ParseError);
  CHECK(parse_err("<base_LH>0.7</base_L", "base_LH") == ErrorCode::ParseError);
  CHECK(parse_err("<base_LH>0.7 approx</base_LH>", "base_LH") == ErrorCode::ParseError);
  CHECK(parse_err("", "base_LH") == ErrorCode::ParseError);
}

TEST_CASE("parse_tagged_binary accepts only exact 0 or 1") {
  CHECK(parse_tagged_binary("<match>1</match>", "match") == 1);
  CHECK(parse_tagged_binary("<match>0</match>", "match") == 0);
  CHECK(parse_tagged_binary("explanation first <match> 1 </match>", "match") == 1);
  CHECK(code_of([] { parse_tagged_binary("<match>0.5</match>", "match"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_tagged_binary("<match>2</match>", "match"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_tagged_binary("<match></match>", "match"); }) == ErrorCode::ParseError);
}

TEST_CASE("parse_refinement_json happy paths") {
  auto direct = parse_refinement_json(R"({"optimized hypothesis": "better text", "strategy": "A"})");
  CHECK(direct.optimized_hypothesis == "better text");
  CHECK(direct.strategy_letter == 'A');

  auto fenced = parse_refinement_json(
      "Here is my answer:\n```json\n{\"optimized hypothesis\": \"merged idea\", \"strategy\": \"C\"}\n```\nDone.");
  CHECK(fenced.optimized_hypothesis == "merged idea");
  CHECK(fenced.strategy_letter == 'C');

  auto nested = parse_refinement_json(
      "{broken then {\"optimized hypothesis\": \"x {with} braces\", \"strategy\": \"B\"}");
  CHECK(nested.strategy_letter == 'B');
  CHECK(nested.optimized_hypothesis == "x {with} braces");
}

TEST_CASE("parse_refinement_json malformed inputs") {
  auto err = [](const std::string& text) { return code_of([&] { parse_refinement_json(text); }); };
  CHECK(err("no json at all") == ErrorCode::ParseError);
  CHECK(err(R"({"strategy": "A"})") == ErrorCode::ParseError);                      // missing key
  CHECK(err(R"({"optimized hypothesis": "", "strategy": "A"})") == ErrorCode::ParseError);
  CHECK(err(R"({"optimized hypothesis": "x", "strategy": "D"})") == ErrorCode::InvalidStrategy);
  CHECK(err(R"({"optimized hypothesis": "x", "strategy": "A")") == ErrorCode::ParseError);  // unbalanced
  CHECK(err(R"({"optimized hypothesis": 12, "strategy": "A"})") == ErrorCode::ParseError);
}

TEST_CASE("parse_winner_tag") {
  CHECK(parse_winner_tag("<winner>A</winner>") == 'A');
  CHECK(parse_winner_tag("thinking... <winner> B </winner>") == 'B');
  CHECK(code_of([] { parse_winner_tag("<winner>C</winner>"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_winner_tag("no verdict"); }) == ErrorCode::ParseError);
}

TEST_CASE("mock provider is deterministic per seed and prompt") {
  MockProvider a(42), b(42), c(43);
  ChatRequest req{"sys", "user asking for <novelty> output", 0.7, "novelty"};
  CHECK(a.chat(req) == b.chat(req));
  CHECK(a.chat(req) == a.chat(req));  // prompt-pure
  CHECK(a.chat(req) != c.chat(req));
}

TEST_CASE("mock provider emits parseable formats for every template") {
  MockProvider mock(7);
  ProviderGateway gateway(&mock, &mock, ProviderConfig{});

  auto ask = [&](const std::string& id, std::map<std::string, std::string> bindings) {
    auto [system, user] = render_prompt(id, bindings);
    return gateway.chat({system, user, 0.7, id});
  };
  std::map<std::string, std::string> b = {
      {"keyword_content", "ml"},     {"hypothesis", "H"},      {"question", "Q"},
      {"knowledge_content", "E"},    {"research_question", "Q"}, {"evidence_snippets", "E"},
      {"hypothesis_a", "HA"},        {"hypothesis_b", "HB"},
  };
  CHECK_NOTHROW(parse_tagged_scalar(ask("novelty", b), "novelty", 0, 1, true));
  CHECK_NOTHROW(parse_tagged_scalar(ask("relevance", b), "relevance", 0, 1, true));
  CHECK_NOTHROW(parse_tagged_scalar(ask("feasibility", b), "feasibility", 0, 1, true));
  CHECK_NOTHROW(parse_tagged_scalar(ask("base_likelihood", b), "base_LH", 0, 1, true));
  CHECK_NOTHROW(parse_tagged_binary(ask("method_match", b), "match"));
  CHECK_NOTHROW(parse_winner_tag(ask("judge", b)));
  auto reply = parse_refinement_json(ask("refinement", b));
  CHECK(reply.optimized_hypothesis.find("H") != std::string::npos);
}

TEST_CASE("mock generation yields distinct texts per call") {
  MockProvider mock(11);
  auto [system, user] = render_prompt("generation", {{"research_question", "How?"}});
  std::set<std::string> texts;
  for (int i = 0; i < 20; ++i) texts.insert(mock.chat({system, user, 1.0, "generation"}));
  CHECK(texts.size() == 20);
}

TEST_CASE("mock script is consumed in order then exhausts") {
  MockProvider mock(1, {"first", "second"});
  ChatRequest req{"", "anything", 0.7, ""};
  CHECK(mock.chat(req) == "first");
  CHECK(mock.chat(req) == "second");
  try {
    mock.chat(req);
    FAIL("expected ScriptExhausted");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::ScriptExhausted);
  }
}

TEST_CASE("mock embeddings are unit norm and text-deterministic") {
  MockProvider mock(5, {}, 48);
  auto vectors = mock.embed({"abc", "abc", "totally different text"});
  REQUIRE(vectors.size() == 3);
  CHECK(vectors[0] == vectors[1]);
  CHECK(vectors[0] != vectors[2]);
  for (const auto& v : vectors) {
    CHECK(v.size() == 48);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
  }
}

TEST_CASE("gateway re-asks on ParseError up to the budget") {
  SUBCASE("budget exhausted") {
    MockProvider mock(1, {"garbage", "garbage"});
    ProviderConfig cfg;
    cfg.retry_budget = 1;
    ProviderGateway gateway(&mock, nullptr, cfg);
    CHECK_THROWS_AS(gateway.ask_parsed(ChatRequest{"", "u", 0.7, ""}, [](const std::string& r) {
      return parse_tagged_scalar(r, "novelty", 0, 1, true);
    }), Error);
    CHECK(gateway.chat_call_count() == 2);  // one ask + one re-ask, never a re-parse
  }
  SUBCASE("recovers on a later response") {
    MockProvider mock(1, {"bad", "<novelty>0.4</novelty>"});
    ProviderConfig cfg;
    cfg.retry_budget = 2;
    ProviderGateway gateway(&mock, nullptr, cfg);
    double v = gateway.ask_parsed(ChatRequest{"", "u", 0.7, ""}, [](const std::string& r) {
      return parse_tagged_scalar(r, "novelty", 0, 1, true);
    });
    CHECK(v == doctest::Approx(0.4));
    CHECK(gateway.chat_call_count() == 2);
  }
  SUBCASE("zero budget surfaces immediately") {
    MockProvider mock(1, {"bad", "<novelty>0.4</novelty>"});
    ProviderConfig cfg;
    cfg.retry_budget = 0;
    ProviderGateway gateway(&mock, nullptr, cfg);
    CHECK_THROWS_AS(gateway.ask_parsed(ChatRequest{"", "u", 0.7, ""}, [](const std::string& r) {
      return parse_tagged_scalar(r, "novelty", 0, 1, true);
    }), Error);
    CHECK(gateway.chat_call_count() == 1);
  }
}

namespace {

struct FlakyProvider : ChatProvider {
  int failures_left;
  explicit FlakyProvider(int failures) : failures_left(failures) {}
  std::string chat(const ChatRequest&) override {
    if (failures_left-- > 0) throw Error(ErrorCode::ProviderError, "transient");
    return "<novelty>0.5</novelty>";
  }
};

}  // namespace

TEST_CASE("gateway retries transport errors") {
  FlakyProvider flaky(2);
  ProviderConfig cfg;
  cfg.retry_budget = 2;
  ProviderGateway gateway(&flaky, nullptr, cfg);
  CHECK(gateway.chat({"", "u", 0.7, ""}) == "<novelty>0.5</novelty>");

  FlakyProvider hopeless(10);
  ProviderConfig strict_cfg;
  strict_cfg.retry_budget = 1;
  ProviderGateway strict(&hopeless, nullptr, strict_cfg);
  CHECK_THROWS_AS(strict.chat({"", "u", 0.7, ""}), Error);
}

TEST_CASE("score_nrf parses and clamps all three dimensions") {
  MockProvider mock(3);
  ProviderGateway gateway(&mock, &mock, ProviderConfig{});
  auto scores = score_nrf(gateway, "hypothesis text", "question text", "ml");
  for (double v : {scores.novelty, scores.relevance, scores.feasibility}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // Failing dimension is named in the error.
  MockProvider bad(3, {"<novelty>0.5</novelty>", "nonsense", "nonsense"});
  ProviderConfig cfg;
  cfg.retry_budget = 1;
  ProviderGateway bad_gateway(&bad, nullptr, cfg);
  try {
    score_nrf(bad_gateway, "h", "q", "ml");
    FAIL("expected error naming the dimension");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("relevance") != std::string::npos);
  }
}

// ── HTTP wire contract against an in-process server ─────────────

#include <httplib.h>
#include <json.hpp>
#include <thread>

namespace {

struct LocalServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  LocalServer() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("http chat provider speaks the chat-completion schema") {
  LocalServer local;
  nlohmann::json seen_body;
  std::string seen_auth;
  local.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = nlohmann::json::parse(req.body);
    seen_auth = req.get_header_value("Authorization");
    nlohmann::json reply = {
        {"choices", {{{"message", {{"role", "assistant"}, {"content", "<novelty>0.6</novelty>"}}}}}},
    };
    res.set_content(reply.dump(), "application/json");
  });

  setenv("HYPOLOOP_TEST_KEY", "sk-test-123", 1);
  ProviderConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(local.port) + "/v1/chat/completions";
  cfg.model = "judge-model";
  cfg.credential_env = "HYPOLOOP_TEST_KEY";
  HttpChatProvider provider(cfg);

  std::string reply = provider.chat({"system text", "user text", 0.4, "novelty"});
  CHECK(reply == "<novelty>0.6</novelty>");
  CHECK(seen_body["model"] == "judge-model");
  CHECK(seen_body["temperature"] == doctest::Approx(0.4));
  REQUIRE(seen_body["messages"].size() == 2);
  CHECK(seen_body["messages"][0]["role"] == "system");
  CHECK(seen_body["messages"][0]["content"] == "system text");
  CHECK(seen_body["messages"][1]["role"] == "user");
  CHECK(seen_auth == "Bearer sk-test-123");
}

TEST_CASE("http chat provider surfaces transport and schema failures") {
  LocalServer local;
  local.server.Post("/bad-status", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("overloaded", "text/plain");
  });
  local.server.Post("/bad-body", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"unexpected\": true}", "application/json");
  });

  auto url = [&](const std::string& path) {
    return "http://127.0.0.1:" + std::to_string(local.port) + path;
  };
  for (const std::string path : {"/bad-status", "/bad-body"}) {
    ProviderConfig cfg;
    cfg.endpoint = url(path);
    HttpChatProvider provider(cfg);
    try {
      provider.chat({"s", "u", 0.7, ""});
      FAIL("expected ProviderError for " << path);
    } catch (const Error& e) {
      CHECK(e.code == ErrorCode::ProviderError);
    }
  }
}

TEST_CASE("http embedding provider parses indexed vectors") {
  LocalServer local;
  local.server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    // Answer out of order to exercise index handling.
    for (int i = static_cast<int>(body["input"].size()) - 1; i >= 0; --i) {
      data.push_back({{"index", i}, {"embedding", {1.0 * i, 0.5, 0.25}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });

  ProviderConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(local.port) + "/v1/embeddings";
  HttpEmbeddingProvider provider(cfg);
  auto vectors = provider.embed({"a", "b"});
  REQUIRE(vectors.size() == 2);
  CHECK(vectors[0][0] == doctest::Approx(0.0));
  CHECK(vectors[1][0] == doctest::Approx(1.0));
}
