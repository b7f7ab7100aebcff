#include <cmath>
#include <doctest.h>

#include "hypoloop/judge.hpp"
#include "hypoloop/rng.hpp"

using namespace hypoloop;
using namespace hypoloop::judge;

namespace {

providers::ProviderConfig quiet_config() {
  providers::ProviderConfig cfg;
  cfg.retry_budget = 0;
  return cfg;
}

belief::Hypothesis hyp(const std::string& id, const std::string& text) {
  belief::Hypothesis h;
  h.id = id;
  h.text = text;
  return h;
}

}  // namespace

TEST_CASE("expected_score closed forms") {
  CHECK(expected_score(1200, 1200) == doctest::Approx(0.5));
  CHECK(expected_score(1200, 1600) == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK(expected_score(1600, 1200) == doctest::Approx(10.0 / 11.0).epsilon(1e-12));

  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    double a = 800 + 800 * rng.next_double();
    double b = 800 + 800 * rng.next_double();
    CHECK(expected_score(a, b) + expected_score(b, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expected_score(a + 10, b) > expected_score(a, b));  // strictly increasing in rating_a
  }
}

TEST_CASE("update_ratings closed forms and conservation") {
  auto [wa, wb] = update_ratings(1200, 1200, Outcome::AWins, 32);
  CHECK(wa == 1216.0);
  CHECK(wb == 1184.0);

  auto [da, db] = update_ratings(1400, 1400, Outcome::Draw, 32);
  CHECK(da == 1400.0);
  CHECK(db == 1400.0);

  // Pair sums stay exactly conserved for grid-valued ratings.
  Rng rng(14);
  double a = 1200.0, b = 1200.0;
  for (int i = 0; i < 1000; ++i) {
    Outcome o = static_cast<Outcome>(rng.next_index(3));
    auto [na, nb] = update_ratings(a, b, o, 24);
    CHECK(na + nb == a + b);
    a = na;
    b = nb;
  }
  CHECK_THROWS_AS(update_ratings(1200, 1200, Outcome::Draw, 0.0), Error);
}

TEST_CASE("judge_pair agreement and disagreement") {
  SUBCASE("both orders pick the same text: that text wins") {
    providers::MockProvider mock(1, {"<winner>A</winner>", "<winner>B</winner>"});
    providers::ProviderGateway gateway(&mock, nullptr, quiet_config());
    CHECK(judge_pair("ta", "tb", "q", "ml", gateway, /*a_first=*/true) == Outcome::AWins);
  }
  SUBCASE("orders disagree: draw") {
    providers::MockProvider mock(1, {"<winner>A</winner>", "<winner>A</winner>"});
    providers::ProviderGateway gateway(&mock, nullptr, quiet_config());
    CHECK(judge_pair("ta", "tb", "q", "ml", gateway, true) == Outcome::Draw);
  }
  SUBCASE("b wins both orders") {
    providers::MockProvider mock(1, {"<winner>B</winner>", "<winner>A</winner>"});
    providers::ProviderGateway gateway(&mock, nullptr, quiet_config());
    CHECK(judge_pair("ta", "tb", "q", "ml", gateway, true) == Outcome::BWins);
  }
}

TEST_CASE("judge_pair order-swap relabeling mirrors the outcome") {
  // Fixed judge behavior: the rule prefers whichever slot holds "alpha".
  auto make_gateway = [](providers::MockProvider& mock) {
    mock.set_rule([](const providers::ChatRequest& req) -> std::optional<std::string> {
      size_t a_pos = req.user.find("Hypothesis A: ");
      size_t b_pos = req.user.find("Hypothesis B: ");
      std::string a_text = req.user.substr(a_pos + 14, b_pos - a_pos - 14);
      return a_text.find("alpha") != std::string::npos ? "<winner>A</winner>" : "<winner>B</winner>";
    });
  };
  providers::MockProvider m1(1), m2(1);
  make_gateway(m1);
  make_gateway(m2);
  providers::ProviderGateway g1(&m1, nullptr, quiet_config());
  providers::ProviderGateway g2(&m2, nullptr, quiet_config());

  auto forward = judge_pair("alpha claim", "beta claim", "q", "ml", g1, true);
  auto relabeled = judge_pair("beta claim", "alpha claim", "q", "ml", g2, false);
  CHECK(forward == Outcome::AWins);
  CHECK(relabeled == Outcome::BWins);  // the same physical calls, mirrored labels
}

TEST_CASE("judge_pair is deterministic for a scripted verdict stream") {
  auto outcomes = [] {
    providers::MockProvider mock(1, {"<winner>A</winner>", "<winner>B</winner>",
                                     "<winner>B</winner>", "<winner>B</winner>"});
    providers::ProviderGateway gateway(&mock, nullptr, quiet_config());
    std::vector<Outcome> out;
    out.push_back(judge_pair("x", "y", "q", "ml", gateway, true));
    out.push_back(judge_pair("x", "y", "q", "ml", gateway, false));
    return out;
  };
  CHECK(outcomes() == outcomes());
}

TEST_CASE("tournament with an always-draw judge moves nothing") {
  providers::MockProvider mock(1);
  // Self-contradictory verdicts: the same slot always wins, so the two calls
  // of every logical game disagree and the outcome is a draw.
  mock.set_rule([](const providers::ChatRequest&) { return std::optional<std::string>("<winner>A</winner>"); });
  providers::ProviderGateway gateway(&mock, nullptr, quiet_config());

  EloTable table;
  JudgeConfig config;
  auto result = run_tournament(table, {hyp("h0", "t0"), hyp("h1", "t1")}, "ref text", "q", "ml",
                               gateway, config, 7, 1);
  CHECK(result.elo_delta == doctest::Approx(0.0));
  for (const auto& m : result.matches) CHECK(m.outcome == Outcome::Draw);
  CHECK(table.ratings().at("h0").elo == 1200.0);
  CHECK(table.ratings().at(kReferenceId).elo == 1200.0);
  CHECK(table.ratings().at("h0").games_played == 1);
}

TEST_CASE("tournament favoring the reference yields a negative delta") {
  providers::MockProvider mock(1);
  mock.set_rule([](const providers::ChatRequest& req) -> std::optional<std::string> {
    size_t a_pos = req.user.find("Hypothesis A: ");
    size_t b_pos = req.user.find("Hypothesis B: ");
    std::string a_text = req.user.substr(a_pos + 14, b_pos - a_pos - 14);
    return a_text.find("REFTEXT") != std::string::npos ? "<winner>A</winner>" : "<winner>B</winner>";
  });
  providers::ProviderGateway gateway(&mock, nullptr, quiet_config());

  EloTable table;
  JudgeConfig config;
  auto result = run_tournament(table, {hyp("h0", "plain"), hyp("h1", "also plain")}, "REFTEXT", "q",
                               "ml", gateway, config, 3, 1);
  CHECK(result.elo_delta < 0.0);
}

TEST_CASE("scripted two-hypothesis tournament matches a hand-rolled trace") {
  providers::MockProvider mock(1);
  mock.set_rule([](const providers::ChatRequest& req) -> std::optional<std::string> {
    size_t a_pos = req.user.find("Hypothesis A: ");
    size_t b_pos = req.user.find("Hypothesis B: ");
    std::string a_text = req.user.substr(a_pos + 14, b_pos - a_pos - 14);
    bool a_is_winner = a_text.find("WINNER") != std::string::npos;
    bool a_is_ref = a_text.find("REFTEXT") != std::string::npos;
    bool b_is_winner = req.user.find("Hypothesis B: WINNER") != std::string::npos;
    // WINNER beats everything; REFTEXT beats LOSER.
    if (a_is_winner) return std::optional<std::string>("<winner>A</winner>");
    if (b_is_winner) return std::optional<std::string>("<winner>B</winner>");
    return std::optional<std::string>(a_is_ref ? "<winner>A</winner>" : "<winner>B</winner>");
  });
  providers::ProviderGateway gateway(&mock, nullptr, quiet_config());

  EloTable table;
  JudgeConfig config;  // K = 32, initial 1200, one game per hypothesis
  auto result = run_tournament(table, {hyp("h0", "WINNER claim"), hyp("h1", "LOSER claim")},
                               "REFTEXT", "q", "ml", gateway, config, 99, 1);

  // Hand-rolled replay of the logged matches through the update formula.
  double ref = 1200.0, h0 = 1200.0, h1 = 1200.0;
  for (const auto& m : result.matches) {
    double& a = m.a_id == "h0" ? h0 : (m.a_id == "h1" ? h1 : ref);
    double& b = m.b_id == "h0" ? h0 : (m.b_id == "h1" ? h1 : ref);
    double ea = 1.0 / (1.0 + std::pow(10.0, (b - a) / 400.0));
    double sa = m.outcome == Outcome::AWins ? 1.0 : (m.outcome == Outcome::Draw ? 0.5 : 0.0);
    double delta = std::nearbyint(32.0 * (sa - ea) * 1024.0) / 1024.0;
    a += delta;
    b -= delta;
  }
  CHECK(table.ratings().at("h0").elo == h0);
  CHECK(table.ratings().at("h1").elo == h1);
  CHECK(table.ratings().at(kReferenceId).elo == ref);
  CHECK(result.elo_delta == doctest::Approx((h0 + h1) / 2.0 - ref));
  CHECK(h0 > 1200.0);
  CHECK(h1 < 1200.0);

  // Total rating mass is invariant.
  CHECK(h0 + h1 + ref == 3600.0);
}

TEST_CASE("ratings persist and rename across rounds") {
  EloTable table;
  table.get_or_insert("h0", 1200).elo = 1250.0;
  table.get_or_insert("h0", 1200).games_played = 4;
  table.rename("h0", "h7");
  CHECK_FALSE(table.contains("h0"));
  CHECK(table.ratings().at("h7").elo == 1250.0);
  CHECK(table.ratings().at("h7").games_played == 4);
  CHECK_THROWS_AS(table.rename("missing", "x"), Error);
}

TEST_CASE("hypothesis-vs-hypothesis flag adds round-robin pairs") {
  providers::MockProvider mock(2);
  mock.set_rule([](const providers::ChatRequest&) { return std::optional<std::string>("<winner>A</winner>"); });
  providers::ProviderGateway gateway(&mock, nullptr, quiet_config());

  JudgeConfig config;
  config.hypothesis_vs_hypothesis = true;
  EloTable table;
  auto result = run_tournament(table, {hyp("h0", "a"), hyp("h1", "b"), hyp("h2", "c")}, "ref", "q",
                               "ml", gateway, config, 5, 1);
  CHECK(result.matches.size() == 3 + 3);  // three vs reference + three pairings
  size_t vs_reference = 0;
  for (const auto& m : result.matches) {
    if (m.b_id == kReferenceId || m.a_id == kReferenceId) ++vs_reference;
  }
  CHECK(vs_reference == 3);
}
