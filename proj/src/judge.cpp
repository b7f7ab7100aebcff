#include "hypoloop/judge.hpp"

#include <algorithm>
#include <cmath>

#include "hypoloop/parallel.hpp"
#include "hypoloop/rng.hpp"

namespace hypoloop::judge {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::AWins: return "a_wins";
    case Outcome::BWins: return "b_wins";
    case Outcome::Draw: return "draw";
  }
  return "draw";
}

double expected_score(double rating_a, double rating_b) {
  return 1.0 / (1.0 + std::pow(10.0, (rating_b - rating_a) / 400.0));
}

std::pair<double, double> update_ratings(double rating_a, double rating_b, Outcome outcome,
                                         double k_factor) {
  if (k_factor <= 0.0) throw Error(ErrorCode::OutOfRange, "k_factor must be positive");
  double score_a = outcome == Outcome::AWins ? 1.0 : (outcome == Outcome::Draw ? 0.5 : 0.0);
  double delta = k_factor * (score_a - expected_score(rating_a, rating_b));
  delta = std::nearbyint(delta * 1024.0) / 1024.0;  // snap to the exact-conservation grid
  return {rating_a + delta, rating_b - delta};
}

Rating& EloTable::get_or_insert(const std::string& entity_id, double initial_elo) {
  auto [it, inserted] = ratings_.try_emplace(entity_id, Rating{entity_id, initial_elo, 0});
  return it->second;
}

void EloTable::rename(const std::string& old_id, const std::string& new_id) {
  auto it = ratings_.find(old_id);
  if (it == ratings_.end()) throw Error(ErrorCode::UnknownTarget, "no rating for " + old_id);
  Rating moved = it->second;
  moved.entity_id = new_id;
  ratings_.erase(it);
  ratings_[new_id] = std::move(moved);
}

void EloTable::apply_match(const MatchRecord& match, double k_factor, double initial_elo) {
  Rating& a = get_or_insert(match.a_id, initial_elo);
  Rating& b = get_or_insert(match.b_id, initial_elo);
  auto [new_a, new_b] = update_ratings(a.elo, b.elo, match.outcome, k_factor);
  a.elo = new_a;
  b.elo = new_b;
  a.games_played++;
  b.games_played++;
}

double EloTable::elo_delta(const std::vector<std::string>& hypothesis_ids) const {
  if (hypothesis_ids.empty()) throw Error(ErrorCode::EmptyHypothesisSet, "no hypotheses rated");
  auto ref = ratings_.find(kReferenceId);
  if (ref == ratings_.end()) throw Error(ErrorCode::UnknownTarget, "reference has no rating");
  double sum = 0.0;
  for (const auto& id : hypothesis_ids) {
    auto it = ratings_.find(id);
    if (it == ratings_.end()) throw Error(ErrorCode::UnknownTarget, "no rating for " + id);
    sum += it->second.elo;
  }
  return sum / static_cast<double>(hypothesis_ids.size()) - ref->second.elo;
}

namespace {

char ask_winner(providers::ProviderGateway& gateway, const std::string& question,
                const std::string& domain_keyword, const std::string& first,
                const std::string& second) {
  auto [system, user] = providers::render_prompt("judge", {
      {"keyword_content", domain_keyword},
      {"question", question},
      {"hypothesis_a", first},
      {"hypothesis_b", second},
  });
  providers::ChatRequest request{system, user, gateway.config().temperature_default, "judge"};
  return gateway.ask_parsed(request, providers::parse_winner_tag);
}

}  // namespace

Outcome judge_pair(const std::string& text_a, const std::string& text_b, const std::string& question,
                   const std::string& domain_keyword, providers::ProviderGateway& gateway,
                   bool a_first) {
  const std::string& first = a_first ? text_a : text_b;
  const std::string& second = a_first ? text_b : text_a;

  // Call 1: (first, second); call 2: swapped. Map slot verdicts back to a/b.
  char verdict_1 = ask_winner(gateway, question, domain_keyword, first, second);
  char verdict_2 = ask_winner(gateway, question, domain_keyword, second, first);

  bool a_won_1 = (verdict_1 == 'A') == a_first;
  bool a_won_2 = (verdict_2 == 'B') == a_first;
  if (a_won_1 && a_won_2) return Outcome::AWins;
  if (!a_won_1 && !a_won_2) return Outcome::BWins;
  return Outcome::Draw;
}

TournamentResult run_tournament(EloTable& table, const std::vector<belief::Hypothesis>& hypotheses,
                                const std::string& reference_text, const std::string& question,
                                const std::string& domain_keyword,
                                providers::ProviderGateway& gateway, const JudgeConfig& config,
                                uint64_t seed, int round) {
  if (hypotheses.empty()) throw Error(ErrorCode::EmptyHypothesisSet, "tournament needs hypotheses");
  if (reference_text.empty()) throw Error(ErrorCode::EmptyInput, "tournament needs a reference text");

  table.get_or_insert(kReferenceId, config.initial_elo);
  std::vector<std::string> hypothesis_ids;
  for (const auto& h : hypotheses) {
    hypothesis_ids.push_back(h.id);
    table.get_or_insert(h.id, config.initial_elo);
  }

  struct Game {
    std::string a_id;
    std::string b_id;
    const std::string* a_text;
    const std::string* b_text;
  };
  std::vector<Game> schedule;
  for (int g = 0; g < config.games_per_round; ++g) {
    for (const auto& h : hypotheses) {
      schedule.push_back({h.id, kReferenceId, &h.text, &reference_text});
    }
  }
  if (config.hypothesis_vs_hypothesis) {
    for (size_t i = 0; i < hypotheses.size(); ++i) {
      for (size_t j = i + 1; j < hypotheses.size(); ++j) {
        schedule.push_back({hypotheses[i].id, hypotheses[j].id, &hypotheses[i].text, &hypotheses[j].text});
      }
    }
  }

  Rng rng(derive_seed(seed, "tournament", static_cast<uint64_t>(round)));
  rng.shuffle(schedule);
  std::vector<bool> a_first(schedule.size());
  for (size_t i = 0; i < schedule.size(); ++i) a_first[i] = rng.next_u64() & 1;

  TournamentResult result;
  result.matches.resize(schedule.size());
  // Games fan out under the provider cap; rating updates are then applied
  // serially in schedule order, so the ELO path is fixed by the logged order.
  parallel_for(schedule.size(), gateway.config().max_parallel, [&](size_t i) {
    MatchRecord record;
    record.a_id = schedule[i].a_id;
    record.b_id = schedule[i].b_id;
    record.a_presented_first = a_first[i];
    record.round = round;
    record.outcome = judge_pair(*schedule[i].a_text, *schedule[i].b_text, question, domain_keyword,
                                gateway, a_first[i]);
    result.matches[i] = std::move(record);
  });
  for (const auto& match : result.matches) {
    table.apply_match(match, config.k_factor, config.initial_elo);
  }

  result.elo_delta = table.elo_delta(hypothesis_ids);
  return result;
}

}  // namespace hypoloop::judge
