#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hypoloop/belief.hpp"
#include "hypoloop/providers.hpp"

namespace hypoloop::judge {

inline constexpr const char* kReferenceId = "reference";

enum class Outcome { AWins, BWins, Draw };

const char* outcome_name(Outcome o);

struct Rating {
  std::string entity_id;
  double elo = 1200.0;
  int games_played = 0;
};

struct MatchRecord {
  std::string a_id;
  std::string b_id;
  bool a_presented_first = true;  // order of the first judge call
  Outcome outcome = Outcome::Draw;
  int round = 0;
  std::string transcript_ref;
};

struct JudgeConfig {
  double k_factor = 32.0;
  double initial_elo = 1200.0;
  int games_per_round = 1;              // games each hypothesis plays vs the reference
  bool hypothesis_vs_hypothesis = false;  // also play every hypothesis pair once per round
};

// Standard logistic expectation: 1 / (1 + 10^((rb - ra)/400)).
double expected_score(double rating_a, double rating_b);

// One-match update with a shared K factor. The applied delta snaps to a
// 1/1024 grid so that (for grid-valued ratings, which initial integers stay
// on) the pair sum is conserved exactly in double arithmetic.
std::pair<double, double> update_ratings(double rating_a, double rating_b, Outcome outcome,
                                         double k_factor);

// Ratings keyed by entity id; refined hypotheses inherit their parent's row.
class EloTable {
 public:
  Rating& get_or_insert(const std::string& entity_id, double initial_elo);
  const std::map<std::string, Rating>& ratings() const { return ratings_; }
  std::map<std::string, Rating>& ratings() { return ratings_; }
  bool contains(const std::string& entity_id) const { return ratings_.count(entity_id) > 0; }
  void rename(const std::string& old_id, const std::string& new_id);
  void apply_match(const MatchRecord& match, double k_factor, double initial_elo);

  // mean(hypothesis elos) - reference elo, recomputed from current rows.
  double elo_delta(const std::vector<std::string>& hypothesis_ids) const;

 private:
  std::map<std::string, Rating> ratings_;
};

// Position-bias mitigation: every logical comparison runs twice with the
// presentation order swapped; agreement decides the winner, disagreement is a
// draw. Outcomes are reported relative to (a, b) as passed in.
Outcome judge_pair(const std::string& text_a, const std::string& text_b, const std::string& question,
                   const std::string& domain_keyword, providers::ProviderGateway& gateway,
                   bool a_first);

struct TournamentResult {
  double elo_delta = 0.0;
  std::vector<MatchRecord> matches;
};

// Plays each hypothesis against the reference games_per_round times (plus all
// hypothesis pairs when enabled) in a seed-shuffled schedule; rating updates
// are applied serially in schedule order.
TournamentResult run_tournament(EloTable& table, const std::vector<belief::Hypothesis>& hypotheses,
                                const std::string& reference_text, const std::string& question,
                                const std::string& domain_keyword,
                                providers::ProviderGateway& gateway, const JudgeConfig& config,
                                uint64_t seed, int round);

}  // namespace hypoloop::judge
