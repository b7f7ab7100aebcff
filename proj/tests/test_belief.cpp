#include <cmath>
#include <doctest.h>

#include "hypoloop/belief.hpp"
#include "hypoloop/rng.hpp"

using namespace hypoloop;
using namespace hypoloop::belief;

namespace {

// Independent one-line oracles, kept apart from the implementation path.
std::vector<double> bayes_oracle(const std::vector<double>& prior, const std::vector<double>& like) {
  double z = 0.0;
  for (size_t i = 0; i < prior.size(); ++i) z += prior[i] * like[i];
  std::vector<double> post(prior.size());
  for (size_t i = 0; i < prior.size(); ++i) post[i] = prior[i] * like[i] / z;
  return post;
}

long double entropy_oracle(const std::vector<double>& p) {
  long double h = 0.0L;
  for (double v : p) {
    if (v > 0.0) h -= static_cast<long double>(v) * std::log2(static_cast<long double>(v));
  }
  return h;
}

BeliefDistribution dist_of(const std::vector<double>& beliefs) {
  std::vector<BeliefEntry> entries;
  for (size_t i = 0; i < beliefs.size(); ++i) entries.push_back({"h" + std::to_string(i), beliefs[i]});
  return BeliefDistribution::from_entries(std::move(entries));
}

std::vector<double> values_of(const BeliefDistribution& d) {
  std::vector<double> out;
  for (const auto& e : d.entries()) out.push_back(e.belief);
  return out;
}

std::vector<double> random_distribution(Rng& rng, size_t n) {
  std::vector<double> p(n);
  double sum = 0.0;
  for (auto& v : p) {
    v = rng.next_double() + 1e-9;
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace

TEST_CASE("initial_beliefs normalizes the weighted score sums") {
  WeightConfig thirds;
  auto dist = initial_beliefs({"a", "b"}, {{0.6, 0.6, 0.6}, {0.2, 0.2, 0.2}}, thirds);
  // Oracle: hand evaluation of the weighted-sum formula.
  double wa = (0.6 + 0.6 + 0.6) / 3.0, wb = (0.2 + 0.2 + 0.2) / 3.0;
  CHECK(dist.entries()[0].belief == doctest::Approx(wa / (wa + wb)).epsilon(1e-12));
  CHECK(dist.entries()[1].belief == doctest::Approx(wb / (wa + wb)).epsilon(1e-12));
  CHECK(dist.entries()[0].belief == doctest::Approx(0.75));
  CHECK(dist.entries()[1].belief == doctest::Approx(0.25));
}

TEST_CASE("initial_beliefs trivial cases") {
  WeightConfig w{0.5, 0.25, 0.25};
  auto single = initial_beliefs({"only"}, {{0.3, 0.9, 0.1}}, w);
  CHECK(single.entries().size() == 1);
  CHECK(single.entries()[0].belief == doctest::Approx(1.0));

  auto uniform = initial_beliefs({"a", "b", "c"},
                                 {{0.4, 0.5, 0.6}, {0.4, 0.5, 0.6}, {0.4, 0.5, 0.6}}, WeightConfig{});
  for (const auto& e : uniform.entries()) CHECK(e.belief == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("initial_beliefs error paths") {
  WeightConfig w;
  CHECK_THROWS_AS(initial_beliefs({}, {}, w), Error);
  try {
    initial_beliefs({}, {}, w);
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::EmptyHypothesisSet);
  }

  try {
    initial_beliefs({"a", "b"}, {{0, 0, 0}, {0, 0, 0}}, w);
    FAIL("expected AllZeroScores");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::AllZeroScores);
  }

  try {
    initial_beliefs({"a"}, {{1.2, 0.5, 0.5}}, w);
    FAIL("expected OutOfRange");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::OutOfRange);
  }

  try {
    initial_beliefs({"a"}, {{0.5, 0.5, 0.5}}, WeightConfig{0.5, 0.5, 0.5});
    FAIL("expected InvalidWeights");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::InvalidWeights);
  }
}

TEST_CASE("initial_beliefs sums to one for random valid inputs") {
  Rng rng(101);
  WeightConfig w;
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 1 + rng.next_index(12);
    std::vector<std::string> ids;
    std::vector<ScoreTriple> scores;
    for (size_t i = 0; i < n; ++i) {
      ids.push_back("h" + std::to_string(i));
      scores.push_back({rng.next_double(), rng.next_double(), 0.01 + 0.99 * rng.next_double()});
    }
    auto dist = initial_beliefs(ids, scores, w);
    double sum = 0.0;
    for (const auto& e : dist.entries()) sum += e.belief;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("posterior_update matches the Bayes oracle") {
  auto post = posterior_update(dist_of({0.5, 0.5}), {0.8, 0.2});
  auto expect = bayes_oracle({0.5, 0.5}, {0.8, 0.2});
  CHECK(post.entries()[0].belief == doctest::Approx(expect[0]).epsilon(1e-12));
  CHECK(post.entries()[0].belief == doctest::Approx(0.8));
  CHECK(post.entries()[1].belief == doctest::Approx(0.2));
}

TEST_CASE("posterior_update with constant likelihood keeps the prior") {
  auto post = posterior_update(dist_of({0.25, 0.25, 0.25, 0.25}), {0.6, 0.6, 0.6, 0.6});
  for (const auto& e : post.entries()) CHECK(e.belief == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("posterior_update degenerate evidence") {
  try {
    posterior_update(dist_of({0.9, 0.1}), {0.0, 0.0});
    FAIL("expected DegenerateEvidence");
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::DegenerateEvidence);
  }
}

TEST_CASE("posterior_update is scale-invariant in likelihoods") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 2 + rng.next_index(9);
    auto prior = dist_of(random_distribution(rng, n));
    std::vector<double> like(n);
    for (auto& v : like) v = rng.next_double();
    like[rng.next_index(n)] = 0.5;  // keep the normalizer positive
    double c = 0.1 + 10.0 * rng.next_double();
    std::vector<double> scaled = like;
    for (auto& v : scaled) v *= c;

    auto a = values_of(posterior_update(prior, like));
    auto b = values_of(posterior_update(prior, scaled));
    for (size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }
}

TEST_CASE("chained updates equal a product-likelihood update") {
  Rng rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 2 + rng.next_index(9);
    auto prior = dist_of(random_distribution(rng, n));
    std::vector<double> l1(n), l2(n), prod(n);
    for (size_t i = 0; i < n; ++i) {
      l1[i] = 0.05 + 0.95 * rng.next_double();
      l2[i] = 0.05 + 0.95 * rng.next_double();
      prod[i] = l1[i] * l2[i];
    }
    auto chained = values_of(posterior_update(posterior_update(prior, l1), l2));
    auto direct = values_of(posterior_update(prior, prod));
    for (size_t i = 0; i < n; ++i) CHECK(std::abs(chained[i] - direct[i]) < 1e-9);
  }
}

TEST_CASE("repeated updates with a unique argmax drive that belief to 1") {
  auto dist = dist_of({0.2, 0.2, 0.2, 0.2, 0.2});
  std::vector<double> like = {0.9, 0.4, 0.4, 0.4, 0.4};
  double prev = dist.entries()[0].belief;
  for (int round = 0; round < 25; ++round) {
    dist = posterior_update(dist, like);
    double current = dist.entries()[0].belief;
    CHECK(current > prev);
    prev = current;
  }
  CHECK(prev > 0.999);
}

TEST_CASE("shannon_entropy endpoints and frozen value") {
  CHECK(shannon_entropy(dist_of({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(shannon_entropy(dist_of({1.0, 0.0, 0.0})) == 0.0);
  // Frozen from direct evaluation: -0.8*log2(0.8) - 0.2*log2(0.2).
  CHECK(shannon_entropy(dist_of({0.8, 0.2})) == doctest::Approx(0.7219280948873623).epsilon(1e-12));
}

TEST_CASE("shannon_entropy never exceeds log2(n) and matches the reference") {
  Rng rng(79);
  for (int trial = 0; trial < 300; ++trial) {
    size_t n = 2 + rng.next_index(15);
    auto p = random_distribution(rng, n);
    double h = shannon_entropy(dist_of(p));
    CHECK(h <= std::log2(static_cast<double>(n)) + 1e-12);
    CHECK(h >= 0.0);
    CHECK(std::abs(h - static_cast<double>(entropy_oracle(p))) < 1e-12);
  }
}

TEST_CASE("binary_entropy endpoints, maximum, and frozen case-study value") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  // Frozen from direct evaluation at the case-study belief 0.437.
  CHECK(binary_entropy(0.437) == doctest::Approx(0.9885173903891564).epsilon(1e-12));
  CHECK(binary_entropy(0.2) == doctest::Approx(0.7219280948873623).epsilon(1e-12));
  CHECK(binary_entropy(0.99) == doctest::Approx(0.08079313589591118).epsilon(1e-10));
}

TEST_CASE("binary_entropy rejects out-of-range beliefs") {
  for (double bad : {-0.1, 1.1, 2.0}) {
    try {
      binary_entropy(bad);
      FAIL("expected OutOfRange");
    } catch (const Error& e) {
      CHECK(e.code == ErrorCode::OutOfRange);
    }
  }
}

TEST_CASE("binary_entropy is exactly symmetric for grid beliefs") {
  Rng rng(80);
  for (int trial = 0; trial < 1000; ++trial) {
    double b = rng.next_double();  // multiples of 2^-53, so 1-b is exact
    CHECK(binary_entropy(b) == binary_entropy(1.0 - b));
  }
}

TEST_CASE("belief distribution validation") {
  CHECK_THROWS_AS(dist_of({0.5, 0.6}), Error);            // sums past 1
  CHECK_THROWS_AS(dist_of({-0.1, 1.1}), Error);           // negative entry
  CHECK_THROWS_AS(BeliefDistribution::from_entries({{"a", 0.5}, {"a", 0.5}}), Error);
  auto d = dist_of({0.5, 0.5});
  CHECK(d.belief_of("h1") == doctest::Approx(0.5));
  CHECK_THROWS_AS(d.belief_of("zz"), Error);
}

TEST_CASE("hypothesis lineage must be strictly increasing") {
  Hypothesis h;
  h.id = "x";
  h.text = "t";
  h.lineage = {{0, "generated", {}}, {2, "deepening", {"x"}}};
  CHECK_NOTHROW(validate_hypothesis(h));
  h.lineage.push_back({2, "counterfactual", {"y"}});
  CHECK_THROWS_AS(validate_hypothesis(h), Error);
  h.lineage.clear();
  h.text = "";
  CHECK_THROWS_AS(validate_hypothesis(h), Error);
}
