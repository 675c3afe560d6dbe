#include "dualview/data/candidate_set.h"
#include "dualview/data/dataset_io.h"
#include "dualview/data/mining.h"
#include "dualview/data/synthetic.h"
#include "dualview/errors.h"

#include <doctest.h>

#include "fixtures.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace dualview;
using namespace dualview::data;

namespace {

std::string to_jsonl(const Dataset& d) {
  std::ostringstream out;
  write_jsonl(out, d);
  return out.str();
}

std::string to_binary(const Dataset& d) {
  std::ostringstream out(std::ios::binary);
  write_binary(out, d);
  return out.str();
}

Dataset parse(const std::string& text, ValidationLimits limits = {}) {
  std::istringstream in(text);
  return read_jsonl(in, limits, "mem");
}

std::string load_error(const std::string& text, ValidationLimits limits = {}) {
  try {
    parse(text, limits);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

const std::string kRecord =
    R"({"query_id":"a","query_embedding":[1,0],"candidates":[{"doc_id":"x","embedding":[0.5,0.5],"label":1}]})";

Dataset small_dataset(std::uint64_t seed, std::size_t queries = 5) {
  SyntheticConfig cfg;
  cfg.n_queries = queries;
  cfg.embed_dim = 16;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

}  // namespace

TEST_CASE("jsonl reading") {
  CHECK(parse("").empty());
  CHECK(parse("\n\n").empty());
  const Dataset one = parse(kRecord + "\n");
  REQUIRE(one.size() == 1);
  CHECK(one[0].query_id == "a");
  CHECK(one[0].candidates[0].embedding == EmbeddingVector{0.5f, 0.5f});
  CHECK(one[0].gold_count() == 1);

  std::mt19937_64 rng(1);
  auto ten = dualview::testing::random_set(rng, 10, 4);
  CHECK(parse(to_jsonl({ten}))[0].size() == 10);
}

TEST_CASE("jsonl validation errors name the line") {
  const std::string good = kRecord + "\n";
  SUBCASE("malformed json") {
    const auto msg = load_error(good + "\n{\"query_id\": \n");
    CHECK(msg.find("mem:3") != std::string::npos);
    CHECK(msg.find("malformed JSON") != std::string::npos);
  }
  SUBCASE("wrong embedding width") {
    ValidationLimits limits;
    limits.embed_dim = 768;
    const auto msg = load_error(good, limits);
    CHECK(msg.find("mem:1") != std::string::npos);
    CHECK(msg.find("768") != std::string::npos);
  }
  SUBCASE("label outside {0,1}") {
    std::string bad = kRecord;
    bad.replace(bad.find("\"label\":1"), 9, "\"label\":2");
    CHECK(load_error(good + bad).find("mem:2") != std::string::npos);
  }
  SUBCASE("too many candidates") {
    std::mt19937_64 rng(2);
    const auto eleven = dualview::testing::random_set(rng, 11, 4);
    CHECK(load_error(to_jsonl({eleven})).find("mem:1") != std::string::npos);
  }
  SUBCASE("missing field") {
    CHECK(load_error(R"({"query_id":"a","candidates":[]})").find("query_embedding") != std::string::npos);
  }
  SUBCASE("mismatched candidate width") {
    std::string bad = kRecord;
    bad.replace(bad.find("[0.5,0.5]"), 9, "[0.5]");
    CHECK_FALSE(load_error(bad).empty());
  }
}

TEST_CASE("jsonl write read write is byte identical") {
  Dataset d = small_dataset(3);
  d[0].query_embedding[0] = 0.1f;  // not exactly representable
  d[1].candidates[2].embedding[3] = -3.4028235e38f;
  d[2].candidates[0].embedding[1] = 1.17549435e-38f;
  d[3].query_id = "quote\"and\\slash";
  const std::string first = to_jsonl(d);
  const Dataset back = parse(first);
  CHECK(back == d);
  CHECK(to_jsonl(back) == first);
}

TEST_CASE("binary cache round trip") {
  const Dataset d = small_dataset(4);
  const std::string first = to_binary(d);
  CHECK(first.rfind(kBinaryMagic, 0) == 0);
  std::istringstream in(first, std::ios::binary);
  const Dataset back = read_binary(in, {});
  CHECK(back == d);
  CHECK(to_binary(back) == first);

  std::istringstream truncated(first.substr(0, first.size() - 1), std::ios::binary);
  CHECK_THROWS_AS(read_binary(truncated, {}), LoadError);
  std::istringstream not_binary(to_jsonl(d), std::ios::binary);
  CHECK_THROWS_AS(read_binary(not_binary, {}), LoadError);
}

TEST_CASE("synthetic generation is deterministic") {
  SyntheticConfig cfg;
  cfg.mode = SyntheticMode::kComplementaryPair;
  cfg.n_queries = 20;
  cfg.seed = 7;
  CHECK(to_jsonl(generate_synthetic(cfg)) == to_jsonl(generate_synthetic(cfg)));
  auto other = cfg;
  other.seed = 8;
  CHECK(to_jsonl(generate_synthetic(cfg)) != to_jsonl(generate_synthetic(other)));
}

TEST_CASE("planted similarity with zero noise") {
  SyntheticConfig cfg;
  cfg.n_queries = 50;
  cfg.noise_sigma = 0.0;
  cfg.n_candidates = 10;
  for (const auto& set : generate_synthetic(cfg)) {
    REQUIRE(set.size() == 10);
    REQUIRE(set.gold_count() == 2);
    std::vector<std::pair<double, int>> by_cosine;
    for (const auto& c : set.candidates) {
      const double cs = cosine(set.query_embedding, c.embedding);
      if (c.label == 1) CHECK(cs == doctest::Approx(1.0).epsilon(1e-6));
      by_cosine.emplace_back(-cs, c.label);
    }
    std::sort(by_cosine.begin(), by_cosine.end());
    // Both golds sit in the cosine top 4.
    CHECK(by_cosine[0].second + by_cosine[1].second + by_cosine[2].second + by_cosine[3].second == 2);
  }
}

TEST_CASE("complementary pair geometry") {
  SyntheticConfig cfg;
  cfg.mode = SyntheticMode::kComplementaryPair;
  cfg.n_queries = 100;
  cfg.noise_sigma = 0.01;
  cfg.n_candidates = 10;
  std::map<int, int> gold_slots;
  std::size_t cosine_full_hits = 0;
  for (const auto& set : generate_synthetic(cfg)) {
    REQUIRE(set.gold_count() == 2);
    const auto golds = set.gold_indices();
    ++gold_slots[static_cast<int>(golds[0])];
    // The golds add up to a multiple of the query.
    EmbeddingVector sum(set.embed_dim());
    for (std::size_t j = 0; j < sum.size(); ++j) {
      sum[j] = set.candidates[golds[0]].embedding[j] + set.candidates[golds[1]].embedding[j];
    }
    CHECK(cosine(sum, set.query_embedding) > 0.99);
    CHECK(std::abs(cosine(set.candidates[golds[0]].embedding, set.candidates[golds[1]].embedding)) < 0.05);

    std::vector<double> sims;
    int near_copies = 0, half_aligned = 0, unrelated = 0;
    for (const auto& c : set.candidates) {
      const double cs = cosine(set.query_embedding, c.embedding);
      sims.push_back(cs);
      if (c.label == 1) {
        CHECK(cs == doctest::Approx(std::sqrt(0.5)).epsilon(0.03));
      } else if (cs > 0.95) {
        ++near_copies;
      } else if (std::abs(cs - std::sqrt(0.5)) < 0.03) {
        ++half_aligned;
      } else {
        ++unrelated;
      }
    }
    CHECK(near_copies == 1);
    CHECK(half_aligned == 5);
    CHECK(unrelated == 2);
    std::vector<double> sorted = sims;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sims[golds[0]] >= sorted[3] && sims[golds[1]] >= sorted[3]) ++cosine_full_hits;
  }
  CHECK(cosine_full_hits < 100);
  CHECK(gold_slots.size() > 3);  // candidate order is shuffled
}

TEST_CASE("synthetic configuration errors") {
  SyntheticConfig cfg;
  cfg.mode = SyntheticMode::kComplementaryPair;
  cfg.n_gold = 3;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = SyntheticConfig{};
  cfg.n_gold = 7;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = SyntheticConfig{};
  cfg.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  CHECK_THROWS_AS(parse_synthetic_mode("bridge"), ConfigError);
}

TEST_CASE("hard negative mining") {
  SUBCASE("an identical distractor ranks first") {
    const std::vector<EmbeddingVector> gold{{0.3f, -0.2f, 0.9f}};
    const std::vector<EmbeddingVector> pool{{1, 0, 0}, {0.3f, -0.2f, 0.9f}, {0, 1, 0}};
    const auto r = mine_hard_negatives(gold, pool, 2);
    CHECK(r.neighbors[0][0].index == 1);
    CHECK(r.neighbors[0][0].similarity == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("orthogonal pool keeps index order") {
    const std::vector<EmbeddingVector> gold{{1, 0, 0, 0}};
    const std::vector<EmbeddingVector> pool{{0, 0, 0, 2}, {0, 1, 0, 0}, {0, 0, 3, 0}};
    const auto r = mine_hard_negatives(gold, pool, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(r.neighbors[0][i].index == i);
      CHECK(r.neighbors[0][i].similarity == 0.0);
    }
  }
  SUBCASE("random pools match an exhaustive scan") {
    std::mt19937_64 rng(17);
    std::normal_distribution<float> d;
    auto vec = [&] {
      EmbeddingVector v(8);
      for (float& x : v) x = d(rng);
      return v;
    };
    std::vector<EmbeddingVector> gold(5), pool(40);
    for (auto& g : gold) g = vec();
    for (auto& p : pool) p = vec();
    const auto r = mine_hard_negatives(gold, pool, 4);
    CHECK_FALSE(r.truncated);
    for (std::size_t g = 0; g < gold.size(); ++g) {
      std::vector<std::pair<double, std::size_t>> scan;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        double dot = 0, ng = 0, np = 0;
        for (std::size_t j = 0; j < 8; ++j) {
          dot += static_cast<double>(gold[g][j]) * pool[i][j];
          ng += static_cast<double>(gold[g][j]) * gold[g][j];
          np += static_cast<double>(pool[i][j]) * pool[i][j];
        }
        scan.emplace_back(-dot / std::sqrt(ng * np), i);
      }
      std::sort(scan.begin(), scan.end());
      REQUIRE(r.neighbors[g].size() == 4);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(r.neighbors[g][k].index == scan[k].second);
        CHECK(r.neighbors[g][k].similarity == doctest::Approx(-scan[k].first).epsilon(1e-9));
      }
    }
  }
  SUBCASE("k beyond the pool truncates with a flag") {
    const auto r = mine_hard_negatives({{1, 0}}, {{1, 1}, {0, 1}}, 5);
    CHECK(r.truncated);
    CHECK(r.neighbors[0].size() == 2);
  }
  SUBCASE("empty pool") {
    CHECK_THROWS_AS(mine_hard_negatives({{1, 0}}, {}, 1), InputError);
  }
}

TEST_CASE("merge neighbors interleaves by rank and drops repeats") {
  MiningResult mined;
  mined.neighbors = {{{4, 0.9}, {2, 0.8}, {7, 0.1}}, {{2, 0.95}, {5, 0.5}, {4, 0.2}}};
  CHECK(merge_neighbors(mined) == std::vector<std::size_t>{4, 2, 5, 7});
}

TEST_CASE("build candidate set") {
  const EmbeddingVector q{1, 0};
  const std::vector<Candidate> golds{{"g1", {1, 0}, 1}, {"g2", {0, 1}, 1}};
  std::vector<Candidate> negatives;
  for (int i = 0; i < 12; ++i) negatives.push_back({"n" + std::to_string(i), {0.5f, 0.5f}, 0});
  const auto set = build_candidate_set("q", q, golds, negatives, 10, 3);
  CHECK(set.size() == 10);
  CHECK(set.gold_count() == 2);
  std::set<std::string> ids;
  for (const auto& c : set.candidates) ids.insert(c.doc_id);
  CHECK(ids.count("g1") == 1);
  CHECK(ids.count("n7") == 1);
  CHECK(ids.count("n8") == 0);  // only the first eight negatives are used
  CHECK(build_candidate_set("q", q, golds, negatives, 10, 3) == set);
  CHECK_THROWS_AS(build_candidate_set("q", q, golds, std::vector<Candidate>(negatives.begin(), negatives.begin() + 3), 10, 3),
                  InputError);
}

TEST_CASE("stratified mix keeps source order and is seeded") {
  const Dataset a = small_dataset(1, 30), b = small_dataset(2, 10);
  Dataset b_renamed = b;
  for (auto& s : b_renamed) s.query_id = "b" + s.query_id;
  const Dataset mixed = stratified_mix({a, b_renamed}, 5);
  REQUIRE(mixed.size() == 40);
  std::vector<std::string> from_a, from_b;
  for (const auto& s : mixed) (s.query_id[0] == 'b' ? from_b : from_a).push_back(s.query_id);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(from_a[i] == a[i].query_id);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(from_b[i] == b_renamed[i].query_id);
  CHECK(to_jsonl(stratified_mix({a, b_renamed}, 5)) == to_jsonl(mixed));
  CHECK(to_jsonl(stratified_mix({a, b_renamed}, 6)) != to_jsonl(mixed));
}

TEST_CASE("candidate set validation") {
  std::mt19937_64 rng(3);
  auto set = dualview::testing::random_set(rng, 3, 4, 0);
  ValidationLimits limits;
  CHECK_NOTHROW(validate(set, limits));
  limits.require_gold = true;
  CHECK_THROWS_AS(validate(set, limits), InputError);
  set.candidates[0].label = -1;
  CHECK_THROWS_AS(validate(set, ValidationLimits{}), InputError);
  CHECK(cosine({1, 0}, {0, 0}) == 0.0);
}
