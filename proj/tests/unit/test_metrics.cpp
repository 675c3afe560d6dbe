#include "dualview/errors.h"
#include "dualview/eval/metrics.h"

#include <doctest.h>

#include "metric_oracle.h"

#include <cmath>
#include <random>
#include <vector>

using namespace dualview;
using namespace dualview::eval;
using Idx = std::vector<std::size_t>;

TEST_CASE("hand examples") {
  const Idx ranking{0, 1, 2, 3, 4, 5};
  CHECK(recall_at_k(ranking, Idx{0, 3}, 4) == 1.0);
  CHECK(recall_at_k(ranking, Idx{0, 5}, 4) == 0.5);
  CHECK(full_hit_at_k(ranking, Idx{0, 3}, 4) == 1.0);
  CHECK(full_hit_at_k(ranking, Idx{0, 5}, 4) == 0.0);
  CHECK(ndcg_at_k(ranking, Idx{0, 1}, 4) == 1.0);
  CHECK(ndcg_at_k(ranking, Idx{4, 5}, 4) == 0.0);
  CHECK(mrr_at_k(ranking, Idx{0}, 4) == 1.0);
  CHECK(mrr_at_k(ranking, Idx{2, 5}, 4) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(mrr_at_k(ranking, Idx{4}, 4) == 0.0);
  CHECK(precision_at_k(ranking, Idx{1, 2}, 4) == 0.5);
  CHECK(precision_at_k(ranking, Idx{5}, 4) == 0.0);
}

TEST_CASE("ndcg worked value for golds at ranks one and three") {
  const Idx ranking{7, 2, 9, 0};
  const double dcg = 1.0 + 1.0 / std::log2(4.0);
  const double idcg = 1.0 + 1.0 / std::log2(3.0);
  CHECK(dcg == doctest::Approx(1.5));
  CHECK(idcg == doctest::Approx(1.6309).epsilon(1e-4));
  const Idx full{7, 2, 9, 0, 1, 3, 4, 5, 6, 8};
  CHECK(ndcg_at_k(full, Idx{7, 9}, 4) == doctest::Approx(dcg / idcg).epsilon(1e-12));
  CHECK(ndcg_at_k(full, Idx{7, 9}, 4) == doctest::Approx(0.9197).epsilon(1e-4));
}

TEST_CASE("gold beyond k") {
  const Idx ranking{0, 1, 2, 3, 4, 5, 6};
  const Idx gold{0, 1, 2, 3, 4};
  CHECK(full_hit_at_k(ranking, gold, 4) == 0.0);
  CHECK(recall_at_k(ranking, gold, 4) == doctest::Approx(0.8));
  CHECK(ndcg_at_k(ranking, gold, 4) == 1.0);  // ideal is capped at k
}

TEST_CASE("1000 random instances match the brute-force oracle") {
  std::mt19937_64 rng(1000);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = dualview::testing::random_instance(rng);
    const auto o = dualview::testing::oracle_metrics(m);
    const auto q = query_metrics(m.ranking, m.gold, m.k);
    REQUIRE(q.recall == o.recall);
    REQUIRE(q.full_hit == o.full_hit);
    REQUIRE(q.mrr == o.mrr);
    REQUIRE(q.precision == o.precision);
    REQUIRE(std::abs(q.ndcg - o.ndcg) <= 1e-9);
    REQUIRE(recall_at_k(m.ranking, m.gold, m.k) == q.recall);
    REQUIRE(ndcg_at_k(m.ranking, m.gold, m.k) == q.ndcg);
  }
}

TEST_CASE("per-query metric identities") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto m = dualview::testing::random_instance(rng);
    const auto q = query_metrics(m.ranking, m.gold, m.k);
    REQUIRE((q.full_hit == 1.0) == (q.recall == 1.0));
    REQUIRE(q.precision * static_cast<double>(m.k) ==
            doctest::Approx(q.recall * static_cast<double>(m.gold.size())).epsilon(1e-12));
    REQUIRE(q.ndcg >= 0.0);
    REQUIRE(q.ndcg <= 1.0 + 1e-12);
    bool mrr_ok = q.mrr == 0.0;
    for (std::size_t r = 1; r <= m.k; ++r) mrr_ok = mrr_ok || q.mrr == 1.0 / static_cast<double>(r);
    REQUIRE(mrr_ok);
    for (double v : {q.recall, q.full_hit, q.precision}) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
}

TEST_CASE("invalid arguments") {
  const Idx ranking{0, 1, 2};
  CHECK_THROWS_AS(recall_at_k(ranking, Idx{}, 2), InputError);
  CHECK_THROWS_AS(recall_at_k(ranking, Idx{0}, 0), InputError);
  CHECK_THROWS_AS(recall_at_k(Idx{0, 0, 2}, Idx{0}, 2), InputError);
  CHECK_THROWS_AS(recall_at_k(Idx{0, 1, 3}, Idx{0}, 2), InputError);
  CHECK_THROWS_AS(ndcg_at_k(ranking, Idx{5}, 2), InputError);
}
