#include "dualview/bench/latency.h"
#include "dualview/data/synthetic.h"
#include "dualview/errors.h"
#include "dualview/model/dualview.h"

#include <doctest.h>

#include "fixtures.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>
#include <vector>

using namespace dualview;
using namespace dualview::bench;

namespace {

data::Dataset tiny_data(std::size_t n = 3) {
  data::SyntheticConfig cfg;
  cfg.n_queries = n;
  cfg.embed_dim = 8;
  return data::generate_synthetic(cfg);
}

// Sleeping rather than spinning keeps the stub's duration stable on a shared core.
void pause_for(std::chrono::microseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

TEST_CASE("nearest-rank percentile") {
  std::vector<double> hundred;
  for (int i = 100; i >= 1; --i) hundred.push_back(i);
  CHECK(nearest_rank_percentile(hundred, 95.0) == 95.0);
  CHECK(nearest_rank_percentile(hundred, 100.0) == 100.0);
  CHECK(nearest_rank_percentile(hundred, 50.0) == 50.0);
  std::vector<double> twenty;
  for (int i = 1; i <= 20; ++i) twenty.push_back(i);
  CHECK(nearest_rank_percentile(twenty, 95.0) == 19.0);
  CHECK(nearest_rank_percentile({7.0}, 95.0) == 7.0);
  CHECK_THROWS(nearest_rank_percentile({}, 95.0));
}

TEST_CASE("a 5 ms stub reports about 200 queries per second") {
  BenchOptions opts;
  opts.warmup = 5;
  opts.iters = 60;
  const auto r = bench_rerank([](const data::CandidateSet&) { pause_for(std::chrono::microseconds(5000)); },
                              tiny_data(), opts);
  CHECK(r.n_measured == 60);
  CHECK(r.n_warmup == 5);
  CHECK(r.samples_ms.size() == 60);
  CHECK(r.mean_ms >= 5.0);
  CHECK(r.mean_ms < 5.5);
  CHECK(r.qps == doctest::Approx(200.0).epsilon(0.1));
  CHECK(r.qps == doctest::Approx(1000.0 / r.mean_ms).epsilon(1e-12));
  CHECK(r.min_ms <= r.median_ms);
  CHECK(r.median_ms <= r.p95_ms);
  CHECK(r.p95_ms <= r.max_ms);
  CHECK(r.p95_ms == nearest_rank_percentile(r.samples_ms, 95.0));
  CHECK(r.candidate_size == 6);
}

TEST_CASE("too few iterations are refused") {
  BenchOptions opts;
  opts.iters = kMinIterations - 1;
  CHECK_THROWS_AS(bench_rerank([](const data::CandidateSet&) {}, tiny_data(), opts), ConfigError);
  opts.iters = kMinIterations;
  CHECK_NOTHROW(bench_rerank([](const data::CandidateSet&) {}, tiny_data(), opts));
  CHECK_THROWS_AS(bench_rerank([](const data::CandidateSet&) {}, data::Dataset{}, BenchOptions{}), InputError);
}

TEST_CASE("phase markers bracket the timed calls") {
  std::vector<std::string> events;
  std::size_t calls = 0;
  BenchOptions opts;
  opts.warmup = 3;
  opts.iters = 25;
  opts.on_phase = [&](std::string_view phase) {
    events.push_back(std::string(phase) + "@" + std::to_string(calls));
  };
  const auto data = tiny_data(4);
  std::vector<std::string> seen;
  bench_rerank(
      [&](const data::CandidateSet& s) {
        ++calls;
        seen.push_back(s.query_id);
      },
      data, opts);
  CHECK(events == std::vector<std::string>{"warmup@0", "measure@3", "measure_end@28"});
  // Queries are cycled over the dataset.
  CHECK(seen[0] == data[0].query_id);
  CHECK(seen[4] == data[0].query_id);
  CHECK(seen[5] == data[1].query_id);
}

TEST_CASE("multi-stream mode adds an aggregate rate") {
  std::atomic<std::size_t> calls{0};
  std::vector<std::string> events;
  BenchOptions opts;
  opts.warmup = 2;
  opts.iters = 20;
  opts.streams = 2;
  opts.on_phase = [&](std::string_view p) { events.emplace_back(p); };
  const auto r = bench_rerank(
      [&](const data::CandidateSet&) {
        ++calls;
        pause_for(std::chrono::microseconds(200));
      },
      tiny_data(), opts);
  REQUIRE(r.aggregate_qps.has_value());
  CHECK(*r.aggregate_qps > 0.0);
  CHECK(r.streams == 2);
  CHECK(r.qps == doctest::Approx(1000.0 / r.mean_ms).epsilon(1e-12));
  CHECK(std::find(events.begin(), events.end(), "multi_stream") != events.end());
  CHECK(events.back() == "multi_stream_end");
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.contains("aggregate_qps"));
  CHECK_FALSE(j.contains("samples_ms"));
}

TEST_CASE("benchmarking a model") {
  model::DualViewModel<float> m(dualview::testing::tiny_config(), 1);
  BenchOptions opts;
  opts.warmup = 2;
  opts.iters = 20;
  opts.fingerprint = m.config().fingerprint();
  const auto r = bench_rerank(m, tiny_data(), opts);
  CHECK(r.n_measured == 20);
  CHECK(r.fingerprint == opts.fingerprint);
  CHECK(r.mean_ms > 0.0);
  CHECK(nlohmann::json::parse(r.to_json())["qps"].get<double>() == doctest::Approx(r.qps));
}
