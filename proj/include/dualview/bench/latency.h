#pragma once

#include "dualview/data/candidate_set.h"
#include "dualview/model/scorer.h"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dualview::bench {

struct LatencyReport {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;  // nearest rank
  double min_ms = 0.0;
  double max_ms = 0.0;
  double qps = 0.0;  // single stream: 1000 / mean_ms
  std::size_t n_warmup = 0;
  std::size_t n_measured = 0;
  std::size_t candidate_size = 0;  // of the first query
  std::string fingerprint;
  std::vector<double> samples_ms;  // measurement order
  // Multi-stream mode only: total queries per second across independent threads.
  std::size_t streams = 1;
  std::optional<double> aggregate_qps;

  std::string to_text() const;
  std::string to_json() const;  // samples omitted
};

struct BenchOptions {
  std::size_t warmup = 100;
  std::size_t iters = 1000;
  std::size_t streams = 1;
  std::string fingerprint;
  // Called with "warmup", "measure", "measure_end" and, when streams > 1,
  // "multi_stream" and "multi_stream_end".
  std::function<void(std::string_view)> on_phase;
};

inline constexpr std::size_t kMinIterations = 20;

using RerankFn = std::function<void(const data::CandidateSet&)>;

// Times one call per query, cycling over `dataset`. Throws ConfigError when
// iters < kMinIterations and InputError on an empty dataset.
LatencyReport bench_rerank(const RerankFn& rerank, const data::Dataset& dataset, const BenchOptions& opts);
LatencyReport bench_rerank(const model::Scorer<float>& scorer, const data::Dataset& dataset,
                           const BenchOptions& opts);

// Nearest-rank percentile of an unsorted sample, p in (0, 100].
double nearest_rank_percentile(std::vector<double> samples, double p);

}  // namespace dualview::bench
