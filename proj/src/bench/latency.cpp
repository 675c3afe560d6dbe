#include "dualview/bench/latency.h"

#include "dualview/errors.h"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace dualview::bench {
namespace {

using Clock = std::chrono::steady_clock;

void mark(const BenchOptions& opts, std::string_view phase) {
  if (opts.on_phase) opts.on_phase(phase);
}

}  // namespace

double nearest_rank_percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw InputError("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw ConfigError("percentile must lie in (0, 100]");
  std::sort(samples.begin(), samples.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(samples.size())));
  return samples[std::max<std::size_t>(rank, 1) - 1];
}

LatencyReport bench_rerank(const RerankFn& rerank, const data::Dataset& dataset, const BenchOptions& opts) {
  if (dataset.empty()) throw InputError("benchmark dataset is empty");
  if (opts.iters < kMinIterations) {
    throw ConfigError("benchmark needs at least " + std::to_string(kMinIterations) + " measured iterations, got " +
                      std::to_string(opts.iters));
  }
  if (opts.streams == 0) throw ConfigError("benchmark needs at least one stream");

  LatencyReport report;
  report.n_warmup = opts.warmup;
  report.n_measured = opts.iters;
  report.candidate_size = dataset.front().size();
  report.fingerprint = opts.fingerprint;
  report.streams = opts.streams;

  mark(opts, "warmup");
  for (std::size_t i = 0; i < opts.warmup; ++i) rerank(dataset[i % dataset.size()]);

  mark(opts, "measure");
  report.samples_ms.reserve(opts.iters);
  for (std::size_t i = 0; i < opts.iters; ++i) {
    const auto& set = dataset[(opts.warmup + i) % dataset.size()];
    const auto start = Clock::now();
    rerank(set);
    const auto stop = Clock::now();
    report.samples_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  mark(opts, "measure_end");

  const auto& s = report.samples_ms;
  report.mean_ms = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  report.median_ms = nearest_rank_percentile(s, 50.0);
  report.p95_ms = nearest_rank_percentile(s, 95.0);
  report.min_ms = *std::min_element(s.begin(), s.end());
  report.max_ms = *std::max_element(s.begin(), s.end());
  report.qps = 1000.0 / report.mean_ms;

  if (opts.streams > 1) {
    mark(opts, "multi_stream");
    const auto start = Clock::now();
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < opts.streams; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = 0; i < opts.iters; ++i) rerank(dataset[(t + i) % dataset.size()]);
      });
    }
    for (auto& th : pool) th.join();
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.aggregate_qps = static_cast<double>(opts.streams * opts.iters) / seconds;
    mark(opts, "multi_stream_end");
  }
  return report;
}

LatencyReport bench_rerank(const model::Scorer<float>& scorer, const data::Dataset& dataset,
                           const BenchOptions& opts) {
  return bench_rerank([&scorer](const data::CandidateSet& set) { (void)scorer.rank(set); }, dataset, opts);
}

std::string LatencyReport::to_text() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  out << "batch-1 rerank, n=" << candidate_size << ", warmup " << n_warmup << ", measured " << n_measured << "\n"
      << "  mean   " << mean_ms << " ms\n"
      << "  median " << median_ms << " ms\n"
      << "  p95    " << p95_ms << " ms\n"
      << "  min    " << min_ms << " ms\n"
      << "  max    " << max_ms << " ms\n";
  out.precision(1);
  out << "  qps    " << qps << " (single stream)\n";
  if (aggregate_qps) out << "  aggregate qps " << *aggregate_qps << " across " << streams << " streams\n";
  if (!fingerprint.empty()) out << "  fingerprint " << fingerprint << "\n";
  return out.str();
}

std::string LatencyReport::to_json() const {
  nlohmann::ordered_json j;
  j["mean_ms"] = mean_ms;
  j["median_ms"] = median_ms;
  j["p95_ms"] = p95_ms;
  j["min_ms"] = min_ms;
  j["max_ms"] = max_ms;
  j["qps"] = qps;
  j["n_warmup"] = n_warmup;
  j["n_measured"] = n_measured;
  j["candidate_size"] = candidate_size;
  j["fingerprint"] = fingerprint;
  j["streams"] = streams;
  j["aggregate_qps"] = aggregate_qps ? nlohmann::ordered_json(*aggregate_qps) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

}  // namespace dualview::bench
