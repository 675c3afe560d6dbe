#include "dualview/eval/evaluate.h"

#include "dualview/errors.h"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace dualview::eval {
namespace {

// Neumaier compensated sum in a fixed order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

nlohmann::ordered_json report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["k"] = r.k;
  j["n_queries"] = r.n_queries;
  j["n_skipped"] = r.n_skipped;
  j["n_gold_exceeds_k"] = r.n_gold_exceeds_k;
  j["recall_at_k"] = r.recall_at_k;
  j["full_hit_at_k"] = r.full_hit_at_k;
  j["ndcg_at_k"] = r.ndcg_at_k;
  j["mrr_at_k"] = r.mrr_at_k;
  j["precision_at_k"] = r.precision_at_k;
  j["fingerprint"] = r.fingerprint;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  if (!label.empty()) out << label << "\n";
  const std::string K = std::to_string(k);
  out << "  Recall@" << K << "     " << fixed4(recall_at_k) << "\n"
      << "  Full-Hit@" << K << "   " << fixed4(full_hit_at_k) << "\n"
      << "  NDCG@" << K << "       " << fixed4(ndcg_at_k) << "\n"
      << "  MRR@" << K << "        " << fixed4(mrr_at_k) << "\n"
      << "  Precision@" << K << "  " << fixed4(precision_at_k) << "\n"
      << "  queries " << n_queries << ", skipped " << n_skipped << ", gold > k " << n_gold_exceeds_k << "\n";
  if (!fingerprint.empty()) out << "  fingerprint " << fingerprint << "\n";
  for (const auto& w : warnings) out << "  warning: " << w << "\n";
  return out.str();
}

std::string MetricsReport::to_json() const { return report_json(*this).dump(); }

MetricsReport evaluate(const RankFn& rank, const data::Dataset& dataset, const EvalOptions& opts) {
  if (dataset.empty()) throw InputError("evaluation dataset is empty");
  if (opts.k == 0) throw InputError("metric cutoff k must be positive");
  const std::size_t n = dataset.size();
  std::vector<std::optional<QueryMetrics>> per_query(n);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < n; i = next++) {
        const auto& set = dataset[i];
        const auto gold = set.gold_indices();
        if (gold.empty()) continue;
        const auto ranking = rank(set);
        per_query[i] = query_metrics(ranking, gold, opts.k);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n;
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  MetricsReport report;
  report.label = opts.label;
  report.k = opts.k;
  report.fingerprint = opts.fingerprint;
  CompensatedSum recall, full_hit, ndcg, mrr, precision;
  for (std::size_t i = 0; i < n; ++i) {
    if (!per_query[i]) {
      ++report.n_skipped;
      continue;
    }
    ++report.n_queries;
    if (dataset[i].gold_count() > opts.k) ++report.n_gold_exceeds_k;
    recall.add(per_query[i]->recall);
    full_hit.add(per_query[i]->full_hit);
    ndcg.add(per_query[i]->ndcg);
    mrr.add(per_query[i]->mrr);
    precision.add(per_query[i]->precision);
  }
  if (report.n_queries == 0) throw InputError("every query was skipped (no gold documents)");
  const double q = static_cast<double>(report.n_queries);
  report.recall_at_k = recall.value() / q;
  report.full_hit_at_k = full_hit.value() / q;
  report.ndcg_at_k = ndcg.value() / q;
  report.mrr_at_k = mrr.value() / q;
  report.precision_at_k = precision.value() / q;
  if (report.n_skipped > 0) {
    report.warnings.push_back(std::to_string(report.n_skipped) + " queries without gold documents were skipped");
  }
  if (report.n_gold_exceeds_k > 0) {
    report.warnings.push_back(std::to_string(report.n_gold_exceeds_k) + " queries have more than " +
                              std::to_string(opts.k) + " gold documents");
  }
  return report;
}

MetricsReport evaluate(const model::Scorer<float>& scorer, const data::Dataset& dataset, const EvalOptions& opts) {
  return evaluate([&scorer](const data::CandidateSet& set) { return scorer.rank(set); }, dataset, opts);
}

std::vector<std::size_t> cosine_rank(const data::CandidateSet& set, std::size_t* zero_norm) {
  auto norm = [](const data::EmbeddingVector& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
  };
  const double qn = norm(set.query_embedding);
  if (qn == 0.0 && zero_norm != nullptr) ++*zero_norm;
  std::vector<double> sims(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& c = set.candidates[i].embedding;
    const double cn = norm(c);
    if (qn == 0.0 || cn == 0.0) {
      if (cn == 0.0 && zero_norm != nullptr) ++*zero_norm;
      sims[i] = -1.0;
      continue;
    }
    sims[i] = data::cosine(set.query_embedding, c);
  }
  return model::rank_by_scores(std::span<const double>(sims));
}

MetricsReport evaluate_cosine(const data::Dataset& dataset, const EvalOptions& opts) {
  std::atomic<std::size_t> zero_norm{0};
  MetricsReport report = evaluate(
      [&zero_norm](const data::CandidateSet& set) {
        std::size_t local = 0;
        auto r = cosine_rank(set, &local);
        zero_norm += local;
        return r;
      },
      dataset, opts);
  if (zero_norm > 0) {
    report.warnings.push_back(std::to_string(zero_norm.load()) + " zero-norm embeddings scored as similarity -1");
  }
  return report;
}

std::string format_table(const std::vector<MetricsReport>& reports) {
  std::size_t width = 7;
  for (const auto& r : reports) width = std::max(width, r.label.size());
  const std::string K = reports.empty() ? "4" : std::to_string(reports.front().k);
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("variant", width) << "  " << pad("Recall@" + K, 11) << pad("Full-Hit@" + K, 11) << pad("NDCG@" + K, 11)
      << pad("MRR@" + K, 11) << "Precision@" << K << "\n";
  for (const auto& r : reports) {
    out << pad(r.label, width) << "  " << pad(fixed4(r.recall_at_k), 11) << pad(fixed4(r.full_hit_at_k), 11)
        << pad(fixed4(r.ndcg_at_k), 11) << pad(fixed4(r.mrr_at_k), 11) << fixed4(r.precision_at_k) << "\n";
  }
  return out.str();
}

std::string reports_to_json(const std::vector<MetricsReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump();
}

}  // namespace dualview::eval
