#pragma once

#include "dualview/data/candidate_set.h"
#include "dualview/eval/metrics.h"
#include "dualview/model/config.h"
#include "dualview/model/scorer.h"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace dualview::eval {

// Macro averages (mean of per-query values) over evaluated queries.
struct MetricsReport {
  std::string label;
  std::size_t k = 4;
  std::size_t n_queries = 0;          // evaluated
  std::size_t n_skipped = 0;          // empty gold set
  std::size_t n_gold_exceeds_k = 0;   // evaluated, full hit impossible
  double recall_at_k = 0.0;
  double full_hit_at_k = 0.0;
  double ndcg_at_k = 0.0;
  double mrr_at_k = 0.0;
  double precision_at_k = 0.0;
  std::string fingerprint;
  std::vector<std::string> warnings;

  std::string to_text() const;
  std::string to_json() const;  // single line, fixed key order
};

// Candidate indices, best first.
using RankFn = std::function<std::vector<std::size_t>(const data::CandidateSet&)>;

struct EvalOptions {
  std::size_t k = 4;
  std::size_t threads = 1;
  std::string label;
  std::string fingerprint;
};

// `rank` must be safe to call concurrently when threads > 1. Per-query results
// are reduced in dataset order, so reports do not depend on the thread count.
// Throws InputError when the dataset is empty or every query was skipped.
MetricsReport evaluate(const RankFn& rank, const data::Dataset& dataset, const EvalOptions& opts);
MetricsReport evaluate(const model::Scorer<float>& scorer, const data::Dataset& dataset, const EvalOptions& opts);

// Cosine similarity ranking, ties by index. A zero-norm embedding scores -1;
// `zero_norm` (if given) is incremented once per such embedding.
std::vector<std::size_t> cosine_rank(const data::CandidateSet& set, std::size_t* zero_norm = nullptr);
MetricsReport evaluate_cosine(const data::Dataset& dataset, const EvalOptions& opts);

// Header-row text table with one row per report (label column first).
std::string format_table(const std::vector<MetricsReport>& reports);
std::string reports_to_json(const std::vector<MetricsReport>& reports);

}  // namespace dualview::eval
