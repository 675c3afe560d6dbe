#include "dualview/data/synthetic.h"

#include "dualview/errors.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace dualview::data {
namespace {

using Vec = std::vector<double>;

Vec gaussian(std::mt19937_64& rng, std::size_t d, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Vec v(d);
  for (auto& x : v) x = dist(rng);
  return v;
}

double dot(const Vec& a, const Vec& b) { return std::inner_product(a.begin(), a.end(), b.begin(), 0.0); }

Vec normalized(Vec v) {
  const double n = std::sqrt(dot(v, v));
  for (auto& x : v) x /= n;
  return v;
}

Vec unit(std::mt19937_64& rng, std::size_t d) { return normalized(gaussian(rng, d, 1.0)); }

// Unit vector orthogonal to `ref` (itself unit length).
Vec unit_orthogonal(std::mt19937_64& rng, const Vec& ref) {
  Vec v = gaussian(rng, ref.size(), 1.0);
  const double p = dot(v, ref);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * ref[i];
  return normalized(std::move(v));
}

Vec plus(const Vec& a, const Vec& b, double scale_b = 1.0) {
  Vec out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale_b * b[i];
  return out;
}

Vec noisy(std::mt19937_64& rng, const Vec& base, double sigma) {
  const std::size_t d = base.size();
  return normalized(plus(base, gaussian(rng, d, 1.0 / std::sqrt(static_cast<double>(d))), sigma));
}

EmbeddingVector to_float(const Vec& v) { return EmbeddingVector(v.begin(), v.end()); }

struct Draft {
  Vec embedding;
  int label;
};

CandidateSet assemble(const std::string& qid, const Vec& q, std::vector<Draft> docs, std::mt19937_64& rng) {
  std::shuffle(docs.begin(), docs.end(), rng);
  CandidateSet set;
  set.query_id = qid;
  set.query_embedding = to_float(q);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    set.candidates.push_back({qid + "_d" + std::to_string(i), to_float(docs[i].embedding), docs[i].label});
  }
  return set;
}

CandidateSet planted(const SyntheticConfig& cfg, const std::string& qid, std::mt19937_64& rng) {
  const Vec q = unit(rng, cfg.embed_dim);
  std::vector<Draft> docs;
  for (std::size_t g = 0; g < cfg.n_gold; ++g) docs.push_back({noisy(rng, q, cfg.noise_sigma), 1});
  for (std::size_t i = cfg.n_gold; i < cfg.n_candidates; ++i) docs.push_back({unit(rng, cfg.embed_dim), 0});
  return assemble(qid, q, std::move(docs), rng);
}

CandidateSet complementary(const SyntheticConfig& cfg, const std::string& qid, std::mt19937_64& rng) {
  const Vec u = unit(rng, cfg.embed_dim);
  const Vec v = unit_orthogonal(rng, u);
  const Vec q = normalized(plus(u, v));
  std::vector<Draft> docs;
  docs.push_back({noisy(rng, u, cfg.noise_sigma), 1});
  docs.push_back({noisy(rng, v, cfg.noise_sigma), 1});

  const std::size_t n_distractors = cfg.n_candidates - 2;
  const std::size_t n_random = cfg.n_candidates > 6 ? (cfg.n_candidates - 6) / 2 : 0;
  docs.push_back({noisy(rng, q, cfg.noise_sigma), 0});
  for (std::size_t i = 1; i + n_random < n_distractors; ++i) {
    docs.push_back({noisy(rng, normalized(plus(q, unit_orthogonal(rng, q))), cfg.noise_sigma), 0});
  }
  for (std::size_t i = 0; i < n_random; ++i) docs.push_back({unit(rng, cfg.embed_dim), 0});
  return assemble(qid, q, std::move(docs), rng);
}

}  // namespace

std::string to_string(SyntheticMode mode) {
  return mode == SyntheticMode::kPlantedSimilarity ? "planted_similarity" : "complementary_pair";
}

SyntheticMode parse_synthetic_mode(const std::string& name) {
  if (name == "planted_similarity") return SyntheticMode::kPlantedSimilarity;
  if (name == "complementary_pair") return SyntheticMode::kComplementaryPair;
  throw ConfigError("unknown synthetic mode '" + name + "' (expected planted_similarity or complementary_pair)");
}

void SyntheticConfig::validate() const {
  if (embed_dim < 2) throw ConfigError("synthetic embed_dim must be at least 2");
  if (n_candidates == 0) throw ConfigError("synthetic n_candidates must be positive");
  if (n_gold == 0) throw ConfigError("synthetic n_gold must be positive");
  if (n_gold > n_candidates) throw ConfigError("synthetic n_gold exceeds n_candidates");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("synthetic noise_sigma must be >= 0");
  if (mode == SyntheticMode::kComplementaryPair) {
    if (n_gold != 2) throw ConfigError("complementary_pair requires n_gold = 2");
    if (n_candidates < 3) throw ConfigError("complementary_pair requires at least 3 candidates");
  }
}

Dataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Dataset out;
  out.reserve(cfg.n_queries);
  for (std::size_t i = 0; i < cfg.n_queries; ++i) {
    const std::string qid = cfg.id_prefix + std::to_string(i);
    out.push_back(cfg.mode == SyntheticMode::kPlantedSimilarity ? planted(cfg, qid, rng)
                                                                   : complementary(cfg, qid, rng));
  }
  return out;
}

}  // namespace dualview::data
