#include "dualview/data/synthetic.h"
#include "dualview/errors.h"
#include "dualview/model/dualview.h"
#include "dualview/model/mlp_baseline.h"
#include "dualview/nn/checkpoint.h"
#include "dualview/training/trainer.h"

#include <doctest.h>

#include "fixtures.h"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

using namespace dualview;
using dualview::testing::tiny_config;

namespace {

data::Dataset planted(std::size_t queries, std::uint64_t seed, std::size_t dim = 8) {
  data::SyntheticConfig cfg;
  cfg.n_queries = queries;
  cfg.embed_dim = dim;
  cfg.seed = seed;
  cfg.id_prefix = "s" + std::to_string(seed) + "_";
  return data::generate_synthetic(cfg);
}

std::vector<nn::Matrix<float>> gradients(model::Scorer<float>& m, const data::Dataset& d,
                                         const losses::LossConfig& loss, double weight) {
  m.parameters().zero_grad();
  std::vector<const data::CandidateSet*> ptrs;
  for (const auto& s : d) ptrs.push_back(&s);
  training::accumulate_gradients(m, ptrs, loss, weight);
  std::vector<nn::Matrix<float>> out;
  for (const auto& p : m.parameters()) out.push_back(p->grad());
  return out;
}

std::string checkpoint_bytes(const model::Scorer<float>& m) {
  std::ostringstream out(std::ios::binary);
  nn::write_checkpoint(out, m.checkpoint_header(), m.parameters());
  return out.str();
}

}  // namespace

TEST_CASE("one bce step equals a hand-stepped AdamW update") {
  const auto data = planted(1, 3);
  model::DualViewModel<float> trained(tiny_config(), 11);
  model::DualViewModel<float> reference(tiny_config(), 11);

  training::TrainConfig cfg;
  cfg.base_lr = 1e-3;
  cfg.weight_decay = 0.01;
  cfg.warmup_fraction = 0.0;
  cfg.max_grad_norm = 1e9;
  cfg.batch_size = 1;
  cfg.epochs = 1;
  cfg.loss = {1.0, 0.0, 0.0, 0.0};
  const auto result = training::train(trained, data, {}, cfg);
  REQUIRE(result.steps == 1);
  REQUIRE_FALSE(result.aborted);

  const auto g = gradients(reference, data, cfg.loss, 1.0);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& before = reference.parameters()[i].value();
    const auto& after = trained.parameters()[i].value();
    for (Eigen::Index k = 0; k < before.size(); ++k) {
      const double p = before.data()[k];
      const double gk = g[i].data()[k];
      // First AdamW step: m_hat = g and v_hat = g^2.
      const double expected = p * (1.0 - cfg.base_lr * cfg.weight_decay) - cfg.base_lr * gk / (std::abs(gk) + 1e-8);
      // Single precision bias corrections move the update by at most ~1e-5 relative.
      REQUIRE(std::abs(after.data()[k] - expected) <= 1e-5 * cfg.base_lr + 1e-6 * std::abs(p));
      if (gk != 0.0) ++moved;
    }
  }
  CHECK(moved > 0);
}

TEST_CASE("gradient accumulation is linear in the per-query weights") {
  const auto data = planted(4, 5);
  model::DualViewModel<float> m(tiny_config(), 2);
  const losses::LossConfig loss;
  const auto together = gradients(m, data, loss, 0.25);
  std::vector<nn::Matrix<float>> summed;
  for (const auto& s : data) {
    const auto g = gradients(m, {s}, loss, 0.25);
    if (summed.empty()) {
      summed = g;
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) summed[i] += g[i];
    }
  }
  for (std::size_t i = 0; i < together.size(); ++i) {
    CHECK((together[i] - summed[i]).cwiseAbs().maxCoeff() <= 1e-6f * (1.0f + together[i].cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("batch and accumulation splits of one step agree") {
  const auto data = planted(4, 6);
  auto run = [&](std::size_t batch, std::size_t accum) {
    model::DualViewModel<float> m(tiny_config(), 4);
    training::TrainConfig cfg;
    cfg.base_lr = 1e-3;
    cfg.batch_size = batch;
    cfg.accumulation_steps = accum;
    cfg.epochs = 1;
    cfg.warmup_fraction = 0.0;
    training::train(m, data, {}, cfg);
    return m.parameters().snapshot();
  };
  const auto a = run(4, 1), b = run(2, 2), c = run(1, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() <= 1e-5f);
    CHECK((a[i] - c[i]).cwiseAbs().maxCoeff() <= 1e-5f);
  }
}

TEST_CASE("training is deterministic") {
  const auto train_set = planted(12, 7), val = planted(6, 8);
  auto run = [&] {
    model::DualViewModel<float> m(tiny_config(), 9);
    training::TrainConfig cfg;
    cfg.base_lr = 3e-3;
    cfg.batch_size = 2;
    cfg.epochs = 2;
    cfg.eval_every = 3;
    cfg.seed = 5;
    cfg.view_loss_weight = 0.5;
    const auto r = training::train(m, train_set, val, cfg);
    return std::make_pair(r.log, checkpoint_bytes(m));
  };
  const auto first = run();
  const auto second = run();
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);
  CHECK(first.first.size() > 12);
}

TEST_CASE("the returned model is the best validated one") {
  const auto train_set = planted(16, 10), val = planted(8, 11);
  model::DualViewModel<float> m(tiny_config(), 12);
  training::TrainConfig cfg;
  cfg.base_lr = 1e-2;
  cfg.batch_size = 2;
  cfg.epochs = 3;
  cfg.eval_every = 2;
  cfg.selection_metric = "ndcg_at_k";
  const auto r = training::train(m, train_set, val, cfg);
  REQUIRE(r.best_step.has_value());
  REQUIRE_FALSE(r.validations.empty());
  double best = -1.0;
  std::size_t first_best = 0;
  for (std::size_t i = 0; i < r.validations.size(); ++i) {
    const double v = r.validations[i].ndcg_at_k;
    if (v > best) {
      best = v;
      first_best = i;
    }
  }
  CHECK(r.best_metric == best);
  // Validations run every 2 steps plus once at the end.
  const std::size_t expected_step = first_best + 1 < r.validations.size() ? 2 * (first_best + 1) : r.steps;
  CHECK(*r.best_step == expected_step);
  eval::EvalOptions opts;
  CHECK(eval::evaluate(m, val, opts).ndcg_at_k == r.best_metric);
  std::size_t selected = 0;
  for (const auto& line : r.log) {
    const auto j = nlohmann::json::parse(line);
    if (j["event"] == "validation" && j["selected"].get<bool>()) ++selected;
  }
  CHECK(selected >= 1);
}

TEST_CASE("a non-finite loss aborts and restores parameters") {
  auto data = planted(1, 13);
  data[0].candidates[2].embedding[0] = std::numeric_limits<float>::quiet_NaN();
  model::DualViewModel<float> m(tiny_config(), 14);
  const auto before = checkpoint_bytes(m);
  training::TrainConfig cfg;
  cfg.batch_size = 1;
  const auto r = training::train(m, data, {}, cfg);
  CHECK(r.aborted);
  CHECK(r.diagnostic.find("non-finite") != std::string::npos);
  CHECK(checkpoint_bytes(m) == before);
  CHECK(nlohmann::json::parse(r.log.back())["event"] == "abort");
}

TEST_CASE("view losses supervise the local and global columns") {
  const auto data = planted(1, 15);
  const losses::LossConfig loss;
  const std::vector<int> labels = data[0].labels();
  for (auto ablation : model::kAllAblations) {
    CAPTURE(model::to_string(ablation));
    model::DualViewModel<float> m(tiny_config(ablation), 16);
    nn::Tape<float> tape(false);
    const auto views = m.score_views(tape, data[0]);
    const std::size_t expected_views = ablation == model::Ablation::kNoLocal || ablation == model::Ablation::kNoGlobal ? 1 : 2;
    CHECK(views.views.size() == expected_views);
    double expected = 0.0;
    for (const auto& v : views.views) {
      std::vector<double> s(v.value().data(), v.value().data() + v.value().size());
      expected += 0.5 * losses::combined_loss(s, labels, loss).breakdown.total;
    }
    std::vector<const data::CandidateSet*> ptrs{&data[0]};
    double view_total = 0.0;
    m.parameters().zero_grad();
    training::accumulate_gradients(m, ptrs, loss, 1.0, nullptr, 0.5, &view_total);
    CHECK(view_total == doctest::Approx(expected).epsilon(1e-5));
  }
  model::MlpBaseline<float> mlp(8, 4, 1);
  nn::Tape<float> tape(false);
  CHECK(mlp.score_views(tape, data[0]).views.empty());
}

TEST_CASE("training configuration validation") {
  training::TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.total_steps(100) == 3 * 13);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.selection_metric = "accuracy";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.warmup_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.view_loss_weight = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  model::DualViewModel<float> m(tiny_config(), 1);
  CHECK_THROWS_AS(training::train(m, {}, {}, training::TrainConfig{}), InputError);
}
