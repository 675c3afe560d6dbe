#include "dualview/errors.h"
#include "dualview/model/dualview.h"
#include "dualview/model/mlp_baseline.h"
#include "dualview/nn/checkpoint.h"

#include <doctest.h>

#include <sstream>

using namespace dualview;

namespace {

model::ModelConfig tiny_config() {
  model::ModelConfig cfg;
  cfg.embed_dim = 8;
  cfg.local_layers = 1;
  cfg.local_heads = 2;
  cfg.global_dim = 8;
  cfg.global_layers = 1;
  cfg.global_heads = 2;
  cfg.max_candidates = 4;
  cfg.local_mlp_hidden = 6;
  cfg.global_mlp_hidden = 5;
  cfg.gate_hidden = 4;
  return cfg;
}

std::string serialize(const model::Scorer<float>& m) {
  std::ostringstream out(std::ios::binary);
  nn::write_checkpoint(out, m.checkpoint_header(), m.parameters());
  return out.str();
}

}  // namespace

TEST_CASE("checkpoint header layout") {
  model::DualViewModel<float> m(tiny_config(), 1);
  const std::string bytes = serialize(m);
  CHECK(bytes.rfind("DVCKPT\nversion=1\nmodel=dualview\nembed_dim=8\n", 0) == 0);
  CHECK(bytes.find("params=" + std::to_string(m.parameters().size()) + "\n\n") != std::string::npos);
}

TEST_CASE("write read write is byte identical") {
  model::DualViewModel<float> m(tiny_config(), 7);
  const std::string first = serialize(m);
  std::istringstream in(first, std::ios::binary);
  const nn::Checkpoint ckpt = nn::read_checkpoint(in);
  const auto loaded = model::load_dualview(ckpt);
  CHECK(serialize(loaded) == first);
  CHECK(loaded.config() == m.config());
}

TEST_CASE("loaded model scores identically") {
  model::DualViewModel<float> m(tiny_config(), 9);
  std::istringstream in(serialize(m), std::ios::binary);
  const auto loaded = model::load_dualview(nn::read_checkpoint(in));
  data::CandidateSet set{"q", std::vector<float>(8, 0.25f), {}};
  for (int i = 0; i < 3; ++i) {
    std::vector<float> e(8);
    for (int j = 0; j < 8; ++j) e[j] = static_cast<float>((i + 1) * (j - 3)) * 0.1f;
    set.candidates.push_back({"d" + std::to_string(i), e, i == 0});
  }
  CHECK(loaded.score_values(set) == m.score_values(set));
}

TEST_CASE("truncated and corrupted checkpoints are rejected") {
  model::DualViewModel<float> m(tiny_config(), 3);
  const std::string bytes = serialize(m);
  SUBCASE("truncated") {
    std::istringstream in(bytes.substr(0, bytes.size() - 3), std::ios::binary);
    CHECK_THROWS_AS(nn::read_checkpoint(in), LoadError);
  }
  SUBCASE("trailing bytes") {
    std::istringstream in(bytes + "x", std::ios::binary);
    CHECK_THROWS_AS(nn::read_checkpoint(in), LoadError);
  }
  SUBCASE("wrong magic") {
    std::istringstream in("XXCKPT\n" + bytes.substr(7), std::ios::binary);
    CHECK_THROWS_AS(nn::read_checkpoint(in), LoadError);
  }
  SUBCASE("unsupported version") {
    std::string v2 = bytes;
    v2.replace(v2.find("version=1"), 9, "version=2");
    std::istringstream in(v2, std::ios::binary);
    CHECK_THROWS_AS(nn::read_checkpoint(in), LoadError);
  }
}

TEST_CASE("loading into a different configuration is refused") {
  model::DualViewModel<float> m(tiny_config(), 3);
  std::istringstream in(serialize(m), std::ios::binary);
  const nn::Checkpoint ckpt = nn::read_checkpoint(in);
  auto other = tiny_config();
  other.global_dim = 12;
  other.global_heads = 3;
  try {
    (void)model::load_dualview(ckpt, other);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("global_dim: 12 vs 8") != std::string::npos);
    CHECK(msg.find("global_heads: 3 vs 2") != std::string::npos);
  }
  model::DualViewModel<float> wider(other, 3);
  CHECK_THROWS_AS(nn::assign_checkpoint(ckpt, wider.parameters()), LoadError);
}

TEST_CASE("mlp baseline round trip and dispatch") {
  model::MlpBaseline<float> m(8, 16, 5);
  const std::string first = serialize(m);
  std::istringstream in(first, std::ios::binary);
  const auto scorer = model::load_scorer(nn::read_checkpoint(in));
  CHECK(dynamic_cast<model::MlpBaseline<float>*>(scorer.get()) != nullptr);
  CHECK(serialize(*scorer) == first);
}

TEST_CASE("mlp baseline parameter count at the default widths") {
  model::MlpBaseline<float> m(768, 256);
  CHECK(m.parameters().scalar_count() == 3 * 768 * 256 + 256 + 256 + 1);
  CHECK(m.parameters().scalar_count() == 590337);
}
