#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Workdir {
 public:
  Workdir() {
    dir_ = fs::temp_directory_path() / ("dualview_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

  Result run(const std::string& args) const {
    const auto out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string(DUALVIEW_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  fs::path dir_;
};

std::string gen(const Workdir& w, const std::string& name, const std::string& extra = "") {
  const auto path = (w / name).string();
  const auto r = w.run("gen-synth --queries 12 --candidates 6 --dim 8 --out " + path + " " + extra);
  REQUIRE(r.code == 0);
  return path;
}

const char* kTinyModel =
    " --local-layers 1 --local-heads 2 --global-dim 8 --global-layers 1 --global-heads 2"
    " --local-mlp-hidden 6 --global-mlp-hidden 6 --gate-hidden 4 --max-candidates 6 ";

}  // namespace

TEST_CASE("help and version exit cleanly") {
  Workdir w;
  const auto help = w.run("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("gen-synth") != std::string::npos);
  CHECK(help.out.find("bench") != std::string::npos);
  CHECK(w.run("train --help").code == 0);
  CHECK(w.run("--version").code == 0);
}

TEST_CASE("gen-synth is deterministic in the seed") {
  Workdir w;
  const auto a = gen(w, "a.jsonl", "--seed 7");
  const auto b = gen(w, "b.jsonl", "--seed 7");
  const auto c = gen(w, "c.jsonl", "--seed 8");
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  std::ifstream in(a);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["candidates"].size() == 6);
    ++lines;
  }
  CHECK(lines == 12);
}

TEST_CASE("exit codes") {
  Workdir w;
  SUBCASE("usage errors exit 1 with a json error line") {
    const auto r = w.run("eval --data x.jsonl --k");
    CHECK(r.code == 1);
    CHECK(nlohmann::json::parse(r.err)["error"] == "usage");
    CHECK(w.run("no-such-command").code == 1);
    CHECK(w.run("").code == 1);
    const auto data = gen(w, "d.jsonl");
    const auto cfg = w.run("train --train " + data + " --out m.ckpt --lr -1");
    CHECK(cfg.code == 1);
    CHECK(nlohmann::json::parse(cfg.err)["error"] == "config");
  }
  SUBCASE("data errors exit 2") {
    const auto missing = w.run("eval --baseline cosine --data " + (w / "missing.jsonl").string());
    CHECK(missing.code == 2);
    CHECK(nlohmann::json::parse(missing.err)["error"] == "data");
    std::ofstream(w / "bad.jsonl") << "{\"query_id\": \"q\"\n";
    CHECK(w.run("eval --baseline cosine --data " + (w / "bad.jsonl").string()).code == 2);
  }
  SUBCASE("a non-finite loss exits 3") {
    const auto data = gen(w, "d.jsonl");
    std::ifstream in(data);
    std::ofstream bad(w / "inf.jsonl");
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      auto j = nlohmann::json::parse(line);
      if (first) j["candidates"][1]["embedding"][0] = 1e39;  // overflows float
      first = false;
      bad << j.dump() << "\n";
    }
    bad.close();
    const auto ckpt = (w / "m.ckpt").string();
    const auto r = w.run("train --train " + (w / "inf.jsonl").string() + " --out " + ckpt + kTinyModel + "--batch 1");
    CHECK(r.code == 3);
    CHECK(nlohmann::json::parse(r.err)["error"] == "numerical");
  }
}

TEST_CASE("train, eval, rerank and ablate round trip") {
  Workdir w;
  const auto train = gen(w, "train.jsonl", "--seed 1");
  const auto val = gen(w, "val.jsonl", "--seed 2 --id-prefix v");
  const auto ckpt = (w / "m.ckpt").string();
  const auto log = (w / "log.jsonl").string();
  REQUIRE(w.run("train --train " + train + " --val " + val + " --out " + ckpt + " --log " + log + kTinyModel +
                "--epochs 1 --batch 4")
              .code == 0);
  CHECK(fs::exists(ckpt));
  CHECK(nlohmann::json::parse(slurp(log).substr(0, slurp(log).find('\n'))).contains("event"));

  const auto ev = w.run("eval --model " + ckpt + " --data " + val + " --format json");
  REQUIRE(ev.code == 0);
  const auto j = nlohmann::json::parse(ev.out);
  CHECK(j["n_queries"] == 12);
  CHECK(j["k"] == 4);
  CHECK(j["recall_at_k"].get<double>() >= 0.0);
  CHECK(w.run("eval --model " + ckpt + " --data " + val + " --format json").out == ev.out);

  const auto cos = w.run("eval --baseline cosine --data " + val + " --format json");
  REQUIRE(cos.code == 0);
  CHECK(nlohmann::json::parse(cos.out)["label"] == "cosine");

  const auto rr = w.run("rerank --model " + ckpt + " --data " + val + " --format json");
  REQUIRE(rr.code == 0);
  std::istringstream lines(rr.out);
  std::string line;
  std::size_t sets = 0;
  while (std::getline(lines, line)) {
    const auto r = nlohmann::json::parse(line);
    REQUIRE(r["ranking"].size() == 6);
    for (std::size_t i = 1; i < 6; ++i) {
      CHECK(r["ranking"][i - 1]["fused"].get<double>() >= r["ranking"][i]["fused"].get<double>());
    }
    ++sets;
  }
  CHECK(sets == 12);

  const auto ab = w.run("ablate --train " + train + " --data " + val + kTinyModel +
                        "--epochs 1 --batch 4 --with-cosine --format json");
  REQUIRE(ab.code == 0);
  const auto rows = nlohmann::json::parse(ab.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0]["label"] == "cosine");
  CHECK(rows[1]["label"] == "full");
  CHECK(rows[2]["label"] == "avg_fusion");
  CHECK(rows[3]["label"] == "no_global");
  CHECK(rows[4]["label"] == "no_local");
}

TEST_CASE("bench reports latency as json") {
  Workdir w;
  const auto r = w.run(std::string("bench --embed-dim 8") + kTinyModel + "--warmup 2 --iters 20 --candidates 6 --format json");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["qps"].get<double>() > 0.0);
  CHECK(w.run("bench --iters 5").code == 1);
}
