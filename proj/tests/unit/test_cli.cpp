#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rlab/cli/cli.hpp"
#include "rlab/util/io.hpp"
#include "support/helpers.hpp"

using namespace rlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture() { return (fs::path(RLAB_FIXTURE_DIR) / "threads.jsonl").string(); }

json manifest(const fs::path& dir, const std::string& rel) { return json::parse(io::read_file(dir / rel)); }

void ingest_and_prepare(const fs::path& dir, const std::vector<std::string>& prepare_extra = {}) {
  REQUIRE(run({"ingest", "--out-dir", dir.string(), "--input", fixture()}).code == 0);
  std::vector<std::string> args{"prepare", "--out-dir", dir.string()};
  args.insert(args.end(), prepare_extra.begin(), prepare_extra.end());
  const Run r = run(args);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
}

struct EnvSeed {
  explicit EnvSeed(const char* v) { ::setenv("RLAB_SEED", v, 1); }
  ~EnvSeed() { ::unsetenv("RLAB_SEED"); }
};

}  // namespace

TEST_CASE("cli: usage errors exit 2, help exits 0") {
  ::unsetenv("RLAB_SEED");
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"prepare", "--no-such-flag"}).code == cli::kExitUsage);
  CHECK(run({"ingest"}).code == cli::kExitUsage);
  CHECK(run({"train", "--lr", "fast"}).code == cli::kExitUsage);
  const Run help = run({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("prepare") != std::string::npos);
  CHECK(run({"survey", "--help"}).code == cli::kExitOk);
}

TEST_CASE("cli: a stage without its upstream fails with a hint") {
  const auto dir = testing::fresh_dir("cli-empty");
  const Run r = run({"prepare", "--out-dir", dir.string()});
  CHECK(r.code == cli::kExitFailure);
  CHECK(r.err.find("rlab ingest") != std::string::npos);
  CHECK(run({"ingest", "--out-dir", dir.string(), "--input", "nope.jsonl"}).code == cli::kExitFailure);
}

TEST_CASE("cli: prepare is byte-reproducible for a fixed seed") {
  ::unsetenv("RLAB_SEED");
  const auto a = testing::fresh_dir("cli-prep-a");
  const auto b = testing::fresh_dir("cli-prep-b");
  ingest_and_prepare(a, {"--seed", "7", "--test-size", "48"});
  ingest_and_prepare(b, {"--seed", "7", "--test-size", "48"});
  const json ma = manifest(a, "prepare/manifest.json");
  CHECK(ma["sizes"]["test"] == 48);
  CHECK(io::read_file(a / "prepare/manifest.json") == io::read_file(b / "prepare/manifest.json"));
  for (const auto& [k, v] : ma["artifacts"].items()) {
    CAPTURE(k);
    CHECK(io::read_file(a / v.get<std::string>()) == io::read_file(b / v.get<std::string>()));
  }
  ingest_and_prepare(b, {"--seed", "8", "--test-size", "48"});
  CHECK(io::read_file(a / ma["artifacts"]["test"].get<std::string>()) !=
        io::read_file(b / manifest(b, "prepare/manifest.json")["artifacts"]["test"].get<std::string>()));
}

TEST_CASE("cli: default < config < RLAB_SEED < flag") {
  ::unsetenv("RLAB_SEED");
  const auto dir = testing::fresh_dir("cli-config");
  std::ofstream(dir / "lab.ini") << "# shared settings\nseed = 5\ntest_size = 40\nmin_chars = 25\nrank = 4\n";
  auto cfg = [&] { return manifest(dir, "prepare/manifest.json")["config"]; };

  ingest_and_prepare(dir);
  CHECK(cfg()["seed"] == 1);
  CHECK(cfg()["test_size"] == 48);

  ingest_and_prepare(dir, {"--config", "lab.ini"});
  CHECK(cfg()["seed"] == 5);
  CHECK(cfg()["test_size"] == 40);
  CHECK(cfg()["min_chars"] == 25);

  ingest_and_prepare(dir, {"--config", (dir / "lab.ini").string(), "--test-size", "30"});
  CHECK(cfg()["test_size"] == 30);
  CHECK(cfg()["min_chars"] == 25);

  {
    EnvSeed env("9");
    ingest_and_prepare(dir, {"--config", "lab.ini"});
    CHECK(cfg()["seed"] == 9);
    ingest_and_prepare(dir, {"--config", "lab.ini", "--seed", "11"});
    CHECK(cfg()["seed"] == 11);
  }

  std::ofstream(dir / "bad.ini") << "colour = blue\n";
  CHECK(run({"prepare", "--out-dir", dir.string(), "--config", "bad.ini"}).code == cli::kExitUsage);
  std::ofstream(dir / "sect.ini") << "[train]\nlr = 0.1\n";
  CHECK(run({"prepare", "--out-dir", dir.string(), "--config", "sect.ini"}).code == cli::kExitUsage);
  CHECK(run({"prepare", "--out-dir", dir.string(), "--config", "absent.ini"}).code == cli::kExitUsage);
}

TEST_CASE("cli: fine-tuned arm without an adapter checkpoint fails") {
  ::unsetenv("RLAB_SEED");
  const auto dir = testing::fresh_dir("cli-gen");
  ingest_and_prepare(dir);
  const Run t = run({"train", "--out-dir", dir.string(), "--stage", "base", "--vocab-size", "160",
                     "--context-len", "128", "--d-model", "16", "--n-heads", "2", "--n-layers", "1",
                     "--d-ff", "32", "--epochs", "1", "--max-steps", "2"});
  CAPTURE(t.err);
  REQUIRE(t.code == 0);

  const Run g = run({"generate", "--out-dir", dir.string(), "--arm", "AI-4", "--max-new-tokens", "4"});
  CHECK(g.code == cli::kExitFailure);
  CHECK(g.err.find("missing_checkpoint") != std::string::npos);

  const std::string base_ckpt = manifest(dir, "train/manifest-base.json")["artifacts"]["checkpoint"];
  const Run g2 = run({"generate", "--out-dir", dir.string(), "--arm", "AI-3", "--checkpoint", base_ckpt,
                      "--max-new-tokens", "4"});
  CHECK(g2.code == cli::kExitFailure);
  CHECK(g2.err.find("missing_checkpoint") != std::string::npos);

  const Run g3 = run({"generate", "--out-dir", dir.string(), "--arm", "AI-1", "--max-new-tokens", "4"});
  CAPTURE(g3.err);
  CHECK(g3.code == 0);
  CHECK(fs::exists(dir / "generate/manifest-AI-1.json"));
  const Run g4 = run({"generate", "--out-dir", dir.string(), "--arm", "AI-7"});
  CHECK(g4.code == cli::kExitFailure);
}
