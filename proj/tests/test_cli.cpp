#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "signdict/cli.hpp"
#include "signdict/text.hpp"

using namespace signdict;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SIGNDICT_TEST_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "signdict");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("signdict_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
  fs::path path;
};

std::vector<std::string> small_train(const TempDir& d, const std::string& out) {
  return {"train",   "--catalog", d / "data/catalog.tsv", "--data", d / "data", "--out", out,
          "--epochs", "2",        "--hidden",            "8",      "--layers", "1",    "--heads",
          "2",       "--max-frames", "20",              "--subset", "compact", "--quiet"};
}

}  // namespace

TEST_CASE("help and usage errors") {
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("train") != std::string::npos);
  CHECK(help.out.find("serve") != std::string::npos);

  CHECK(run({"train", "--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"train", "--catalog", "x"}).code == 2);
  CHECK(run({"check"}).code == 2);
  CHECK(run({"predict", "--model", "m", "--view", "huge", "--pose", "p"}).code == 2);
}

TEST_CASE("operational errors exit 1 with a message") {
  const auto r = run({"check", "--pose", "/nonexistent/clip.pose"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") == 0);
  CHECK(run({"eval", "--model", "/nonexistent.model", "--test", "/nonexistent"}).code == 1);
}

TEST_CASE("check reports the gate verdict") {
  const auto clean = run({"check", "--pose", (kData / "clean_640x480.pose").string()});
  CHECK(clean.code == 0);
  CHECK(clean.out.find("verdict: proceed\n") == 0);

  TempDir d("check");
  const auto low = run({"check", "--pose", (kData / "low_res_160x120.pose").string(), "--report", d / "r.json"});
  CHECK(low.out.find("verdict: proceed_with_warnings") == 0);
  CHECK(low.out.find("low_resolution") != std::string::npos);
  const auto j = nlohmann::json::parse(read_text_file(d / "r.json"));
  CHECK(j["verdict"] == "proceed_with_warnings");

  const auto cut = run({"check", "--pose", (kData / "truncated.pose").string()});
  CHECK(cut.out.find("verdict: reject") == 0);
  CHECK(cut.out.find("incomplete_upload") != std::string::npos);
}

TEST_CASE("synth, train, predict and eval") {
  TempDir d("pipeline");
  const auto s = run({"synth-data", "--out", d / "data", "--classes", "4", "--per-class", "3", "--frames", "20"});
  REQUIRE(s.code == 0);
  CHECK(fs::exists(d.path / "data/catalog.tsv"));
  CHECK(fs::exists(d.path / "data/labels.tsv"));

  REQUIRE(run(small_train(d, d / "a.model")).code == 0);
  REQUIRE(run(small_train(d, d / "b.model")).code == 0);
  CHECK(read_text_file(d / "a.model") == read_text_file(d / "b.model"));

  auto other = small_train(d, d / "c.model");
  other.insert(other.end(), {"--seed", "2"});
  REQUIRE(run(other).code == 0);
  CHECK(read_text_file(d / "a.model") != read_text_file(d / "c.model"));

  write_text_file(d / "clip.txt", "class=1,classes=4,frames=20");
  const auto compact = run({"predict", "--model", d / "a.model", "--media", d / "clip.txt"});
  REQUIRE(compact.code == 0);
  std::size_t lines = 0;
  for (char c : compact.out) lines += c == '\n';
  CHECK(lines == 4);

  const auto detailed = run({"predict", "--model", d / "a.model", "--media", d / "clip.txt", "--view", "detailed",
                             "--location", "in_space", "--report", d / "view.json"});
  REQUIRE(detailed.code == 0);
  CHECK(detailed.out.find("Applied filter: location=in_space") == 0);
  CHECK(nlohmann::json::parse(read_text_file(d / "view.json"))["applied_filter"] == "location=in_space");

  const auto mismatch = run({"predict", "--model", d / "a.model", "--catalog", (kData / "catalog_177.tsv").string(),
                             "--media", d / "clip.txt"});
  CHECK(mismatch.code == 1);
  CHECK(mismatch.err.find("catalog") != std::string::npos);

  const auto ev = run({"eval", "--model", d / "a.model", "--test", d / "data", "--report", d / "eval.json",
                       "--ratios", "0.3,1.0"});
  REQUIRE(ev.code == 0);
  const auto report = nlohmann::json::parse(read_text_file(d / "eval.json"));
  CHECK(report.contains("top1"));
  CHECK(report.contains("sweep"));
}

TEST_CASE("latency-fit") {
  const auto r = run({"latency-fit", "--data", std::string(SIGNDICT_REPO_DATA) + "/latency_reference.tsv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("observations") == 0);
  CHECK(run({"latency-fit"}).code == 2);
}
