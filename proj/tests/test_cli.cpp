#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "json_util.hpp"
#include "mock_service.hpp"
#include "support.hpp"
#include "tse/cli.hpp"
#include "tse/registry.hpp"
#include "tse/scoring.hpp"
#include "tse/suite_io.hpp"

using namespace tse;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result tsekit(std::vector<std::string> args) {
  args.insert(args.begin(), "tsekit");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> generate_args(const fs::path& out, const std::string& seed, const std::string& n = "40") {
  return {"generate", "--templates", testing::template_dir().string(), "--lexicons", testing::lexicon_dir().string(),
          "--seed", seed, "--out", out.string(), "-n", n, "--suite", "basque-S-S_V_AUX", "--suite", "hindi-S_O_V"};
}

// The structured error is the last line of stderr.
detail::json error_json(const Result& r) {
  std::string err = r.err;
  while (!err.empty() && err.back() == '\n') err.pop_back();
  const auto nl = err.rfind('\n');
  return detail::json::parse(nl == std::string::npos ? err : err.substr(nl + 1));
}

std::size_t lines(const fs::path& p) {
  const std::string s = detail::read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("generate is reproducible and records a run manifest") {
  testing::TempDir dir("cli");
  auto r1 = tsekit(generate_args(dir / "a", "42"));
  REQUIRE(r1.code == 0);
  CHECK(r1.out == "basque-S-S_V_AUX: 40 pairs\nhindi-S_O_V: 40 pairs\n");
  REQUIRE(tsekit(generate_args(dir / "b", "42")).code == 0);
  REQUIRE(tsekit(generate_args(dir / "c", "43")).code == 0);
  for (const char* name : {"basque-S-S_V_AUX.jsonl", "hindi-S_O_V.jsonl"}) {
    CHECK(detail::read_file(dir / "a" / name) == detail::read_file(dir / "b" / name));
    CHECK(detail::read_file(dir / "a" / name) != detail::read_file(dir / "c" / name));
    CHECK(lines(dir / "a" / name) == 40);
  }
  const auto m = detail::parse_json_strict(detail::read_file(dir / "a" / "run_manifest.json"), "m");
  CHECK(m.at("command") == "generate");
  CHECK(m.at("seed") == 42);
  CHECK(m.at("suites").size() == 2);
  bool lexicon_hashed = false;
  for (const auto& in : m.at("inputs"))
    if (in.at("path").get<std::string>().find("basque.lexicon.json") != std::string::npos)
      lexicon_hashed = in.at("sha256").get<std::string>().size() == 64;
  CHECK(lexicon_hashed);
}

TEST_CASE("config file values apply and flags override them") {
  testing::TempDir dir("cli");
  std::ofstream(dir / "run.toml") << "[generate]\nseed = 42\npairs = 12\n";
  auto r = tsekit({"--config", (dir / "run.toml").string(), "generate", "--templates", testing::template_dir().string(),
                   "--lexicons", testing::lexicon_dir().string(), "--out", (dir / "cfg").string(), "--suite",
                   "hindi-S_O_V", "-n", "7"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(dir / "cfg" / "hindi-S_O_V.jsonl") == 7);
  REQUIRE(tsekit({"generate", "--templates", testing::template_dir().string(), "--lexicons",
                  testing::lexicon_dir().string(), "--out", (dir / "flags").string(), "--suite", "hindi-S_O_V", "-n",
                  "7", "--seed", "42"})
              .code == 0);
  CHECK(detail::read_file(dir / "cfg" / "hindi-S_O_V.jsonl") == detail::read_file(dir / "flags" / "hindi-S_O_V.jsonl"));
}

TEST_CASE("validate-sample") {
  testing::TempDir dir("cli");
  REQUIRE(tsekit(generate_args(dir / "s", "1")).code == 0);
  auto r = tsekit({"validate-sample", "--suites", (dir / "s").string(), "--k", "3", "--seed", "5", "--out",
                   (dir / "v" / "subset.jsonl").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(dir / "v" / "subset.jsonl") == 6);
  CHECK(fs::exists(dir / "v" / "run_manifest.json"));
  REQUIRE(tsekit({"validate-sample", "--suites", (dir / "s").string(), "--k", "0", "--seed", "5", "--out",
                  (dir / "v" / "empty.jsonl").string()})
              .code == 0);
  CHECK(lines(dir / "v" / "empty.jsonl") == 0);
  auto big = tsekit({"validate-sample", "--suites", (dir / "s").string(), "--k", "41", "--seed", "5", "--out",
                     (dir / "v" / "big.jsonl").string()});
  CHECK(big.code == cli::kConfigError);
}

TEST_CASE("mock scoring, import and analysis agree with a direct recount") {
  testing::TempDir dir("cli");
  REQUIRE(tsekit(generate_args(dir / "suites", "42")).code == 0);

  auto mock = tsekit({"score", "--suites", (dir / "suites").string(), "--scorer", "mock", "--out",
                      (dir / "mock").string(), "--jobs", "3"});
  REQUIRE_MESSAGE(mock.code == 0, mock.err);
  const auto mock_scores = import_scores(dir / "mock" / "basque-S-S_V_AUX.scores.jsonl");
  CHECK(mock_scores.model_id == "mock");
  CHECK(mock_scores.scorer_descriptor == "mock:-codepoints");

  // External score files for every registry model. Model j reverses its
  // preference on pairs whose id is divisible by j + 2.
  const auto suites = read_suites(dir / "suites");
  std::map<std::pair<std::string, std::string>, std::uint64_t> expected;
  const auto& reg = default_registry();
  for (std::size_t j = 0; j < reg.size(); ++j) {
    for (const auto& suite : suites) {
      SuiteScores s{suite.name, reg[j].id, "external", {}};
      std::uint64_t k = 0;
      for (const auto& p : suite.pairs) {
        double g = -static_cast<double>(text::code_points(p.grammatical_target));
        double u = -static_cast<double>(text::code_points(p.ungrammatical_target));
        if (p.id % static_cast<std::int64_t>(j + 2) == 0) std::swap(g, u);
        s.scored.push_back({p.id, g, u, false});
      }
      write_scores(s, dir / "external" / reg[j].id);
      // Brute-force recount straight from the suite file's strings.
      for (const auto& p : suite.pairs) {
        const std::size_t lg = text::code_points(p.grammatical_target);
        const std::size_t lu = text::code_points(p.ungrammatical_target);
        const bool flipped = p.id % static_cast<std::int64_t>(j + 2) == 0;
        k += (flipped ? lu < lg : lg < lu) ? 1 : 0;
      }
      expected[{reg[j].id, suite.name}] = k;
    }
  }
  auto imp = tsekit({"score", "--suites", (dir / "suites").string(), "--scorer", "import", "--from",
                     (dir / "external").string(), "--out", (dir / "scores").string()});
  REQUIRE_MESSAGE(imp.code == 0, imp.err);

  auto an = tsekit({"analyze", "--scores", (dir / "scores").string(), "--registry",
                    (testing::data_dir() / "models.json").string(), "--suites", (dir / "suites").string(), "--out",
                    (dir / "report").string()});
  REQUIRE_MESSAGE(an.code == 0, an.err);
  for (const char* f : {"matrix.csv", "languages.csv", "slopes.csv", "complexity.csv", "run_manifest.json"})
    CHECK(fs::exists(dir / "report" / f));

  std::istringstream csv(detail::read_file(dir / "report" / "matrix.csv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("model_id,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 13);
    CAPTURE(line);
    CHECK(std::stoull(cells[6]) == expected.at({cells[0], cells[4]}));
    CHECK(cells[5] == "40");
    ++rows;
  }
  CHECK(rows == expected.size());

  // Rerunning the analysis gives byte-identical reports.
  REQUIRE(tsekit({"analyze", "--scores", (dir / "scores").string(), "--out", (dir / "report2").string()}).code == 0);
  for (const char* f : {"matrix.csv", "slopes.csv", "complexity.csv"})
    CHECK(detail::read_file(dir / "report" / f) == detail::read_file(dir / "report2" / f));

  // Scores from a model the registry does not know are a data error.
  auto unknown = tsekit({"analyze", "--scores", (dir / "mock").string(), "--out", (dir / "r3").string()});
  CHECK(unknown.code == cli::kDataError);
}

TEST_CASE("remote scoring through the CLI") {
  testing::TempDir dir("cli");
  REQUIRE(tsekit(generate_args(dir / "suites", "3", "20")).code == 0);

  testing::MockService svc;
  auto ok = tsekit({"score", "--suites", (dir / "suites").string(), "--scorer", "remote", "--endpoint", svc.endpoint(),
                    "--model", "mock", "--mode", "mock", "--batch-size", "8", "--out", (dir / "remote").string()});
  REQUIRE_MESSAGE(ok.code == 0, ok.err);
  REQUIRE(tsekit({"score", "--suites", (dir / "suites").string(), "--scorer", "mock", "--out",
                  (dir / "local").string(), "--model", "mock"})
              .code == 0);
  for (const char* f : {"basque-S-S_V_AUX.scores.jsonl", "hindi-S_O_V.scores.jsonl"})
    CHECK(detail::read_file(dir / "remote" / f) == detail::read_file(dir / "local" / f));
  // Item ids repeat across suites ("0/g", ...), so each id is seen once per suite.
  for (const auto& [id, count] : svc.accepted()) CHECK(count == 2);
  CHECK(svc.accepted().size() == 2 * 20);

  // One target rejected: only its batch fails, so the run is partial.
  const auto suite = read_suite(dir / "suites" / "hindi-S_O_V.jsonl");
  testing::MockService picky({.reject_target = suite.pairs[5].grammatical_target});
  auto partial = tsekit({"score", "--suites", (dir / "suites").string(), "--scorer", "remote", "--endpoint",
                         picky.endpoint(), "--model", "mock", "--mode", "mock", "--batch-size", "2", "--max-retries",
                         "0", "--out", (dir / "partial").string()});
  CHECK(partial.code == cli::kPartialScoring);
  const auto e = error_json(partial);
  CHECK(e.at("error") == "partial_scoring");
  CHECK(e.at("exit_code") == 5);
  bool five = false;
  for (const auto& id : e.at("failed_pair_ids")) five = five || id == 5;
  CHECK(five);
  CHECK(fs::exists(dir / "partial" / "basque-S-S_V_AUX.scores.jsonl"));
  CHECK_FALSE(fs::exists(dir / "partial" / "hindi-S_O_V.scores.jsonl"));

  // Nothing listening: transport error.
  const int port = testing::closed_port();
  auto down = tsekit({"score", "--suites", (dir / "suites").string(), "--scorer", "remote", "--endpoint",
                      "http://127.0.0.1:" + std::to_string(port), "--model", "m", "--mode", "mock", "--max-retries", "0",
                      "--out", (dir / "down").string()});
  CHECK(down.code == cli::kTransportError);
  CHECK(error_json(down).at("error") == "transport");
}

TEST_CASE("exit codes for configuration and data errors") {
  testing::TempDir dir("cli");
  CHECK(tsekit({}).code == cli::kConfigError);
  CHECK(tsekit({"generate", "--seed", "1"}).code == cli::kConfigError);
  CHECK(tsekit({"analyze", "--scores", (dir / "missing").string(), "--out", (dir / "o").string()}).code ==
        cli::kConfigError);
  auto https = tsekit({"score", "--suites", dir.path().string(), "--scorer", "remote", "--endpoint",
                       "https://example.org", "--model", "m", "--out", (dir / "o").string()});
  CHECK(https.code == cli::kConfigError);  // no suites, or https: both configuration problems

  // A broken template is a data error.
  fs::create_directories(dir / "templates");
  fs::copy_file(testing::template_dir() / "hindi-S_O_V.template.json", dir / "templates" / "hindi-S_O_V.template.json");
  std::ofstream(dir / "templates" / "broken.template.json") << "{\"schema\": \"tse-template/1\",";
  auto broken = tsekit({"generate", "--templates", (dir / "templates").string(), "--lexicons",
                        testing::lexicon_dir().string(), "--seed", "1", "--out", (dir / "o").string()});
  CHECK(broken.code == cli::kDataError);
  CHECK(error_json(broken).at("exit_code") == 3);

  auto version = tsekit({"--version"});
  CHECK(version.code == 0);
  CHECK_FALSE(version.out.empty());
}
