#include "tse/cli.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <thread>

#include "json_util.hpp"
#include "tse/analysis.hpp"
#include "tse/errors.hpp"
#include "tse/generator.hpp"
#include "tse/lexicon.hpp"
#include "tse/morphology.hpp"
#include "tse/registry.hpp"
#include "tse/remote_scorer.hpp"
#include "tse/report.hpp"
#include "tse/scoring.hpp"
#include "tse/suite_io.hpp"
#include "tse/template.hpp"
#include "tse/text.hpp"
#include "tse/version.hpp"

namespace tse::cli {

namespace fs = std::filesystem;
using detail::ordered_json;

namespace {

std::string sha256_hex(const fs::path& path) {
  const std::string data = detail::read_file(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed for " + path.string());
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<fs::path> files_with_suffix(const fs::path& dir, std::string_view suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && text::ends_with(e.path().filename().string(), suffix)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Collects what a run read and wrote; written as run_manifest.json.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config;
  std::string started_at = utc_now();
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  ordered_json extra = ordered_json::object();

  void write(const fs::path& dir) const {
    ordered_json m = ordered_json::object();
    m["command"] = command;
    m["tool_version"] = std::string(kToolVersion);
    m["argv"] = argv;
    m["config"] = config;
    m["started_at"] = started_at;
    m["finished_at"] = utc_now();
    ordered_json in = ordered_json::array();
    for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"sha256", sha256_hex(p)}});
    m["inputs"] = in;
    ordered_json outs = ordered_json::array();
    for (const auto& p : outputs) outs.push_back(p.filename().string());
    m["outputs"] = outs;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    fs::create_directories(dir);
    detail::write_file(dir / "run_manifest.json", m.dump(2) + "\n");
  }
};

struct GenerateArgs {
  fs::path templates, lexicons, tables, out;
  std::uint64_t seed = 0;
  std::size_t n = 1000;
  unsigned jobs = 0;
  std::vector<std::string> suites;
  bool include_unvalidated = false;
  bool auto_normalize = false;
};

struct ScoreArgs {
  fs::path suites, out, corpus, import_dir;
  std::string scorer, endpoint, model, mode = "causal";
  int order = 3;
  double k = 0.1;
  std::size_t batch_size = 64;
  unsigned jobs = 0;
  int max_retries = 5;
};

struct AnalyzeArgs {
  fs::path scores, registry, out, suites;
  std::string report = "all";
};

struct SampleArgs {
  fs::path suites, out;
  std::size_t k = 5;
  std::uint64_t seed = 0;
};

std::map<Language, Lexicon> load_lexicons(const fs::path& dir, bool auto_normalize, RunManifest& manifest) {
  std::map<Language, Lexicon> out;
  for (const auto& p : files_with_suffix(dir, ".lexicon.json")) {
    Lexicon lex = load_lexicon(p, {auto_normalize});
    const Language lang = lex.language();
    if (out.contains(lang)) throw ConfigError("two lexicons for " + std::string(to_string(lang)) + " in " + dir.string());
    out.emplace(lang, std::move(lex));
    manifest.inputs.push_back(p);
  }
  return out;
}

int do_generate(const GenerateArgs& a, RunManifest& manifest, std::ostream& out) {
  std::vector<Template> templates = load_templates(a.templates);
  for (const auto& p : files_with_suffix(a.templates, ".template.json")) manifest.inputs.push_back(p);
  const fs::path tables_dir = a.tables.empty() ? a.lexicons : a.tables;
  const MorphologyTables tables = MorphologyTables::load_dir(tables_dir);
  for (const auto& p : files_with_suffix(tables_dir, ".table.json")) manifest.inputs.push_back(p);
  const auto lexicons = load_lexicons(a.lexicons, a.auto_normalize, manifest);

  std::vector<const Template*> selected;
  const std::set<std::string> wanted(a.suites.begin(), a.suites.end());
  for (const auto& t : templates) {
    if (!wanted.empty() ? wanted.contains(t.suite_name) : (t.validated || a.include_unvalidated))
      selected.push_back(&t);
  }
  for (const auto& name : wanted)
    if (std::none_of(templates.begin(), templates.end(), [&](const Template& t) { return t.suite_name == name; }))
      throw ConfigError("no template for suite \"" + name + "\"");
  if (selected.empty()) throw ConfigError("no templates selected in " + a.templates.string());

  GenerateOptions opts;
  opts.jobs = a.jobs;
  ordered_json suites = ordered_json::array();
  for (const Template* t : selected) {
    auto lex = lexicons.find(t->language);
    if (lex == lexicons.end())
      throw ConfigError("no " + std::string(to_string(t->language)) + " lexicon in " + a.lexicons.string());
    const TestSuite suite = generate_suite(*t, lex->second, tables, a.seed, a.n, opts);
    export_suite(suite, a.out);
    manifest.outputs.push_back(suite_path(a.out, suite.name));
    manifest.outputs.push_back(suite_manifest_path(a.out, suite.name));
    suites.push_back(suite.name);
    out << suite.name << ": " << suite.pairs.size() << " pairs\n";
  }
  manifest.extra["seed"] = a.seed;
  manifest.extra["suites"] = suites;
  return kOk;
}

std::unique_ptr<Scorer> make_scorer(const ScoreArgs& a, RunManifest& manifest) {
  if (a.scorer == "mock") return std::make_unique<MockScorer>();
  if (a.scorer == "ngram") {
    if (a.corpus.empty()) throw ConfigError("--scorer ngram needs --corpus FILE (one sentence per line)");
    const std::string content = detail::read_file(a.corpus);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
      auto end = content.find('\n', start);
      if (end == std::string::npos) end = content.size();
      std::string line = content.substr(start, end - start);
      if (!text::split_ws(line).empty()) lines.push_back(std::move(line));
      start = end + 1;
    }
    manifest.inputs.push_back(a.corpus);
    return std::make_unique<NgramScorer>(train_ngram(lines, a.order, a.k));
  }
  if (a.scorer == "remote") {
    RemoteScorerOptions o;
    o.endpoint = a.endpoint;
    o.model_id = a.model;
    o.mode = a.mode;
    o.batch_size = a.batch_size;
    if (a.jobs > 0) o.max_in_flight = a.jobs;
    o.max_retries = a.max_retries;
    return std::make_unique<RemoteScorer>(o);
  }
  throw ConfigError("unknown scorer \"" + a.scorer + "\"");
}

int do_score(const ScoreArgs& a, RunManifest& manifest, std::ostream& out, std::ostream& err) {
  const std::vector<TestSuite> suites = read_suites(a.suites);
  if (suites.empty()) throw ConfigError("no suites in " + a.suites.string());
  for (const auto& s : suites) manifest.inputs.push_back(suite_path(a.suites, s.name));

  if (a.scorer == "import") {
    if (a.import_dir.empty()) throw ConfigError("--scorer import needs --from DIR");
    std::map<std::string, const TestSuite*> by_name;
    for (const auto& s : suites) by_name[s.name] = &s;
    std::set<std::string> seen_models;
    for (const auto& p : find_score_files(a.import_dir)) {
      SuiteScores probe = import_scores(p);
      auto it = by_name.find(probe.suite_name);
      if (it == by_name.end()) throw ValidationError(p.string(), {"no suite named \"" + probe.suite_name + "\""});
      SuiteScores scores = import_scores(p, *it->second);
      if (!a.model.empty() && scores.model_id != a.model) continue;
      if (scores.scorer_descriptor.empty()) scores.scorer_descriptor = "import:" + p.string();
      const fs::path dest = a.out / scores.model_id;
      write_scores(scores, dest);
      manifest.inputs.push_back(p);
      manifest.outputs.push_back(scores_path(dest, scores.suite_name));
      seen_models.insert(scores.model_id);
      out << scores.model_id << " " << scores.suite_name << ": " << scores.scored.size() << " pairs imported\n";
    }
    if (manifest.outputs.empty()) throw ConfigError("no score files imported from " + a.import_dir.string());
    return kOk;
  }

  std::unique_ptr<Scorer> scorer = make_scorer(a, manifest);
  const std::string model_id = a.model.empty() ? a.scorer : a.model;
  unsigned in_flight = a.jobs;
  if (in_flight == 0) in_flight = scorer->max_concurrency() ? scorer->max_concurrency() : std::thread::hardware_concurrency();
  manifest.extra["scorer_descriptor"] = scorer->descriptor();
  manifest.extra["model_id"] = model_id;

  std::vector<std::int64_t> failed;
  std::size_t transport_failures = 0;
  std::string first_failure;
  for (const auto& suite : suites) {
    try {
      const SuiteScores scores = score_suite(*scorer, suite, model_id, std::max(1u, in_flight));
      write_scores(scores, a.out);
      manifest.outputs.push_back(scores_path(a.out, suite.name));
      out << suite.name << ": " << scores.scored.size() << " pairs scored\n";
    } catch (const TransportError& e) {
      ++transport_failures;
      if (first_failure.empty()) first_failure = e.what();
      err << suite.name << ": " << e.what() << "\n";
    } catch (const PartialScoringError& e) {
      failed.insert(failed.end(), e.failed_ids().begin(), e.failed_ids().end());
      if (first_failure.empty()) first_failure = e.what();
      err << suite.name << ": " << e.what() << "\n";
    }
  }
  if (transport_failures == suites.size()) throw TransportError(first_failure);
  if (transport_failures > 0 || !failed.empty())
    throw PartialScoringError(std::to_string(transport_failures) + " suite(s) unreachable, " +
                                  std::to_string(failed.size()) + " pair(s) failed; first: " + first_failure,
                              failed);
  return kOk;
}

int do_analyze(const AnalyzeArgs& a, RunManifest& manifest, std::ostream& out, std::ostream& err) {
  std::vector<ModelInfo> registry;
  if (a.registry.empty()) {
    registry = default_registry();
  } else {
    registry = load_registry(a.registry);
    manifest.inputs.push_back(a.registry);
  }
  std::map<std::string, TestSuite> suites;
  if (!a.suites.empty())
    for (auto& s : read_suites(a.suites)) suites.emplace(s.name, std::move(s));

  std::vector<SuiteScores> all;
  std::vector<std::string> issues;
  for (const auto& p : find_score_files(a.scores)) {
    SuiteScores s = import_scores(p);
    if (!suites.empty()) {
      auto it = suites.find(s.suite_name);
      if (it == suites.end()) {
        issues.push_back(p.string() + ": no suite named \"" + s.suite_name + "\"");
        continue;
      }
      s = import_scores(p, it->second);
    }
    if (!find_model(registry, s.model_id)) issues.push_back(p.string() + ": model \"" + s.model_id + "\" not in registry");
    manifest.inputs.push_back(p);
    all.push_back(std::move(s));
  }
  if (!issues.empty()) throw ValidationError("analyze", std::move(issues));
  if (all.empty()) throw ConfigError("no score files under " + a.scores.string());
  const ResultsMatrix matrix = ResultsMatrix::from_scores(all);

  ReportMetadata meta = default_report_metadata();
  meta.emplace_back("score_files", std::to_string(all.size()));
  fs::create_directories(a.out);
  auto emit = [&](const std::string& name, const std::string& content) {
    detail::write_file(a.out / name, content);
    manifest.outputs.push_back(a.out / name);
    out << "wrote " << (a.out / name).string() << "\n";
  };
  const bool all_reports = a.report == "all";
  if (all_reports || a.report == "matrix") {
    emit("matrix.csv", render_matrix_csv(matrix, registry, meta));
    emit("languages.csv", render_language_csv(language_summary(matrix), meta));
  }
  if (all_reports || a.report == "slopes") {
    try {
      emit("slopes.csv", render_slopes_csv(slope_table(matrix, registry), meta));
    } catch (const ValidationError& e) {
      if (!all_reports) throw;
      err << "skipping slopes.csv: " << e.issues().size() << " (suite, family) cell(s) lack two versions\n";
      manifest.extra["skipped"] = "slopes.csv";
    }
  }
  if (all_reports || a.report == "complexity")
    emit("complexity.csv", render_complexity_csv(complexity_trends(matrix), complexity_steps(matrix), meta));
  return kOk;
}

int do_sample(const SampleArgs& a, RunManifest& manifest, std::ostream& out) {
  const std::vector<TestSuite> suites = read_suites(a.suites);
  if (suites.empty()) throw ConfigError("no suites in " + a.suites.string());
  for (const auto& s : suites) manifest.inputs.push_back(suite_path(a.suites, s.name));
  const auto items = sample_validation_subset(suites, a.k, a.seed);
  write_validation_subset(items, a.out);
  manifest.outputs.push_back(a.out);
  manifest.extra["seed"] = a.seed;
  out << "wrote " << items.size() << " items to " << a.out.string() << "\n";
  return kOk;
}

void report_error(std::ostream& err, const char* kind, int code, const std::string& message,
                  const std::vector<std::int64_t>& failed = {}) {
  ordered_json e = ordered_json::object();
  e["error"] = kind;
  e["exit_code"] = code;
  e["message"] = message;
  if (!failed.empty()) e["failed_pair_ids"] = failed;
  err << e.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Targeted syntactic evaluation suites: generation, scoring and analysis", "tsekit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
  app.require_subcommand(1, 1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate minimal-pair suites from templates");
  g->add_option("--templates", gen.templates, "Template directory")->required()->check(CLI::ExistingDirectory);
  g->add_option("--lexicons", gen.lexicons, "Lexicon directory")->required()->check(CLI::ExistingDirectory);
  g->add_option("--tables", gen.tables, "Inflection table directory (default: the lexicon directory)")
      ->check(CLI::ExistingDirectory);
  g->add_option("--seed", gen.seed, "Random seed")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("-n,--pairs", gen.n, "Pairs per suite")->check(CLI::PositiveNumber);
  g->add_option("--jobs", gen.jobs, "Worker threads (default: logical cores)");
  g->add_option("--suite", gen.suites, "Only these suites (repeatable)");
  g->add_flag("--include-unvalidated", gen.include_unvalidated, "Also generate suites marked unvalidated");
  g->add_flag("--auto-normalize", gen.auto_normalize, "NFC-normalize lexicon text instead of rejecting it");

  ScoreArgs sc;
  auto* s = app.add_subcommand("score", "Score suites with a scorer");
  s->add_option("--suites", sc.suites, "Suite directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--scorer", sc.scorer, "Scorer")->required()->check(CLI::IsMember({"ngram", "remote", "import", "mock"}));
  s->add_option("--out", sc.out, "Output directory")->required();
  s->add_option("--endpoint", sc.endpoint, "Scoring service URL (remote)");
  s->add_option("--model", sc.model, "Model id written to score files");
  s->add_option("--mode", sc.mode, "Scoring mode (remote)")->check(CLI::IsMember({"causal", "masked_pll", "mock"}));
  s->add_option("--batch-size", sc.batch_size, "Items per request (remote)")->check(CLI::PositiveNumber);
  s->add_option("--max-retries", sc.max_retries, "Retries per request (remote)")->check(CLI::NonNegativeNumber);
  s->add_option("--jobs", sc.jobs, "Concurrent batches (default: the scorer's limit)");
  s->add_option("--corpus", sc.corpus, "Training sentences, one per line (ngram)")->check(CLI::ExistingFile);
  s->add_option("--order", sc.order, "N-gram order (ngram)");
  s->add_option("--k", sc.k, "Add-k smoothing constant (ngram)");
  s->add_option("--from", sc.import_dir, "Directory of existing score files (import)")->check(CLI::ExistingDirectory);

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Accuracy matrix, slopes and complexity trends");
  a->add_option("--scores", an.scores, "Score directory (searched recursively)")->required()->check(CLI::ExistingDirectory);
  a->add_option("--registry", an.registry, "Model registry JSON (default: built-in)")->check(CLI::ExistingFile);
  a->add_option("--suites", an.suites, "Suite directory to check pair ids against")->check(CLI::ExistingDirectory);
  a->add_option("--out", an.out, "Report directory")->required();
  a->add_option("--report", an.report, "Which report")->check(CLI::IsMember({"all", "matrix", "slopes", "complexity"}));

  SampleArgs vs;
  auto* v = app.add_subcommand("validate-sample", "Export pairs for human validation");
  v->add_option("--suites", vs.suites, "Suite directory")->required()->check(CLI::ExistingDirectory);
  v->add_option("--k", vs.k, "Pairs per suite")->check(CLI::NonNegativeNumber);
  v->add_option("--seed", vs.seed, "Random seed")->required();
  v->add_option("--out", vs.out, "Output JSONL file")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "config", kConfigError, e.what());
    return kConfigError;
  }

  RunManifest manifest;
  manifest.argv = args;
  manifest.config = app.config_to_str(true, false);
  fs::path out_dir;
  try {
    int rc = kOk;
    if (*g) {
      manifest.command = "generate";
      out_dir = gen.out;
      rc = do_generate(gen, manifest, out);
    } else if (*s) {
      manifest.command = "score";
      out_dir = sc.out;
      rc = do_score(sc, manifest, out, err);
    } else if (*a) {
      manifest.command = "analyze";
      out_dir = an.out;
      rc = do_analyze(an, manifest, out, err);
    } else {
      manifest.command = "validate-sample";
      out_dir = vs.out.has_parent_path() ? vs.out.parent_path() : fs::path(".");
      rc = do_sample(vs, manifest, out);
    }
    manifest.write(out_dir);
    return rc;
  } catch (const ConfigError& e) {
    report_error(err, "config", kConfigError, e.what());
    return kConfigError;
  } catch (const TransportError& e) {
    report_error(err, "transport", kTransportError, e.what());
    return kTransportError;
  } catch (const PartialScoringError& e) {
    // Whatever was scored is on disk; record it.
    manifest.extra["failed_pair_ids"] = e.failed_ids();
    try {
      manifest.write(out_dir);
    } catch (const std::exception&) {
    }
    report_error(err, "partial_scoring", kPartialScoring, e.what(), e.failed_ids());
    return kPartialScoring;
  } catch (const ConstraintError& e) {
    report_error(err, "constraint", kDataError, std::string(e.what()) + " [" + e.constraint() + "]");
    return kDataError;
  } catch (const Error& e) {
    report_error(err, "data", kDataError, e.what());
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    report_error(err, "config", kConfigError, e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    report_error(err, "data", kDataError, e.what());
    return kDataError;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tse::cli
