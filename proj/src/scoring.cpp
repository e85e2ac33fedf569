#include "tse/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "json_util.hpp"
#include "tse/errors.hpp"
#include "tse/text.hpp"
#include "tse/version.hpp"

namespace tse {

using detail::json;
using detail::ordered_json;

namespace {

constexpr const char* kBos = "<s>";
constexpr const char* kEos = "</s>";
constexpr const char* kUnk = "<unk>";
constexpr char kSep = '\x1f';

std::vector<std::string> tokens(const std::string& s) { return text::split_ws(text::to_nfc(s)); }

std::string context_key(const std::vector<std::string>& history, int order) {
  std::string key;
  const std::size_t take = static_cast<std::size_t>(order - 1);
  for (std::size_t i = history.size() - take; i < history.size(); ++i) {
    key += history[i];
    key += kSep;
  }
  return key;
}

std::string item_id(std::int64_t pair_id, char which) { return std::to_string(pair_id) + "/" + which; }

}  // namespace

std::vector<double> Scorer::score_batch(const std::vector<ScoreItem>& items) const {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(score(it.condition, it.target));
  return out;
}

double MockScorer::score(const std::string&, const std::string& target) const {
  return -static_cast<double>(text::code_points(target));
}

NgramScorer train_ngram(const std::vector<std::string>& corpus, int order, double k) {
  if (order < 1) throw ConfigError("n-gram order must be at least 1");
  if (!(k > 0) || !std::isfinite(k)) throw ConfigError("add-k smoothing needs a finite k > 0");
  if (corpus.empty()) throw ConfigError("n-gram training corpus is empty");
  NgramScorer m;
  m.order_ = order;
  m.k_ = k;
  for (const auto& sentence : corpus) {
    std::vector<std::string> h(static_cast<std::size_t>(order - 1), kBos);
    for (auto& w : tokens(sentence)) {
      m.vocab_.emplace(w, m.vocab_.size());
      const std::string ctx = context_key(h, order);
      ++m.counts_[ctx][w];
      ++m.context_totals_[ctx];
      h.push_back(std::move(w));
    }
    const std::string ctx = context_key(h, order);
    ++m.counts_[ctx][kEos];
    ++m.context_totals_[ctx];
  }
  return m;
}

double NgramScorer::log_prob(const std::vector<std::string>& history, const std::string& word) const {
  const std::string ctx = context_key(history, order_);
  double c_hw = 0;
  double c_h = 0;
  if (auto it = context_totals_.find(ctx); it != context_totals_.end()) {
    c_h = static_cast<double>(it->second);
    const auto& row = counts_.at(ctx);
    if (auto jt = row.find(word); jt != row.end()) c_hw = static_cast<double>(jt->second);
  }
  // Outcomes: training types, <unk>, </s>.
  const double outcomes = static_cast<double>(vocabulary_size() + 1);
  return std::log((c_hw + k_) / (c_h + k_ * outcomes));
}

double NgramScorer::score(const std::string& condition, const std::string& target) const {
  std::vector<std::string> h(static_cast<std::size_t>(order_ - 1), kBos);
  auto known = [&](std::string w) { return vocab_.contains(w) ? w : std::string(kUnk); };
  for (auto& w : tokens(condition)) h.push_back(known(std::move(w)));
  const auto target_tokens = tokens(target);
  if (target_tokens.empty()) throw ValidationError("n-gram scorer", {"empty target"});
  double total = 0;
  for (auto& w : target_tokens) {
    std::string word = known(std::move(w));
    total += log_prob(h, word);
    h.push_back(std::move(word));
  }
  return total;
}

std::string NgramScorer::descriptor() const {
  return "ngram:order=" + std::to_string(order_) + ";k=" + json(k_).dump() +
         ";vocab=" + std::to_string(vocabulary_size());
}

ScoredPair score_pair(const Scorer& scorer, const MinimalPair& pair) {
  try {
    ScoredPair s;
    s.pair_id = pair.id;
    s.logp_grammatical = scorer.score(pair.condition, pair.grammatical_target);
    s.logp_ungrammatical = scorer.score(pair.condition, pair.ungrammatical_target);
    if (!std::isfinite(s.logp_grammatical) || !std::isfinite(s.logp_ungrammatical))
      throw Error("scorer returned a non-finite log-probability");
    s.correct = is_correct(s.logp_grammatical, s.logp_ungrammatical);
    return s;
  } catch (const PartialScoringError&) {
    throw;
  } catch (const std::exception& e) {
    throw PartialScoringError("pair " + std::to_string(pair.id) + ": " + e.what(), {pair.id});
  }
}

SuiteScores score_suite(const Scorer& scorer, const TestSuite& suite, const std::string& model_id,
                        unsigned max_in_flight) {
  if (suite.pairs.empty()) throw ValidationError("suite " + suite.name, {"cannot score an empty suite"});

  std::vector<ScoreItem> items;
  items.reserve(suite.pairs.size() * 2);
  for (const auto& p : suite.pairs) {
    items.push_back({item_id(p.id, 'g'), p.condition, p.grammatical_target});
    items.push_back({item_id(p.id, 'u'), p.condition, p.ungrammatical_target});
  }
  const std::size_t batch = std::max<std::size_t>(1, scorer.preferred_batch_size());
  const std::size_t n_batches = (items.size() + batch - 1) / batch;

  unsigned workers = std::max(1u, max_in_flight);
  if (scorer.max_concurrency() > 0) workers = std::min(workers, scorer.max_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_batches));

  std::vector<double> logp(items.size(), std::nan(""));
  std::vector<char> filled(items.size(), 0);
  std::vector<std::exception_ptr> batch_errors(n_batches);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t b; (b = next.fetch_add(1)) < n_batches;) {
      const std::size_t lo = b * batch;
      const std::size_t hi = std::min(items.size(), lo + batch);
      try {
        const std::vector<ScoreItem> chunk(items.begin() + static_cast<std::ptrdiff_t>(lo),
                                           items.begin() + static_cast<std::ptrdiff_t>(hi));
        const auto values = scorer.score_batch(chunk);
        if (values.size() != chunk.size())
          throw Error("scorer returned " + std::to_string(values.size()) + " values for " +
                      std::to_string(chunk.size()) + " items");
        for (std::size_t i = lo; i < hi; ++i) {
          const double v = values[i - lo];
          if (!std::isfinite(v)) throw Error("non-finite log-probability for item " + items[i].id);
        }
        // Each slot belongs to exactly one batch, so it is written at most once.
        for (std::size_t i = lo; i < hi; ++i) {
          logp[i] = values[i - lo];
          filled[i] = 1;
        }
      } catch (...) {
        batch_errors[b] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::set<std::int64_t> failed;
  std::size_t failed_batches = 0;
  std::exception_ptr first_error;
  bool all_transport = true;
  for (std::size_t b = 0; b < n_batches; ++b) {
    if (!batch_errors[b]) continue;
    ++failed_batches;
    if (!first_error) first_error = batch_errors[b];
    try {
      std::rethrow_exception(batch_errors[b]);
    } catch (const TransportError&) {
    } catch (...) {
      all_transport = false;
    }
    const std::size_t lo = b * batch;
    const std::size_t hi = std::min(items.size(), lo + batch);
    for (std::size_t i = lo; i < hi; ++i) failed.insert(suite.pairs[i / 2].id);
  }
  if (failed_batches == n_batches && all_transport) std::rethrow_exception(first_error);
  if (!failed.empty()) {
    std::string reason;
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      reason = e.what();
    }
    throw PartialScoringError("suite " + suite.name + ": " + std::to_string(failed.size()) + " of " +
                                  std::to_string(suite.pairs.size()) + " pairs could not be scored (" + reason + ")",
                              std::vector<std::int64_t>(failed.begin(), failed.end()));
  }

  SuiteScores out{suite.name, model_id, scorer.descriptor(), {}};
  out.scored.reserve(suite.pairs.size());
  for (std::size_t p = 0; p < suite.pairs.size(); ++p) {
    const double g = logp[2 * p];
    const double u = logp[2 * p + 1];
    out.scored.push_back({suite.pairs[p].id, g, u, is_correct(g, u)});
  }
  std::sort(out.scored.begin(), out.scored.end(),
            [](const ScoredPair& a, const ScoredPair& b) { return a.pair_id < b.pair_id; });
  return out;
}

std::filesystem::path scores_path(const std::filesystem::path& dir, const std::string& suite_name) {
  return dir / (suite_name + ".scores.jsonl");
}

void write_scores(const SuiteScores& scores, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string out;
  for (const auto& s : scores.scored) {
    ordered_json o = ordered_json::object();
    o["suite"] = scores.suite_name;
    o["model_id"] = scores.model_id;
    o["pair_id"] = s.pair_id;
    o["logp_grammatical"] = s.logp_grammatical;
    o["logp_ungrammatical"] = s.logp_ungrammatical;
    out += o.dump() + "\n";
  }
  detail::write_file(scores_path(dir, scores.suite_name), out);
  ordered_json m = ordered_json::object();
  m["suite"] = scores.suite_name;
  m["model_id"] = scores.model_id;
  m["scorer_descriptor"] = scores.scorer_descriptor;
  m["n"] = scores.scored.size();
  m["tool_version"] = std::string(kToolVersion);
  detail::write_file(dir / (scores.suite_name + ".scores.manifest.json"), m.dump(2) + "\n");
}

SuiteScores import_scores(const std::filesystem::path& path) {
  const std::string source = path.string();
  const std::string content = detail::read_file(path);
  SuiteScores out;
  std::vector<std::string> issues;
  std::set<std::int64_t> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const std::string_view line(content.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string ctx = source + ":" + std::to_string(line_no);
    const json o = detail::parse_json_strict(line, ctx);
    for (const char* field : {"suite", "model_id", "pair_id", "logp_grammatical", "logp_ungrammatical"})
      detail::require(o, field, ctx);
    const std::string suite = detail::require_string(o, "suite", ctx);
    const std::string model = detail::require_string(o, "model_id", ctx);
    if (out.scored.empty() && issues.empty()) {
      out.suite_name = suite;
      out.model_id = model;
    }
    if (suite != out.suite_name) issues.push_back(ctx + ": suite \"" + suite + "\" differs from \"" + out.suite_name + "\"");
    if (model != out.model_id) issues.push_back(ctx + ": model \"" + model + "\" differs from \"" + out.model_id + "\"");
    const json& pid = o.at("pair_id");
    if (!pid.is_number_integer()) throw ParseError(ctx + ": \"pair_id\" must be an integer");
    ScoredPair s;
    s.pair_id = pid.get<std::int64_t>();
    auto number = [&](const char* field) {
      const json& v = o.at(field);
      // nlohmann parses NaN/Infinity literals as errors, so a non-number here
      // is either null (from a NaN dump) or a string.
      if (!v.is_number()) throw ValidationError(ctx, {std::string("\"") + field + "\" is not a finite number"});
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw ValidationError(ctx, {std::string("\"") + field + "\" is not finite"});
      return d;
    };
    s.logp_grammatical = number("logp_grammatical");
    s.logp_ungrammatical = number("logp_ungrammatical");
    s.correct = is_correct(s.logp_grammatical, s.logp_ungrammatical);
    if (!ids.insert(s.pair_id).second) issues.push_back(ctx + ": duplicate pair_id " + std::to_string(s.pair_id));
    out.scored.push_back(s);
  }
  if (out.scored.empty()) issues.push_back("no score rows");
  if (!issues.empty()) throw ValidationError(source, std::move(issues));
  std::sort(out.scored.begin(), out.scored.end(),
            [](const ScoredPair& a, const ScoredPair& b) { return a.pair_id < b.pair_id; });

  auto manifest = path;
  manifest.replace_filename(out.suite_name + ".scores.manifest.json");
  if (std::filesystem::exists(manifest)) {
    const json m = detail::parse_json_strict(detail::read_file(manifest), manifest.string());
    out.scorer_descriptor = detail::optional_string(m, "scorer_descriptor");
  }
  return out;
}

SuiteScores import_scores(const std::filesystem::path& path, const TestSuite& reference) {
  SuiteScores out = import_scores(path);
  std::vector<std::string> issues;
  if (out.suite_name != reference.name)
    issues.push_back("scores are for suite \"" + out.suite_name + "\", expected \"" + reference.name + "\"");
  std::set<std::int64_t> expected;
  for (const auto& p : reference.pairs) expected.insert(p.id);
  std::set<std::int64_t> got;
  for (const auto& s : out.scored) got.insert(s.pair_id);
  for (auto id : expected)
    if (!got.contains(id)) issues.push_back("missing score for pair " + std::to_string(id));
  for (auto id : got)
    if (!expected.contains(id)) issues.push_back("score for unknown pair " + std::to_string(id));
  if (!issues.empty()) throw ValidationError(path.string(), std::move(issues));
  return out;
}

std::vector<std::filesystem::path> find_score_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("score directory not found: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && text::ends_with(e.path().filename().string(), ".scores.jsonl")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tse
