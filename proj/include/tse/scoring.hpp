#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tse/generator.hpp"

namespace tse {

struct ScoreItem {
  std::string id;
  std::string condition;
  std::string target;
};

// Conditional log-probability provider. Implementations must return the same
// value for the same arguments regardless of call order.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual double score(const std::string& condition, const std::string& target) const = 0;

  // One value per item, in item order. The default scores items one by one.
  virtual std::vector<double> score_batch(const std::vector<ScoreItem>& items) const;

  virtual std::string descriptor() const = 0;

  // Upper bound on concurrent score/score_batch calls; 0 means unbounded and
  // 1 declares the scorer single-threaded.
  virtual unsigned max_concurrency() const { return 0; }

  // Items per score_batch call that score_suite should aim for.
  virtual std::size_t preferred_batch_size() const { return 1; }
};

// Scores every target by minus its length in code points. Used for pipeline
// tests; it prefers the shorter target.
class MockScorer : public Scorer {
 public:
  double score(const std::string& condition, const std::string& target) const override;
  std::string descriptor() const override { return "mock:-codepoints"; }
};

// Add-k smoothed word n-gram model over whitespace tokens (after NFC).
// Prediction vocabulary: training word types, <unk> and </s>.
class NgramScorer : public Scorer {
 public:
  double score(const std::string& condition, const std::string& target) const override;
  std::string descriptor() const override;

  int order() const noexcept { return order_; }
  double k() const noexcept { return k_; }
  // Training types plus <unk>.
  std::size_t vocabulary_size() const noexcept { return vocab_.size() + 1; }

 private:
  friend NgramScorer train_ngram(const std::vector<std::string>& corpus, int order, double k);
  double log_prob(const std::vector<std::string>& history, const std::string& word) const;

  int order_ = 1;
  double k_ = 1.0;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::unordered_map<std::string, std::unordered_map<std::string, std::uint64_t>> counts_;
  std::unordered_map<std::string, std::uint64_t> context_totals_;
};

NgramScorer train_ngram(const std::vector<std::string>& corpus, int order, double k);

struct ScoredPair {
  std::int64_t pair_id = 0;
  double logp_grammatical = 0;
  double logp_ungrammatical = 0;
  bool correct = false;

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

// Ties count as incorrect.
inline bool is_correct(double logp_grammatical, double logp_ungrammatical) {
  return logp_grammatical > logp_ungrammatical;
}

struct SuiteScores {
  std::string suite_name;
  std::string model_id;
  std::string scorer_descriptor;
  std::vector<ScoredPair> scored;  // ordered by pair_id

  friend bool operator==(const SuiteScores&, const SuiteScores&) = default;
};

ScoredPair score_pair(const Scorer& scorer, const MinimalPair& pair);

// Scores every pair exactly once. Items are sent in batches of the scorer's
// preferred size with at most max_in_flight batches outstanding (further
// capped by the scorer's declared concurrency). Throws PartialScoringError
// listing the failed pair ids if any batch fails, or TransportError if all do.
SuiteScores score_suite(const Scorer& scorer, const TestSuite& suite, const std::string& model_id,
                        unsigned max_in_flight = 1);

std::filesystem::path scores_path(const std::filesystem::path& dir, const std::string& suite_name);

// <dir>/<suite>.scores.jsonl plus <dir>/<suite>.scores.manifest.json.
void write_scores(const SuiteScores& scores, const std::filesystem::path& dir);

// Reads a score file. Correct flags are recomputed from the log-probabilities.
SuiteScores import_scores(const std::filesystem::path& path);
// As above, and the pair ids must be exactly those of `reference`.
SuiteScores import_scores(const std::filesystem::path& path, const TestSuite& reference);

// Every *.scores.jsonl under `dir`, recursively, ordered by path.
std::vector<std::filesystem::path> find_score_files(const std::filesystem::path& dir);

}  // namespace tse
