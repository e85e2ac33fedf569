#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tse/registry.hpp"
#include "tse/scoring.hpp"

namespace tse {

enum class Tail { above, below };

// One-sided exact binomial tail under p0 = 0.5: P(X >= k) for `above`,
// P(X <= k) for `below`. The smaller tail is summed directly from its largest
// term so tiny p-values keep full relative precision; the larger one is its
// complement. Requires 0 <= k <= n, n >= 1.
double binomial_p(std::uint64_t k, std::uint64_t n, Tail tail);

// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0;
  double high = 0;
};

// Wilson score interval for k successes out of n.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = kZ95);

struct SuiteResult {
  std::string suite_name;
  std::string model_id;
  std::uint64_t n = 0;
  std::uint64_t k_correct = 0;
  double accuracy = 0;
  double ci_low = 0;
  double ci_high = 0;
  double p_above = 1;
  double p_below = 1;

  bool above_chance(double alpha = 0.05) const { return p_above < alpha; }
  bool below_chance(double alpha = 0.05) const { return p_below < alpha; }
};

SuiteResult accuracy_report(const std::string& suite_name, const std::string& model_id, std::uint64_t k,
                            std::uint64_t n);
SuiteResult accuracy_report(const SuiteScores& scores);

struct Point {
  double x = 0;
  double y = 0;
};

struct RegressionFit {
  double slope = 0;
  double intercept = 0;
  std::vector<Point> points;
};

// Ordinary least squares. With two points the slope is exactly dy/dx.
RegressionFit fit_slope(const std::vector<Point>& points);

// Accuracy per (model, suite).
class ResultsMatrix {
 public:
  void add(SuiteResult r);
  static ResultsMatrix from_scores(const std::vector<SuiteScores>& scores);

  const SuiteResult* find(const std::string& model_id, const std::string& suite) const;
  const SuiteResult& at(const std::string& model_id, const std::string& suite) const;
  std::vector<std::string> models() const;
  std::vector<std::string> suites() const;  // case-insensitive order
  std::size_t size() const noexcept { return cells_.size(); }
  const std::map<std::pair<std::string, std::string>, SuiteResult>& cells() const noexcept { return cells_; }

 private:
  std::map<std::pair<std::string, std::string>, SuiteResult> cells_;
};

// Case-insensitive ASCII ordering used for suite rows.
bool suite_less(const std::string& a, const std::string& b);

struct SlopeRow {
  std::string suite;
  std::vector<RegressionFit> fits;  // one per family, in column order
  double average = 0;               // unweighted mean of the family slopes
};

struct SlopeTable {
  std::vector<std::string> families;
  std::vector<SlopeRow> rows;
};

// Slopes of accuracy (percent) against parameter count (billions) per suite
// and family. Models flagged excluded_from_regression are skipped. Every
// (suite, family) cell needs at least two versions with results.
SlopeTable slope_table(const ResultsMatrix& results, const std::vector<ModelInfo>& registry,
                       const std::vector<std::string>& families = regression_families());

// Three decimals, without a negative sign on zero.
std::string format_slope(double v);

struct ComplexityKey {
  std::string language;  // hindi | swahili
  std::string group;     // ne | no-ne | verbal | adjectival
  int level = 0;
};

// Derived from the suite name. Hindi levels count the object's possessive
// modifiers; Swahili levels count demonstrative, adjective and relative verb
// inside the possessor. Basque suites have no complexity axis.
std::optional<ComplexityKey> complexity_key(const std::string& suite_name);

struct ModelDelta {
  std::string model_id;
  std::uint64_t k_from = 0;
  std::uint64_t k_to = 0;
  std::int64_t delta = 0;  // k_to - k_from
};

struct DeltaSummary {
  std::string suite_from;
  std::string suite_to;
  std::vector<ModelDelta> per_model;
  double mean = 0;
};

// Change in raw correct counts between two suites, per model that has both.
DeltaSummary complexity_delta(const ResultsMatrix& results, const std::string& suite_from,
                              const std::string& suite_to);

struct MeanCI {
  double mean = 0;
  double sem = 0;  // sample sd / sqrt(m); 0 for a single value
  double low = 0;
  double high = 0;
  std::size_t m = 0;
};

// mean +- 1.96 * SEM.
MeanCI mean_sem_ci(const std::vector<double>& values);

struct TrendPoint {
  std::string suite;
  ComplexityKey key;
  MeanCI accuracy;  // over models
};

// One point per suite with a complexity key, ordered by language, group, level.
std::vector<TrendPoint> complexity_trends(const ResultsMatrix& results);

// Consecutive-level deltas within each complexity group.
std::vector<DeltaSummary> complexity_steps(const ResultsMatrix& results);

struct LanguageSummary {
  std::string language;
  double mean_accuracy = 0;  // unweighted over (model, suite) cells
  std::size_t cells = 0;
};

std::vector<LanguageSummary> language_summary(const ResultsMatrix& results);

// Language prefix of a suite name ("basque-S-S_V_AUX" -> "basque").
std::string suite_language(const std::string& suite_name);

}  // namespace tse
