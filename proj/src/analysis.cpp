#include "tse/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <tuple>
#include <set>

#include "tse/errors.hpp"
#include "tse/text.hpp"

namespace tse {

namespace {

// The saddle-point terms below are evaluated in long double: bd0 cancels
// terms of size ~n, and in double that costs about 1e-12 relative accuracy
// in the tail at n = 10^4.
using real = long double;

// log(n!) - log(sqrt(2 pi n) (n/e)^n), Stirling's error term.
real stirlerr(real n) {
  if (n <= 35) return std::lgamma(n + 1) - (n + 0.5L) * std::log(n) + n - 0.5L * std::log(2 * std::numbers::pi_v<real>);
  constexpr real S0 = 1.0L / 12, S1 = 1.0L / 360, S2 = 1.0L / 1260, S3 = 1.0L / 1680, S4 = 1.0L / 1188;
  const real nn = n * n;
  if (n > 500) return (S0 - (S1 - S2 / nn) / nn) / n;
  if (n > 80) return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
  return (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n;
}

// x log(x/np) + np - x, without cancellation when x is close to np.
real bd0(real x, real np) {
  if (std::abs(x - np) < 0.1L * (x + np)) {
    real v = (x - np) / (x + np);
    real s = (x - np) * v;
    real ej = 2 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const real s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

// P(X = x) for X ~ Binomial(n, 1/2), via the saddle-point expansion.
real dbinom_half(std::uint64_t x, std::uint64_t n) {
  if (x == 0 || x == n) return std::ldexp(1.0L, -static_cast<int>(std::min<std::uint64_t>(n, 1u << 20)));
  const real dn = static_cast<real>(n);
  const real dx = static_cast<real>(x);
  const real half = dn / 2;
  const real lc = stirlerr(dn) - stirlerr(dx) - stirlerr(dn - dx) - bd0(dx, half) - bd0(dn - dx, half);
  const real lf = std::log(2 * std::numbers::pi_v<real>) + std::log(dx) + std::log1p(-dx / dn);
  return std::exp(lc - 0.5L * lf);
}

// P(X <= j), summed from the largest term down. Requires 2j + 1 < n. The sum
// stays in long double, whose exponent range keeps every term normal, and is
// rounded to double once; tails below 1e-308 are then correctly rounded
// subnormals instead of accumulating one rounding per term.
double lower_tail_direct(std::uint64_t j, std::uint64_t n) {
  real term = dbinom_half(j, n);
  real sum = term;
  for (std::uint64_t i = j; i >= 1; --i) {
    term *= static_cast<real>(i) / static_cast<real>(n - i + 1);
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  return static_cast<double>(sum);
}

double lower_tail(std::uint64_t j, std::uint64_t n) {
  if (j >= n) return 1.0;
  if (2 * j + 1 == n) return 0.5;
  if (2 * j + 1 < n) return lower_tail_direct(j, n);
  // P(X <= j) = 1 - P(X >= j+1) = 1 - P(X <= n-j-1) by symmetry.
  return 1.0 - lower_tail_direct(n - j - 1, n);
}

}  // namespace

double binomial_p(std::uint64_t k, std::uint64_t n, Tail tail) {
  if (n == 0) throw ConfigError("binomial_p needs n >= 1");
  if (k > n) throw ConfigError("binomial_p needs k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  if (tail == Tail::below) return lower_tail(k, n);
  return lower_tail(n - k, n);  // P(X >= k) = P(X <= n-k)
}

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) throw ConfigError("wilson_interval needs n >= 1");
  if (k > n) throw ConfigError("wilson_interval needs k <= n");
  const double dn = static_cast<double>(n);
  const double p = static_cast<double>(k) / dn;
  const double z2 = z * z;
  const double denom = 1 + z2 / dn;
  const double center = (p + z2 / (2 * dn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / dn + z2 / (4 * dn * dn)) / denom;
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (k == 0) ci.low = 0;
  if (k == n) ci.high = 1;
  return ci;
}

SuiteResult accuracy_report(const std::string& suite_name, const std::string& model_id, std::uint64_t k,
                            std::uint64_t n) {
  if (n == 0) throw ValidationError("suite " + suite_name, {"accuracy needs at least one scored pair"});
  SuiteResult r;
  r.suite_name = suite_name;
  r.model_id = model_id;
  r.n = n;
  r.k_correct = k;
  r.accuracy = static_cast<double>(k) / static_cast<double>(n);
  const Interval ci = wilson_interval(k, n);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.p_above = binomial_p(k, n, Tail::above);
  r.p_below = binomial_p(k, n, Tail::below);
  return r;
}

SuiteResult accuracy_report(const SuiteScores& scores) {
  std::uint64_t k = 0;
  for (const auto& s : scores.scored) k += is_correct(s.logp_grammatical, s.logp_ungrammatical) ? 1 : 0;
  return accuracy_report(scores.suite_name, scores.model_id, k, scores.scored.size());
}

RegressionFit fit_slope(const std::vector<Point>& points) {
  if (points.size() < 2) throw ConfigError("a regression needs at least two points");
  for (const auto& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("regression points must be finite");
  RegressionFit fit;
  fit.points = points;
  if (points.size() == 2) {
    const double dx = points[1].x - points[0].x;
    if (dx == 0) throw ConfigError("regression needs distinct x values");
    fit.slope = (points[1].y - points[0].y) / dx;
    fit.intercept = points[0].y - fit.slope * points[0].x;
    return fit;
  }
  double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0, sxy = 0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (sxx == 0) throw ConfigError("regression needs distinct x values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

bool suite_less(const std::string& a, const std::string& b) {
  auto lower = [](unsigned char c) { return static_cast<char>(std::tolower(c)); };
  const bool less = std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                                 [&](char x, char y) { return lower(x) < lower(y); });
  if (less) return true;
  const bool greater = std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end(),
                                                    [&](char x, char y) { return lower(x) < lower(y); });
  return !greater && a < b;
}

void ResultsMatrix::add(SuiteResult r) {
  auto key = std::make_pair(r.model_id, r.suite_name);
  if (cells_.contains(key))
    throw ValidationError("results matrix", {"duplicate result for model " + r.model_id + " on " + r.suite_name});
  cells_.emplace(std::move(key), std::move(r));
}

ResultsMatrix ResultsMatrix::from_scores(const std::vector<SuiteScores>& scores) {
  ResultsMatrix m;
  for (const auto& s : scores) m.add(accuracy_report(s));
  return m;
}

const SuiteResult* ResultsMatrix::find(const std::string& model_id, const std::string& suite) const {
  auto it = cells_.find({model_id, suite});
  return it == cells_.end() ? nullptr : &it->second;
}

const SuiteResult& ResultsMatrix::at(const std::string& model_id, const std::string& suite) const {
  if (const auto* r = find(model_id, suite)) return *r;
  throw LookupError("no result for model " + model_id + " on " + suite);
}

std::vector<std::string> ResultsMatrix::models() const {
  std::set<std::string> s;
  for (const auto& [key, _] : cells_) s.insert(key.first);
  return {s.begin(), s.end()};
}

std::vector<std::string> ResultsMatrix::suites() const {
  std::set<std::string> s;
  for (const auto& [key, _] : cells_) s.insert(key.second);
  std::vector<std::string> out(s.begin(), s.end());
  std::sort(out.begin(), out.end(), suite_less);
  return out;
}

SlopeTable slope_table(const ResultsMatrix& results, const std::vector<ModelInfo>& registry,
                       const std::vector<std::string>& families) {
  if (families.empty()) throw ConfigError("slope table needs at least one family");
  SlopeTable table;
  table.families = families;
  std::vector<std::string> issues;
  for (const auto& suite : results.suites()) {
    SlopeRow row;
    row.suite = suite;
    double total = 0;
    for (const auto& family : families) {
      std::vector<Point> pts;
      for (const auto& m : registry) {
        if (m.family != family || m.excluded_from_regression) continue;
        if (const auto* r = results.find(m.id, suite)) pts.push_back({m.billions(), 100.0 * r->accuracy});
      }
      if (pts.size() < 2) {
        issues.push_back(suite + ": family " + family + " has " + std::to_string(pts.size()) +
                         " included version(s) with results, need at least 2");
        row.fits.emplace_back();
        continue;
      }
      std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
      row.fits.push_back(fit_slope(pts));
      total += row.fits.back().slope;
    }
    row.average = total / static_cast<double>(families.size());
    table.rows.push_back(std::move(row));
  }
  if (!issues.empty()) throw ValidationError("slope table", std::move(issues));
  return table;
}

std::string format_slope(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string suite_language(const std::string& suite_name) {
  const auto dash = suite_name.find('-');
  return dash == std::string::npos ? std::string() : suite_name.substr(0, dash);
}

std::optional<ComplexityKey> complexity_key(const std::string& suite_name) {
  const std::string lang = suite_language(suite_name);
  if (lang != "hindi" && lang != "swahili") return std::nullopt;
  std::vector<std::string> parts;
  {
    std::string rest = suite_name.substr(lang.size() + 1);
    std::size_t start = 0;
    while (true) {
      const auto us = rest.find('_', start);
      parts.push_back(rest.substr(start, us == std::string::npos ? std::string::npos : us - start));
      if (us == std::string::npos) break;
      start = us + 1;
    }
  }
  auto count = [&](const std::string& tok) { return std::count(parts.begin(), parts.end(), tok); };

  if (lang == "hindi") {
    // S [ne] [PossPRN] [PossN] O V
    if (parts.size() < 3 || parts.front() != "S" || parts.back() != "V" || parts[parts.size() - 2] != "O")
      return std::nullopt;
    ComplexityKey key{lang, count("ne") ? "ne" : "no-ne", 1};
    key.level += static_cast<int>(count("PossPRN") + count("PossN"));
    return key;
  }

  // N of Poss [D] [A|AP] [V] predicate, where predicate is V or "ni X".
  if (parts.size() < 4 || parts[0] != "N" || parts[1] != "of" || parts[2] != "Poss") return std::nullopt;
  std::vector<std::string> mods(parts.begin() + 3, parts.end());
  ComplexityKey key{lang, "", 1};
  if (mods.back() == "V") {
    key.group = "verbal";
    mods.pop_back();
  } else if (mods.size() >= 2 && mods[mods.size() - 2] == "ni") {
    key.group = "adjectival";
    mods.resize(mods.size() - 2);
  } else {
    return std::nullopt;
  }
  for (const auto& m : mods) {
    if (m != "D" && m != "A" && m != "AP" && m != "V") return std::nullopt;
    ++key.level;
  }
  return key;
}

DeltaSummary complexity_delta(const ResultsMatrix& results, const std::string& suite_from,
                              const std::string& suite_to) {
  DeltaSummary out{suite_from, suite_to, {}, 0};
  std::vector<std::string> issues;
  for (const auto& model : results.models()) {
    const auto* a = results.find(model, suite_from);
    const auto* b = results.find(model, suite_to);
    if (!a || !b) continue;
    if (a->n != b->n) {
      issues.push_back(model + ": n differs (" + std::to_string(a->n) + " vs " + std::to_string(b->n) + ")");
      continue;
    }
    out.per_model.push_back({model, a->k_correct, b->k_correct,
                             static_cast<std::int64_t>(b->k_correct) - static_cast<std::int64_t>(a->k_correct)});
  }
  if (!issues.empty()) throw ValidationError("complexity delta " + suite_from + " -> " + suite_to, std::move(issues));
  if (out.per_model.empty())
    throw ValidationError("complexity delta " + suite_from + " -> " + suite_to, {"no model has results for both suites"});
  std::int64_t total = 0;
  for (const auto& d : out.per_model) total += d.delta;
  out.mean = static_cast<double>(total) / static_cast<double>(out.per_model.size());
  return out;
}

MeanCI mean_sem_ci(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("mean of an empty set");
  MeanCI r;
  r.m = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(r.m);
  if (r.m > 1) {
    double ss = 0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(r.m - 1));
    r.sem = sd / std::sqrt(static_cast<double>(r.m));
  }
  r.low = r.mean - 1.96 * r.sem;
  r.high = r.mean + 1.96 * r.sem;
  return r;
}

std::vector<TrendPoint> complexity_trends(const ResultsMatrix& results) {
  std::vector<TrendPoint> out;
  for (const auto& suite : results.suites()) {
    auto key = complexity_key(suite);
    if (!key) continue;
    std::vector<double> acc;
    for (const auto& model : results.models())
      if (const auto* r = results.find(model, suite)) acc.push_back(r->accuracy);
    out.push_back({suite, *key, mean_sem_ci(acc)});
  }
  std::stable_sort(out.begin(), out.end(), [](const TrendPoint& a, const TrendPoint& b) {
    return std::tie(a.key.language, a.key.group, a.key.level) < std::tie(b.key.language, b.key.group, b.key.level);
  });
  return out;
}

std::vector<DeltaSummary> complexity_steps(const ResultsMatrix& results) {
  const auto trends = complexity_trends(results);
  std::vector<DeltaSummary> out;
  for (std::size_t i = 1; i < trends.size(); ++i) {
    const auto& a = trends[i - 1];
    const auto& b = trends[i];
    if (a.key.language != b.key.language || a.key.group != b.key.group || b.key.level != a.key.level + 1) continue;
    out.push_back(complexity_delta(results, a.suite, b.suite));
  }
  return out;
}

std::vector<LanguageSummary> language_summary(const ResultsMatrix& results) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [key, r] : results.cells()) {
    auto& slot = acc[suite_language(key.second)];
    slot.first += r.accuracy;
    ++slot.second;
  }
  std::vector<LanguageSummary> out;
  for (const auto& [lang, v] : acc) out.push_back({lang, v.first / static_cast<double>(v.second), v.second});
  return out;
}

}  // namespace tse
