#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "oracles.hpp"
#include "support.hpp"
#include "table1.hpp"
#include "tse/analysis.hpp"
#include "tse/errors.hpp"
#include "tse/registry.hpp"
#include "tse/report.hpp"

using namespace tse;

TEST_CASE("binomial tails match exact summation for every k when n <= 200") {
  for (std::uint64_t n = 1; n <= 200; ++n) {
    const auto upper = testing::exact_upper_tails(n);
    for (std::uint64_t k = 0; k <= n; ++k) {
      const double above = binomial_p(k, n, Tail::above);
      const double below = binomial_p(k, n, Tail::below);
      if (!testing::close_rel(above, upper[k], 1e-12) || !testing::close_rel(below, testing::exact_lower_tail(upper, k), 1e-12)) {
        CAPTURE(n);
        CAPTURE(k);
        CHECK(above == doctest::Approx(upper[k]).epsilon(1e-12));
        CHECK(below == doctest::Approx(testing::exact_lower_tail(upper, k)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("binomial tails match exact summation at sampled large n") {
  for (std::uint64_t n : {999u, 1000u, 1001u, 4096u, 9999u, 10000u}) {
    const auto upper = testing::exact_upper_tails(n);
    std::vector<std::uint64_t> ks{0, 1, 2, n / 4, n / 2 - 1, n / 2, n / 2 + 1, n / 2 + n / 50, n / 2 + n / 20,
                                  3 * n / 4, n - 1, n};
    for (std::uint64_t k = 0; k <= n; k += n / 37) ks.push_back(k);
    for (auto k : ks) {
      CAPTURE(n);
      CAPTURE(k);
      CHECK(testing::close_rel(binomial_p(k, n, Tail::above), upper[k], 1e-12));
      CHECK(testing::close_rel(binomial_p(k, n, Tail::below), testing::exact_lower_tail(upper, k), 1e-12));
    }
  }
}

TEST_CASE("complementary tails sum to exactly one") {
  for (std::uint64_t n = 1; n <= 200; ++n)
    for (std::uint64_t k = 1; k <= n; ++k)
      if (binomial_p(k, n, Tail::above) + binomial_p(k - 1, n, Tail::below) != 1.0) {
        CAPTURE(n);
        CAPTURE(k);
        FAIL_CHECK("complement is not exact");
      }
}

TEST_CASE("binomial boundary values") {
  CHECK(binomial_p(1000, 1000, Tail::above) == std::ldexp(1.0, -1000));
  for (std::uint64_t n : {1u, 7u, 64u, 1000u}) CHECK(binomial_p(0, n, Tail::below) == std::ldexp(1.0, -static_cast<int>(n)));
  CHECK(binomial_p(0, 10, Tail::above) == 1.0);
  CHECK(binomial_p(10, 10, Tail::below) == 1.0);
  CHECK_THROWS_AS(binomial_p(11, 10, Tail::above), ConfigError);
  CHECK_THROWS_AS(binomial_p(0, 0, Tail::above), ConfigError);

  // Non-increasing in k for the upper tail.
  for (std::uint64_t n : {5u, 200u, 1000u})
    for (std::uint64_t k = 1; k <= n; ++k) CHECK(binomial_p(k, n, Tail::above) <= binomial_p(k - 1, n, Tail::above));
}

TEST_CASE("significance boundary for n = 1000") {
  const auto upper = testing::exact_upper_tails(1000);
  std::uint64_t oracle = 0;
  while (!(upper[oracle] < 0.05)) ++oracle;
  std::uint64_t ours = 0;
  while (!(binomial_p(ours, 1000, Tail::above) < 0.05)) ++ours;
  CHECK(oracle == 527);
  CHECK(ours == oracle);
  CHECK_FALSE(accuracy_report("s", "m", 526, 1000).above_chance());
  CHECK(accuracy_report("s", "m", 527, 1000).above_chance());
  CHECK(accuracy_report("s", "m", 1000 - 527, 1000).below_chance());
}

TEST_CASE("Wilson interval") {
  for (std::uint64_t n : {1u, 2u, 10u, 37u, 1000u})
    for (std::uint64_t k = 0; k <= n; ++k) {
      const Interval got = wilson_interval(k, n);
      const Interval want = testing::wilson_roots(k, n, 1.959963984540054L);
      CHECK(std::abs(got.low - want.low) <= 1e-9);
      CHECK(std::abs(got.high - want.high) <= 1e-9);
      CHECK(got.low >= 0);
      CHECK(got.high <= 1);
      const double p = static_cast<double>(k) / static_cast<double>(n);
      CHECK(got.low <= p);
      CHECK(p <= got.high);
    }
  const Interval ci = wilson_interval(600, 1000);
  const Interval want = testing::wilson_roots(600, 1000, 1.959963984540054L);
  CHECK(std::abs(ci.low - want.low) <= 1e-9);
  CHECK(std::abs(ci.high - want.high) <= 1e-9);
  CHECK(ci.low == doctest::Approx(0.5693).epsilon(1e-3));
  CHECK(ci.high == doctest::Approx(0.6299).epsilon(1e-3));
  // Same proportion, more data, narrower interval.
  const Interval wide = wilson_interval(60, 100);
  CHECK(ci.high - ci.low < wide.high - wide.low);

  const SuiteResult zero = accuracy_report("s", "m", 0, 10);
  CHECK(zero.accuracy == 0);
  CHECK(zero.ci_low == 0);
  CHECK(accuracy_report("s", "m", 3, 4).accuracy == 0.75);
  CHECK_THROWS_AS(accuracy_report("s", "m", 0, 0), ValidationError);
}

TEST_CASE("accuracy of concatenated score sets adds counts") {
  SuiteScores a{"s", "m", "d", {}};
  SuiteScores b{"s", "m", "d", {}};
  for (int i = 0; i < 30; ++i) a.scored.push_back({i, i % 3 == 0 ? -1.0 : -3.0, -2.0, false});
  for (int i = 30; i < 50; ++i) b.scored.push_back({i, i % 2 == 0 ? -1.0 : -2.0, -2.0, false});
  SuiteScores ab = a;
  ab.scored.insert(ab.scored.end(), b.scored.begin(), b.scored.end());
  const auto ra = accuracy_report(a), rb = accuracy_report(b), rab = accuracy_report(ab);
  CHECK(ra.k_correct == 10);
  CHECK(rb.k_correct == 10);  // ties count as incorrect
  CHECK(rab.k_correct == ra.k_correct + rb.k_correct);
  CHECK(rab.n == 50);
}

TEST_CASE("fit_slope") {
  const auto two = fit_slope({{1.4176, 80.0}, {13.1081, 90.0}});
  CHECK(two.slope == 10.0 / (13.1081 - 1.4176));
  CHECK(two.slope == doctest::Approx(0.8554).epsilon(1e-4));

  std::vector<Point> line;
  for (double x : {0.5, 1.7, 3.0, 7.1, 176.0}) line.push_back({x, 2 * x + 1});
  const auto exact = fit_slope(line);
  CHECK(std::abs(exact.slope - 2.0) <= 1e-12);
  CHECK(std::abs(exact.intercept - 1.0) <= 1e-10);

  const std::vector<Point> cloud{{0.56, 71.2}, {1.07, 74.9}, {3.0, 73.1}, {7.07, 80.4}};
  CHECK(std::abs(fit_slope(cloud).slope - testing::normal_equations_slope(cloud)) <= 1e-9);

  // Equivariance.
  std::vector<Point> scaled = cloud, shifted = cloud;
  for (auto& p : scaled) p.y *= 3.5;
  for (auto& p : shifted) p.y += 12.25;
  CHECK(fit_slope(scaled).slope == doctest::Approx(3.5 * fit_slope(cloud).slope).epsilon(1e-12));
  CHECK(fit_slope(shifted).slope == doctest::Approx(fit_slope(cloud).slope).epsilon(1e-12));

  CHECK_THROWS_AS(fit_slope({{1, 2}}), ConfigError);
  CHECK_THROWS_AS(fit_slope({{1, 2}, {1, 3}}), ConfigError);
  CHECK_THROWS_AS(fit_slope({{1, 2}, {1, 3}, {1, 4}}), ConfigError);
}

TEST_CASE("registry") {
  const auto& reg = default_registry();
  CHECK(reg.size() == 18);
  CHECK(find_model(reg, "mGPT-1.3B")->parameter_count == 1'417'596'928);
  CHECK(find_model(reg, "BLOOM-560M")->parameter_count == 559'214'592);
  CHECK(find_model(reg, "XGLM-4.5B")->parameter_count == 4'552'511'488);
  CHECK(find_model(reg, "XGLM-4.5B")->excluded_from_regression);
  CHECK_FALSE(find_model(reg, "XGLM-4.5B")->exclusion_reason.empty());
  CHECK(find_model(reg, "nope") == nullptr);
  std::map<std::string, int> included;
  for (const auto& m : reg)
    if (!m.excluded_from_regression) ++included[m.family];
  CHECK(included["mGPT"] == 2);
  CHECK(included["BLOOM"] == 6);
  CHECK(included["XGLM"] == 4);
  CHECK(included["XLM-R"] == 4);
  CHECK(load_registry(testing::data_dir() / "models.json") == reg);
}

namespace {

// Accuracy rises with size at a per-family rate, plus a little per-suite jitter.
ResultsMatrix synthetic_results(const std::vector<std::string>& suites, std::uint64_t n = 1000) {
  ResultsMatrix m;
  const std::map<std::string, double> per_billion{{"mGPT", 0.3}, {"BLOOM", 0.01}, {"XGLM", 2.0}, {"XLM-R", -0.5},
                                                  {"mBERT", 0.0}};
  std::uint64_t salt = 0;
  for (const auto& suite : suites) {
    ++salt;
    for (const auto& model : default_registry()) {
      const double acc = std::clamp(0.6 + per_billion.at(model.family) * model.billions() / 100.0 +
                                        static_cast<double>((salt * 7 + model.parameter_count % 13) % 5) / 1000.0,
                                    0.0, 1.0);
      const auto k = static_cast<std::uint64_t>(std::llround(acc * static_cast<double>(n)));
      m.add(accuracy_report(suite, model.id, k, n));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("slope table delegates to fit_slope and orders rows like the published table") {
  auto names = testing::published_suite_names();
  std::vector<std::string> shuffled(names.rbegin(), names.rend());
  const ResultsMatrix results = synthetic_results(shuffled);
  const SlopeTable table = slope_table(results, default_registry());
  CHECK(table.families == std::vector<std::string>{"mGPT", "BLOOM", "XGLM", "XLM-R"});
  REQUIRE(table.rows.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(table.rows[i].suite == names[i]);

  for (const auto& row : table.rows) {
    double sum = 0;
    for (std::size_t f = 0; f < 4; ++f) {
      std::vector<Point> pts;
      for (const auto& m : default_registry())
        if (m.family == table.families[f] && !m.excluded_from_regression)
          pts.push_back({m.billions(), 100.0 * results.at(m.id, row.suite).accuracy});
      std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
      CHECK(row.fits[f].slope == fit_slope(pts).slope);
      sum += row.fits[f].slope;
    }
    CHECK(row.average == sum / 4);
    // mGPT has two included versions, so its cell is the secant.
    const auto& a = results.at("mGPT-1.3B", row.suite);
    const auto& b = results.at("mGPT-13B", row.suite);
    const double secant = (100.0 * b.accuracy - 100.0 * a.accuracy) /
                          (find_model(default_registry(), "mGPT-13B")->billions() -
                           find_model(default_registry(), "mGPT-1.3B")->billions());
    CHECK(row.fits[0].slope == secant);
  }

  // Moving the excluded model's score does not change the XGLM slope.
  ResultsMatrix moved;
  for (const auto& [key, r] : results.cells()) {
    SuiteResult c = r;
    if (key.first == "XGLM-4.5B") c = accuracy_report(r.suite_name, r.model_id, 0, r.n);
    moved.add(c);
  }
  CHECK(slope_table(moved, default_registry()).rows[0].fits[2].slope == table.rows[0].fits[2].slope);
}

TEST_CASE("constant family gives a zero slope") {
  ResultsMatrix m;
  for (const auto& model : default_registry()) m.add(accuracy_report("hindi-S_O_V", model.id, 800, 1000));
  const auto table = slope_table(m, default_registry());
  for (const auto& fit : table.rows[0].fits) CHECK(format_slope(fit.slope) == "0.000");
  CHECK(format_slope(-0.0001) == "0.000");
  CHECK(format_slope(-0.0432) == "-0.043");
  CHECK(format_slope(1.2704) == "1.270");
}

TEST_CASE("too few versions is an error") {
  ResultsMatrix m;
  m.add(accuracy_report("hindi-S_O_V", "mGPT-1.3B", 800, 1000));
  m.add(accuracy_report("hindi-S_O_V", "BLOOM-560M", 800, 1000));
  CHECK_THROWS_AS(slope_table(m, default_registry()), ValidationError);
}

TEST_CASE("published averages are the unweighted mean of the four family slopes") {
  for (const auto& row : testing::published_slopes()) {
    CAPTURE(row.suite);
    const double mean = (row.slopes[0] + row.slopes[1] + row.slopes[2] + row.slopes[3]) / 4;
    CHECK(std::abs(mean - row.average) <= 0.0015);
  }
}

TEST_CASE("complexity keys for the shipped suites") {
  struct Want {
    const char* suite;
    const char* language;
    const char* group;
    int level;
  };
  const Want want[] = {
      {"hindi-S_O_V", "hindi", "no-ne", 1},
      {"hindi-S_PossPRN_O_V", "hindi", "no-ne", 2},
      {"hindi-S_PossPRN_PossN_O_V", "hindi", "no-ne", 3},
      {"hindi-S_ne_O_V", "hindi", "ne", 1},
      {"hindi-S_ne_PossPRN_O_V", "hindi", "ne", 2},
      {"hindi-S_ne_PossPRN_PossN_O_V", "hindi", "ne", 3},
      {"swahili-N_of_Poss_V", "swahili", "verbal", 1},
      {"swahili-N_of_Poss_D_V", "swahili", "verbal", 2},
      {"swahili-N_of_Poss_D_A_V", "swahili", "verbal", 3},
      {"swahili-N_of_Poss_D_AP_V_V", "swahili", "verbal", 4},
      {"swahili-N_of_Poss_ni_A", "swahili", "adjectival", 1},
      {"swahili-N_of_Poss_D_ni_A", "swahili", "adjectival", 2},
      {"swahili-N_of_Poss_D_AP_ni_AN", "swahili", "adjectival", 3},
      {"swahili-N_of_Poss_D_AP_V_ni_AN", "swahili", "adjectival", 4},
  };
  for (const auto& w : want) {
    CAPTURE(w.suite);
    const auto key = complexity_key(w.suite);
    REQUIRE(key);
    CHECK(key->language == w.language);
    CHECK(key->group == w.group);
    CHECK(key->level == w.level);
  }
  int basque = 0;
  for (const auto& name : testing::published_suite_names())
    if (suite_language(name) == "basque") {
      CHECK_FALSE(complexity_key(name));
      ++basque;
    }
  CHECK(basque == 8);
}

TEST_CASE("complexity deltas") {
  ResultsMatrix m;
  m.add(accuracy_report("swahili-N_of_Poss_V", "a", 900, 1000));
  m.add(accuracy_report("swahili-N_of_Poss_D_V", "a", 700, 1000));
  m.add(accuracy_report("swahili-N_of_Poss_V", "b", 800, 1000));
  m.add(accuracy_report("swahili-N_of_Poss_D_V", "b", 500, 1000));
  const auto d = complexity_delta(m, "swahili-N_of_Poss_V", "swahili-N_of_Poss_D_V");
  REQUIRE(d.per_model.size() == 2);
  CHECK(d.per_model[0].delta == -200);
  CHECK(d.per_model[1].delta == -300);
  CHECK(d.mean == -250.0);

  const auto steps = complexity_steps(m);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].mean == -250.0);

  const auto trends = complexity_trends(m);
  REQUIRE(trends.size() == 2);
  CHECK(trends[0].suite == "swahili-N_of_Poss_V");
  CHECK(trends[0].accuracy.mean == doctest::Approx(0.85));
  const double sem = std::sqrt(((0.9 - 0.85) * (0.9 - 0.85) + (0.8 - 0.85) * (0.8 - 0.85)) / 1.0) / std::sqrt(2.0);
  CHECK(std::abs(trends[0].accuracy.sem - sem) <= 1e-12);
  CHECK(std::abs(trends[0].accuracy.low - (trends[0].accuracy.mean - 1.96 * sem)) <= 1e-12);
  CHECK(std::abs(trends[0].accuracy.high - (trends[0].accuracy.mean + 1.96 * sem)) <= 1e-12);

  ResultsMatrix bad;
  bad.add(accuracy_report("hindi-S_O_V", "a", 900, 1000));
  bad.add(accuracy_report("hindi-S_PossPRN_O_V", "a", 700, 999));
  CHECK_THROWS_AS(complexity_delta(bad, "hindi-S_O_V", "hindi-S_PossPRN_O_V"), ValidationError);
  CHECK_THROWS_AS(complexity_delta(bad, "hindi-S_O_V", "hindi-S_ne_O_V"), ValidationError);
}

TEST_CASE("identical models collapse the interval") {
  std::vector<double> same(18, 0.8125);
  const MeanCI ci = mean_sem_ci(same);
  CHECK(ci.m == 18);
  CHECK(ci.mean == 0.8125);
  CHECK(ci.sem == 0);
  CHECK(ci.low == ci.mean);
  CHECK(ci.high == ci.mean);
  CHECK(mean_sem_ci({0.5}).sem == 0);
  CHECK_THROWS_AS(mean_sem_ci({}), ConfigError);
}

TEST_CASE("results matrix bookkeeping") {
  ResultsMatrix m;
  m.add(accuracy_report("basque-S-S_V_AUX", "a", 1, 2));
  CHECK_THROWS_AS(m.add(accuracy_report("basque-S-S_V_AUX", "a", 1, 2)), ValidationError);
  CHECK_THROWS_AS(m.at("b", "basque-S-S_V_AUX"), LookupError);
  CHECK(suite_less("hindi-S_ne_O_V", "hindi-S_O_V"));
  CHECK(suite_less("basque-S-S_V_AUX", "hindi-S_O_V"));
  CHECK_FALSE(suite_less("hindi-S_O_V", "hindi-S_O_V"));

  const auto langs = language_summary(synthetic_results(testing::published_suite_names()));
  REQUIRE(langs.size() == 3);
  CHECK(langs[0].language == "basque");
  CHECK(langs[0].cells == 8 * 18);
  CHECK(langs[1].cells == 6 * 18);
  CHECK(langs[2].cells == 6 * 18);
}

TEST_CASE("report CSVs carry the metadata header and keep units") {
  ResultsMatrix m = synthetic_results(testing::published_suite_names());
  const auto meta = default_report_metadata();
  const std::string matrix = render_matrix_csv(m, default_registry(), meta);
  CHECK(matrix.rfind("# tool_version: ", 0) == 0);
  CHECK(matrix.find("model_id,family,version,parameter_count,suite,n,k_correct,accuracy,ci_low,ci_high,p_above,p_below,"
                    "significance\n") != std::string::npos);
  CHECK(std::count(matrix.begin(), matrix.end(), '\n') ==
        static_cast<long>(meta.size() + 1 + 18 * 20));

  const std::string slopes = render_slopes_csv(slope_table(m, default_registry()), meta);
  CHECK(slopes.find("suite,mGPT,BLOOM,XGLM,XLM-R,Average\n") != std::string::npos);
  CHECK(slopes.find("percentage points per billion parameters") != std::string::npos);
}
