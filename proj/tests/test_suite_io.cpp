#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "json_util.hpp"
#include "support.hpp"
#include "tse/errors.hpp"
#include "tse/suite_io.hpp"
#include "tse/text.hpp"

using namespace tse;

namespace {

TestSuite two_pair_suite() {
  TestSuite s;
  s.name = "basque-S-S_V_AUX";
  s.language = Language::basque;
  s.template_id = s.name;
  s.seed = 42;
  MinimalPair a;
  a.id = 0;
  a.condition = "Ahuntza eseri";
  a.grammatical_target = "da.";
  a.ungrammatical_target = "dira.";
  a.metadata.focus = "S";
  a.metadata.target_role = "AUX";
  a.metadata.lemmas = {{"S", "ahuntz"}, {"V", "eseri"}};
  a.metadata.features = {{"S", {{"case", "absolutive"}, {"number", "sg"}}}};
  a.metadata.ungrammatical_features = {{"subject_num", "pl"}};
  MinimalPair b = a;
  b.id = 1;
  b.condition = "Otsoak irten";
  b.grammatical_target = "ziren.";
  b.ungrammatical_target = "zen.";
  s.pairs = {a, b};
  return s;
}

std::vector<TestSuite> generated(const std::string& prefix, std::size_t n) {
  const auto tables = MorphologyTables::load_dir(testing::lexicon_dir());
  std::map<Language, Lexicon> lex;
  for (const char* l : {"basque", "hindi", "swahili"}) {
    Lexicon x = load_lexicon(testing::lexicon_dir() / (std::string(l) + ".lexicon.json"));
    lex.emplace(x.language(), std::move(x));
  }
  std::vector<TestSuite> out;
  for (const auto& t : load_templates(testing::template_dir()))
    if (t.validated && text::starts_with(t.suite_name, prefix))
      out.push_back(generate_suite(t, lex.at(t.language), tables, 11, n));
  return out;
}

}  // namespace

TEST_CASE("export and re-import round trip") {
  testing::TempDir dir("io");
  const TestSuite s = two_pair_suite();
  export_suite(s, dir.path());
  const std::string content = detail::read_file(suite_path(dir.path(), s.name));
  CHECK(std::count(content.begin(), content.end(), '\n') == 2);
  CHECK(content.rfind(R"({"suite":"basque-S-S_V_AUX","id":0,"condition":"Ahuntza eseri","grammatical_target":"da.")", 0) == 0);
  CHECK(read_suite(suite_path(dir.path(), s.name)) == s);

  const auto manifest = detail::parse_json_strict(detail::read_file(suite_manifest_path(dir.path(), s.name)), "m");
  CHECK(manifest.at("n") == 2);
  CHECK(manifest.at("seed") == 42);
  CHECK(manifest.at("validated") == true);
  CHECK(manifest.contains("tool_version"));
}

TEST_CASE("export refuses non-NFC text") {
  testing::TempDir dir("io");
  TestSuite s = two_pair_suite();
  s.pairs[0].condition = "Caf" "e\xCC\x81" " eseri";
  CHECK_THROWS_AS(export_suite(s, dir.path()), ValidationError);
  CHECK_FALSE(std::filesystem::exists(suite_path(dir.path(), s.name)));
}

TEST_CASE("read_suite rejects inconsistent files") {
  testing::TempDir dir("io");
  TestSuite s = two_pair_suite();
  s.pairs[1].id = 0;
  export_suite(s, dir.path());
  CHECK_THROWS_AS(read_suite(suite_path(dir.path(), s.name)), ValidationError);

  s = two_pair_suite();
  export_suite(s, dir.path());
  std::ofstream(suite_path(dir.path(), s.name), std::ios::app)
      << R"({"suite":"basque-S-S_V_AUX","id":7,"condition":"a","grammatical_target":"b c.","ungrammatical_target":"d e."})"
      << "\n";
  CHECK_THROWS_AS(read_suite(suite_path(dir.path(), s.name)), ValidationError);  // n mismatch, two-word diff
}

TEST_CASE("1,000-pair suite exports 1,000 lines") {
  testing::TempDir dir("io");
  const auto suites = generated("basque-S-S_V_AUX", 1000);
  REQUIRE(suites.size() == 1);
  export_suite(suites[0], dir.path());
  const std::string content = detail::read_file(suite_path(dir.path(), suites[0].name));
  CHECK(std::count(content.begin(), content.end(), '\n') == 1000);
  CHECK(read_suite(suite_path(dir.path(), suites[0].name)) == suites[0]);
}

TEST_CASE("validation subset") {
  const auto basque = generated("basque", 20);
  const auto hindi = generated("hindi", 20);
  REQUIRE(basque.size() == 8);
  REQUIRE(hindi.size() == 6);
  CHECK(sample_validation_subset(basque, 5, 1).size() == 40);
  CHECK(sample_validation_subset(hindi, 5, 1).size() == 30);
  CHECK(sample_validation_subset(basque, 0, 1).empty());
  CHECK_THROWS_AS(sample_validation_subset(basque, 21, 1), ConfigError);

  const auto a = sample_validation_subset(basque, 5, 99);
  const auto b = sample_validation_subset(basque, 5, 99);
  REQUIRE(a.size() == b.size());
  std::map<std::string, std::set<std::int64_t>> per_suite;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].pair_id == b[i].pair_id);
    CHECK(a[i].sentence_a == b[i].sentence_a);
    CHECK(per_suite[a[i].suite].insert(a[i].pair_id).second);  // without replacement
  }
  for (const auto& [name, ids] : per_suite) CHECK(ids.size() == 5);

  // The grammatical marker points at the grammatical sentence.
  std::map<std::string, const TestSuite*> by_name;
  for (const auto& s : basque) by_name[s.name] = &s;
  for (const auto& item : a) {
    const auto& pair = by_name.at(item.suite)->pairs.at(static_cast<std::size_t>(item.pair_id));
    CHECK((item.grammatical == 'A' ? item.sentence_a : item.sentence_b) == pair.grammatical_sentence());
  }
}
