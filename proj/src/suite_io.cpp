#include "tse/suite_io.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "json_util.hpp"
#include "tse/errors.hpp"
#include "tse/text.hpp"
#include "tse/version.hpp"

namespace tse {

using detail::json;
using detail::ordered_json;

namespace {

ordered_json bundle_json(const Bundle& b) {
  ordered_json o = ordered_json::object();
  for (const auto& [k, v] : b) o[k] = v;
  return o;
}

Bundle bundle_from(const json& o, const std::string& ctx) {
  if (!o.is_object()) throw ParseError(ctx + ": feature bundle must be an object");
  Bundle b;
  for (const auto& [k, v] : o.items()) {
    if (!v.is_string()) throw ParseError(ctx + ": feature \"" + k + "\" must be a string");
    b[k] = v.get<std::string>();
  }
  return b;
}

ordered_json pair_json(const TestSuite& suite, const MinimalPair& p) {
  ordered_json meta = ordered_json::object();
  meta["focus"] = p.metadata.focus ? ordered_json(*p.metadata.focus) : ordered_json(nullptr);
  meta["target_role"] = p.metadata.target_role;
  ordered_json lemmas = ordered_json::object();
  for (const auto& [role, lemma] : p.metadata.lemmas) lemmas[role] = lemma;
  meta["lemmas"] = lemmas;
  ordered_json features = ordered_json::object();
  for (const auto& [role, b] : p.metadata.features) features[role] = bundle_json(b);
  meta["features"] = features;
  meta["ungrammatical_features"] = bundle_json(p.metadata.ungrammatical_features);

  ordered_json o = ordered_json::object();
  o["suite"] = suite.name;
  o["id"] = p.id;
  o["condition"] = p.condition;
  o["grammatical_target"] = p.grammatical_target;
  o["ungrammatical_target"] = p.ungrammatical_target;
  o["metadata"] = meta;
  return o;
}

MinimalPair pair_from(const json& o, const std::string& ctx) {
  MinimalPair p;
  const json& id = detail::require(o, "id", ctx);
  if (!id.is_number_integer()) throw ParseError(ctx + ": \"id\" must be an integer");
  p.id = id.get<std::int64_t>();
  p.condition = detail::require_string(o, "condition", ctx);
  p.grammatical_target = detail::require_string(o, "grammatical_target", ctx);
  p.ungrammatical_target = detail::require_string(o, "ungrammatical_target", ctx);
  if (auto it = o.find("metadata"); it != o.end()) {
    const json& m = *it;
    if (auto f = m.find("focus"); f != m.end() && !f->is_null()) p.metadata.focus = f->get<std::string>();
    p.metadata.target_role = detail::optional_string(m, "target_role");
    if (auto l = m.find("lemmas"); l != m.end())
      for (const auto& [role, lemma] : l->items()) p.metadata.lemmas[role] = lemma.get<std::string>();
    if (auto f = m.find("features"); f != m.end())
      for (const auto& [role, b] : f->items()) p.metadata.features[role] = bundle_from(b, ctx);
    if (auto u = m.find("ungrammatical_features"); u != m.end())
      p.metadata.ungrammatical_features = bundle_from(*u, ctx);
  }
  return p;
}

bool pair_is_nfc(const MinimalPair& p) {
  return text::is_nfc(p.condition) && text::is_nfc(p.grammatical_target) && text::is_nfc(p.ungrammatical_target);
}

}  // namespace

std::filesystem::path suite_path(const std::filesystem::path& dir, const std::string& name) {
  return dir / (name + ".jsonl");
}

std::filesystem::path suite_manifest_path(const std::filesystem::path& dir, const std::string& name) {
  return dir / (name + ".manifest.json");
}

std::string suite_to_jsonl(const TestSuite& suite) {
  std::string out;
  for (const auto& p : suite.pairs) {
    out += pair_json(suite, p).dump();
    out += '\n';
  }
  return out;
}

std::string suite_manifest(const TestSuite& suite) {
  ordered_json m = ordered_json::object();
  m["name"] = suite.name;
  m["language"] = std::string(to_string(suite.language));
  m["template_id"] = suite.template_id;
  m["seed"] = suite.seed;
  m["n"] = suite.pairs.size();
  m["tool_version"] = std::string(kToolVersion);
  m["validated"] = suite.validated;
  return m.dump(2) + "\n";
}

void export_suite(const TestSuite& suite, const std::filesystem::path& dir) {
  std::vector<std::string> issues;
  for (const auto& p : suite.pairs)
    if (!pair_is_nfc(p)) issues.push_back("pair " + std::to_string(p.id) + " is not NFC-normalized");
  if (!issues.empty()) throw ValidationError("suite " + suite.name, std::move(issues));
  std::filesystem::create_directories(dir);
  detail::write_file(suite_path(dir, suite.name), suite_to_jsonl(suite));
  detail::write_file(suite_manifest_path(dir, suite.name), suite_manifest(suite));
}

TestSuite read_suite(const std::filesystem::path& jsonl_path) {
  const std::string source = jsonl_path.string();
  std::string name = jsonl_path.filename().string();
  name = name.substr(0, name.size() - std::string(".jsonl").size());
  const auto manifest_file = suite_manifest_path(jsonl_path.parent_path(), name);

  TestSuite suite;
  const json manifest = detail::parse_json_strict(detail::read_file(manifest_file), manifest_file.string());
  suite.name = detail::require_string(manifest, "name", manifest_file.string());
  suite.language = parse_language(detail::require_string(manifest, "language", manifest_file.string()));
  suite.template_id = detail::optional_string(manifest, "template_id", suite.name);
  suite.seed = detail::require(manifest, "seed", manifest_file.string()).get<std::uint64_t>();
  suite.validated = manifest.value("validated", true);
  const auto declared_n = detail::require(manifest, "n", manifest_file.string()).get<std::size_t>();
  if (suite.name != name) throw ValidationError(source, {"manifest names suite \"" + suite.name + "\""});

  const std::string content = detail::read_file(jsonl_path);
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
    if (detail::require_string(o, "suite", ctx) != suite.name) issues.push_back(ctx + ": suite name mismatch");
    MinimalPair p = pair_from(o, ctx);
    if (!ids.insert(p.id).second) issues.push_back(ctx + ": duplicate id " + std::to_string(p.id));
    try {
      split_condition_target(p.grammatical_sentence(), p.ungrammatical_sentence());
    } catch (const ValidationError& e) {
      issues.push_back(ctx + ": " + e.issues().front());
    }
    suite.pairs.push_back(std::move(p));
  }
  if (suite.pairs.size() != declared_n)
    issues.push_back("manifest declares n=" + std::to_string(declared_n) + " but the file has " +
                     std::to_string(suite.pairs.size()) + " pairs");
  if (!issues.empty()) throw ValidationError(source, std::move(issues));
  return suite;
}

std::vector<TestSuite> read_suites(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("suite directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string fname = e.path().filename().string();
    if (e.is_regular_file() && text::ends_with(fname, ".jsonl") && !text::ends_with(fname, ".scores.jsonl") &&
        fname != "validation_subset.jsonl")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TestSuite> out;
  for (const auto& f : files) out.push_back(read_suite(f));
  return out;
}

std::vector<ValidationItem> sample_validation_subset(const std::vector<TestSuite>& suites, std::size_t k,
                                                     std::uint64_t seed) {
  std::vector<ValidationItem> items;
  for (const auto& suite : suites) {
    if (k > suite.pairs.size())
      throw ConfigError("suite " + suite.name + " has " + std::to_string(suite.pairs.size()) +
                        " pairs, fewer than the requested " + std::to_string(k));
    RandomStream rng = RandomStream::derive(seed, "validation:" + suite.name, 0);
    std::vector<std::size_t> idx(suite.pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.uniform_index(idx.size() - i);
      std::swap(idx[i], idx[j]);
      const MinimalPair& p = suite.pairs[idx[i]];
      ValidationItem item{suite.name, p.id, p.grammatical_sentence(), p.ungrammatical_sentence(), 'A'};
      if (rng.uniform_index(2) == 1) {
        std::swap(item.sentence_a, item.sentence_b);
        item.grammatical = 'B';
      }
      items.push_back(std::move(item));
    }
  }
  RandomStream rng = RandomStream::derive(seed, "validation", 0);
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.uniform_index(i)]);
  return items;
}

void write_validation_subset(const std::vector<ValidationItem>& items, const std::filesystem::path& path) {
  std::string out;
  for (const auto& it : items) {
    ordered_json o = ordered_json::object();
    o["suite"] = it.suite;
    o["pair_id"] = it.pair_id;
    o["sentence_a"] = it.sentence_a;
    o["sentence_b"] = it.sentence_b;
    o["grammatical"] = std::string(1, it.grammatical);
    out += o.dump() + "\n";
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  detail::write_file(path, out);
}

}  // namespace tse
