#include "tse/lexicon.hpp"

#include <algorithm>
#include <array>

#include "json_util.hpp"
#include "tse/errors.hpp"
#include "tse/text.hpp"

namespace tse {

using detail::json;
using detail::ordered_json;

namespace {

constexpr std::string_view kLexiconSchema = "tse-lexicon/1";

constexpr std::array<std::pair<Category, std::string_view>, 7> kCategoryNames{{
    {Category::noun, "noun"},
    {Category::verb, "verb"},
    {Category::adjective, "adjective"},
    {Category::demonstrative, "demonstrative"},
    {Category::possessive_pronoun, "possessive_pronoun"},
    {Category::auxiliary, "auxiliary"},
    {Category::particle, "particle"},
}};

// Closed value domains for features shared across languages.
const std::map<std::string, std::set<std::string>>& value_domains() {
  static const std::map<std::string, std::set<std::string>> domains{
      {"number", {"sg", "pl"}},
      {"animacy", {"animate", "inanimate"}},
      {"gender", {"m", "f"}},
      {"stem_final", {"vowel", "consonant", "a", "r"}},
  };
  return domains;
}

std::string describe(std::size_t index, const LexicalEntry& e) {
  return "entry " + std::to_string(index) + " (" + std::string(to_string(e.category)) + " \"" + e.lemma + "\")";
}

// Every combination of the given feature domains must be a key in `forms`.
void require_paradigm(const LexicalEntry& e, const std::vector<std::pair<std::string, std::vector<std::string>>>& dims,
                      const std::string& who, std::vector<std::string>& issues) {
  std::vector<std::size_t> idx(dims.size(), 0);
  while (true) {
    Bundle b;
    for (std::size_t d = 0; d < dims.size(); ++d) b[dims[d].first] = dims[d].second[idx[d]];
    const std::string key = bundle_key(b);
    if (!e.forms.contains(key)) issues.push_back(who + ": missing form for bundle \"" + key + "\"");
    std::size_t d = 0;
    while (d < dims.size() && ++idx[d] == dims[d].second.size()) idx[d++] = 0;
    if (d == dims.size()) break;
  }
}

void validate_category_rules(std::size_t index, const LexicalEntry& e, std::vector<std::string>& issues) {
  const std::string who = describe(index, e);
  switch (e.language) {
    case Language::swahili:
      if (e.category == Category::noun) {
        const FeatureValues* classes = e.feature("noun_class");
        if (classes == nullptr) {
          issues.push_back(who + ": Swahili noun without noun_class");
          break;
        }
        for (const auto& c : *classes) {
          int n = 0;
          try {
            std::size_t used = 0;
            n = std::stoi(c, &used);
            if (used != c.size()) n = 0;
          } catch (const std::exception&) {
            n = 0;
          }
          if (n < 1 || n > 18) {
            issues.push_back(who + ": noun_class \"" + c + "\" outside 1..18");
          } else if (!e.forms.contains("noun_class=" + c)) {
            issues.push_back(who + ": missing surface form for noun_class=" + c);
          }
        }
      }
      break;
    case Language::hindi:
      if (e.category == Category::verb) {
        require_paradigm(e, {{"aspect", {"hab", "pfv"}}, {"gender", {"f", "m"}}, {"number", {"pl", "sg"}}, {"tense", {"prs"}}},
                         who, issues);
      } else if (e.category == Category::noun) {
        if (e.feature("gender") == nullptr) issues.push_back(who + ": Hindi noun without gender");
        require_paradigm(e, {{"case", {"dir", "obl"}}, {"number", {"pl", "sg"}}}, who, issues);
      } else if (e.category == Category::possessive_pronoun) {
        require_paradigm(e, {{"case", {"dir", "obl"}}, {"gender", {"f", "m"}}, {"number", {"pl", "sg"}}}, who, issues);
      }
      break;
    case Language::basque:
      if (e.category == Category::noun && e.feature("stem_final") == nullptr)
        issues.push_back(who + ": Basque noun without stem_final");
      break;
  }
}

void check_text(std::string& s, const std::string& what, const LexiconLoadOptions& opts,
                std::vector<std::string>& issues) {
  if (text::is_nfc(s)) return;
  if (opts.auto_normalize) {
    s = text::to_nfc(s);
  } else {
    issues.push_back(what + ": text \"" + s + "\" is not NFC-normalized");
  }
}

}  // namespace

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::basque:
      return "basque";
    case Language::hindi:
      return "hindi";
    case Language::swahili:
      return "swahili";
  }
  return "?";
}

std::string_view to_string(Category cat) {
  for (const auto& [c, name] : kCategoryNames)
    if (c == cat) return name;
  return "?";
}

Language parse_language(std::string_view s) {
  if (s == "basque") return Language::basque;
  if (s == "hindi") return Language::hindi;
  if (s == "swahili") return Language::swahili;
  throw ParseError("unknown language \"" + std::string(s) + "\"");
}

Category parse_category(std::string_view s) {
  for (const auto& [c, name] : kCategoryNames)
    if (name == s) return c;
  throw ParseError("unknown category \"" + std::string(s) + "\"");
}

std::string bundle_key(const Bundle& bundle) {
  std::string key;
  for (const auto& [k, v] : bundle) {
    if (!key.empty()) key += ';';
    key += k;
    key += '=';
    key += v;
  }
  return key;
}

Bundle parse_bundle_key(std::string_view key) {
  Bundle out;
  if (key.empty()) return out;
  std::string prev;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    std::size_t end = key.find(';', pos);
    if (end == std::string_view::npos) end = key.size();
    const std::string_view part = key.substr(pos, end - pos);
    const std::size_t eq = part.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == part.size())
      throw ParseError("malformed bundle key \"" + std::string(key) + "\"");
    std::string name(part.substr(0, eq));
    if (!prev.empty() && name <= prev)
      throw ParseError("bundle key \"" + std::string(key) + "\" is not canonical (feature names must be sorted and unique)");
    out.emplace(name, std::string(part.substr(eq + 1)));
    prev = std::move(name);
    pos = end + 1;
  }
  return out;
}

const FeatureValues* LexicalEntry::feature(std::string_view name) const {
  auto it = features.find(std::string(name));
  return it == features.end() ? nullptr : &it->second;
}

bool LexicalEntry::has_value(std::string_view name, std::string_view value) const {
  const FeatureValues* values = feature(name);
  return values != nullptr && std::find(values->begin(), values->end(), value) != values->end();
}

Lexicon::Lexicon(Language language, std::string version, std::map<Category, std::set<std::string>> declared,
                 std::vector<LexicalEntry> entries)
    : language_(language), version_(std::move(version)), declared_(std::move(declared)), entries_(std::move(entries)) {}

const LexicalEntry* Lexicon::find(std::string_view lemma, Category category) const {
  for (const auto& e : entries_)
    if (e.category == category && e.lemma == lemma) return &e;
  return nullptr;
}

Lexicon parse_lexicon(std::string_view document, const LexiconLoadOptions& options, const std::string& source) {
  const json doc = detail::parse_json_strict(document, source);
  if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
  const std::string schema = detail::optional_string(doc, "schema", std::string(kLexiconSchema));
  if (schema != kLexiconSchema) throw ParseError(source + ": unsupported schema \"" + schema + "\"");

  const Language language = parse_language(detail::require_string(doc, "language", source));
  std::string version = detail::require_string(doc, "version", source);

  std::map<Category, std::set<std::string>> declared;
  const json& header = detail::require(doc, "features", source);
  if (!header.is_object()) throw ParseError(source + ": \"features\" must be an object");
  for (const auto& [cat_name, names] : header.items()) {
    const Category cat = parse_category(cat_name);
    for (auto& n : detail::string_or_list(names, source + ": features." + cat_name)) declared[cat].insert(n);
  }

  const json& raw_entries = detail::require(doc, "entries", source);
  if (!raw_entries.is_array()) throw ParseError(source + ": \"entries\" must be an array");

  std::vector<std::string> issues;
  std::vector<LexicalEntry> entries;
  entries.reserve(raw_entries.size());
  std::map<std::pair<std::string, Category>, std::size_t> seen;

  for (std::size_t i = 0; i < raw_entries.size(); ++i) {
    const json& raw = raw_entries[i];
    const std::string ctx = source + ": entry " + std::to_string(i);
    LexicalEntry e;
    e.language = language;
    if (raw.contains("language") && parse_language(detail::require_string(raw, "language", ctx)) != language)
      issues.push_back("entry " + std::to_string(i) + ": language differs from the lexicon's");
    e.lemma = detail::require_string(raw, "lemma", ctx);
    e.category = parse_category(detail::require_string(raw, "category", ctx));
    e.gloss = detail::optional_string(raw, "gloss");
    const std::string who = describe(i, e);

    if (e.lemma.empty()) issues.push_back(who + ": empty lemma");
    check_text(e.lemma, who + " lemma", options, issues);
    check_text(e.gloss, who + " gloss", options, issues);

    if (auto it = raw.find("features"); it != raw.end()) {
      if (!it->is_object()) throw ParseError(ctx + ": \"features\" must be an object");
      const auto decl = declared.find(e.category);
      for (const auto& [name, value] : it->items()) {
        if (decl == declared.end() || !decl->second.contains(name)) {
          issues.push_back(who + ": feature \"" + name + "\" is not declared for category " +
                           std::string(to_string(e.category)));
          continue;
        }
        FeatureValues values = detail::string_or_list(value, ctx + ": feature " + name);
        for (auto& v : values) check_text(v, who + " feature " + name, options, issues);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (values.empty()) issues.push_back(who + ": feature \"" + name + "\" has no values");
        if (auto dom = value_domains().find(name); dom != value_domains().end()) {
          for (const auto& v : values)
            if (!dom->second.contains(v))
              issues.push_back(who + ": value \"" + v + "\" not allowed for feature \"" + name + "\"");
        }
        e.features.emplace(name, std::move(values));
      }
    }

    if (auto it = raw.find("forms"); it != raw.end()) {
      if (!it->is_object()) throw ParseError(ctx + ": \"forms\" must be an object");
      for (const auto& [key, value] : it->items()) {
        if (!value.is_string()) throw ParseError(ctx + ": form \"" + key + "\" must be a string");
        try {
          parse_bundle_key(key);
        } catch (const ParseError& err) {
          issues.push_back(who + ": " + err.what());
          continue;
        }
        std::string surface = value.get<std::string>();
        if (surface.empty()) issues.push_back(who + ": empty surface form for \"" + key + "\"");
        check_text(surface, who + " form " + key, options, issues);
        e.forms.emplace(key, std::move(surface));
      }
    }

    validate_category_rules(i, e, issues);

    auto [pos, inserted] = seen.emplace(std::make_pair(e.lemma, e.category), i);
    if (!inserted)
      issues.push_back("entries " + std::to_string(pos->second) + " and " + std::to_string(i) + ": duplicate (" +
                       std::string(to_string(language)) + ", \"" + e.lemma + "\", " +
                       std::string(to_string(e.category)) + ")");
    entries.push_back(std::move(e));
  }

  if (!issues.empty()) throw ValidationError(source, std::move(issues));
  return Lexicon(language, std::move(version), std::move(declared), std::move(entries));
}

Lexicon load_lexicon(const std::filesystem::path& path, const LexiconLoadOptions& options) {
  return parse_lexicon(detail::read_file(path), options, path.string());
}

std::string export_lexicon(const Lexicon& lexicon) {
  ordered_json doc;
  doc["schema"] = kLexiconSchema;
  doc["language"] = to_string(lexicon.language());
  doc["version"] = lexicon.version();
  ordered_json header = ordered_json::object();
  for (const auto& [cat, names] : lexicon.declared_features())
    header[std::string(to_string(cat))] = std::vector<std::string>(names.begin(), names.end());
  doc["features"] = header;
  ordered_json entries = ordered_json::array();
  for (const auto& e : lexicon.entries()) {
    ordered_json item;
    item["lemma"] = e.lemma;
    item["category"] = to_string(e.category);
    if (!e.gloss.empty()) item["gloss"] = e.gloss;
    ordered_json feats = ordered_json::object();
    for (const auto& [name, values] : e.features) {
      if (values.size() == 1) {
        feats[name] = values.front();
      } else {
        feats[name] = values;
      }
    }
    item["features"] = feats;
    ordered_json forms = ordered_json::object();
    for (const auto& [key, surface] : e.forms) forms[key] = surface;
    item["forms"] = forms;
    entries.push_back(std::move(item));
  }
  doc["entries"] = entries;
  return doc.dump(2) + "\n";
}

std::vector<const LexicalEntry*> query_entries(const Lexicon& lexicon, Category category,
                                               const FeatureConstraints& constraints) {
  const auto decl = lexicon.declared_features().find(category);
  for (const auto& [name, allowed] : constraints) {
    if (decl == lexicon.declared_features().end() || !decl->second.contains(name))
      throw LookupError("unknown feature \"" + name + "\" for category " + std::string(to_string(category)) +
                        " in the " + std::string(to_string(lexicon.language())) + " lexicon");
  }
  std::vector<const LexicalEntry*> out;
  for (const auto& e : lexicon.entries()) {
    if (e.category != category) continue;
    bool ok = true;
    for (const auto& [name, allowed] : constraints) {
      const FeatureValues* values = e.feature(name);
      if (values == nullptr ||
          std::none_of(values->begin(), values->end(), [&](const std::string& v) { return allowed.contains(v); })) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(&e);
  }
  return out;
}

}  // namespace tse
