#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tse {

enum class Language { basque, hindi, swahili };

enum class Category { noun, verb, adjective, demonstrative, possessive_pronoun, auxiliary, particle };

std::string_view to_string(Language lang);
std::string_view to_string(Category cat);
Language parse_language(std::string_view s);
Category parse_category(std::string_view s);

// A lexical feature may carry several values (e.g. a verb that selects more
// than one semantic class of object, or a Swahili stem listed in both
// classes of a singular/plural pair). Values are kept sorted and unique.
using FeatureValues = std::vector<std::string>;
using FeatureMap = std::map<std::string, FeatureValues>;

// A fully specified, single-valued feature bundle. Its canonical text key is
// "k=v;k=v" with keys in lexicographic order.
using Bundle = std::map<std::string, std::string>;

std::string bundle_key(const Bundle& bundle);

// Parses a canonical key; rejects unsorted or repeated feature names.
Bundle parse_bundle_key(std::string_view key);

struct LexicalEntry {
  Language language = Language::basque;
  std::string lemma;
  Category category = Category::noun;
  FeatureMap features;
  std::map<std::string, std::string> forms;  // canonical bundle key -> surface form
  std::string gloss;

  const FeatureValues* feature(std::string_view name) const;
  bool has_value(std::string_view name, std::string_view value) const;

  friend bool operator==(const LexicalEntry&, const LexicalEntry&) = default;
};

// Feature constraint for queries: an entry matches when, for every named
// feature, at least one of its values is in the allowed set.
using FeatureConstraints = std::map<std::string, std::set<std::string>>;

class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(Language language, std::string version, std::map<Category, std::set<std::string>> declared,
          std::vector<LexicalEntry> entries);

  Language language() const noexcept { return language_; }
  const std::string& version() const noexcept { return version_; }
  const std::vector<LexicalEntry>& entries() const noexcept { return entries_; }
  const std::map<Category, std::set<std::string>>& declared_features() const noexcept { return declared_; }

  const LexicalEntry* find(std::string_view lemma, Category category) const;

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  Language language_ = Language::basque;
  std::string version_;
  std::map<Category, std::set<std::string>> declared_;
  std::vector<LexicalEntry> entries_;
};

struct LexiconLoadOptions {
  // Normalize non-NFC text to NFC instead of rejecting it.
  bool auto_normalize = false;
};

Lexicon parse_lexicon(std::string_view document, const LexiconLoadOptions& options = {},
                      const std::string& source = "<memory>");
Lexicon load_lexicon(const std::filesystem::path& path, const LexiconLoadOptions& options = {});

// Canonical serialization; parse_lexicon(export_lexicon(l)) == l.
std::string export_lexicon(const Lexicon& lexicon);

// Entries of `category` satisfying all constraints, in load order. Throws
// LookupError for a feature name the lexicon does not declare for the category.
std::vector<const LexicalEntry*> query_entries(const Lexicon& lexicon, Category category,
                                               const FeatureConstraints& constraints);

}  // namespace tse
