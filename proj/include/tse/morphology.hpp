#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tse/lexicon.hpp"

namespace tse {

enum class Number { sg, pl };
enum class GrammaticalCase { ergative, absolutive, dative };
enum class Tense { past, present };

// Argument sets of the Basque auxiliary, named by the arguments it indexes.
enum class AuxParadigm { S, S_DO, S_IO_DO, IO_S };

enum class ConcordSlot { subject_verb_prefix, adjective_prefix, of_preposition, demonstrative, relative_verb_marker };

std::string_view to_string(Number n);
std::string_view to_string(GrammaticalCase c);
std::string_view to_string(Tense t);
std::string_view to_string(AuxParadigm p);
std::string_view to_string(ConcordSlot s);
Number parse_number(std::string_view s);
Number flip(Number n);
GrammaticalCase parse_case(std::string_view s);
Tense parse_tense(std::string_view s);
AuxParadigm parse_paradigm(std::string_view s);
ConcordSlot parse_concord_slot(std::string_view s);

struct CaseSpec {
  GrammaticalCase grammatical_case = GrammaticalCase::absolutive;
  Number number = Number::sg;
};

// Third person throughout; only number is indexed.
struct BasqueAuxKey {
  AuxParadigm paradigm = AuxParadigm::S;
  Tense tense = Tense::past;
  Number subject = Number::sg;
  std::optional<Number> direct_object;
  std::optional<Number> indirect_object;

  // Throws ValidationError when the optional arguments do not match the paradigm.
  void validate() const;
  std::string describe() const;

  friend auto operator<=>(const BasqueAuxKey&, const BasqueAuxKey&) = default;
};

struct SwahiliConcordKey {
  ConcordSlot slot = ConcordSlot::subject_verb_prefix;
  int noun_class = 1;
};

// Definite case suffixes keyed by (case, number, stem_final). A rule strips
// `strip` bytes from the end of the lemma and appends `suffix`.
class BasqueCaseTable {
 public:
  struct Rule {
    std::size_t strip = 0;
    std::string suffix;
  };

  static BasqueCaseTable parse(std::string_view document, const std::string& source = "<memory>");

  std::string mark(const LexicalEntry& noun, CaseSpec spec) const;
  const std::string& version() const noexcept { return version_; }

 private:
  std::map<std::tuple<GrammaticalCase, Number, std::string>, Rule> rules_;
  std::string version_;
};

class BasqueAuxiliaryTable {
 public:
  // Rejects tables missing any number combination of a paradigm for either tense.
  static BasqueAuxiliaryTable parse(std::string_view document, const std::string& source = "<memory>");

  // Exact lookup; LookupError naming the key when absent.
  std::string lookup(const BasqueAuxKey& key) const;
  const std::map<BasqueAuxKey, std::string>& forms() const noexcept { return forms_; }
  const std::string& version() const noexcept { return version_; }

  static BasqueAuxiliaryTable from_forms(std::map<BasqueAuxKey, std::string> forms);

 private:
  std::map<BasqueAuxKey, std::string> forms_;
  std::string version_;
};

class SwahiliConcordTable {
 public:
  // Prefix replacement for stems with a given onset (vowel coalescence,
  // nasal assimilation). `drop` bytes are removed from the stem onset.
  struct Exception {
    std::vector<std::string> stem_initial;
    std::string prefix;
    std::size_t drop = 0;
  };
  struct Entry {
    std::string prefix;
    std::vector<Exception> exceptions;
  };

  static SwahiliConcordTable parse(std::string_view document, const std::string& source = "<memory>");

  // Concord-marked form of `stem` (a leading '-' on the stem is ignored).
  std::string apply(SwahiliConcordKey key, std::string_view stem) const;
  const Entry* find(SwahiliConcordKey key) const;
  std::string tam_marker(std::string_view tense) const;
  const std::map<std::pair<ConcordSlot, int>, Entry>& entries() const noexcept { return entries_; }
  const std::string& version() const noexcept { return version_; }

 private:
  std::map<std::pair<ConcordSlot, int>, Entry> entries_;
  std::map<std::string, std::string> tam_;
  std::string version_;
};

// All inflection tables a generation run may need. Each is optional so a run
// over one language does not need the others' data.
struct MorphologyTables {
  std::optional<BasqueCaseTable> basque_case;
  std::optional<BasqueAuxiliaryTable> basque_auxiliary;
  std::optional<SwahiliConcordTable> swahili_concord;

  // Loads every *.table.json in `dir`, dispatching on the document's "kind".
  static MorphologyTables load_dir(const std::filesystem::path& dir);

  const BasqueCaseTable& case_table() const;
  const BasqueAuxiliaryTable& auxiliary_table() const;
  const SwahiliConcordTable& concord_table() const;
};

// Realizes `entry` under `bundle`: a listed form for the canonical bundle key
// wins; otherwise the language's rule engine is used (Basque case on nouns,
// Swahili concord on adjectives and verbs).
std::string inflect(const MorphologyTables& tables, const LexicalEntry& entry, const Bundle& bundle);

}  // namespace tse
