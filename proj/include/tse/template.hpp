#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tse/lexicon.hpp"
#include "tse/morphology.hpp"

namespace tse {

enum class Realization {
  lemma,             // the entry's lemma, unchanged
  inflect,           // listed form or rule engine, see tse::inflect
  basque_auxiliary,  // paradigm table lookup, no lexical entry
  concord,           // Swahili concord with an empty stem, no lexical entry
};

// Copies feature `feature` of the slot playing `role`.
struct AgreementSource {
  std::string role;
  std::string feature;
};

struct Slot {
  std::string role;
  Category category = Category::noun;
  Realization realize = Realization::lemma;
  FeatureConstraints constraints;
  std::optional<std::string> lemma;  // pinned filler
  // Features drawn uniformly from a fixed list.
  std::map<std::string, std::vector<std::string>> sample;
  // Lexical features copied into the bundle; multi-valued ones are drawn
  // among the entry's values (restricted by `constraints`).
  std::vector<std::string> inherit;
  Bundle fixed;
  std::map<std::string, AgreementSource> agree;
  std::optional<AuxParadigm> paradigm;
  std::optional<ConcordSlot> concord_slot;

  bool lexical() const noexcept {
    return realize == Realization::lemma || realize == Realization::inflect;
  }
};

enum class ConstraintKind {
  number_mismatch,  // number(focus) differs from number(each of others)
  differs,          // feature value differs between two roles
  selects,          // dependent's feature shares a value with the head's feature
};

struct CrossConstraint {
  ConstraintKind kind = ConstraintKind::differs;
  std::string focus;
  std::vector<std::string> others;
  std::string feature;
  std::vector<std::string> roles;
  std::string head;
  std::string head_feature;
  std::string dependent;
  std::string dependent_feature;

  std::string describe() const;
};

// How the ungrammatical target is built: re-realize `role` with one feature
// of its bundle changed.
struct TargetRule {
  enum class Kind { flip, set, copy };
  std::string role;
  Kind kind = Kind::flip;
  std::string feature;
  std::string value;                   // for set
  std::optional<AgreementSource> from; // for copy
};

struct ComplexityTag {
  std::string axis;
  std::string group;
  int level = 0;
};

struct Template {
  std::string id;
  std::string suite_name;
  Language language = Language::basque;
  std::string phenomenon;
  std::optional<std::string> focus;
  bool validated = true;
  std::optional<ComplexityTag> complexity;
  std::string punctuation;
  std::vector<Slot> slots;
  std::vector<CrossConstraint> constraints;
  TargetRule target;

  std::size_t target_index() const;
  const Slot* slot(std::string_view role) const;
};

Template parse_template(std::string_view document, const std::string& source = "<memory>");
Template load_template(const std::filesystem::path& path);

// Every *.template.json in `dir`, ordered by suite name.
std::vector<Template> load_templates(const std::filesystem::path& dir);

}  // namespace tse
