#include "tse/morphology.hpp"

#include <algorithm>

#include "json_util.hpp"
#include "tse/errors.hpp"
#include "tse/text.hpp"

namespace tse {

using detail::json;

namespace {

constexpr std::string_view kTableSchema = "tse-table/1";

json open_table(std::string_view document, const std::string& source, std::string_view kind) {
  json doc = detail::parse_json_strict(document, source);
  if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
  const std::string schema = detail::optional_string(doc, "schema", std::string(kTableSchema));
  if (schema != kTableSchema) throw ParseError(source + ": unsupported schema \"" + schema + "\"");
  const std::string got = detail::require_string(doc, "kind", source);
  if (got != kind) throw ParseError(source + ": expected table kind \"" + std::string(kind) + "\", got \"" + got + "\"");
  return doc;
}

std::optional<Number> optional_number(const json& row, const char* field) {
  auto it = row.find(field);
  if (it == row.end() || it->is_null()) return std::nullopt;
  return parse_number(it->get<std::string>());
}

std::string strip_hyphen(std::string_view stem) {
  if (!stem.empty() && stem.front() == '-') stem.remove_prefix(1);
  return std::string(stem);
}

}  // namespace

std::string_view to_string(Number n) { return n == Number::sg ? "sg" : "pl"; }

std::string_view to_string(GrammaticalCase c) {
  switch (c) {
    case GrammaticalCase::ergative:
      return "ergative";
    case GrammaticalCase::absolutive:
      return "absolutive";
    case GrammaticalCase::dative:
      return "dative";
  }
  return "?";
}

std::string_view to_string(Tense t) { return t == Tense::past ? "past" : "present"; }

std::string_view to_string(AuxParadigm p) {
  switch (p) {
    case AuxParadigm::S:
      return "S";
    case AuxParadigm::S_DO:
      return "S_DO";
    case AuxParadigm::S_IO_DO:
      return "S_IO_DO";
    case AuxParadigm::IO_S:
      return "IO_S";
  }
  return "?";
}

std::string_view to_string(ConcordSlot s) {
  switch (s) {
    case ConcordSlot::subject_verb_prefix:
      return "subject_verb_prefix";
    case ConcordSlot::adjective_prefix:
      return "adjective_prefix";
    case ConcordSlot::of_preposition:
      return "of_preposition";
    case ConcordSlot::demonstrative:
      return "demonstrative";
    case ConcordSlot::relative_verb_marker:
      return "relative_verb_marker";
  }
  return "?";
}

Number parse_number(std::string_view s) {
  if (s == "sg") return Number::sg;
  if (s == "pl") return Number::pl;
  throw ParseError("unknown number \"" + std::string(s) + "\"");
}

Number flip(Number n) { return n == Number::sg ? Number::pl : Number::sg; }

GrammaticalCase parse_case(std::string_view s) {
  if (s == "ergative") return GrammaticalCase::ergative;
  if (s == "absolutive") return GrammaticalCase::absolutive;
  if (s == "dative") return GrammaticalCase::dative;
  throw ParseError("unknown case \"" + std::string(s) + "\"");
}

Tense parse_tense(std::string_view s) {
  if (s == "past") return Tense::past;
  if (s == "present") return Tense::present;
  throw ParseError("unknown tense \"" + std::string(s) + "\"");
}

AuxParadigm parse_paradigm(std::string_view s) {
  if (s == "S") return AuxParadigm::S;
  if (s == "S_DO") return AuxParadigm::S_DO;
  if (s == "S_IO_DO") return AuxParadigm::S_IO_DO;
  if (s == "IO_S") return AuxParadigm::IO_S;
  throw ParseError("unknown auxiliary paradigm \"" + std::string(s) + "\"");
}

ConcordSlot parse_concord_slot(std::string_view s) {
  for (auto slot : {ConcordSlot::subject_verb_prefix, ConcordSlot::adjective_prefix, ConcordSlot::of_preposition,
                    ConcordSlot::demonstrative, ConcordSlot::relative_verb_marker})
    if (to_string(slot) == s) return slot;
  throw ParseError("unknown concord slot \"" + std::string(s) + "\"");
}

// ---------------------------------------------------------------------------
// Basque case

BasqueCaseTable BasqueCaseTable::parse(std::string_view document, const std::string& source) {
  const json doc = open_table(document, source, "basque_case");
  BasqueCaseTable table;
  table.version_ = detail::require_string(doc, "version", source);
  std::set<std::string> stem_classes;
  for (const auto& row : detail::require(doc, "rules", source)) {
    const GrammaticalCase c = parse_case(detail::require_string(row, "case", source));
    const Number n = parse_number(detail::require_string(row, "number", source));
    const std::string stem_final = detail::require_string(row, "stem_final", source);
    Rule rule{row.value("strip", std::size_t{0}), detail::require_string(row, "suffix", source)};
    stem_classes.insert(stem_final);
    if (!table.rules_.emplace(std::make_tuple(c, n, stem_final), std::move(rule)).second)
      throw ValidationError(source, {"duplicate rule for (" + std::string(to_string(c)) + ", " +
                                     std::string(to_string(n)) + ", " + stem_final + ")"});
  }
  std::vector<std::string> issues;
  for (const auto& sf : stem_classes)
    for (auto c : {GrammaticalCase::ergative, GrammaticalCase::absolutive, GrammaticalCase::dative})
      for (auto n : {Number::sg, Number::pl})
        if (!table.rules_.contains({c, n, sf}))
          issues.push_back("no rule for (" + std::string(to_string(c)) + ", " + std::string(to_string(n)) + ", " +
                           sf + ")");
  if (!issues.empty()) throw ValidationError(source, std::move(issues));
  return table;
}

std::string BasqueCaseTable::mark(const LexicalEntry& noun, CaseSpec spec) const {
  if (noun.language != Language::basque || noun.category != Category::noun)
    throw LookupError("case marking applies to Basque nouns only (got \"" + noun.lemma + "\")");
  const FeatureValues* sf = noun.feature("stem_final");
  if (sf == nullptr || sf->size() != 1)
    throw LookupError("Basque noun \"" + noun.lemma + "\" has no single stem_final feature");
  auto it = rules_.find({spec.grammatical_case, spec.number, sf->front()});
  if (it == rules_.end())
    throw LookupError("no case rule for (" + std::string(to_string(spec.grammatical_case)) + ", " +
                      std::string(to_string(spec.number)) + ", " + sf->front() + ")");
  const Rule& rule = it->second;
  if (rule.strip > noun.lemma.size()) throw LookupError("case rule strips more than the stem \"" + noun.lemma + "\"");
  return noun.lemma.substr(0, noun.lemma.size() - rule.strip) + rule.suffix;
}

// ---------------------------------------------------------------------------
// Basque auxiliary

void BasqueAuxKey::validate() const {
  const bool wants_do = paradigm == AuxParadigm::S_DO || paradigm == AuxParadigm::S_IO_DO;
  const bool wants_io = paradigm == AuxParadigm::S_IO_DO || paradigm == AuxParadigm::IO_S;
  std::vector<std::string> issues;
  if (wants_do != direct_object.has_value())
    issues.push_back(std::string("direct-object number must be ") + (wants_do ? "present" : "absent") +
                     " for paradigm " + std::string(to_string(paradigm)));
  if (wants_io != indirect_object.has_value())
    issues.push_back(std::string("indirect-object number must be ") + (wants_io ? "present" : "absent") +
                     " for paradigm " + std::string(to_string(paradigm)));
  if (!issues.empty()) throw ValidationError("auxiliary key " + describe(), std::move(issues));
}

std::string BasqueAuxKey::describe() const {
  std::string s = "{paradigm=" + std::string(to_string(paradigm)) + ", tense=" + std::string(to_string(tense)) +
                  ", subject=" + std::string(to_string(subject));
  if (direct_object) s += ", do=" + std::string(to_string(*direct_object));
  if (indirect_object) s += ", io=" + std::string(to_string(*indirect_object));
  return s + "}";
}

BasqueAuxiliaryTable BasqueAuxiliaryTable::from_forms(std::map<BasqueAuxKey, std::string> forms) {
  BasqueAuxiliaryTable t;
  t.forms_ = std::move(forms);
  return t;
}

BasqueAuxiliaryTable BasqueAuxiliaryTable::parse(std::string_view document, const std::string& source) {
  const json doc = open_table(document, source, "basque_auxiliary");
  BasqueAuxiliaryTable table;
  table.version_ = detail::require_string(doc, "version", source);
  std::vector<std::string> issues;
  std::set<AuxParadigm> paradigms;
  for (const auto& row : detail::require(doc, "forms", source)) {
    BasqueAuxKey key;
    key.paradigm = parse_paradigm(detail::require_string(row, "paradigm", source));
    key.tense = parse_tense(detail::require_string(row, "tense", source));
    key.subject = parse_number(detail::require_string(row, "subject_num", source));
    key.direct_object = optional_number(row, "do_num");
    key.indirect_object = optional_number(row, "io_num");
    try {
      key.validate();
    } catch (const ValidationError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
      continue;
    }
    std::string form = detail::require_string(row, "form", source);
    if (!text::is_nfc(form)) issues.push_back("form \"" + form + "\" is not NFC-normalized");
    paradigms.insert(key.paradigm);
    if (!table.forms_.emplace(key, std::move(form)).second) issues.push_back("duplicate key " + key.describe());
  }
  // Each paradigm present must be complete: 2^(arguments) number combinations x 2 tenses.
  for (AuxParadigm p : paradigms) {
    for (Tense t : {Tense::past, Tense::present})
      for (Number s : {Number::sg, Number::pl})
        for (int d = 0; d < 2; ++d)
          for (int i = 0; i < 2; ++i) {
            BasqueAuxKey key{p, t, s, std::nullopt, std::nullopt};
            const bool wants_do = p == AuxParadigm::S_DO || p == AuxParadigm::S_IO_DO;
            const bool wants_io = p == AuxParadigm::S_IO_DO || p == AuxParadigm::IO_S;
            if (!wants_do && d == 1) continue;
            if (!wants_io && i == 1) continue;
            if (wants_do) key.direct_object = d ? Number::pl : Number::sg;
            if (wants_io) key.indirect_object = i ? Number::pl : Number::sg;
            if (!table.forms_.contains(key)) issues.push_back("incomplete paradigm: missing " + key.describe());
          }
  }
  if (!issues.empty()) throw ValidationError(source, std::move(issues));
  return table;
}

std::string BasqueAuxiliaryTable::lookup(const BasqueAuxKey& key) const {
  key.validate();
  auto it = forms_.find(key);
  if (it == forms_.end()) throw LookupError("no auxiliary form for " + key.describe());
  return it->second;
}

// ---------------------------------------------------------------------------
// Swahili concord

SwahiliConcordTable SwahiliConcordTable::parse(std::string_view document, const std::string& source) {
  const json doc = open_table(document, source, "swahili_concord");
  SwahiliConcordTable table;
  table.version_ = detail::require_string(doc, "version", source);
  if (auto it = doc.find("tam"); it != doc.end()) {
    for (const auto& [tense, marker] : it->items()) table.tam_[tense] = marker.get<std::string>();
  }
  std::vector<std::string> issues;
  for (const auto& row : detail::require(doc, "entries", source)) {
    const int cls = detail::require(row, "class", source).get<int>();
    const ConcordSlot slot = parse_concord_slot(detail::require_string(row, "slot", source));
    if (cls < 1 || cls > 18) issues.push_back("class " + std::to_string(cls) + " outside 1..18");
    Entry entry;
    entry.prefix = detail::require_string(row, "prefix", source);
    if (auto ex = row.find("exceptions"); ex != row.end()) {
      for (const auto& e : *ex) {
        Exception x;
        x.stem_initial = detail::string_or_list(detail::require(e, "stem_initial", source), source);
        x.prefix = detail::require_string(e, "prefix", source);
        x.drop = e.value("drop", std::size_t{0});
        entry.exceptions.push_back(std::move(x));
      }
    }
    if (!table.entries_.emplace(std::make_pair(slot, cls), std::move(entry)).second)
      issues.push_back("duplicate entry for class " + std::to_string(cls) + " slot " + std::string(to_string(slot)));
  }
  if (!issues.empty()) throw ValidationError(source, std::move(issues));
  return table;
}

const SwahiliConcordTable::Entry* SwahiliConcordTable::find(SwahiliConcordKey key) const {
  auto it = entries_.find({key.slot, key.noun_class});
  return it == entries_.end() ? nullptr : &it->second;
}

std::string SwahiliConcordTable::apply(SwahiliConcordKey key, std::string_view stem) const {
  const Entry* entry = find(key);
  if (entry == nullptr)
    throw LookupError("no concord for class " + std::to_string(key.noun_class) + " slot " +
                      std::string(to_string(key.slot)));
  const std::string bare = strip_hyphen(stem);
  for (const auto& ex : entry->exceptions) {
    for (const auto& onset : ex.stem_initial) {
      if (!bare.empty() && text::starts_with(bare, onset)) {
        if (ex.drop > bare.size()) throw LookupError("concord exception drops more than the stem");
        return ex.prefix + bare.substr(ex.drop);
      }
    }
  }
  return entry->prefix + bare;
}

std::string SwahiliConcordTable::tam_marker(std::string_view tense) const {
  auto it = tam_.find(std::string(tense));
  if (it == tam_.end()) throw LookupError("no tense/aspect marker for \"" + std::string(tense) + "\"");
  return it->second;
}

// ---------------------------------------------------------------------------

MorphologyTables MorphologyTables::load_dir(const std::filesystem::path& dir) {
  MorphologyTables tables;
  if (!std::filesystem::is_directory(dir)) throw ConfigError("table directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && text::ends_with(entry.path().filename().string(), ".table.json"))
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string content = detail::read_file(path);
    const json doc = detail::parse_json_strict(content, path.string());
    const std::string kind = detail::require_string(doc, "kind", path.string());
    if (kind == "basque_case") {
      tables.basque_case = BasqueCaseTable::parse(content, path.string());
    } else if (kind == "basque_auxiliary") {
      tables.basque_auxiliary = BasqueAuxiliaryTable::parse(content, path.string());
    } else if (kind == "swahili_concord") {
      tables.swahili_concord = SwahiliConcordTable::parse(content, path.string());
    } else {
      throw ParseError(path.string() + ": unknown table kind \"" + kind + "\"");
    }
  }
  return tables;
}

const BasqueCaseTable& MorphologyTables::case_table() const {
  if (!basque_case) throw LookupError("Basque case table not loaded");
  return *basque_case;
}

const BasqueAuxiliaryTable& MorphologyTables::auxiliary_table() const {
  if (!basque_auxiliary) throw LookupError("Basque auxiliary table not loaded");
  return *basque_auxiliary;
}

const SwahiliConcordTable& MorphologyTables::concord_table() const {
  if (!swahili_concord) throw LookupError("Swahili concord table not loaded");
  return *swahili_concord;
}

std::string inflect(const MorphologyTables& tables, const LexicalEntry& entry, const Bundle& bundle) {
  const std::string key = bundle_key(bundle);
  if (auto it = entry.forms.find(key); it != entry.forms.end()) return it->second;

  auto has_exactly = [&](std::initializer_list<std::string_view> names) {
    if (bundle.size() != names.size()) return false;
    return std::all_of(names.begin(), names.end(), [&](std::string_view n) { return bundle.contains(std::string(n)); });
  };

  if (entry.language == Language::basque && entry.category == Category::noun && has_exactly({"case", "number"})) {
    return tables.case_table().mark(entry, {parse_case(bundle.at("case")), parse_number(bundle.at("number"))});
  }
  if (entry.language == Language::swahili) {
    auto noun_class = [&] {
      try {
        return std::stoi(bundle.at("noun_class"));
      } catch (const std::exception&) {
        throw LookupError("bad noun_class in bundle \"" + key + "\"");
      }
    };
    if (entry.category == Category::adjective && has_exactly({"noun_class"})) {
      return tables.concord_table().apply({ConcordSlot::adjective_prefix, noun_class()}, entry.lemma);
    }
    if (entry.category == Category::verb && has_exactly({"noun_class", "tense"})) {
      const auto& t = tables.concord_table();
      return t.apply({ConcordSlot::subject_verb_prefix, noun_class()},
                     t.tam_marker(bundle.at("tense")) + strip_hyphen(entry.lemma));
    }
    if (entry.category == Category::verb && has_exactly({"noun_class", "relative"})) {
      return tables.concord_table().apply({ConcordSlot::relative_verb_marker, noun_class()}, entry.lemma);
    }
  }
  throw LookupError("no listed form and no rule for " + std::string(to_string(entry.language)) + " " +
                    std::string(to_string(entry.category)) + " \"" + entry.lemma + "\" with bundle \"" + key + "\"");
}

}  // namespace tse
