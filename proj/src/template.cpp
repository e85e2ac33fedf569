#include "tse/template.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"
#include "tse/errors.hpp"
#include "tse/text.hpp"

namespace tse {

using detail::json;

namespace {

constexpr std::string_view kTemplateSchema = "tse-template/1";

Realization parse_realization(std::string_view s) {
  if (s == "lemma") return Realization::lemma;
  if (s == "inflect") return Realization::inflect;
  if (s == "basque_auxiliary") return Realization::basque_auxiliary;
  if (s == "concord") return Realization::concord;
  throw ParseError("unknown realization \"" + std::string(s) + "\"");
}

// "ROLE" or "ROLE.feature"; a bare role copies the same-named feature.
AgreementSource parse_source(std::string_view spec, std::string_view default_feature) {
  const auto dot = spec.find('.');
  if (dot == std::string_view::npos) return {std::string(spec), std::string(default_feature)};
  return {std::string(spec.substr(0, dot)), std::string(spec.substr(dot + 1))};
}

std::vector<std::string> list_field(const json& obj, const char* field, const std::string& ctx) {
  auto it = obj.find(field);
  if (it == obj.end()) return {};
  return detail::string_or_list(*it, ctx + "." + field);
}

Slot parse_slot(const json& raw, const std::string& ctx) {
  Slot slot;
  slot.role = detail::require_string(raw, "role", ctx);
  slot.category = parse_category(detail::require_string(raw, "category", ctx));
  slot.realize = parse_realization(detail::optional_string(raw, "realize", "lemma"));
  if (auto it = raw.find("constraints"); it != raw.end()) {
    for (const auto& [name, values] : it->items()) {
      auto list = detail::string_or_list(values, ctx + ".constraints." + name);
      slot.constraints[name] = std::set<std::string>(list.begin(), list.end());
    }
  }
  if (auto it = raw.find("lemma"); it != raw.end()) slot.lemma = it->get<std::string>();
  if (auto it = raw.find("sample"); it != raw.end()) {
    for (const auto& [name, values] : it->items()) {
      auto list = detail::string_or_list(values, ctx + ".sample." + name);
      if (list.empty()) throw ParseError(ctx + ": sample list for \"" + name + "\" is empty");
      slot.sample[name] = std::move(list);
    }
  }
  slot.inherit = list_field(raw, "inherit", ctx);
  if (auto it = raw.find("fixed"); it != raw.end()) {
    for (const auto& [name, value] : it->items()) slot.fixed[name] = value.get<std::string>();
  }
  if (auto it = raw.find("agree"); it != raw.end()) {
    for (const auto& [name, spec] : it->items()) slot.agree[name] = parse_source(spec.get<std::string>(), name);
  }
  if (auto it = raw.find("paradigm"); it != raw.end()) slot.paradigm = parse_paradigm(it->get<std::string>());
  if (auto it = raw.find("concord_slot"); it != raw.end())
    slot.concord_slot = parse_concord_slot(it->get<std::string>());
  return slot;
}

CrossConstraint parse_constraint(const json& raw, const std::string& ctx) {
  CrossConstraint c;
  const std::string kind = detail::require_string(raw, "kind", ctx);
  if (kind == "number_mismatch") {
    c.kind = ConstraintKind::number_mismatch;
    c.focus = detail::require_string(raw, "focus", ctx);
    c.others = list_field(raw, "others", ctx);
    c.feature = "number";
  } else if (kind == "differs") {
    c.kind = ConstraintKind::differs;
    c.feature = detail::require_string(raw, "feature", ctx);
    c.roles = list_field(raw, "roles", ctx);
    if (c.roles.size() != 2) throw ParseError(ctx + ": \"differs\" needs exactly two roles");
  } else if (kind == "selects") {
    c.kind = ConstraintKind::selects;
    c.head = detail::require_string(raw, "head", ctx);
    c.head_feature = detail::require_string(raw, "head_feature", ctx);
    c.dependent = detail::require_string(raw, "dependent", ctx);
    c.dependent_feature = detail::require_string(raw, "dependent_feature", ctx);
  } else {
    throw ParseError(ctx + ": unknown constraint kind \"" + kind + "\"");
  }
  return c;
}

TargetRule parse_target(const json& raw, const std::string& ctx) {
  TargetRule t;
  t.role = detail::require_string(raw, "role", ctx);
  if (auto it = raw.find("flip"); it != raw.end()) {
    t.kind = TargetRule::Kind::flip;
    t.feature = it->get<std::string>();
  } else if (auto it2 = raw.find("set"); it2 != raw.end()) {
    if (!it2->is_object() || it2->size() != 1) throw ParseError(ctx + ": \"set\" must name exactly one feature");
    t.kind = TargetRule::Kind::set;
    t.feature = it2->begin().key();
    t.value = it2->begin()->get<std::string>();
  } else if (auto it3 = raw.find("copy"); it3 != raw.end()) {
    if (!it3->is_object() || it3->size() != 1) throw ParseError(ctx + ": \"copy\" must name exactly one feature");
    t.kind = TargetRule::Kind::copy;
    t.feature = it3->begin().key();
    t.from = parse_source(it3->begin()->get<std::string>(), t.feature);
  } else {
    throw ParseError(ctx + ": target needs one of \"flip\", \"set\", \"copy\"");
  }
  return t;
}

void validate(const Template& t, const std::string& source) {
  std::vector<std::string> issues;
  std::set<std::string> roles;
  for (const auto& s : t.slots)
    if (!roles.insert(s.role).second) issues.push_back("duplicate role \"" + s.role + "\"");
  auto known = [&](const std::string& role, const std::string& where) {
    if (!roles.contains(role)) issues.push_back(where + " refers to unknown role \"" + role + "\"");
  };
  if (t.suite_name.empty()) issues.push_back("empty suite_name");
  if (t.slots.empty()) issues.push_back("no slots");
  for (const auto& s : t.slots) {
    for (const auto& [feat, src] : s.agree) known(src.role, "slot " + s.role + " agreement on " + feat);
    if (s.realize == Realization::basque_auxiliary && !s.paradigm)
      issues.push_back("slot " + s.role + ": basque_auxiliary realization needs a paradigm");
    if (s.realize == Realization::concord && !s.concord_slot)
      issues.push_back("slot " + s.role + ": concord realization needs a concord_slot");
  }
  for (const auto& c : t.constraints) {
    const std::string where = "constraint " + c.describe();
    switch (c.kind) {
      case ConstraintKind::number_mismatch:
        known(c.focus, where);
        for (const auto& r : c.others) known(r, where);
        break;
      case ConstraintKind::differs:
        for (const auto& r : c.roles) known(r, where);
        break;
      case ConstraintKind::selects:
        known(c.head, where);
        known(c.dependent, where);
        break;
    }
  }
  if (t.focus) known(*t.focus, "focus");
  known(t.target.role, "target");
  if (const Slot* target = t.slot(t.target.role)) {
    const bool in_bundle = target->sample.contains(t.target.feature) || target->fixed.contains(t.target.feature) ||
                           target->agree.contains(t.target.feature) ||
                           std::find(target->inherit.begin(), target->inherit.end(), t.target.feature) !=
                               target->inherit.end();
    if (!in_bundle)
      issues.push_back("target feature \"" + t.target.feature + "\" is not part of slot " + target->role + "'s bundle");
    if (t.target.from) known(t.target.from->role, "target copy source");
  }
  if (!issues.empty()) throw ValidationError(source, std::move(issues));
}

}  // namespace

std::string CrossConstraint::describe() const {
  switch (kind) {
    case ConstraintKind::number_mismatch: {
      std::string s = "number_mismatch(" + focus + " vs";
      for (const auto& o : others) s += " " + o;
      return s + ")";
    }
    case ConstraintKind::differs:
      return "differs(" + feature + ": " + (roles.size() > 0 ? roles[0] : "") + " vs " +
             (roles.size() > 1 ? roles[1] : "") + ")";
    case ConstraintKind::selects:
      return "selects(" + head + "." + head_feature + " -> " + dependent + "." + dependent_feature + ")";
  }
  return "?";
}

std::size_t Template::target_index() const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].role == target.role) return i;
  throw LookupError("template " + suite_name + " has no target slot \"" + target.role + "\"");
}

const Slot* Template::slot(std::string_view role) const {
  for (const auto& s : slots)
    if (s.role == role) return &s;
  return nullptr;
}

Template parse_template(std::string_view document, const std::string& source) {
  const json doc = detail::parse_json_strict(document, source);
  if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
  const std::string schema = detail::optional_string(doc, "schema", std::string(kTemplateSchema));
  if (schema != kTemplateSchema) throw ParseError(source + ": unsupported schema \"" + schema + "\"");

  Template t;
  t.suite_name = detail::require_string(doc, "suite_name", source);
  t.id = detail::optional_string(doc, "id", t.suite_name);
  t.language = parse_language(detail::require_string(doc, "language", source));
  t.phenomenon = detail::optional_string(doc, "phenomenon");
  if (auto it = doc.find("focus"); it != doc.end() && !it->is_null()) t.focus = it->get<std::string>();
  t.validated = doc.value("validated", true);
  if (auto it = doc.find("complexity"); it != doc.end() && !it->is_null()) {
    t.complexity = ComplexityTag{detail::require_string(*it, "axis", source),
                                 detail::require_string(*it, "group", source),
                                 detail::require(*it, "level", source).get<int>()};
  }
  t.punctuation = detail::optional_string(doc, "punctuation", t.language == Language::hindi ? "।" : ".");

  const json& slots = detail::require(doc, "slots", source);
  if (!slots.is_array()) throw ParseError(source + ": \"slots\" must be an array");
  for (std::size_t i = 0; i < slots.size(); ++i)
    t.slots.push_back(parse_slot(slots[i], source + ": slot " + std::to_string(i)));
  if (auto it = doc.find("constraints"); it != doc.end()) {
    for (const auto& c : *it) t.constraints.push_back(parse_constraint(c, source + ": constraint"));
  }
  t.target = parse_target(detail::require(doc, "target", source), source + ": target");
  validate(t, source);
  return t;
}

Template load_template(const std::filesystem::path& path) {
  return parse_template(detail::read_file(path), path.string());
}

std::vector<Template> load_templates(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
  std::vector<Template> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && text::ends_with(entry.path().filename().string(), ".template.json"))
      out.push_back(load_template(entry.path()));
  }
  std::sort(out.begin(), out.end(), [](const Template& a, const Template& b) { return a.suite_name < b.suite_name; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].suite_name == out[i - 1].suite_name)
      throw ValidationError(dir.string(), {"duplicate suite name \"" + out[i].suite_name + "\""});
  return out;
}

}  // namespace tse
