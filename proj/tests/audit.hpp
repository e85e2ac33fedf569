#pragma once

#include <algorithm>
#include <string>

#include "tse/generator.hpp"
#include "tse/text.hpp"

namespace tse::testing {

// Re-checks the agreement-confound rules from pair metadata alone.

// Basque: the focused argument's number differs from every other argument's.
// Vacuously true when the clause has no other argument.
inline bool basque_number_mismatch(const MinimalPair& p) {
  if (!p.metadata.focus) return false;
  const auto& f = p.metadata.features;
  auto focus = f.find(*p.metadata.focus);
  if (focus == f.end() || !focus->second.contains("number")) return false;
  for (const char* role : {"S", "DO", "IO"}) {
    if (role == *p.metadata.focus) continue;
    auto it = f.find(role);
    if (it == f.end()) continue;
    if (it->second.at("number") == focus->second.at("number")) return false;
  }
  return true;
}

// Swahili: possessor class differs from the subject's.
inline bool swahili_class_mismatch(const MinimalPair& p) {
  const auto& f = p.metadata.features;
  auto n = f.find("N");
  auto poss = f.find("Poss");
  if (n == f.end() || poss == f.end()) return false;
  return n->second.at("noun_class") != poss->second.at("noun_class");
}

inline bool has_ne(const MinimalPair& p) {
  const auto words = text::split_ws(p.condition);
  return std::find(words.begin(), words.end(), "ने") != words.end();
}

inline bool is_ne_suite(const std::string& name) { return name.find("_ne_") != std::string::npos; }

}  // namespace tse::testing
