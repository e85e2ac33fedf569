#include "tse/generator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "tse/errors.hpp"
#include "tse/text.hpp"

namespace tse {

namespace {

// Binary oppositions the target rule can flip.
const std::map<std::string, std::string>& flip_table() {
  static const std::map<std::string, std::string> table = {
      {"sg", "pl"}, {"pl", "sg"}, {"hab", "pfv"}, {"pfv", "hab"}, {"past", "present"}, {"present", "past"},
  };
  return table;
}

std::string flip_value(const std::string& feature, const std::string& value) {
  auto it = flip_table().find(value);
  if (it == flip_table().end())
    throw LookupError("cannot flip value \"" + value + "\" of feature \"" + feature + "\"");
  return it->second;
}

std::vector<std::string> intersect(const FeatureValues& values, const FeatureConstraints& constraints,
                                   const std::string& feature) {
  auto it = constraints.find(feature);
  if (it == constraints.end()) return values;
  std::vector<std::string> out;
  for (const auto& v : values)
    if (it->second.contains(v)) out.push_back(v);
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& items, RandomStream& rng) {
  return items[rng.uniform_index(items.size())];
}

}  // namespace

SplitResult split_condition_target(const std::string& grammatical, const std::string& ungrammatical) {
  const auto g = text::split_ws(grammatical);
  const auto u = text::split_ws(ungrammatical);
  if (text::join(g) != grammatical || text::join(u) != ungrammatical)
    throw ValidationError("minimal pair", {"sentences must be single-space separated without padding"});
  if (g.size() != u.size())
    throw ValidationError("minimal pair", {"sentences have different word counts (" + std::to_string(g.size()) +
                                               " vs " + std::to_string(u.size()) + ")"});
  std::size_t first = g.size();
  std::size_t differing = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] != u[i]) {
      ++differing;
      first = std::min(first, i);
    }
  }
  if (differing != 1)
    throw ValidationError("minimal pair",
                          {"sentences differ in " + std::to_string(differing) + " words; exactly one is required"});
  if (first == 0) throw ValidationError("minimal pair", {"sentences differ in their first word; condition is empty"});
  SplitResult r;
  r.condition = text::join(std::vector<std::string>(g.begin(), g.begin() + first));
  r.grammatical_target = text::join(std::vector<std::string>(g.begin() + first, g.end()));
  r.ungrammatical_target = text::join(std::vector<std::string>(u.begin() + first, u.end()));
  return r;
}

struct PairSampler::Filled {
  std::vector<const LexicalEntry*> entries;
  std::vector<Bundle> bundles;
};

PairSampler::PairSampler(const Template& tmpl, const Lexicon& lexicon, const MorphologyTables& tables,
                         PairOverrides overrides, SamplerOptions options)
    : tmpl_(&tmpl), lexicon_(&lexicon), tables_(&tables), overrides_(std::move(overrides)), options_(options) {
  if (lexicon.language() != tmpl.language)
    throw ConfigError("template " + tmpl.suite_name + " is " + std::string(to_string(tmpl.language)) +
                      " but the lexicon is " + std::string(to_string(lexicon.language())));
  for (const auto& [role, lemma] : overrides_.lemmas)
    if (!tmpl.slot(role)) throw ConfigError("override names unknown role \"" + role + "\"");
  for (const auto& [role, bundle] : overrides_.features)
    if (!tmpl.slot(role)) throw ConfigError("override names unknown role \"" + role + "\"");

  candidates_.resize(tmpl.slots.size());
  for (std::size_t i = 0; i < tmpl.slots.size(); ++i) {
    const Slot& slot = tmpl.slots[i];
    if (!slot.lexical()) continue;
    std::optional<std::string> pinned = slot.lemma;
    if (auto it = overrides_.lemmas.find(slot.role); it != overrides_.lemmas.end()) pinned = it->second;
    auto found = query_entries(lexicon, slot.category, slot.constraints);
    if (pinned) {
      std::erase_if(found, [&](const LexicalEntry* e) { return e->lemma != *pinned; });
      if (found.empty())
        throw ConstraintError("template " + tmpl.suite_name + ": lemma \"" + *pinned + "\" is not a " +
                                  std::string(to_string(slot.category)) + " satisfying the constraints of slot " +
                                  slot.role,
                              "slot " + slot.role);
    }
    if (found.empty())
      throw ConstraintError("template " + tmpl.suite_name + ": no lexicon entry satisfies slot " + slot.role,
                            "slot " + slot.role);
    candidates_[i] = std::move(found);
  }
}

std::optional<std::string> PairSampler::try_once(RandomStream& rng, MinimalPair& out) const {
  const Template& t = *tmpl_;
  const std::size_t n = t.slots.size();
  Filled f;
  f.entries.assign(n, nullptr);
  f.bundles.assign(n, {});

  for (std::size_t i = 0; i < n; ++i) {
    const Slot& slot = t.slots[i];
    Bundle& b = f.bundles[i];
    if (slot.lexical()) f.entries[i] = pick(candidates_[i], rng);
    for (const auto& [feat, values] : slot.sample) b[feat] = pick(values, rng);
    for (const auto& feat : slot.inherit) {
      const LexicalEntry* e = f.entries[i];
      const FeatureValues* values = e ? e->feature(feat) : nullptr;
      if (!values)
        throw LookupError("slot " + slot.role + " inherits \"" + feat + "\" but the filler does not carry it");
      const auto allowed = intersect(*values, slot.constraints, feat);
      if (allowed.empty()) return "slot " + slot.role + " inherit " + feat;
      b[feat] = pick(allowed, rng);
    }
    for (const auto& [feat, value] : slot.fixed) b[feat] = value;
    if (auto it = overrides_.features.find(slot.role); it != overrides_.features.end())
      for (const auto& [feat, value] : it->second) b[feat] = value;
  }

  auto index_of = [&](const std::string& role) {
    for (std::size_t i = 0; i < n; ++i)
      if (t.slots[i].role == role) return i;
    throw LookupError("unknown role \"" + role + "\"");
  };

  // Value of a feature for a role: its bundle, then agreement, then a
  // single-valued lexical feature of its filler. "lemma" names the filler.
  std::function<std::string(std::size_t, const std::string&, int)> value_of = [&](std::size_t i,
                                                                                 const std::string& feat,
                                                                                 int depth) -> std::string {
    if (depth > static_cast<int>(n) + 1) throw LookupError("agreement cycle at slot " + t.slots[i].role);
    if (feat == "lemma" && f.entries[i]) return f.entries[i]->lemma;
    if (auto it = f.bundles[i].find(feat); it != f.bundles[i].end()) return it->second;
    if (auto it = t.slots[i].agree.find(feat); it != t.slots[i].agree.end())
      return value_of(index_of(it->second.role), it->second.feature, depth + 1);
    if (const LexicalEntry* e = f.entries[i]) {
      const FeatureValues* values = e->feature(feat);
      if (values && values->size() == 1) return values->front();
    }
    throw LookupError("slot " + t.slots[i].role + " has no single value for feature \"" + feat + "\"");
  };

  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [feat, src] : t.slots[i].agree)
      if (!f.bundles[i].contains(feat)) f.bundles[i][feat] = value_of(index_of(src.role), src.feature, 1);

  for (const auto& c : t.constraints) {
    switch (c.kind) {
      case ConstraintKind::number_mismatch: {
        const std::string focus = value_of(index_of(c.focus), c.feature, 0);
        for (const auto& other : c.others)
          if (value_of(index_of(other), c.feature, 0) == focus) return c.describe();
        break;
      }
      case ConstraintKind::differs:
        if (value_of(index_of(c.roles[0]), c.feature, 0) == value_of(index_of(c.roles[1]), c.feature, 0))
          return c.describe();
        break;
      case ConstraintKind::selects: {
        const LexicalEntry* head = f.entries[index_of(c.head)];
        const std::size_t d = index_of(c.dependent);
        const FeatureValues* wanted = head ? head->feature(c.head_feature) : nullptr;
        if (!wanted) return c.describe();
        FeatureValues have;
        if (auto it = f.bundles[d].find(c.dependent_feature); it != f.bundles[d].end()) {
          have.push_back(it->second);
        } else if (const LexicalEntry* e = f.entries[d]; e && e->feature(c.dependent_feature)) {
          have = *e->feature(c.dependent_feature);
        }
        const bool shared = std::any_of(have.begin(), have.end(), [&](const std::string& v) {
          return std::find(wanted->begin(), wanted->end(), v) != wanted->end();
        });
        if (!shared) return c.describe();
        break;
      }
    }
  }

  auto realize = [&](std::size_t i, const Bundle& b) -> std::string {
    const Slot& slot = t.slots[i];
    switch (slot.realize) {
      case Realization::lemma:
        return f.entries[i]->lemma;
      case Realization::inflect:
        return inflect(*tables_, *f.entries[i], b);
      case Realization::basque_auxiliary: {
        auto number = [&](const char* feat) -> std::optional<Number> {
          auto it = b.find(feat);
          if (it == b.end()) return std::nullopt;
          return parse_number(it->second);
        };
        BasqueAuxKey key;
        key.paradigm = *slot.paradigm;
        key.tense = parse_tense(b.at("tense"));
        key.subject = parse_number(b.at("subject_num"));
        key.direct_object = number("do_num");
        key.indirect_object = number("io_num");
        key.validate();
        return tables_->auxiliary_table().lookup(key);
      }
      case Realization::concord: {
        int cls = 0;
        try {
          cls = std::stoi(b.at("noun_class"));
        } catch (const std::exception&) {
          throw LookupError("concord slot " + slot.role + " needs a numeric noun_class");
        }
        return tables_->concord_table().apply({*slot.concord_slot, cls}, "");
      }
    }
    return {};
  };

  const std::size_t target = t.target_index();
  std::vector<std::string> words(n);
  for (std::size_t i = 0; i < n; ++i) {
    words[i] = realize(i, f.bundles[i]);
    if (words[i].empty()) throw LookupError("slot " + t.slots[i].role + " realized as an empty string");
  }

  Bundle alt = f.bundles[target];
  const TargetRule& rule = t.target;
  switch (rule.kind) {
    case TargetRule::Kind::flip:
      alt[rule.feature] = flip_value(rule.feature, alt.at(rule.feature));
      break;
    case TargetRule::Kind::set:
      alt[rule.feature] = rule.value;
      break;
    case TargetRule::Kind::copy:
      alt[rule.feature] = value_of(index_of(rule.from->role), rule.from->feature, 0);
      break;
  }
  if (alt == f.bundles[target]) return "targets_distinct";
  std::vector<std::string> alt_words = words;
  alt_words[target] = realize(target, alt);
  if (alt_words[target] == words[target]) return "targets_distinct";

  for (auto* w : {&words, &alt_words}) {
    (*w)[0] = text::capitalize_first((*w)[0]);
    (*w)[n - 1] += t.punctuation;
  }
  const std::string g = text::join(words);
  const std::string u = text::join(alt_words);
  SplitResult split;
  try {
    split = split_condition_target(g, u);
  } catch (const ValidationError&) {
    return "single_word_difference";
  }
  const std::string condition = text::join(std::vector<std::string>(words.begin(), words.begin() + target));
  if (split.condition != condition) return "single_word_difference";

  out.condition = split.condition;
  out.grammatical_target = split.grammatical_target;
  out.ungrammatical_target = split.ungrammatical_target;
  out.metadata = {};
  out.metadata.focus = t.focus;
  out.metadata.target_role = t.target.role;
  for (std::size_t i = 0; i < n; ++i) {
    if (f.entries[i]) out.metadata.lemmas[t.slots[i].role] = f.entries[i]->lemma;
    out.metadata.features[t.slots[i].role] = f.bundles[i];
  }
  out.metadata.ungrammatical_features = alt;
  return std::nullopt;
}

MinimalPair PairSampler::draw(RandomStream& rng) const {
  std::map<std::string, int> failures;
  MinimalPair pair;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    auto failed = try_once(rng, pair);
    if (!failed) return pair;
    ++failures[*failed];
  }
  std::string worst = "attempt budget";
  int most = -1;
  for (const auto& [name, count] : failures)
    if (count > most) most = count, worst = name;
  throw ConstraintError("template " + tmpl_->suite_name + ": constraint " + worst + " unsatisfied after " +
                            std::to_string(options_.max_attempts) + " attempts",
                        worst);
}

MinimalPair instantiate_pair(const Template& tmpl, const Lexicon& lexicon, const MorphologyTables& tables,
                             RandomStream& rng, const PairOverrides& overrides) {
  return PairSampler(tmpl, lexicon, tables, overrides).draw(rng);
}

TestSuite generate_suite(const Template& tmpl, const Lexicon& lexicon, const MorphologyTables& tables,
                         std::uint64_t seed, std::size_t n, const GenerateOptions& options) {
  const PairSampler sampler(tmpl, lexicon, tables, {}, {options.max_attempts});
  TestSuite suite{tmpl.suite_name, tmpl.language, tmpl.id, seed, tmpl.validated, {}};
  if (n == 0) return suite;

  std::vector<RandomStream> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.push_back(RandomStream::derive(seed, tmpl.id, i));

  std::vector<MinimalPair> first(n);
  std::vector<std::exception_ptr> errors(n);
  unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        first[i] = sampler.draw(streams[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::unordered_set<std::string> seen;
  suite.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    MinimalPair pair = std::move(first[i]);
    int redraws = 0;
    while (seen.contains(pair.grammatical_sentence())) {
      if (++redraws > options.max_attempts)
        throw ConstraintError("template " + tmpl.suite_name + ": only " + std::to_string(i) + " of " +
                                  std::to_string(n) + " unique pairs could be generated",
                              "unique_sentences");
      pair = sampler.draw(streams[i]);
    }
    seen.insert(pair.grammatical_sentence());
    pair.id = static_cast<std::int64_t>(i);
    suite.pairs.push_back(std::move(pair));
  }
  return suite;
}

}  // namespace tse
