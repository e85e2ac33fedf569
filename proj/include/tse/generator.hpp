#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "tse/lexicon.hpp"
#include "tse/morphology.hpp"
#include "tse/rng.hpp"
#include "tse/template.hpp"

namespace tse {

struct PairMetadata {
  std::optional<std::string> focus;
  std::string target_role;
  std::map<std::string, std::string> lemmas;     // lexical slots only
  std::map<std::string, Bundle> features;        // every slot's realized bundle
  Bundle ungrammatical_features;                 // the target slot's alternate bundle

  friend bool operator==(const PairMetadata&, const PairMetadata&) = default;
};

struct MinimalPair {
  std::int64_t id = 0;
  std::string condition;
  std::string grammatical_target;
  std::string ungrammatical_target;
  PairMetadata metadata;

  std::string grammatical_sentence() const { return condition + " " + grammatical_target; }
  std::string ungrammatical_sentence() const { return condition + " " + ungrammatical_target; }

  friend bool operator==(const MinimalPair&, const MinimalPair&) = default;
};

struct TestSuite {
  std::string name;
  Language language = Language::basque;
  std::string template_id;
  std::uint64_t seed = 0;
  bool validated = true;
  std::vector<MinimalPair> pairs;

  friend bool operator==(const TestSuite&, const TestSuite&) = default;
};

struct SplitResult {
  std::string condition;
  std::string grammatical_target;
  std::string ungrammatical_target;
};

// Splits two sentences that differ in exactly one whitespace token into the
// shared word prefix and the two remainders. Throws ValidationError otherwise.
SplitResult split_condition_target(const std::string& grammatical, const std::string& ungrammatical);

// Forced choices, mainly for reproducing fixed examples. Lemmas pin the
// filler of a role; features override sampled or inherited values.
struct PairOverrides {
  std::map<std::string, std::string> lemmas;
  std::map<std::string, Bundle> features;
};

struct SamplerOptions {
  int max_attempts = 1000;
};

// Draws pairs for one template. Candidate lists per slot are computed once
// so that repeated draws only pay for sampling.
class PairSampler {
 public:
  PairSampler(const Template& tmpl, const Lexicon& lexicon, const MorphologyTables& tables,
              PairOverrides overrides = {}, SamplerOptions options = {});

  // One pair satisfying every constraint; ConstraintError naming the most
  // frequently violated constraint once the attempt budget is spent.
  MinimalPair draw(RandomStream& rng) const;

  const Template& tmpl() const noexcept { return *tmpl_; }

 private:
  struct Filled;
  std::optional<std::string> try_once(RandomStream& rng, MinimalPair& out) const;

  const Template* tmpl_;
  const Lexicon* lexicon_;
  const MorphologyTables* tables_;
  PairOverrides overrides_;
  SamplerOptions options_;
  std::vector<std::vector<const LexicalEntry*>> candidates_;
  std::vector<std::string> agree_order_;
};

MinimalPair instantiate_pair(const Template& tmpl, const Lexicon& lexicon, const MorphologyTables& tables,
                             RandomStream& rng, const PairOverrides& overrides = {});

struct GenerateOptions {
  unsigned jobs = 0;  // 0: hardware concurrency
  int max_attempts = 1000;
};

// n pairs with unique grammatical sentences. Pair i draws from the stream
// RandomStream::derive(seed, template id, i); on a duplicate it keeps drawing
// from the same stream. Duplicates are resolved in index order, so the result
// depends only on (template, lexicon, tables, seed, n).
TestSuite generate_suite(const Template& tmpl, const Lexicon& lexicon, const MorphologyTables& tables,
                         std::uint64_t seed, std::size_t n = 1000, const GenerateOptions& options = {});

}  // namespace tse
