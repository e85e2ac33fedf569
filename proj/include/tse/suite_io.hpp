#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tse/generator.hpp"

namespace tse {

// One JSON object per line, fields in the order suite, id, condition,
// grammatical_target, ungrammatical_target, metadata.
std::string suite_to_jsonl(const TestSuite& suite);
std::string suite_manifest(const TestSuite& suite);

// Writes <dir>/<name>.jsonl and <dir>/<name>.manifest.json. Refuses suites
// containing non-NFC text.
void export_suite(const TestSuite& suite, const std::filesystem::path& dir);

// Reads a suite file and its sidecar manifest.
TestSuite read_suite(const std::filesystem::path& jsonl_path);

// Every suite in `dir` (score files excluded), ordered by name.
std::vector<TestSuite> read_suites(const std::filesystem::path& dir);

std::filesystem::path suite_path(const std::filesystem::path& dir, const std::string& name);
std::filesystem::path suite_manifest_path(const std::filesystem::path& dir, const std::string& name);

// Human-validation export: the two sentences of a pair in random order.
struct ValidationItem {
  std::string suite;
  std::int64_t pair_id = 0;
  std::string sentence_a;
  std::string sentence_b;
  char grammatical = 'A';
};

// k pairs per suite, drawn without replacement, then shuffled across the
// whole export. Deterministic in (suites, k, seed).
std::vector<ValidationItem> sample_validation_subset(const std::vector<TestSuite>& suites, std::size_t k,
                                                     std::uint64_t seed);
void write_validation_subset(const std::vector<ValidationItem>& items, const std::filesystem::path& path);

}  // namespace tse
