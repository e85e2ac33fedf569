#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tse {

struct ModelInfo {
  std::string id;       // e.g. "BLOOM-560M"; matches model_id in score files
  std::string family;   // mGPT, BLOOM, XGLM, mBERT, XLM-R
  std::string version;  // 560M, 1.1B, Base, ...
  std::uint64_t parameter_count = 0;
  unsigned languages_supported = 0;
  std::string architecture;  // autoregressive | masked
  bool excluded_from_regression = false;
  std::string exclusion_reason;

  double billions() const noexcept { return static_cast<double>(parameter_count) / 1e9; }

  friend bool operator==(const ModelInfo&, const ModelInfo&) = default;
};

// The 18 evaluated models with their published parameter counts.
const std::vector<ModelInfo>& default_registry();

// Reads {"format": "tse-registry/1", "models": [...]}. Ids must be unique and
// parameter counts positive.
std::vector<ModelInfo> load_registry(const std::filesystem::path& path);

std::string registry_to_json(const std::vector<ModelInfo>& models);

const ModelInfo* find_model(const std::vector<ModelInfo>& models, const std::string& id);

// Families with several versions, in slope-table column order.
const std::vector<std::string>& regression_families();

}  // namespace tse
