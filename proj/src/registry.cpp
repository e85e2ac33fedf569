#include "tse/registry.hpp"

#include <set>

#include "json_util.hpp"
#include "tse/errors.hpp"

namespace tse {

using detail::json;
using detail::ordered_json;

const std::vector<ModelInfo>& default_registry() {
  static const std::vector<ModelInfo> models = [] {
    const std::string xglm45 = "trained on the 134-language corpus variant, unlike the other XGLM versions";
    return std::vector<ModelInfo>{
        {"mGPT-1.3B", "mGPT", "1.3B", 1'417'596'928, 61, "autoregressive", false, ""},
        {"mGPT-13B", "mGPT", "13B", 13'108'070'400, 61, "autoregressive", false, ""},
        {"BLOOM-560M", "BLOOM", "560M", 559'214'592, 46, "autoregressive", false, ""},
        {"BLOOM-1.1B", "BLOOM", "1.1B", 1'065'314'304, 46, "autoregressive", false, ""},
        {"BLOOM-1.7B", "BLOOM", "1.7B", 1'722'408'960, 46, "autoregressive", false, ""},
        {"BLOOM-3B", "BLOOM", "3B", 3'002'557'440, 46, "autoregressive", false, ""},
        {"BLOOM-7.1B", "BLOOM", "7.1B", 7'069'016'064, 46, "autoregressive", false, ""},
        {"BLOOM-176B", "BLOOM", "176B", 176'247'271'424, 46, "autoregressive", false, ""},
        {"XGLM-564M", "XGLM", "564M", 564'463'616, 30, "autoregressive", false, ""},
        {"XGLM-1.7B", "XGLM", "1.7B", 1'732'907'008, 30, "autoregressive", false, ""},
        {"XGLM-2.9B", "XGLM", "2.9B", 2'941'505'536, 30, "autoregressive", false, ""},
        {"XGLM-4.5B", "XGLM", "4.5B", 4'552'511'488, 134, "autoregressive", true, xglm45},
        {"XGLM-7.5B", "XGLM", "7.5B", 7'492'771'840, 30, "autoregressive", false, ""},
        {"mBERT", "mBERT", "base", 177'974'523, 104, "masked", true, "single version"},
        {"XLM-R-Base", "XLM-R", "Base", 278'295'186, 100, "masked", false, ""},
        {"XLM-R-Large", "XLM-R", "Large", 560'142'482, 100, "masked", false, ""},
        {"XLM-R-XL", "XLM-R", "XL", 3'482'741'760, 100, "masked", false, ""},
        {"XLM-R-XXL", "XLM-R", "XXL", 10'712'994'816, 100, "masked", false, ""},
    };
  }();
  return models;
}

const std::vector<std::string>& regression_families() {
  static const std::vector<std::string> families{"mGPT", "BLOOM", "XGLM", "XLM-R"};
  return families;
}

std::vector<ModelInfo> load_registry(const std::filesystem::path& path) {
  const std::string source = path.string();
  const json doc = detail::parse_json_strict(detail::read_file(path), source);
  if (detail::require_string(doc, "format", source) != "tse-registry/1")
    throw ParseError(source + ": unsupported registry format");
  const json& arr = detail::require(doc, "models", source);
  if (!arr.is_array()) throw ParseError(source + ": \"models\" must be an array");
  std::vector<ModelInfo> out;
  std::vector<std::string> issues;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = source + ": models[" + std::to_string(i) + "]";
    const json& m = arr[i];
    ModelInfo info;
    info.id = detail::require_string(m, "id", ctx);
    info.family = detail::require_string(m, "family", ctx);
    info.version = detail::require_string(m, "version", ctx);
    const json& pc = detail::require(m, "parameter_count", ctx);
    if (!pc.is_number_unsigned() || pc.get<std::uint64_t>() == 0) {
      issues.push_back(ctx + ": parameter_count must be a positive integer");
    } else {
      info.parameter_count = pc.get<std::uint64_t>();
    }
    info.languages_supported = m.value("languages_supported", 0u);
    info.architecture = detail::optional_string(m, "architecture");
    info.excluded_from_regression = m.value("excluded_from_regression", false);
    info.exclusion_reason = detail::optional_string(m, "exclusion_reason");
    if (info.excluded_from_regression && info.exclusion_reason.empty())
      issues.push_back(ctx + ": excluded models need an exclusion_reason");
    if (!ids.insert(info.id).second) issues.push_back(ctx + ": duplicate id \"" + info.id + "\"");
    out.push_back(std::move(info));
  }
  if (!issues.empty()) throw ValidationError(source, std::move(issues));
  return out;
}

std::string registry_to_json(const std::vector<ModelInfo>& models) {
  ordered_json arr = ordered_json::array();
  for (const auto& m : models) {
    ordered_json o = ordered_json::object();
    o["id"] = m.id;
    o["family"] = m.family;
    o["version"] = m.version;
    o["parameter_count"] = m.parameter_count;
    o["languages_supported"] = m.languages_supported;
    o["architecture"] = m.architecture;
    o["excluded_from_regression"] = m.excluded_from_regression;
    if (m.excluded_from_regression) o["exclusion_reason"] = m.exclusion_reason;
    arr.push_back(o);
  }
  ordered_json doc = ordered_json::object();
  doc["format"] = "tse-registry/1";
  doc["models"] = arr;
  return doc.dump(2) + "\n";
}

const ModelInfo* find_model(const std::vector<ModelInfo>& models, const std::string& id) {
  for (const auto& m : models)
    if (m.id == id) return &m;
  return nullptr;
}

}  // namespace tse
