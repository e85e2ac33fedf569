#include "tse/report.hpp"

#include <cstdio>

#include "tse/version.hpp"

namespace tse {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string header(const ReportMetadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += "# " + k + ": " + v + "\n";
  return out;
}

// Suite and model names are plain identifiers, but quote defensively.
std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

ReportMetadata default_report_metadata() {
  return {
      {"tool_version", std::string(kToolVersion)},
      {"ci_method", "Wilson score interval, 95%"},
      {"significance", "one-sided exact binomial test vs 0.5, alpha 0.05, no multiple-comparison correction"},
      {"language_average", "unweighted mean over (model, suite) cells"},
  };
}

std::string render_matrix_csv(const ResultsMatrix& results, const std::vector<ModelInfo>& registry,
                              const ReportMetadata& meta) {
  std::string out = header(meta);
  out += "model_id,family,version,parameter_count,suite,n,k_correct,accuracy,ci_low,ci_high,p_above,p_below,"
         "significance\n";
  // Registry order for models, table order for suites.
  std::vector<std::string> models;
  for (const auto& m : registry)
    for (const auto& id : results.models())
      if (id == m.id) models.push_back(id);
  for (const auto& id : results.models())
    if (!find_model(registry, id)) models.push_back(id);
  for (const auto& model : models) {
    const ModelInfo* info = find_model(registry, model);
    for (const auto& suite : results.suites()) {
      const SuiteResult* r = results.find(model, suite);
      if (!r) continue;
      const char* sig = r->above_chance() ? "above" : r->below_chance() ? "below" : "none";
      out += cell(model) + "," + cell(info ? info->family : "") + "," + cell(info ? info->version : "") + "," +
             (info ? std::to_string(info->parameter_count) : "") + "," + cell(suite) + "," + std::to_string(r->n) +
             "," + std::to_string(r->k_correct) + "," + num(r->accuracy) + "," + num(r->ci_low) + "," +
             num(r->ci_high) + "," + num(r->p_above) + "," + num(r->p_below) + "," + sig + "\n";
    }
  }
  return out;
}

std::string render_slopes_csv(const SlopeTable& table, const ReportMetadata& meta) {
  std::string out = header(meta);
  out += "# units: accuracy percentage points per billion parameters\n";
  out += "suite";
  for (const auto& f : table.families) out += "," + cell(f);
  out += ",Average\n";
  for (const auto& row : table.rows) {
    out += cell(row.suite);
    for (const auto& fit : row.fits) out += "," + format_slope(fit.slope);
    out += "," + format_slope(row.average) + "\n";
  }
  return out;
}

std::string render_complexity_csv(const std::vector<TrendPoint>& trends, const std::vector<DeltaSummary>& steps,
                                  const ReportMetadata& meta) {
  std::string out = header(meta);
  out += "# ci: mean accuracy over models +- 1.96 * standard error of the mean\n";
  out += "kind,language,group,level,suite,models,mean_accuracy,sem,ci_low,ci_high,suite_to,mean_delta_correct\n";
  for (const auto& t : trends)
    out += "trend," + t.key.language + "," + t.key.group + "," + std::to_string(t.key.level) + "," + cell(t.suite) +
           "," + std::to_string(t.accuracy.m) + "," + num(t.accuracy.mean) + "," + num(t.accuracy.sem) + "," +
           num(t.accuracy.low) + "," + num(t.accuracy.high) + ",,\n";
  for (const auto& s : steps) {
    const auto key = complexity_key(s.suite_from);
    out += "delta," + (key ? key->language + "," + key->group + "," + std::to_string(key->level) : std::string(",,")) +
           "," + cell(s.suite_from) + "," + std::to_string(s.per_model.size()) + ",,,,," + cell(s.suite_to) + "," +
           num(s.mean) + "\n";
  }
  return out;
}

std::string render_language_csv(const std::vector<LanguageSummary>& summary, const ReportMetadata& meta) {
  std::string out = header(meta);
  out += "language,cells,mean_accuracy\n";
  for (const auto& s : summary) out += s.language + "," + std::to_string(s.cells) + "," + num(s.mean_accuracy) + "\n";
  return out;
}

}  // namespace tse
