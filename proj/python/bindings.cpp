#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tse/analysis.hpp"
#include "tse/cli.hpp"
#include "tse/errors.hpp"
#include "tse/generator.hpp"
#include "tse/registry.hpp"
#include "tse/suite_io.hpp"
#include "tse/version.hpp"

namespace py = pybind11;

namespace {

py::dict pair_dict(const tse::MinimalPair& p) {
  py::dict d;
  d["id"] = p.id;
  d["condition"] = p.condition;
  d["grammatical_target"] = p.grammatical_target;
  d["ungrammatical_target"] = p.ungrammatical_target;
  d["lemmas"] = p.metadata.lemmas;
  d["features"] = p.metadata.features;
  return d;
}

tse::Tail parse_tail(const std::string& s) {
  if (s == "above") return tse::Tail::above;
  if (s == "below") return tse::Tail::below;
  throw py::value_error("tail must be 'above' or 'below'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Targeted syntactic evaluation toolkit (C++ core)";
  m.attr("__version__") = std::string(tse::kToolVersion);

  // The base goes first: translators registered later are tried first.
  auto& base = py::register_exception<tse::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<tse::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<tse::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<tse::ConstraintError>(m, "ConstraintError", base.ptr());

  m.def("split_condition_target", [](const std::string& g, const std::string& u) {
    auto s = tse::split_condition_target(g, u);
    return py::make_tuple(s.condition, s.grammatical_target, s.ungrammatical_target);
  });

  m.def("binomial_p", [](std::uint64_t k, std::uint64_t n, const std::string& tail) {
    return tse::binomial_p(k, n, parse_tail(tail));
  }, py::arg("k"), py::arg("n"), py::arg("tail") = "above");

  m.def("wilson_interval", [](std::uint64_t k, std::uint64_t n) {
    auto ci = tse::wilson_interval(k, n);
    return py::make_tuple(ci.low, ci.high);
  });

  m.def("fit_slope", [](const std::vector<std::pair<double, double>>& pts) {
    std::vector<tse::Point> points;
    for (const auto& [x, y] : pts) points.push_back({x, y});
    auto fit = tse::fit_slope(points);
    return py::make_tuple(fit.slope, fit.intercept);
  }, "Least-squares slope and intercept of (x, y) points.");

  m.def("complexity_key", [](const std::string& name) -> py::object {
    auto key = tse::complexity_key(name);
    if (!key) return py::none();
    py::dict d;
    d["language"] = key->language;
    d["group"] = key->group;
    d["level"] = key->level;
    return d;
  });

  m.def("default_registry", [] {
    py::list out;
    for (const auto& mi : tse::default_registry()) {
      py::dict d;
      d["id"] = mi.id;
      d["family"] = mi.family;
      d["version"] = mi.version;
      d["parameter_count"] = mi.parameter_count;
      d["excluded_from_regression"] = mi.excluded_from_regression;
      out.append(d);
    }
    return out;
  });

  m.def("generate", [](const std::filesystem::path& template_path, const std::filesystem::path& lexicon_path,
                       const std::filesystem::path& tables_dir, std::uint64_t seed, std::size_t n) {
    tse::TestSuite suite;
    {
      py::gil_scoped_release release;
      const auto tmpl = tse::load_template(template_path);
      const auto lex = tse::load_lexicon(lexicon_path);
      const auto tables = tse::MorphologyTables::load_dir(tables_dir);
      suite = tse::generate_suite(tmpl, lex, tables, seed, n);
    }
    py::list out;
    for (const auto& p : suite.pairs) out.append(pair_dict(p));
    return out;
  }, py::arg("template"), py::arg("lexicon"), py::arg("tables"), py::arg("seed"), py::arg("n") = 1000);

  m.def("run", [](const std::vector<std::string>& args) {
    std::vector<std::string> argv{"tsekit"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = tse::cli::run(argv, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
