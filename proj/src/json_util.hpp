#pragma once

// Internal helpers for reading the project's JSON documents.

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tse/errors.hpp"

namespace tse::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Parses JSON and rejects objects with repeated keys (nlohmann keeps the last
// one silently).
inline json parse_json_strict(std::string_view text, const std::string& source) {
  std::vector<std::set<std::string>> open_objects;
  std::string duplicate;
  auto callback = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        open_objects.emplace_back();
        break;
      case json::parse_event_t::key:
        if (!open_objects.back().insert(parsed.get<std::string>()).second && duplicate.empty())
          duplicate = parsed.get<std::string>();
        break;
      case json::parse_event_t::object_end:
        open_objects.pop_back();
        break;
      default:
        break;
    }
    return true;
  };
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), callback);
  } catch (const json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!duplicate.empty()) throw ParseError(source + ": duplicate key \"" + duplicate + "\"");
  return doc;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path.string());
}

inline const json& require(const json& obj, const char* field, const std::string& ctx) {
  if (!obj.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(ctx + ": missing field \"" + field + "\"");
  return *it;
}

inline std::string require_string(const json& obj, const char* field, const std::string& ctx) {
  const json& v = require(obj, field, ctx);
  if (!v.is_string()) throw ParseError(ctx + ": field \"" + field + "\" must be a string");
  return v.get<std::string>();
}

inline double require_finite(const json& obj, const char* field, const std::string& ctx) {
  const json& v = require(obj, field, ctx);
  if (!v.is_number()) throw ParseError(ctx + ": field \"" + field + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(ctx + ": field \"" + field + "\" is not finite");
  return d;
}

inline std::string optional_string(const json& obj, const char* field, std::string fallback = {}) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw ParseError(std::string("field \"") + field + "\" must be a string");
  return it->get<std::string>();
}

// A JSON value that is either a string or an array of strings.
inline std::vector<std::string> string_or_list(const json& v, const std::string& ctx) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_number_integer()) {
    out.push_back(std::to_string(v.get<long long>()));
  } else if (v.is_array()) {
    for (const auto& item : v) {
      if (item.is_string()) {
        out.push_back(item.get<std::string>());
      } else if (item.is_number_integer()) {
        out.push_back(std::to_string(item.get<long long>()));
      } else {
        throw ParseError(ctx + ": expected strings");
      }
    }
  } else {
    throw ParseError(ctx + ": expected a string or a list of strings");
  }
  return out;
}

}  // namespace tse::detail
