#include "tse/remote_scorer.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_map>

#include "json_util.hpp"
#include "tse/errors.hpp"
#include "tse/text.hpp"

namespace tse {

using detail::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint parse_endpoint(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  if (text::starts_with(url, "https://"))
    throw ConfigError("https endpoints are not supported; put a TLS proxy in front or use http://");
  if (!text::starts_with(url, "http://")) throw ConfigError("endpoint must start with http://: " + url);
  const auto slash = url.find('/', std::string("http://").size());
  if (slash == std::string::npos) return {url, ""};
  return {url.substr(0, slash), url.substr(slash)};
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

RemoteScorer::RemoteScorer(RemoteScorerOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ConfigError("remote scorer needs an endpoint");
  if (options_.model_id.empty()) throw ConfigError("remote scorer needs a model id");
  if (options_.mode != "causal" && options_.mode != "masked_pll" && options_.mode != "mock")
    throw ConfigError("unknown scoring mode \"" + options_.mode + "\"");
  if (options_.batch_size == 0) throw ConfigError("batch size must be positive");
  if (options_.max_in_flight == 0) throw ConfigError("max in-flight requests must be positive");
  if (options_.max_retries < 0) throw ConfigError("max retries must be non-negative");
  host_ = parse_endpoint(options_.endpoint).origin;
  token_ = options_.token;
  if (token_.empty() && !options_.token_env.empty())
    if (const char* env = std::getenv(options_.token_env.c_str())) token_ = env;
}

std::string RemoteScorer::descriptor() const {
  return "remote:" + options_.endpoint + ";model=" + options_.model_id + ";mode=" + options_.mode;
}

double RemoteScorer::score(const std::string& condition, const std::string& target) const {
  return score_batch({{"0", condition, target}}).front();
}

std::vector<double> RemoteScorer::score_batch(const std::vector<ScoreItem>& items) const {
  if (items.empty()) return {};
  const Endpoint ep = parse_endpoint(options_.endpoint);

  json body = {{"model_id", options_.model_id}, {"mode", options_.mode}, {"items", json::array()}};
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!index.emplace(items[i].id, i).second) throw Error("duplicate item id in batch: " + items[i].id);
    body["items"].push_back({{"id", items[i].id}, {"condition", items[i].condition}, {"target", items[i].target}});
  }
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  auto backoff = options_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * options_.backoff_factor));
    }
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(options_.timeout);
    cli.set_read_timeout(options_.timeout);
    cli.set_write_timeout(options_.timeout);
    ++requests_;
    auto res = cli.Post(ep.prefix + "/score", headers, payload, "application/json");
    if (!res) {
      last_error = "POST " + ep.prefix + "/score: " + httplib::to_string(res.error());
      continue;
    }
    if (transient(res->status)) {
      last_error = "POST " + ep.prefix + "/score returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw TransportError("POST " + ep.prefix + "/score returned HTTP " + std::to_string(res->status) + ": " +
                           res->body.substr(0, 200));

    // The whole batch succeeds or fails together. Each id is accepted once.
    const json doc = detail::parse_json_strict(res->body, "score response");
    const json& results = detail::require(doc, "results", "score response");
    if (!results.is_array() || results.size() != items.size())
      throw Error("score response has " + std::to_string(results.is_array() ? results.size() : 0) +
                  " results for " + std::to_string(items.size()) + " items");
    std::vector<double> out(items.size(), std::nan(""));
    std::vector<char> seen(items.size(), 0);
    for (const auto& r : results) {
      const std::string id = detail::require_string(r, "id", "score response");
      auto it = index.find(id);
      if (it == index.end()) throw Error("score response has unknown id " + id);
      if (seen[it->second]) throw Error("score response repeats id " + id);
      seen[it->second] = 1;
      out[it->second] = detail::require_finite(r, "logp", "score response item " + id);
    }
    return out;
  }
  throw TransportError(last_error + " (after " + std::to_string(options_.max_retries + 1) + " attempts)");
}

HealthStatus RemoteScorer::health() const {
  const Endpoint ep = parse_endpoint(options_.endpoint);
  httplib::Client cli(ep.origin);
  cli.set_connection_timeout(options_.timeout);
  cli.set_read_timeout(options_.timeout);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  ++requests_;
  auto res = cli.Get(ep.prefix + "/health", headers);
  if (!res) throw TransportError("GET " + ep.prefix + "/health: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("GET /health returned HTTP " + std::to_string(res->status));
  const json doc = detail::parse_json_strict(res->body, "health response");
  HealthStatus h;
  h.status = detail::require_string(doc, "status", "health response");
  if (auto it = doc.find("models_loaded"); it != doc.end() && it->is_array())
    for (const auto& m : *it) h.models_loaded.push_back(m.get<std::string>());
  return h;
}

}  // namespace tse
