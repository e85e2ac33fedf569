#pragma once

#include <atomic>
#include <chrono>
#include <string>
#include <vector>

#include "tse/scoring.hpp"

namespace tse {

struct RemoteScorerOptions {
  std::string endpoint;  // e.g. http://localhost:8000
  std::string model_id;
  std::string mode = "causal";  // causal | masked_pll | mock
  std::size_t batch_size = 64;
  unsigned max_in_flight = 4;
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_factor = 2.0;
  std::chrono::seconds timeout{120};
  // Bearer token, if the service requires one. Read from this environment
  // variable when `token` is empty.
  std::string token;
  std::string token_env = "TSEKIT_SCORER_TOKEN";
};

struct HealthStatus {
  std::string status;
  std::vector<std::string> models_loaded;
};

// Client for the scoring service protocol:
//   POST /score {"model_id", "mode", "items": [{"id", "condition", "target"}]}
//     -> {"results": [{"id", "logp"}]}
//   GET /health -> {"status", "models_loaded"}
// Requests are retried with exponential backoff on connection errors, HTTP 429
// and 5xx. The service answers a request all-or-nothing, and each item id is
// accepted at most once per batch, so a retry can never count a pair twice.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(RemoteScorerOptions options);

  double score(const std::string& condition, const std::string& target) const override;
  std::vector<double> score_batch(const std::vector<ScoreItem>& items) const override;
  std::string descriptor() const override;
  unsigned max_concurrency() const override { return options_.max_in_flight; }
  std::size_t preferred_batch_size() const override { return options_.batch_size; }

  HealthStatus health() const;

  // Number of HTTP requests sent, including retries.
  std::size_t requests_sent() const noexcept { return requests_.load(); }

 private:
  RemoteScorerOptions options_;
  std::string host_;
  std::string token_;
  mutable std::atomic<std::size_t> requests_{0};
};

}  // namespace tse
