#pragma once

// HTTP client for the /nli sidecar protocol, and provider construction.
//
//   POST /nli  {"pairs": [{"premise": str, "hypothesis": str}, ...]}
//   200        {"probs": [[pe, pn, pc], ...]}
//   non-200    {"error": str}

#include <sese/providers.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace sese {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string excerpt(const std::string& s, std::size_t max = 200) {
  return s.size() <= max ? s : s.substr(0, max) + "...";
}

inline std::string with_context(const std::string& context, const std::string& text) {
  return context.empty() ? text : context + " " + text;
}

}  // namespace detail

class WireProvider final : public EntailmentProvider {
 public:
  explicit WireProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (const char* env = std::getenv("SESE_NLI_URL"); env && *env) cfg_.endpoint = env;
  }

  const std::string& endpoint() const noexcept { return cfg_.endpoint; }

  std::vector<NliTriple> fetch(const EntailmentRequest& req) const override {
    req.validate();
    const std::size_t total = req.pairs.size();
    std::vector<NliTriple> out(total);
    if (total == 0) return out;
    const std::size_t n_batches = (total + cfg_.batch_size - 1) / cfg_.batch_size;
    const std::size_t n_workers = std::min(cfg_.max_in_flight, n_batches);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
      httplib::Client client(cfg_.endpoint);
      const auto secs = std::chrono::duration<double>(cfg_.timeout_s);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
      client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
      for (std::size_t b; (b = next.fetch_add(1)) < n_batches;) {
        {
          std::lock_guard lk(failure_mu);
          if (failure) return;
        }
        const std::size_t lo = b * cfg_.batch_size, hi = std::min(total, lo + cfg_.batch_size);
        try {
          post_batch(client, req, lo, hi, out);
        } catch (...) {
          std::lock_guard lk(failure_mu);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    if (n_workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
  }

  std::string model_id() const override { return cfg_.model_id; }

 private:
  void post_batch(httplib::Client& client, const EntailmentRequest& req, std::size_t lo, std::size_t hi,
                  std::vector<NliTriple>& out) const {
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t s = lo; s < hi; ++s) {
      const auto& [p, h] = req.pairs[s];
      pairs.push_back({{"premise", detail::with_context(req.context, req.texts[p])},
                       {"hypothesis", detail::with_context(req.context, req.texts[h])}});
    }
    const std::string body = nlohmann::json{{"pairs", pairs}}.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));
      }
      auto res = client.Post("/nli", body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status) + ": " + server_error(res->body);
        continue;
      }
      if (res->status != 200)
        throw WireError("NLI service returned HTTP " + std::to_string(res->status) + ": " +
                        server_error(res->body));
      parse_reply(res->body, lo, hi, out);
      return;
    }
    throw WireError("NLI request to " + cfg_.endpoint + " failed after " + std::to_string(cfg_.max_retries + 1) +
                    " attempts: " + last_error);
  }

  static std::string server_error(const std::string& body) {
    try {
      const auto j = nlohmann::json::parse(body);
      if (j.is_object() && j.contains("error") && j["error"].is_string()) return j["error"].get<std::string>();
    } catch (const std::exception&) {
    }
    return detail::excerpt(body);
  }

  static void parse_reply(const std::string& body, std::size_t lo, std::size_t hi, std::vector<NliTriple>& out) {
    auto malformed = [&](const std::string& why) {
      return WireError("malformed NLI reply (" + why + "): " + detail::excerpt(body));
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const std::exception&) {
      throw malformed("not JSON");
    }
    if (!j.is_object() || !j.contains("probs") || !j["probs"].is_array()) throw malformed("missing 'probs'");
    const auto& probs = j["probs"];
    if (probs.size() != hi - lo)
      throw malformed("expected " + std::to_string(hi - lo) + " triples, got " + std::to_string(probs.size()));
    for (std::size_t k = 0; k < probs.size(); ++k) {
      const auto& t = probs[k];
      if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() || !t[2].is_number())
        throw malformed("entry " + std::to_string(k) + " is not a triple");
      NliTriple tri{t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
      if (!is_simplex(tri)) throw malformed("entry " + std::to_string(k) + " is not a probability simplex");
      out[lo + k] = tri;
    }
  }

  ProviderConfig cfg_;
};

/// Build the configured provider, wrapped in a cache when cache_dir is set.
inline std::shared_ptr<const EntailmentProvider> make_provider(const ProviderConfig& cfg) {
  cfg.validate();
  std::shared_ptr<const EntailmentProvider> p;
  switch (cfg.kind) {
    case ProviderKind::mock:
      p = std::make_shared<MockProvider>(cfg.seed);
      break;
    case ProviderKind::file:
      if (cfg.path.empty()) throw std::invalid_argument("file provider needs a path");
      p = std::make_shared<FileProvider>(cfg.path);
      break;
    case ProviderKind::wire:
      p = std::make_shared<WireProvider>(cfg);
      break;
  }
  if (cfg.cache_dir) p = std::make_shared<CachingProvider>(p, *cfg.cache_dir);
  return p;
}

inline std::vector<NliTriple> fetch_entailment(const ProviderConfig& cfg, const EntailmentRequest& req) {
  return make_provider(cfg)->fetch(req);
}

}  // namespace sese
