#pragma once

// Sources of NLI entailment probabilities: a deterministic mock, a
// file-backed lookup, and a content-addressed on-disk cache that wraps any
// provider. The HTTP client lives in wire.hpp.

#include <sese/semantic_graph.hpp>

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace sese {

/// Texts to compare and the ordered (premise, hypothesis) index pairs.
struct EntailmentRequest {
  std::string context;
  std::vector<std::string> texts;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  void validate() const {
    for (const auto& [p, h] : pairs) {
      if (p >= texts.size() || h >= texts.size())
        throw std::invalid_argument("entailment pair index out of range");
      if (p == h) throw std::invalid_argument("entailment pair has premise == hypothesis");
    }
  }

  /// Every ordered pair i != j in row-major order.
  static EntailmentRequest all_pairs(std::string context, std::vector<std::string> texts) {
    EntailmentRequest r{std::move(context), std::move(texts), {}};
    for (std::size_t i = 0; i < r.texts.size(); ++i)
      for (std::size_t j = 0; j < r.texts.size(); ++j)
        if (i != j) r.pairs.emplace_back(i, j);
    return r;
  }
};

enum class ProviderKind { file, wire, mock };

inline ProviderKind parse_provider_kind(const std::string& s) {
  if (s == "file") return ProviderKind::file;
  if (s == "wire") return ProviderKind::wire;
  if (s == "mock") return ProviderKind::mock;
  throw std::invalid_argument("unknown provider kind '" + s + "'");
}

struct ProviderConfig {
  ProviderKind kind = ProviderKind::mock;
  std::string endpoint = "http://127.0.0.1:8080";  // wire
  std::string path;                                 // file
  double timeout_s = 30.0;
  int max_retries = 3;
  int backoff_ms = 200;
  std::optional<std::string> cache_dir;
  std::uint64_t seed = 0;  // mock
  std::string model_id = "khalidalt/DeBERTa-v3-large-mnli";
  std::size_t max_in_flight = 8;
  std::size_t batch_size = 64;

  void validate() const {
    if (!(timeout_s > 0.0)) throw std::invalid_argument("provider timeout must be > 0");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (max_in_flight < 1 || batch_size < 1) throw std::invalid_argument("batching limits must be >= 1");
  }
};

class EntailmentProvider {
 public:
  virtual ~EntailmentProvider() = default;
  /// One simplex triple per requested pair, in request order. Must be safe
  /// to call concurrently.
  virtual std::vector<NliTriple> fetch(const EntailmentRequest& req) const = 0;
  virtual std::string model_id() const = 0;
};

inline std::array<unsigned char, 32> sha256(const std::string& data) {
  std::array<unsigned char, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
    throw std::runtime_error("SHA-256 failed");
  return out;
}

inline std::string to_hex(const std::array<unsigned char, 32>& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (unsigned char b : digest) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 15]);
  }
  return s;
}

/// Deterministic stand-in for an NLI model.
///
/// Equal texts give (1, 0, 0). Otherwise the triple is derived from
/// SHA-256(seed as 8 little-endian bytes || context || 0x00 || premise ||
/// 0x00 || hypothesis): the first three big-endian 32-bit words a, b, c
/// yield ((a+1), (b+1), (c+1)) / (a + b + c + 3). Only exact IEEE
/// arithmetic is involved, so output is identical across platforms.
class MockProvider final : public EntailmentProvider {
 public:
  explicit MockProvider(std::uint64_t seed = 0) : seed_(seed) {}

  NliTriple triple(const std::string& context, const std::string& premise,
                   const std::string& hypothesis) const {
    if (premise == hypothesis) return {1.0, 0.0, 0.0};
    std::string buf(8, '\0');
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((seed_ >> (8 * i)) & 0xff);
    buf += context;
    buf.push_back('\0');
    buf += premise;
    buf.push_back('\0');
    buf += hypothesis;
    const auto d = sha256(buf);
    auto word = [&](int k) {
      return (std::uint64_t{d[4 * k]} << 24) | (std::uint64_t{d[4 * k + 1]} << 16) |
             (std::uint64_t{d[4 * k + 2]} << 8) | std::uint64_t{d[4 * k + 3]};
    };
    const double a = static_cast<double>(word(0) + 1);
    const double b = static_cast<double>(word(1) + 1);
    const double c = static_cast<double>(word(2) + 1);
    const double s = a + b + c;
    return {a / s, b / s, c / s};
  }

  std::vector<NliTriple> fetch(const EntailmentRequest& req) const override {
    req.validate();
    std::vector<NliTriple> out;
    out.reserve(req.pairs.size());
    for (const auto& [p, h] : req.pairs) out.push_back(triple(req.context, req.texts[p], req.texts[h]));
    return out;
  }

  std::string model_id() const override { return "mock-sha256-seed" + std::to_string(seed_); }

 private:
  std::uint64_t seed_;
};

/// One line of an entailment fixture file.
struct EntailmentRecord {
  std::string id;
  std::string context;
  std::vector<std::string> texts;
  EntailmentMatrix matrix;
};

/// Parse a probs array (n x n x 3). Diagonal triples are read but ignored.
inline EntailmentMatrix parse_probs(const nlohmann::json& probs, std::size_t n) {
  if (!probs.is_array() || probs.size() != n)
    throw std::invalid_argument("'probs' must be an array of " + std::to_string(n) + " rows");
  std::vector<NliTriple> flat;
  flat.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = probs[i];
    if (!row.is_array() || row.size() != n)
      throw std::invalid_argument("'probs' row " + std::to_string(i) + " must hold " + std::to_string(n) +
                                  " triples");
    for (std::size_t j = 0; j < n; ++j) {
      const auto& t = row[j];
      if (i == j && (t.is_null() || (t.is_array() && t.empty()))) {
        flat.push_back({1.0, 0.0, 0.0});
        continue;
      }
      if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() || !t[2].is_number())
        throw std::invalid_argument("'probs' entry (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") must be [pe, pn, pc]");
      flat.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
    }
  }
  return EntailmentMatrix(n, std::move(flat));
}

inline EntailmentRecord parse_entailment_record(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  EntailmentRecord r;
  if (!j.contains("id") || !j["id"].is_string()) throw std::invalid_argument("missing string field 'id'");
  r.id = j["id"].get<std::string>();
  if (j.contains("context")) r.context = j["context"].get<std::string>();
  if (!j.contains("texts") || !j["texts"].is_array()) throw std::invalid_argument("missing array field 'texts'");
  r.texts = j["texts"].get<std::vector<std::string>>();
  if (r.texts.size() < 2) throw std::invalid_argument("record " + r.id + ": need at least 2 texts");
  if (!j.contains("probs")) throw std::invalid_argument("missing field 'probs'");
  r.matrix = parse_probs(j["probs"], r.texts.size());
  return r;
}

/// Load a JSON-lines entailment fixture; errors carry the line number.
inline std::vector<EntailmentRecord> load_entailment_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<EntailmentRecord> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_entailment_record(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Answers requests from a fixture file. A request whose context and texts
/// match a record exactly is served by index from that record; otherwise
/// each pair is looked up by (context, premise, hypothesis), where a later
/// record overrides an earlier one.
class FileProvider final : public EntailmentProvider {
 public:
  explicit FileProvider(const std::filesystem::path& path) : records_(load_entailment_file(path)) {
    for (std::size_t r = 0; r < records_.size(); ++r) {
      const auto& rec = records_[r];
      by_texts_[{rec.context, rec.texts}] = r;
      for (std::size_t i = 0; i < rec.texts.size(); ++i)
        for (std::size_t j = 0; j < rec.texts.size(); ++j)
          if (i != j) table_[{rec.context, rec.texts[i], rec.texts[j]}] = rec.matrix(i, j);
    }
  }

  std::vector<NliTriple> fetch(const EntailmentRequest& req) const override {
    req.validate();
    std::vector<NliTriple> out;
    out.reserve(req.pairs.size());
    if (auto rec = by_texts_.find({req.context, req.texts}); rec != by_texts_.end()) {
      const auto& m = records_[rec->second].matrix;
      for (const auto& [p, h] : req.pairs) out.push_back(m(p, h));
      return out;
    }
    for (const auto& [p, h] : req.pairs) {
      auto it = table_.find({req.context, req.texts[p], req.texts[h]});
      if (it == table_.end())
        throw std::runtime_error("no entailment fixture for pair (" + std::to_string(p) + "," +
                                 std::to_string(h) + ")");
      out.push_back(it->second);
    }
    return out;
  }

  std::string model_id() const override { return "file"; }

 private:
  std::vector<EntailmentRecord> records_;
  std::map<std::pair<std::string, std::vector<std::string>>, std::size_t> by_texts_;
  std::map<std::tuple<std::string, std::string, std::string>, NliTriple> table_;
};

/// Wraps a provider with an on-disk cache. Keys are
/// SHA-256(context || 0x00 || premise || 0x00 || hypothesis || 0x00 || model id);
/// each entry is a small JSON file written atomically via rename.
class CachingProvider final : public EntailmentProvider {
 public:
  CachingProvider(std::shared_ptr<const EntailmentProvider> inner, std::filesystem::path dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::string key(const std::string& context, const std::string& premise, const std::string& hypothesis) const {
    std::string buf = context;
    buf.push_back('\0');
    buf += premise;
    buf.push_back('\0');
    buf += hypothesis;
    buf.push_back('\0');
    buf += inner_->model_id();
    return to_hex(sha256(buf));
  }

  std::vector<NliTriple> fetch(const EntailmentRequest& req) const override {
    req.validate();
    std::vector<NliTriple> out(req.pairs.size());
    EntailmentRequest misses{req.context, req.texts, {}};
    std::vector<std::size_t> miss_slots;
    for (std::size_t s = 0; s < req.pairs.size(); ++s) {
      const auto& [p, h] = req.pairs[s];
      if (auto hit = lookup(key(req.context, req.texts[p], req.texts[h]))) {
        out[s] = *hit;
      } else {
        misses.pairs.push_back(req.pairs[s]);
        miss_slots.push_back(s);
      }
    }
    if (!misses.pairs.empty()) {
      const auto fresh = inner_->fetch(misses);
      for (std::size_t k = 0; k < fresh.size(); ++k) {
        out[miss_slots[k]] = fresh[k];
        const auto& [p, h] = misses.pairs[k];
        store(key(req.context, req.texts[p], req.texts[h]), fresh[k]);
      }
    }
    return out;
  }

  std::string model_id() const override { return inner_->model_id(); }

 private:
  std::optional<NliTriple> lookup(const std::string& k) const {
    std::ifstream in(dir_ / (k + ".json"));
    if (!in) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(in);
      NliTriple t{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
      if (!is_simplex(t)) return std::nullopt;
      return t;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  void store(const std::string& k, const NliTriple& t) const {
    const auto tmp = dir_ / (k + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
      std::ofstream os(tmp);
      char buf[128];
      std::snprintf(buf, sizeof buf, "[%.17g,%.17g,%.17g]", t[0], t[1], t[2]);
      os << buf;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, dir_ / (k + ".json"), ec);
    if (ec) std::filesystem::remove(tmp, ec);
  }

  std::shared_ptr<const EntailmentProvider> inner_;
  std::filesystem::path dir_;
};

/// Fetch every ordered pair and assemble the matrix, rejecting any triple
/// that is not a simplex.
inline EntailmentMatrix fetch_matrix(const EntailmentProvider& provider, const std::string& context,
                                     const std::vector<std::string>& texts) {
  const auto req = EntailmentRequest::all_pairs(context, texts);
  const auto triples = provider.fetch(req);
  if (triples.size() != req.pairs.size())
    throw std::runtime_error("provider returned " + std::to_string(triples.size()) + " triples for " +
                             std::to_string(req.pairs.size()) + " pairs");
  const std::size_t n = texts.size();
  std::vector<NliTriple> flat(n * n, NliTriple{1.0, 0.0, 0.0});
  for (std::size_t s = 0; s < req.pairs.size(); ++s) {
    const auto& [p, h] = req.pairs[s];
    flat[p * n + h] = triples[s];
  }
  return EntailmentMatrix(n, std::move(flat));
}

}  // namespace sese
