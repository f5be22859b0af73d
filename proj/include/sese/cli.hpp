#pragma once

// Command implementations behind the `sese` executable. Each takes a
// RunConfig plus streams and returns a process exit code:
// 0 success, 1 fatal, 2 some records failed.

#include <sese/io.hpp>
#include <sese/wire.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace sese {

enum class RunMode { sentence, claims };

inline RunMode parse_run_mode(const std::string& s) {
  if (s == "sentence") return RunMode::sentence;
  if (s == "claims") return RunMode::claims;
  throw std::invalid_argument("unknown mode '" + s + "' (expected sentence or claims)");
}

inline ProviderConfig file_provider() {
  ProviderConfig p;
  p.kind = ProviderKind::file;
  return p;
}

struct RunConfig {
  RunMode mode = RunMode::sentence;
  std::size_t k = 0;  // 0 selects the mode default
  ProviderConfig provider = file_provider();
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  bool ci = false;
  std::size_t n_resamples = 1000;
  std::string method = "sese";
  bool curve = false;
  bool keep_tree = false;
  std::optional<std::string> id;
  std::optional<std::string> output_json;  // eval only

  std::size_t height() const {
    if (k > 0) return k;
    return mode == RunMode::sentence ? kDefaultSentenceHeight : kDefaultClaimHeight;
  }

  void validate() const {
    if (jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
    provider.validate();
  }
};

namespace detail {

/// A file provider without a path means "use the matrices embedded in the
/// input records".
inline std::shared_ptr<const EntailmentProvider> provider_for(const RunConfig& cfg) {
  if (cfg.provider.kind == ProviderKind::file && cfg.provider.path.empty()) return nullptr;
  return make_provider(cfg.provider);
}

inline std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

struct LineResult {
  std::string line;
  std::string error;
  double score_sum = 0.0;
  std::size_t score_count = 0;
};

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += jobs) f(i);
    });
  for (auto& t : pool) t.join();
}

inline bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace detail

/// Score every record; one output line per successfully parsed record.
inline int run_score(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  std::shared_ptr<const EntailmentProvider> provider;
  try {
    cfg.validate();
    provider = detail::provider_for(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const std::size_t k = cfg.height();

  auto score_line = [&](const std::string& text) {
    detail::LineResult r;
    const auto j = nlohmann::json::parse(text);
    if (cfg.mode == RunMode::sentence) {
      const auto q = parse_query_record(j, provider.get());
      const auto rep = sese_sentence(q, k);
      r.line = to_json_line(report_json(rep));
      r.score_sum = rep.sese;
      r.score_count = 1;
    } else {
      const auto c = parse_claim_record(j, provider.get());
      const auto s = claim_sese(c, k, cfg.keep_tree);
      r.line = to_json_line(claim_scores_json(c, s, k));
      for (double x : s.sese) r.score_sum += x;
      r.score_count = s.sese.size();
    }
    return r;
  };

  // Chunks keep memory bounded while output stays in input order.
  const std::size_t chunk = std::max<std::size_t>(16, 4 * cfg.jobs);
  std::size_t lineno = 0, ok = 0, failed = 0, n_scores = 0;
  double total = 0.0;
  std::vector<std::pair<std::size_t, std::string>> batch;
  std::vector<detail::LineResult> results;

  auto flush = [&] {
    results.assign(batch.size(), {});
    detail::parallel_for(batch.size(), cfg.jobs, [&](std::size_t i) {
      try {
        results[i] = score_line(batch[i].second);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!results[i].error.empty()) {
        err << "line " << batch[i].first << ": " << results[i].error << '\n';
        ++failed;
        continue;
      }
      out << results[i].line << '\n';
      total += results[i].score_sum;
      n_scores += results[i].score_count;
      ++ok;
    }
    batch.clear();
  };

  std::string text;
  while (std::getline(in, text)) {
    ++lineno;
    if (detail::blank(text)) continue;
    batch.emplace_back(lineno, std::move(text));
    if (batch.size() >= chunk) flush();
  }
  flush();
  out.flush();

  err << "scored " << ok << " record" << (ok == 1 ? "" : "s");
  if (failed) err << ", " << failed << " failed";
  if (n_scores) err << "; mean sese " << detail::fixed(total / static_cast<double>(n_scores), 6);
  err << '\n';
  return failed ? 2 : 0;
}

namespace detail {

inline double number_at(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number()) throw std::invalid_argument("missing numeric field '" + key + "'");
  return j[key].get<double>();
}

/// Items from one report line; records without labels contribute nothing.
inline void collect_items(const nlohmann::json& j, const std::string& method, std::vector<ScoredItem>& items) {
  if (!j.is_object()) throw std::invalid_argument("report must be a JSON object");
  if (j.contains("sese") && j["sese"].is_array()) {
    if (!j.contains("labels")) return;
    const auto labels = j["labels"].get<std::vector<bool>>();
    const nlohmann::json* scores = &j["sese"];
    if (method != "sese") {
      if (!j.contains("baselines") || !j["baselines"].contains(method))
        throw std::invalid_argument("no baseline '" + method + "'");
      scores = &j["baselines"][method];
    }
    if (scores->size() != labels.size()) throw std::invalid_argument("score and label counts differ");
    for (std::size_t c = 0; c < labels.size(); ++c) items.push_back({(*scores)[c].get<double>(), labels[c]});
    return;
  }
  if (!j.contains("label") || j["label"].is_null()) return;
  const bool label = j["label"].get<bool>();
  if (method == "sese" || method == "dse") {
    items.push_back({number_at(j, method), label});
  } else {
    if (!j.contains("extras")) throw std::invalid_argument("no extras field for method '" + method + "'");
    items.push_back({number_at(j["extras"], method), label});
  }
}

}  // namespace detail

/// AUROC / AURAC of scored reports against their labels.
inline int run_eval(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  std::vector<ScoredItem> items;
  std::string text;
  for (std::size_t lineno = 1; std::getline(in, text); ++lineno) {
    if (detail::blank(text)) continue;
    try {
      detail::collect_items(nlohmann::json::parse(text), cfg.method, items);
    } catch (const std::exception& e) {
      err << "line " << lineno << ": " << e.what() << '\n';
      return 1;
    }
  }
  EvalResult r;
  try {
    EvalOptions opts;
    opts.with_ci = cfg.ci;
    opts.seed = cfg.seed;
    opts.n_resamples = cfg.n_resamples;
    r = evaluate(items, opts);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << " (" << items.size() << " labelled items)\n";
    return 1;
  }

  out << "method " << cfg.method << '\n';
  out << "items " << r.n_items << '\n';
  out << "AUROC " << detail::fixed(r.auroc, 4) << '\n';
  out << "AURAC " << detail::fixed(r.aurac, 4) << '\n';
  if (r.bootstrap_ci) {
    out << "AUROC 95% CI [" << detail::fixed(r.bootstrap_ci->first, 4) << ", "
        << detail::fixed(r.bootstrap_ci->second, 4) << "] (seed " << cfg.seed << ")\n";
  }
  if (cfg.curve) {
    out << "fraction,accuracy\n";
    for (const auto& [x, acc] : r.rejection_curve) out << detail::fixed(x, 2) << ',' << detail::fixed(acc, 6) << '\n';
  }

  if (cfg.output_json) {
    OrderedJson j;
    j["method"] = cfg.method;
    j["n_items"] = r.n_items;
    j["auroc"] = r.auroc;
    j["aurac"] = r.aurac;
    OrderedJson curve = OrderedJson::array();
    for (const auto& [x, acc] : r.rejection_curve) curve.push_back({x, acc});
    j["rejection_curve"] = curve;
    if (r.bootstrap_ci) {
      j["bootstrap_ci"] = {r.bootstrap_ci->first, r.bootstrap_ci->second};
      j["seed"] = cfg.seed;
    }
    std::ofstream os(*cfg.output_json);
    if (!os) {
      err << "error: cannot write " << *cfg.output_json << '\n';
      return 1;
    }
    os << to_json_line(j) << '\n';
  }
  return 0;
}

namespace detail {

inline void print_matrix(std::ostream& out, const DirectedGraph& g) {
  const std::size_t n = g.size();
  out << "     ";
  for (std::size_t j = 0; j < n; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%6zu", j);
    out << buf;
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%5zu", i);
    out << buf;
    for (std::size_t j = 0; j < n; ++j) {
      if (g(i, j) == 0.0) {
        out << "     .";
      } else {
        std::snprintf(buf, sizeof buf, "%6.3f", g(i, j));
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace detail

/// Human-readable audit of one record: sparsification table, graph and tree.
inline int run_inspect(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  if (!cfg.id) {
    err << "error: inspect needs --id\n";
    return 1;
  }
  std::shared_ptr<const EntailmentProvider> provider;
  try {
    cfg.validate();
    provider = detail::provider_for(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const std::size_t k = cfg.height();
  std::string text;
  for (std::size_t lineno = 1; std::getline(in, text); ++lineno) {
    if (detail::blank(text)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const std::exception&) {
      continue;
    }
    if (!j.is_object() || !j.contains("id") || j["id"] != *cfg.id) continue;
    try {
      if (cfg.mode == RunMode::sentence) {
        const auto q = parse_query_record(j, provider.get());
        const auto sparse = build_semantic_graph(q.entailment);
        out << "record " << q.id << " (N=" << q.responses.size() << ")\n\n";
        out << "k   H1\n";
        for (const auto& [kk, h] : sparse.h1_by_k) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%-3zu %.6f%s\n", kk, h, kk == sparse.k_star ? "  *" : "");
          out << buf;
        }
        out << "k* = " << sparse.k_star << "\n\n";
        out << "adjusted transition matrix:\n";
        detail::print_matrix(out, sparse.graph.graph);
        OptimizeOptions opts;
        opts.max_height = k;
        const auto tree = optimize_tree(init_flat_tree(sparse.graph), opts);
        out << "\nencoding tree (K=" << k << ", height " << tree.height() << ", SeSE "
            << detail::fixed(tree.entropy(), 6) << "):\n"
            << tree.to_text();
      } else {
        const auto c = parse_claim_record(j, provider.get());
        const std::size_t n = c.n_responses();
        const auto g = repair_isolated(build_bipartite(c), n);
        const auto tree = optimize_tree(g, k);
        out << "record " << c.id << " (N=" << n << " responses, M=" << c.n_claims() << " claims; claim c is vertex N+c)\n\n";
        out << "bipartite adjacency:\n";
        detail::print_matrix(out, g);
        out << "\nencoding tree (K=" << k << ", height " << tree.height() << "):\n" << tree.to_text();
        out << "\nclaim  sese\n";
        for (std::size_t m = 0; m < c.n_claims(); ++m) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%-6zu %.6f\n", m, tree.path_entropy(tree.leaf_of(n + m)));
          out << buf;
        }
      }
    } catch (const std::exception& e) {
      err << "line " << lineno << ": " << e.what() << '\n';
      return 1;
    }
    return 0;
  }
  err << "error: no record with id '" << *cfg.id << "'\n";
  return 1;
}

}  // namespace sese
