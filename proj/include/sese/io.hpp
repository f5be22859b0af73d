#pragma once

// JSON-lines record parsing and platform-stable JSON output.

#include <sese/claims.hpp>
#include <sese/providers.hpp>
#include <sese/sentence.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sese {

using OrderedJson = nlohmann::ordered_json;

/// %.17g round-trips every double, so goldens do not depend on the
/// platform's shortest-representation algorithm.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("cannot serialise non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

template <class Json>
void write_json(std::ostream& os, const Json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        os << Json(it.key()).dump() << ':';
        write_json(os, it.value());
      }
      os << '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',';
        write_json(os, j[i]);
      }
      os << ']';
      break;
    }
    case nlohmann::json::value_t::number_float:
      os << format_double(j.template get<double>());
      break;
    default:
      os << j.dump();
  }
}

template <class Json>
std::string to_json_line(const Json& j) {
  std::ostringstream os;
  write_json(os, j);
  return os.str();
}

namespace detail {

inline const nlohmann::json* field(const nlohmann::json& j, std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (j.contains(n) && !j[n].is_null()) return &j[n];
  return nullptr;
}

inline std::string string_field(const nlohmann::json& j, std::initializer_list<const char*> names,
                                bool required) {
  const auto* f = field(j, names);
  if (!f) {
    if (required) throw std::invalid_argument(std::string("missing field '") + *names.begin() + "'");
    return {};
  }
  if (!f->is_string()) throw std::invalid_argument(std::string("field '") + *names.begin() + "' must be a string");
  return f->get<std::string>();
}

inline std::vector<std::string> string_list(const nlohmann::json& j, std::initializer_list<const char*> names) {
  const auto* f = field(j, names);
  if (!f || !f->is_array()) throw std::invalid_argument(std::string("missing array field '") + *names.begin() + "'");
  std::vector<std::string> out;
  for (const auto& s : *f) {
    if (!s.is_string()) throw std::invalid_argument(std::string("'") + *names.begin() + "' must hold strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Sentence-mode input line. "texts"/"context" are accepted as aliases of
/// "responses"/"question" so entailment fixture files double as inputs.
/// When "probs" is absent the matrix is obtained from `provider`.
inline QueryRecord parse_query_record(const nlohmann::json& j, const EntailmentProvider* provider) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  QueryRecord q;
  q.id = detail::string_field(j, {"id"}, true);
  q.question = detail::string_field(j, {"question", "context"}, false);
  q.greedy_response = detail::string_field(j, {"greedy_response"}, false);
  q.responses = detail::string_list(j, {"responses", "texts"});
  if (q.responses.size() < 2) throw std::invalid_argument("need at least 2 responses");
  if (const auto* lab = detail::field(j, {"label"})) {
    if (!lab->is_boolean()) throw std::invalid_argument("'label' must be a boolean");
    q.label = lab->get<bool>();
  }
  if (provider) {
    q.entailment = fetch_matrix(*provider, q.question, q.responses);
  } else if (const auto* probs = detail::field(j, {"probs"})) {
    q.entailment = parse_probs(*probs, q.responses.size());
  } else {
    throw std::invalid_argument("record has no 'probs' and no provider was configured");
  }
  q.validate();
  return q;
}

/// Claim-mode input line. Missing "rc_entails" is derived from `provider`:
/// response r entails claim c when entailment is the argmax class.
inline ClaimRecord parse_claim_record(const nlohmann::json& j, const EntailmentProvider* provider) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  ClaimRecord c;
  c.id = detail::string_field(j, {"id"}, true);
  c.question = detail::string_field(j, {"question", "context"}, false);
  c.claims = detail::string_list(j, {"claims"});
  c.responses = detail::string_list(j, {"responses"});
  if (const auto* rc = detail::field(j, {"rc_entails"})) {
    if (!rc->is_array()) throw std::invalid_argument("'rc_entails' must be an N x M array");
    for (const auto& row : *rc) {
      if (!row.is_array()) throw std::invalid_argument("'rc_entails' must be an N x M array");
      std::vector<std::uint8_t> r;
      for (const auto& v : row) {
        if (v.is_boolean()) r.push_back(v.get<bool>() ? 1 : 0);
        else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) r.push_back(static_cast<std::uint8_t>(v.get<int>()));
        else throw std::invalid_argument("'rc_entails' entries must be 0 or 1");
      }
      c.rc_entails.push_back(std::move(r));
    }
  } else {
    if (!provider) throw std::invalid_argument("record has no 'rc_entails' and no provider was configured");
    const std::size_t n = c.responses.size(), m = c.claims.size();
    if (n == 0 || m == 0) throw std::invalid_argument("need at least one response and one claim");
    EntailmentRequest req{c.question, c.responses, {}};
    req.texts.insert(req.texts.end(), c.claims.begin(), c.claims.end());
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < m; ++k) req.pairs.emplace_back(r, n + k);
    const auto triples = provider->fetch(req);
    c.rc_entails.assign(n, std::vector<std::uint8_t>(m, 0));
    for (std::size_t s = 0; s < triples.size(); ++s) {
      const auto& t = triples[s];
      if (!is_simplex(t)) throw std::runtime_error("provider returned a non-simplex triple");
      c.rc_entails[s / m][s % m] = (t[0] >= t[1] && t[0] >= t[2]) ? 1 : 0;
    }
  }
  if (const auto* labs = detail::field(j, {"labels"})) {
    if (!labs->is_array()) throw std::invalid_argument("'labels' must be an array of booleans");
    std::vector<bool> l;
    for (const auto& v : *labs) {
      if (!v.is_boolean()) throw std::invalid_argument("'labels' must be an array of booleans");
      l.push_back(v.get<bool>());
    }
    c.labels = std::move(l);
  }
  c.validate();
  return c;
}

inline OrderedJson report_json(const UncertaintyReport& r) {
  OrderedJson j;
  j["id"] = r.id;
  j["sese"] = r.sese;
  j["k_star"] = r.k_star;
  j["tree_height"] = r.tree_height;
  if (r.dse) j["dse"] = *r.dse;
  if (r.label) j["label"] = *r.label;
  OrderedJson extras = OrderedJson::object();
  for (const auto& [k, v] : r.extras) extras[k] = v;
  j["extras"] = extras;
  return j;
}

inline OrderedJson claim_scores_json(const ClaimRecord& cr, const ClaimScores& s, std::size_t k) {
  OrderedJson j;
  j["id"] = cr.id;
  j["k"] = k;
  j["tree_height"] = s.tree_height;
  j["sese"] = s.sese;
  if (cr.labels) j["labels"] = *cr.labels;
  OrderedJson b = OrderedJson::object();
  for (const auto& [name, v] : s.baselines) b[name] = v;
  j["baselines"] = b;
  if (s.tree) j["tree"] = OrderedJson::parse(s.tree->dump());
  return j;
}

}  // namespace sese
