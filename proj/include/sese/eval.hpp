#pragma once

// Discrimination metrics for uncertainty scores (AUROC, rejection accuracy,
// AURAC, bootstrap intervals) and spectral graph-uncertainty baselines.

#include <sese/graph.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sese {

/// One scored prediction. Higher score means more uncertain; the metrics
/// measure how well the score flags incorrect items.
struct ScoredItem {
  double score;
  bool correct;
};

struct EvalResult {
  double auroc = 0.0;
  double aurac = 0.0;
  std::vector<std::pair<double, double>> rejection_curve;  // (fraction rejected, accuracy)
  std::size_t n_items = 0;
  std::optional<std::pair<double, double>> bootstrap_ci;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> class_counts(const std::vector<ScoredItem>& items) {
  std::size_t ok = 0;
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw std::invalid_argument("non-finite score");
    ok += it.correct ? 1 : 0;
  }
  return {ok, items.size() - ok};
}

}  // namespace detail

/// Mann-Whitney AUROC: P(score of an incorrect item > score of a correct
/// one), ties counted as one half.
inline double auroc(const std::vector<ScoredItem>& items) {
  const auto [n_ok, n_bad] = detail::class_counts(items);
  if (n_ok == 0 || n_bad == 0)
    throw std::invalid_argument("AUROC needs at least one correct and one incorrect item");

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return items[a].score < items[b].score; });

  // Twice the U statistic, kept integral: 2 per strict win, 1 per tie.
  std::uint64_t twice_u = 0;
  std::uint64_t correct_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t ok_here = 0, bad_here = 0;
    while (j < order.size() && items[order[j]].score == items[order[i]].score) {
      (items[order[j]].correct ? ok_here : bad_here) += 1;
      ++j;
    }
    twice_u += bad_here * (2 * correct_below + ok_here);
    correct_below += ok_here;
    i = j;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_ok) * static_cast<double>(n_bad));
}

namespace detail {

/// Accuracy over the `keep` lowest-score items; equal scores keep input order.
inline double retained_accuracy(const std::vector<ScoredItem>& items, std::size_t keep) {
  if (keep == 0) throw std::invalid_argument("rejection leaves no items");
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].score < items[b].score; });
  std::size_t ok = 0;
  for (std::size_t r = 0; r < keep; ++r) ok += items[order[r]].correct ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(keep);
}

/// ceil((100 - percent) / 100 * n) in integer arithmetic.
inline std::size_t retained_count(std::size_t n, unsigned percent) {
  return ((100 - percent) * n + 99) / 100;
}

}  // namespace detail

/// Accuracy after rejecting the top `fraction` most uncertain items.
inline double rejection_accuracy(const std::vector<ScoredItem>& items, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw std::invalid_argument("rejection fraction must lie in [0, 1)");
  const double exact = (1.0 - fraction) * static_cast<double>(items.size());
  // Guard against (1 - 0.95) * 20 = 1.0000000000000009 style round-up.
  const auto keep = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return detail::retained_accuracy(items, keep);
}

/// Rejection fractions 0.00, 0.05, ..., 0.95.
inline std::vector<std::pair<double, double>> rejection_curve(const std::vector<ScoredItem>& items) {
  std::vector<std::pair<double, double>> curve;
  for (unsigned p = 0; p < 100; p += 5) {
    curve.emplace_back(p / 100.0,
                       detail::retained_accuracy(items, detail::retained_count(items.size(), p)));
  }
  return curve;
}

/// Normalised trapezoidal area under the rejection-accuracy curve.
inline double aurac(const std::vector<ScoredItem>& items) {
  const auto curve = rejection_curve(items);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += 0.5 * (curve[i].second + curve[i - 1].second) * (curve[i].first - curve[i - 1].first);
  }
  return area / (curve.back().first - curve.front().first);
}

/// Linear-interpolated percentile (numpy's default rule) of sorted data.
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Percentile 95% interval of AUROC over seeded bootstrap resamples.
/// Single-class resamples are redrawn, up to 10 * n_resamples draws.
/// Indices come from mt19937_64 reduced modulo n so results do not depend
/// on the standard library's distribution implementation.
inline std::pair<double, double> bootstrap_ci(const std::vector<ScoredItem>& items,
                                              std::size_t n_resamples = 1000,
                                              std::uint64_t seed = 42) {
  auroc(items);  // validates class balance
  std::mt19937_64 rng(seed);
  const std::size_t n = items.size();
  std::vector<double> stats;
  stats.reserve(n_resamples);
  std::vector<ScoredItem> sample(n);
  for (std::size_t draws = 0; stats.size() < n_resamples && draws < 10 * n_resamples; ++draws) {
    std::size_t ok = 0;
    for (auto& s : sample) {
      s = items[rng() % n];
      ok += s.correct ? 1 : 0;
    }
    if (ok == 0 || ok == n) continue;
    stats.push_back(auroc(sample));
  }
  if (stats.empty()) throw std::runtime_error("bootstrap produced no two-class resample");
  std::sort(stats.begin(), stats.end());
  return {percentile(stats, 2.5), percentile(stats, 97.5)};
}

struct EvalOptions {
  bool with_ci = false;
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 42;
};

inline EvalResult evaluate(const std::vector<ScoredItem>& items, const EvalOptions& opts = {}) {
  EvalResult r;
  r.auroc = auroc(items);
  r.rejection_curve = rejection_curve(items);
  r.aurac = aurac(items);
  r.n_items = items.size();
  if (opts.with_ci) r.bootstrap_ci = bootstrap_ci(items, opts.n_resamples, opts.seed);
  return r;
}

/// Eigenvalues (ascending) of the symmetric normalised Laplacian
/// I - D^-1/2 W D^-1/2; isolated vertices contribute a zero row.
inline std::vector<double> normalized_laplacian_spectrum(const DirectedGraph& g) {
  if (!g.is_symmetric(1e-12)) throw std::invalid_argument("Laplacian needs a symmetric graph");
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = g.out_degree(static_cast<std::size_t>(i));
    inv_sqrt(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (inv_sqrt(i) > 0.0) lap(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      lap(i, j) = -g(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * inv_sqrt(i) * inv_sqrt(j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Graph-level uncertainty baselines over a symmetric similarity graph:
/// "eigenvalue" = sum_k max(0, 1 - lambda_k), "degree" = tr(|V| I - D) / |V|^2,
/// "spectral_gap" = 1 - lambda_2 clamped to [0, 1].
inline std::map<std::string, double> graph_uncertainty_ablations(const DirectedGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw std::invalid_argument("graph has no vertices");
  const auto ev = normalized_laplacian_spectrum(g);
  double eig = 0.0;
  for (double l : ev) eig += std::max(0.0, 1.0 - l);
  double trace = 0.0;
  for (std::size_t v = 0; v < n; ++v) trace += static_cast<double>(n) - g.out_degree(v);
  const double lambda2 = n > 1 ? ev[1] : 0.0;
  return {
      {"eigenvalue", eig},
      {"degree", trace / static_cast<double>(n * n)},
      {"spectral_gap", std::clamp(1.0 - lambda2, 0.0, 1.0)},
  };
}

}  // namespace sese
