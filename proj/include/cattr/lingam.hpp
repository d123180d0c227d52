#pragma once

// Pairwise causal direction under the linear non-Gaussian acyclic model.
//
// For Y := a X + U with X independent of U and U non-Gaussian, the OLS
// residual of Y on X is independent of X, while no linear model in the
// reverse direction leaves a residual independent of Y. Both regressions are
// fitted and each residual is tested against its predictor:
//
//   residual(Y|X) indep. X | residual(X|Y) indep. Y | label
//   ------------------------+-------------------------+-------------
//   no                      | no                      | Undefined
//   yes                     | yes                     | NoRelation
//   yes                     | no                      | XCausesY
//   no                      | yes                     | YCausesX
//
// OLS residuals are Pearson-uncorrelated with the predictor by construction,
// so the test has to detect nonlinear dependence: distance correlation with a
// permutation null.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cattr/error.hpp"
#include "cattr/rng.hpp"

namespace cattr {

inline constexpr std::size_t kMinPairSamples = 20;

class PairSample {
 public:
  PairSample(std::vector<double> x, std::vector<double> y, std::string x_name = "X", std::string y_name = "Y")
      : x_(std::move(x)), y_(std::move(y)), x_name_(std::move(x_name)), y_name_(std::move(y_name)) {
    if (x_.size() != y_.size()) throw InvalidArgument("pair sample columns differ in length");
    if (x_.size() < kMinPairSamples)
      throw InvalidArgument("pair sample needs at least " + std::to_string(kMinPairSamples) + " rows");
    for (std::span<const double> v : {std::span<const double>(x_), std::span<const double>(y_)}) {
      for (double d : v)
        if (!std::isfinite(d)) throw InvalidArgument("pair sample contains a non-finite value");
      if (std::all_of(v.begin(), v.end(), [&](double d) { return d == v.front(); }))
        throw InvalidArgument("pair sample column has zero variance");
    }
  }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  const std::string& x_name() const { return x_name_; }
  const std::string& y_name() const { return y_name_; }
  std::size_t size() const { return x_.size(); }

  PairSample swapped() const { return PairSample(y_, x_, y_name_, x_name_); }

 private:
  std::vector<double> x_, y_;
  std::string x_name_, y_name_;
};

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};

inline RegressionFit ols_fit(std::span<const double> predictor, std::span<const double> response) {
  if (predictor.size() != response.size()) throw InvalidArgument("ols_fit: length mismatch");
  if (predictor.size() < 2) throw InvalidArgument("ols_fit: need at least two points");
  const double n = static_cast<double>(predictor.size());
  const double mx = std::accumulate(predictor.begin(), predictor.end(), 0.0) / n;
  const double my = std::accumulate(response.begin(), response.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < predictor.size(); ++i) {
    const double dx = predictor[i] - mx;
    sxx += dx * dx;
    sxy += dx * (response[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("ols_fit: predictor has zero variance");
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(predictor.size());
  for (std::size_t i = 0; i < predictor.size(); ++i)
    fit.residuals[i] = response[i] - (fit.intercept + fit.slope * predictor[i]);
  return fit;
}

struct LingamConfig {
  double alpha = 0.05;
  int n_permutations = 199;
  std::uint64_t seed = 0;
};

struct IndependenceVerdict {
  double statistic = 0.0;  // distance correlation in [0, 1]
  double p_value = 1.0;
  bool independent = true;
};

namespace detail {

// Sum over ordered pairs of |a_i - a_j| for every i, via sorting and prefix sums.
inline std::vector<double> distance_row_sums(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  double total = 0.0;
  for (double d : v) total += d;
  std::vector<double> rows(n);
  double prefix = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double val = v[order[k]];
    const double below = static_cast<double>(k) * val - prefix;
    const double above = (total - prefix - val) - static_cast<double>(n - k - 1) * val;
    rows[order[k]] = below + above;
    prefix += val;
  }
  return rows;
}

// Squared sample distance covariance (V-statistic) of (x_i, r_{perm(i)}),
// evaluated in O(n log n) per permutation for univariate data. The cross
// term sum_ij |x_i - x_j| |y_i - y_j| is accumulated in x-sorted order with a
// Fenwick tree over the ranks of y.
class DistanceCovariance {
 public:
  DistanceCovariance(std::span<const double> x, std::span<const double> r) : n_(x.size()) {
    const double nd = static_cast<double>(n_);
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    const double mr = std::accumulate(r.begin(), r.end(), 0.0) / nd;
    x_order_.resize(n_);
    std::iota(x_order_.begin(), x_order_.end(), 0);
    std::stable_sort(x_order_.begin(), x_order_.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    x_.resize(n_);
    r_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      x_[i] = x[i] - mx;
      r_[i] = r[i] - mr;
    }
    a_rows_ = distance_row_sums(x_);
    b_rows_ = distance_row_sums(r_);
    a_total_ = std::accumulate(a_rows_.begin(), a_rows_.end(), 0.0);
    b_total_ = std::accumulate(b_rows_.begin(), b_rows_.end(), 0.0);

    std::vector<std::size_t> r_order(n_);
    std::iota(r_order.begin(), r_order.end(), 0);
    std::stable_sort(r_order.begin(), r_order.end(), [&](auto a, auto b) { return r_[a] < r_[b]; });
    r_rank_.resize(n_);
    std::size_t rank = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      if (k > 0 && r_[r_order[k]] != r_[r_order[k - 1]]) ++rank;
      r_rank_[r_order[k]] = rank;
    }
    tree_.resize(rank + 2);

    dvar_x_ = self_dvar(x_, a_rows_, a_total_);
    dvar_r_ = self_dvar(r_, b_rows_, b_total_);
  }

  std::size_t size() const { return n_; }

  // perm[i] = index of the residual paired with x_i.
  double dcov2(std::span<const std::size_t> perm) {
    const double nd = static_cast<double>(n_);
    std::fill(tree_.begin(), tree_.end(), Node{});
    Node total{};
    double cross = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i = x_order_[k];
      const std::size_t ri = perm[i];
      const double xv = x_[i], yv = r_[ri];
      const Node le = prefix(r_rank_[ri]);
      const Node gt{total.c - le.c, total.sx - le.sx, total.sy - le.sy, total.sxy - le.sxy};
      const double s_le = xv * yv * le.c - xv * le.sy - yv * le.sx + le.sxy;
      const double s_gt = xv * yv * gt.c - xv * gt.sy - yv * gt.sx + gt.sxy;
      cross += s_le - s_gt;
      const Node add{1.0, xv, yv, xv * yv};
      insert(r_rank_[ri], add);
      total.c += 1.0;
      total.sx += xv;
      total.sy += yv;
      total.sxy += xv * yv;
    }
    cross *= 2.0;
    double rows = 0.0;
    for (std::size_t i = 0; i < n_; ++i) rows += a_rows_[i] * b_rows_[perm[i]];
    return cross / (nd * nd) - 2.0 * rows / (nd * nd * nd) + a_total_ * b_total_ / (nd * nd * nd * nd);
  }

  // Distance correlation from a squared distance covariance.
  double dcor(double dcov2_value) const {
    const double denom = std::sqrt(dvar_x_ * dvar_r_);
    if (!(denom > 0.0)) return 0.0;
    return std::sqrt(std::clamp(dcov2_value / denom, 0.0, 1.0));
  }

  bool degenerate() const { return !(dvar_x_ > 0.0 && dvar_r_ > 0.0); }

 private:
  struct Node {
    double c = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
  };

  void insert(std::size_t rank, const Node& v) {
    for (std::size_t p = rank + 1; p < tree_.size(); p += p & (~p + 1)) {
      tree_[p].c += v.c;
      tree_[p].sx += v.sx;
      tree_[p].sy += v.sy;
      tree_[p].sxy += v.sxy;
    }
  }

  Node prefix(std::size_t rank) const {
    Node acc;
    for (std::size_t p = rank + 1; p > 0; p -= p & (~p + 1)) {
      acc.c += tree_[p].c;
      acc.sx += tree_[p].sx;
      acc.sy += tree_[p].sy;
      acc.sxy += tree_[p].sxy;
    }
    return acc;
  }

  // dVar^2 closed form: sum_ij (v_i - v_j)^2 = 2n sum v^2 for centered v.
  double self_dvar(const std::vector<double>& v, const std::vector<double>& rows, double total) const {
    const double nd = static_cast<double>(n_);
    double sq = 0.0, rows_sq = 0.0;
    for (double d : v) sq += d * d;
    for (double d : rows) rows_sq += d * d;
    const double value = 2.0 * nd * sq / (nd * nd) - 2.0 * rows_sq / (nd * nd * nd) + total * total / (nd * nd * nd * nd);
    return std::max(0.0, value);
  }

  std::size_t n_;
  std::vector<std::size_t> x_order_;
  std::vector<double> x_, r_, a_rows_, b_rows_;
  std::vector<std::size_t> r_rank_;
  std::vector<Node> tree_;
  double a_total_ = 0.0, b_total_ = 0.0, dvar_x_ = 0.0, dvar_r_ = 0.0;
};

}  // namespace detail

// Sample distance correlation between two equally long vectors.
inline double distance_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("distance_correlation: length mismatch");
  if (a.size() < 2) throw InvalidArgument("distance_correlation: need at least two points");
  detail::DistanceCovariance dc(a, b);
  std::vector<std::size_t> identity(a.size());
  std::iota(identity.begin(), identity.end(), 0);
  return dc.dcor(dc.dcov2(identity));
}

// Permutation test of independence between `residuals` and `predictor`.
// p = (1 + #{permuted >= observed}) / (1 + n_permutations). The permutation
// schedule depends only on (seed, n), so the verdict is reproducible.
inline IndependenceVerdict independence_test(std::span<const double> residuals, std::span<const double> predictor,
                                             const LingamConfig& config) {
  if (residuals.size() != predictor.size()) throw InvalidArgument("independence_test: length mismatch");
  if (residuals.size() < kMinPairSamples)
    throw InvalidArgument("independence_test: need at least " + std::to_string(kMinPairSamples) + " samples");
  if (config.n_permutations < 99) throw InvalidArgument("independence_test: need at least 99 permutations");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InvalidArgument("independence_test: alpha outside (0, 1)");

  detail::DistanceCovariance dc(predictor, residuals);
  const std::size_t n = residuals.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  IndependenceVerdict v;
  if (dc.degenerate()) {
    v.statistic = 0.0;
    v.p_value = 1.0;
    v.independent = true;
    return v;
  }
  const double observed = dc.dcov2(perm);
  // Guards against summation-order noise when a permutation reproduces the observed pairing.
  const double threshold = observed - 1e-12 * std::abs(observed);
  Rng rng(derive_seed(config.seed, "permutation-schedule"));
  int exceed = 0;
  for (int b = 0; b < config.n_permutations; ++b) {
    rng.shuffle(std::span<std::size_t>(perm));
    if (dc.dcov2(perm) >= threshold) ++exceed;
  }
  v.statistic = dc.dcor(observed);
  v.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + config.n_permutations);
  v.independent = v.p_value >= config.alpha;
  return v;
}

enum class Scenario { Undefined, NoRelation, YCausesX, XCausesY };

inline constexpr Scenario kAllScenarios[] = {Scenario::Undefined, Scenario::NoRelation, Scenario::YCausesX,
                                             Scenario::XCausesY};

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Undefined: return "undefined";
    case Scenario::NoRelation: return "no_relation";
    case Scenario::YCausesX: return "y_causes_x";
    case Scenario::XCausesY: return "x_causes_y";
  }
  return "undefined";
}

inline Scenario scenario_from_string(std::string_view s) {
  for (auto sc : kAllScenarios)
    if (to_string(sc) == s) return sc;
  throw ParseError("unknown scenario: " + std::string(s));
}

inline Scenario scenario_from_flags(bool y_on_x_independent, bool x_on_y_independent) {
  if (y_on_x_independent && x_on_y_independent) return Scenario::NoRelation;
  if (!y_on_x_independent && !x_on_y_independent) return Scenario::Undefined;
  return y_on_x_independent ? Scenario::XCausesY : Scenario::YCausesX;
}

struct ScenarioLabel {
  Scenario kind = Scenario::Undefined;
  IndependenceVerdict y_on_x;  // residual of Y regressed on X, tested against X
  IndependenceVerdict x_on_y;  // residual of X regressed on Y, tested against Y
};

// Both tests share one permutation schedule so that swapping X and Y swaps
// the verdicts exactly.
inline ScenarioLabel classify_pair(const PairSample& sample, const LingamConfig& config = {}) {
  const auto fit_yx = ols_fit(sample.x(), sample.y());
  const auto fit_xy = ols_fit(sample.y(), sample.x());
  ScenarioLabel label;
  label.y_on_x = independence_test(fit_yx.residuals, sample.x(), config);
  label.x_on_y = independence_test(fit_xy.residuals, sample.y(), config);
  label.kind = scenario_from_flags(label.y_on_x.independent, label.x_on_y.independent);
  return label;
}

inline Scenario pairwise_direction(const PairSample& sample, const LingamConfig& config = {}) {
  return classify_pair(sample, config).kind;
}

}  // namespace cattr
