#pragma once

// Seeded simulation from linear structural causal models, plus pairwise
// generators targeting each of the four LiNGAM outcomes.
//
// Streams: node i of simulate_scm draws from derive_seed(seed, "node", i);
// attempt k of simulate_pair_for_scenario uses derive_seed(seed, "attempt", k).

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cattr/dataset.hpp"
#include "cattr/error.hpp"
#include "cattr/graph.hpp"
#include "cattr/lingam.hpp"
#include "cattr/rng.hpp"
#include "cattr/text.hpp"

namespace cattr {

class NoiseSpec {
 public:
  enum class Family { ChiSquared, Uniform, Gaussian, Laplace };

  static NoiseSpec chi_squared(double df, bool centered = true) {
    if (!(df >= 1.0)) throw InvalidArgument("chi-squared noise needs df >= 1");
    return NoiseSpec(Family::ChiSquared, df, 0.0, centered);
  }
  static NoiseSpec uniform(double a, double b, bool centered = true) {
    if (!(a < b)) throw InvalidArgument("uniform noise needs a < b");
    return NoiseSpec(Family::Uniform, a, b, centered);
  }
  static NoiseSpec gaussian(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian noise needs sigma > 0");
    return NoiseSpec(Family::Gaussian, sigma, 0.0, true);
  }
  static NoiseSpec laplace(double scale) {
    if (!(scale > 0.0)) throw InvalidArgument("laplace noise needs scale > 0");
    return NoiseSpec(Family::Laplace, scale, 0.0, true);
  }

  // "chi2:4", "uniform:-1:1", "gaussian:1", "laplace:0.5"; append ":raw" to disable centering.
  static NoiseSpec parse(std::string_view text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
      if (c == ':') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    bool centered = true;
    if (parts.size() > 1 && parts.back() == "raw") {
      centered = false;
      parts.pop_back();
    }
    auto num = [&](std::size_t i) {
      if (i >= parts.size()) throw ParseError("noise spec '" + std::string(text) + "' is missing a parameter");
      return parse_number(parts[i], 0);
    };
    const auto& fam = parts[0];
    if (fam == "chi2" || fam == "chi_squared") return chi_squared(num(1), centered);
    if (fam == "uniform") return uniform(num(1), num(2), centered);
    if (fam == "gaussian" || fam == "normal") return gaussian(num(1));
    if (fam == "laplace") return laplace(num(1));
    throw ParseError("unknown noise family '" + fam + "'");
  }

  Family family() const { return family_; }
  bool centered() const { return centered_; }
  bool is_gaussian() const { return family_ == Family::Gaussian; }

  double mean() const {
    switch (family_) {
      case Family::ChiSquared: return p1_;
      case Family::Uniform: return 0.5 * (p1_ + p2_);
      default: return 0.0;
    }
  }

  double stddev() const {
    switch (family_) {
      case Family::ChiSquared: return std::sqrt(2.0 * p1_);
      case Family::Uniform: return (p2_ - p1_) / std::sqrt(12.0);
      case Family::Gaussian: return p1_;
      case Family::Laplace: return std::sqrt(2.0) * p1_;
    }
    return 1.0;
  }

  // One draw; centered specs subtract the family mean.
  double draw(Rng& rng) const {
    double v = 0.0;
    switch (family_) {
      case Family::ChiSquared: v = rng.chi_squared(p1_); break;
      case Family::Uniform: v = rng.uniform(p1_, p2_); break;
      case Family::Gaussian: v = p1_ * rng.normal(); break;
      case Family::Laplace: v = rng.laplace(p1_); break;
    }
    return centered_ ? v - mean() : v;
  }

  // Zero mean, unit variance draw of the same shape.
  double draw_standardized(Rng& rng) const {
    double v = draw(rng);
    if (!centered_) v -= mean();
    return v / stddev();
  }

  std::string describe() const {
    switch (family_) {
      case Family::ChiSquared: return "chi2(" + format_shortest(p1_) + ")";
      case Family::Uniform: return "uniform(" + format_shortest(p1_) + "," + format_shortest(p2_) + ")";
      case Family::Gaussian: return "gaussian(" + format_shortest(p1_) + ")";
      case Family::Laplace: return "laplace(" + format_shortest(p1_) + ")";
    }
    return "?";
  }

  double param1() const { return p1_; }
  double param2() const { return p2_; }

 private:
  NoiseSpec(Family f, double p1, double p2, bool centered) : family_(f), p1_(p1), p2_(p2), centered_(centered) {}

  Family family_;
  double p1_, p2_;
  bool centered_;
};

inline constexpr double kMinCoefficientMagnitude = 0.1;

// Linear SCM: node := sum(coefficient * parent) + noise_scale[node] * noise draw.
struct ScmSpec {
  CausalDag dag;
  std::map<Edge, double> coefficients;
  std::map<std::string, NoiseSpec> noise;
  // Multiplier on each node's noise draw; missing entries mean 1, zero makes the node noise-free.
  std::map<std::string, double> noise_scale;

  void validate() const {
    for (const auto& e : dag.edges()) {
      auto it = coefficients.find(e);
      if (it == coefficients.end()) throw InvalidArgument("no coefficient for " + e.cause + " -> " + e.effect);
      if (!(std::abs(it->second) >= kMinCoefficientMagnitude))
        throw InvalidArgument("coefficient magnitude below 0.1 for " + e.cause + " -> " + e.effect);
    }
    for (const auto& [edge, _] : coefficients)
      if (!dag.edges().count(edge)) throw InvalidArgument("coefficient for a non-edge " + edge.cause + " -> " + edge.effect);
    for (const auto& n : dag.nodes())
      if (!noise.count(n)) throw InvalidArgument("no noise spec for node " + n);
    for (const auto& [n, s] : noise_scale)
      if (!(s >= 0.0)) throw InvalidArgument("negative noise scale for " + n);
  }
};

// Coefficients with magnitude in [0.5, 2] and random sign, one noise family for every node.
inline ScmSpec random_scm(const CausalDag& dag, const NoiseSpec& noise, std::uint64_t seed) {
  ScmSpec spec{dag, {}, {}, {}};
  Rng rng(derive_seed(seed, "coefficients"));
  for (const auto& e : dag.edges()) {
    const double mag = rng.uniform(0.5, 2.0);
    spec.coefficients[e] = rng.bernoulli(0.5) ? mag : -mag;
  }
  for (const auto& n : dag.nodes()) spec.noise.emplace(n, noise);
  return spec;
}

inline TabularDataset simulate_scm(const ScmSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("simulate_scm: n must be positive");
  spec.validate();
  const auto& nodes = spec.dag.nodes();
  std::map<std::string, std::vector<double>> values;
  for (const auto& name : topological_order(spec.dag).names) {
    const std::size_t idx = spec.dag.index_of(name);
    Rng rng(derive_seed(seed, "node", static_cast<std::uint64_t>(idx)));
    const auto& noise = spec.noise.at(name);
    auto sit = spec.noise_scale.find(name);
    const double scale = sit == spec.noise_scale.end() ? 1.0 : sit->second;
    std::vector<double> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = scale * noise.draw(rng);
    for (const auto& parent : spec.dag.parents(name)) {
      const double c = spec.coefficients.at({parent, name});
      const auto& pv = values.at(parent);
      for (std::size_t r = 0; r < n; ++r) col[r] += c * pv[r];
    }
    values.emplace(name, std::move(col));
  }
  std::vector<Column> cols;
  for (const auto& name : nodes) cols.push_back({name, std::move(values.at(name))});
  return TabularDataset(std::move(cols), "simulated");
}

struct ScenarioSimConfig {
  LingamConfig lingam;
  NoiseSpec noise = NoiseSpec::chi_squared(4.0);
  int max_attempts = 25;
  // Undefined target: quadratic mechanism by default, linear latent confounder when set.
  bool undefined_via_confounder = false;
};

struct ScenarioDraw {
  PairSample sample;
  ScenarioLabel realized;
  int attempts = 0;
  std::uint64_t attempt_seed = 0;  // stream that produced `sample`
};

namespace detail {

inline double random_slope(Rng& rng) {
  const double mag = rng.uniform(0.5, 2.0);
  return rng.bernoulli(0.5) ? mag : -mag;
}

// effect = slope * cause + noise; the noise spread is matched to the signal
// so neither term swamps the other.
inline void linear_pair(Rng& rng, const NoiseSpec& noise, std::size_t n, double slope, std::vector<double>& cause,
                        std::vector<double>& effect) {
  cause.resize(n);
  effect.resize(n);
  const double noise_sd = std::abs(slope) * rng.uniform(0.5, 1.0);
  for (auto& c : cause) c = noise.draw_standardized(rng);
  for (std::size_t i = 0; i < n; ++i) effect[i] = slope * cause[i] + noise_sd * noise.draw_standardized(rng);
}

inline PairSample scenario_candidate(Scenario target, std::size_t n, Rng& rng, const ScenarioSimConfig& cfg) {
  std::vector<double> x(n), y(n);
  switch (target) {
    case Scenario::XCausesY: linear_pair(rng, cfg.noise, n, random_slope(rng), x, y); break;
    case Scenario::YCausesX: linear_pair(rng, cfg.noise, n, random_slope(rng), y, x); break;
    case Scenario::NoRelation:
      for (auto& v : x) v = cfg.noise.draw_standardized(rng);
      for (auto& v : y) v = cfg.noise.draw_standardized(rng);
      break;
    case Scenario::Undefined:
      if (cfg.undefined_via_confounder) {
        std::vector<double> z(n);
        for (auto& v : z) v = cfg.noise.draw_standardized(rng);
        const double cx = random_slope(rng), cy = random_slope(rng);
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = cx * z[i] + 0.5 * std::abs(cx) * cfg.noise.draw_standardized(rng);
          y[i] = cy * z[i] + 0.5 * std::abs(cy) * cfg.noise.draw_standardized(rng);
        }
      } else {
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i] + 0.5 * cfg.noise.draw_standardized(rng);
      }
      break;
  }
  return PairSample(std::move(x), std::move(y));
}

}  // namespace detail

// Draws candidates for `target` and keeps the first one whose classify_pair
// label matches, trying at most cfg.max_attempts times.
inline ScenarioDraw simulate_pair_for_scenario(Scenario target, std::size_t n, std::uint64_t seed,
                                               const ScenarioSimConfig& cfg = {}) {
  if (n < 100) throw InvalidArgument("simulate_pair_for_scenario: n must be at least 100");
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const std::uint64_t attempt_seed = derive_seed(seed, "attempt", attempt);
    Rng rng(attempt_seed);
    auto sample = detail::scenario_candidate(target, n, rng, cfg);
    auto label = classify_pair(sample, cfg.lingam);
    if (label.kind == target) return ScenarioDraw{std::move(sample), label, attempt + 1, attempt_seed};
  }
  throw SimulationError("could not realize scenario " + std::string(to_string(target)) + " within " +
                            std::to_string(cfg.max_attempts) + " attempts",
                        cfg.max_attempts);
}

// Rebuilds the candidate produced by a given attempt stream.
inline PairSample regenerate_scenario_candidate(Scenario target, std::size_t n, std::uint64_t attempt_seed,
                                                const ScenarioSimConfig& cfg = {}) {
  Rng rng(attempt_seed);
  return detail::scenario_candidate(target, n, rng, cfg);
}

// effect := slope * cause + U with U non-Gaussian and the cause drawn from the
// same family. Slope magnitude in [0.5, 2] with random sign. x is the cause.
inline PairSample simulate_theorem1_pair(const std::string& cause, const std::string& effect, std::size_t n,
                                         std::uint64_t seed, const NoiseSpec& noise = NoiseSpec::chi_squared(4.0)) {
  if (noise.is_gaussian()) throw InvalidArgument("direction is not identifiable with Gaussian noise");
  if (n < kMinPairSamples) throw InvalidArgument("simulate_theorem1_pair: n too small");
  Rng rng(derive_seed(seed, "theorem1"));
  std::vector<double> x, y;
  detail::linear_pair(rng, noise, n, detail::random_slope(rng), x, y);
  return PairSample(std::move(x), std::move(y), cause, effect);
}

}  // namespace cattr
