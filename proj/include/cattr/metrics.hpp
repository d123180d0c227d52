#pragma once

// Directed-pair scoring (TDR, FDR, F1) and replication aggregation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "cattr/error.hpp"
#include "cattr/graph.hpp"

namespace cattr {

struct ScoreCard {
  double tdr = 0.0;
  double fdr = 0.0;
  double f1 = 0.0;
  std::size_t n_true = 0;
  std::size_t n_predicted = 0;
  std::size_t n_correct = 0;
  // False when nothing was predicted; fdr is then reported as 0 but rendered as a dash.
  bool fdr_defined = false;
};

// Harmonic combination used for F1: 2*tdr*(1-fdr) / ((1-fdr) + tdr), 0 when the denominator vanishes.
inline double f1_from_rates(double tdr, double fdr) {
  const double precision = 1.0 - fdr;
  const double denom = precision + tdr;
  return denom > 0.0 ? 2.0 * tdr * precision / denom : 0.0;
}

// Direction-sensitive exact matching. `predicted` is a set, so duplicates
// are already gone.
inline ScoreCard score(const EdgeSet& predicted, const CausalDag& truth) {
  if (truth.edges().empty()) throw InvalidArgument("cannot score against a graph with no edges");
  ScoreCard s;
  s.n_true = truth.edges().size();
  s.n_predicted = predicted.size();
  for (const auto& e : predicted)
    if (truth.edges().count(e)) ++s.n_correct;
  s.tdr = static_cast<double>(s.n_correct) / static_cast<double>(s.n_true);
  s.fdr_defined = s.n_predicted > 0;
  s.fdr = s.fdr_defined ? static_cast<double>(s.n_predicted - s.n_correct) / static_cast<double>(s.n_predicted) : 0.0;
  s.f1 = s.tdr > 0.0 ? f1_from_rates(s.tdr, s.fdr) : 0.0;
  return s;
}

struct AggregateScore {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation (divides by n)
  std::size_t n_replications = 0;
};

inline AggregateScore aggregate(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("aggregate of an empty series");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n), values.size()};
}

}  // namespace cattr
