#pragma once

// Knowledge/data attribution scores estimated from per-condition true
// discovery rates.
//
//   CAK = TDR(raw)            - TDR(omit knowledge)
//   CAD = TDR(raw)            - TDR(omit data)
//   MAD = TDR(omit knowledge) - TDR(random guess)
//   MAK = TDR(omit data)      - TDR(random guess)
//
// so that MAD - MAK = CAD - CAK holds for every input. All conditions are
// expected to come from one prompt template, one row subsample and one
// replication seed, so only names and data differ between them.

#include <optional>
#include <span>
#include <vector>

#include "cattr/error.hpp"
#include "cattr/metrics.hpp"

namespace cattr {

struct ConditionTdr {
  std::optional<double> raw;
  std::optional<double> omit_knowledge;
  std::optional<double> omit_data;
  std::optional<double> random_guess;
  std::optional<double> reverse;
  std::optional<double> reverse_raw;
};

struct AttributionScores {
  double cak = 0.0;
  double cad = 0.0;
  double mad = 0.0;
  double mak = 0.0;
};

struct AttributionAggregate {
  AggregateScore cak;
  AggregateScore cad;
  AggregateScore mad;
  AggregateScore mak;
};

inline AttributionScores estimate(const ConditionTdr& t) {
  if (!t.raw || !t.omit_knowledge || !t.omit_data || !t.random_guess)
    throw InvalidArgument("attribution needs raw, omit-knowledge, omit-data and random-guess TDR");
  for (double v : {*t.raw, *t.omit_knowledge, *t.omit_data, *t.random_guess})
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("TDR outside [0, 1]");
  return {
      *t.raw - *t.omit_knowledge,
      *t.raw - *t.omit_data,
      *t.omit_knowledge - *t.random_guess,
      *t.omit_data - *t.random_guess,
  };
}

inline AttributionAggregate estimate_replicated(std::span<const ConditionTdr> replications) {
  if (replications.empty()) throw InvalidArgument("no replications to estimate from");
  std::vector<double> cak, cad, mad, mak;
  for (const auto& r : replications) {
    auto s = estimate(r);
    cak.push_back(s.cak);
    cad.push_back(s.cad);
    mad.push_back(s.mad);
    mak.push_back(s.mak);
  }
  return {aggregate(cak), aggregate(cad), aggregate(mad), aggregate(mak)};
}

}  // namespace cattr
