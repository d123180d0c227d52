#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "cattr/lingam.hpp"
#include "cattr/simulate.hpp"

using namespace cattr;

namespace {

double ks_statistic(std::vector<double> v, const std::function<double(double)>& cdf) {
  std::sort(v.begin(), v.end());
  const double n = double(v.size());
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double chi2_4_cdf(double t) { return t <= 0 ? 0.0 : 1.0 - std::exp(-t / 2) * (1.0 + t / 2); }

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) { return ols_fit(x, y).slope; }

}  // namespace

TEST(NoiseSpecParse, Families) {
  EXPECT_EQ(NoiseSpec::parse("chi2:4").describe(), "chi2(4)");
  EXPECT_EQ(NoiseSpec::parse("uniform:-1:1").describe(), "uniform(-1,1)");
  EXPECT_TRUE(NoiseSpec::parse("gaussian:2").is_gaussian());
  EXPECT_EQ(NoiseSpec::parse("laplace:0.5").describe(), "laplace(0.5)");
  EXPECT_THROW(NoiseSpec::parse("cauchy:1"), Error);
  EXPECT_THROW(NoiseSpec::parse("uniform:1:0"), InvalidArgument);
  EXPECT_THROW(NoiseSpec::chi_squared(0.5), InvalidArgument);
}

TEST(NoiseSpecDraw, CenteringWithinBound) {
  for (auto spec : {NoiseSpec::chi_squared(4), NoiseSpec::uniform(2, 5), NoiseSpec::laplace(1)}) {
    Rng rng(13);
    const std::size_t n = 20000;
    double sum = 0, sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = spec.draw(rng);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    EXPECT_LT(std::abs(mean), 5.0 * sd / std::sqrt(double(n))) << spec.describe();
  }
}

TEST(Scm, SingleNodeDeterministic) {
  ScmSpec spec{CausalDag({"A"}, std::vector<Edge>{}), {}, {{"A", NoiseSpec::gaussian(1)}}, {}};
  auto a = simulate_scm(spec, 5, 42), b = simulate_scm(spec, 5, 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.n_rows(), 5u);
  EXPECT_NE(simulate_scm(spec, 5, 43), a);
}

TEST(Scm, NoiseFreePropagation) {
  auto dag = from_edge_list("A -> B");
  ScmSpec spec{dag, {{{"A", "B"}, 2.0}}, {{"A", NoiseSpec::chi_squared(4)}, {"B", NoiseSpec::chi_squared(4)}}, {{"B", 0.0}}};
  auto ds = simulate_scm(spec, 100, 1);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(ds.column("B").values[i], 2.0 * ds.column("A").values[i]);
}

TEST(Scm, ValidationErrors) {
  auto dag = from_edge_list("A -> B");
  ScmSpec missing{dag, {}, {{"A", NoiseSpec::chi_squared(4)}, {"B", NoiseSpec::chi_squared(4)}}, {}};
  EXPECT_THROW(simulate_scm(missing, 10, 0), InvalidArgument);
  ScmSpec tiny{dag, {{{"A", "B"}, 0.05}}, {{"A", NoiseSpec::chi_squared(4)}, {"B", NoiseSpec::chi_squared(4)}}, {}};
  EXPECT_THROW(simulate_scm(tiny, 10, 0), InvalidArgument);
  auto ok = random_scm(dag, NoiseSpec::chi_squared(4), 0);
  EXPECT_THROW(simulate_scm(ok, 0, 0), InvalidArgument);
}

TEST(Scm, ColumnsFollowDagNodeOrder) {
  auto dag = from_edge_list("C -> A\nA -> B", std::vector<std::string>{"B", "A", "C"});
  auto ds = simulate_scm(random_scm(dag, NoiseSpec::uniform(-1, 1), 3), 20, 3);
  EXPECT_EQ(ds.names(), (std::vector<std::string>{"B", "A", "C"}));
}

TEST(Scm, GaltonSlopesRecovered) {
  auto dag = from_edge_list("Gene -> Height\nGene -> Gender\nGender -> Height");
  ScmSpec spec{dag,
               {{{"Gene", "Height"}, 1.2}, {{"Gene", "Gender"}, -0.8}, {{"Gender", "Height"}, 0.6}},
               {},
               {}};
  for (const auto& n : dag.nodes()) spec.noise.emplace(n, NoiseSpec::chi_squared(4));
  auto ds = simulate_scm(spec, 898, 2024);
  const auto& gene = ds.column("Gene").values;
  const auto& gender = ds.column("Gender").values;
  const auto& height = ds.column("Height").values;
  // Tolerances are four standard errors of each slope estimate.
  auto se = [](const std::vector<double>& x, const RegressionFit& fit) {
    double sxx = 0, rss = 0, mx = 0;
    for (double v : x) mx += v / x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      rss += fit.residuals[i] * fit.residuals[i];
    }
    return std::sqrt(rss / (x.size() - 2) / sxx);
  };
  auto f1 = ols_fit(gene, gender);
  EXPECT_NEAR(f1.slope, -0.8, 4 * se(gene, f1));
  // Height has two parents: regress on each after partialling out the other.
  auto g_on_gd = ols_fit(gender, gene).residuals;
  auto h_on_gd = ols_fit(gender, height).residuals;
  auto f2 = ols_fit(g_on_gd, h_on_gd);
  EXPECT_NEAR(f2.slope, 1.2, 4 * se(g_on_gd, f2));
  auto gd_on_g = ols_fit(gene, gender).residuals;
  auto h_on_g = ols_fit(gene, height).residuals;
  auto f3 = ols_fit(gd_on_g, h_on_g);
  EXPECT_NEAR(f3.slope, 0.6, 4 * se(gd_on_g, f3));
}

TEST(Scm, RootColumnsMatchNoiseDistribution) {
  auto dag = from_edge_list("R -> C");
  int below = 0;
  for (int s = 0; s < 20; ++s) {
    auto ds = simulate_scm(random_scm(dag, NoiseSpec::chi_squared(4), s), 500, s);
    const double d = ks_statistic(ds.column("R").values, [](double x) { return chi2_4_cdf(x + 4.0); });
    below += d < 1.358 / std::sqrt(500.0);
  }
  EXPECT_GE(below, 18);  // 5% level: one or two exceedances in 20 are expected by chance
}

TEST(Scm, UniformRootKs) {
  auto dag = from_edge_list("R -> C");
  int below = 0;
  for (int s = 0; s < 20; ++s) {
    auto ds = simulate_scm(random_scm(dag, NoiseSpec::uniform(0, 1, false), s), 500, s);
    const double d = ks_statistic(ds.column("R").values, [](double x) { return std::clamp(x, 0.0, 1.0); });
    below += d < 1.358 / std::sqrt(500.0);
  }
  EXPECT_GE(below, 18);
}

TEST(Scenario, TargetsRealizedQuickly) {
  for (auto target : {Scenario::XCausesY, Scenario::YCausesX, Scenario::NoRelation, Scenario::Undefined}) {
    int quick = 0;
    for (int s = 0; s < 10; ++s) {
      auto draw = simulate_pair_for_scenario(target, 500, derive_seed(9, s));
      EXPECT_EQ(draw.realized.kind, target);
      EXPECT_EQ(classify_pair(draw.sample).kind, target);
      quick += draw.attempts <= 3;
    }
    EXPECT_GE(quick, 9) << to_string(target);
  }
}

TEST(Scenario, RegenerationReproducesSample) {
  auto draw = simulate_pair_for_scenario(Scenario::NoRelation, 200, 77);
  auto again = regenerate_scenario_candidate(Scenario::NoRelation, 200, draw.attempt_seed);
  EXPECT_EQ(again.x(), draw.sample.x());
  EXPECT_EQ(again.y(), draw.sample.y());
}

TEST(Scenario, ExhaustionReported) {
  ScenarioSimConfig cfg;
  cfg.noise = NoiseSpec::gaussian(1);  // Gaussian linear pairs are rarely identifiable
  cfg.max_attempts = 2;
  int failures = 0;
  for (int s = 0; s < 10; ++s) {
    try {
      simulate_pair_for_scenario(Scenario::XCausesY, 1000, s, cfg);
    } catch (const SimulationError& e) {
      EXPECT_EQ(e.attempts(), 2);
      ++failures;
    }
  }
  EXPECT_GE(failures, 5);
  EXPECT_THROW(simulate_pair_for_scenario(Scenario::XCausesY, 50, 0), InvalidArgument);
}

TEST(Scenario, ConfounderRecipeIsUndefined) {
  ScenarioSimConfig cfg;
  cfg.undefined_via_confounder = true;
  auto draw = simulate_pair_for_scenario(Scenario::Undefined, 1000, 5, cfg);
  EXPECT_EQ(draw.realized.kind, Scenario::Undefined);
}

TEST(Theorem1, DirectionRecovered) {
  int ok = 0, negative_ok = 0, negatives = 0;
  for (int s = 0; s < 20; ++s) {
    auto p = simulate_theorem1_pair("Child's Height", "Father's Height", 1000, s);
    const bool hit = pairwise_direction(p) == Scenario::XCausesY;
    ok += hit;
    if (ols_fit(p.x(), p.y()).slope < 0) {
      ++negatives;
      negative_ok += hit;
    }
  }
  EXPECT_GE(ok, 19);
  EXPECT_GT(negatives, 0);
  EXPECT_GE(negative_ok, negatives - 1);
}

TEST(Theorem1, SmallSampleDegradesGracefully) {
  int ok = 0;
  for (int s = 0; s < 50; ++s) ok += pairwise_direction(simulate_theorem1_pair("a", "b", 100, s)) == Scenario::XCausesY;
  EXPECT_GE(ok, 40);
}

TEST(Theorem1, GaussianRejected) {
  EXPECT_THROW(simulate_theorem1_pair("a", "b", 100, 0, NoiseSpec::gaussian(1)), InvalidArgument);
}
