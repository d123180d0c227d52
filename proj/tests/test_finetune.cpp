#include <gtest/gtest.h>

#include "cattr/finetune.hpp"

using namespace cattr;

namespace {

PairCatalogEntry pair(std::string a, std::string b, std::optional<KnowledgeDirection> k = std::nullopt) {
  return {a, b, "definition of " + a, "definition of " + b, k};
}

FinetuneConfig small() {
  FinetuneConfig c;
  c.n = 300;
  c.threads = 1;
  return c;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cattr_ft_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Finetune, OnePairFourScenarios) {
  auto corpus = generate_samples({pair("Altitude", "Temperature", KnowledgeDirection::AToB)}, 7, small());
  ASSERT_EQ(corpus.samples.size(), 4u);
  EXPECT_TRUE(corpus.dropped.empty());
  std::multiset<Scenario> seen;
  int a_first = 0;
  for (const auto& s : corpus.samples) {
    seen.insert(s.scenario);
    a_first += s.a_first;
    EXPECT_EQ(scenario_from_flags(s.y_on_x.independent, s.x_on_y.independent), s.scenario);
    EXPECT_TRUE(s.gradable);
  }
  EXPECT_EQ(seen, (std::multiset<Scenario>{Scenario::Undefined, Scenario::NoRelation, Scenario::YCausesX,
                                           Scenario::XCausesY}));
  EXPECT_EQ(a_first, 2);
}

TEST(Finetune, AnswersFollowOutcome) {
  auto corpus = generate_samples({pair("Altitude", "Temperature", KnowledgeDirection::BToA)}, 3, small());
  for (const auto& s : corpus.samples) {
    switch (s.scenario) {
      case Scenario::XCausesY: EXPECT_EQ(s.answer, "Altitude causes Temperature"); break;
      case Scenario::YCausesX: EXPECT_EQ(s.answer, "Temperature causes Altitude"); break;
      case Scenario::NoRelation: EXPECT_EQ(s.answer, "No Causal Relation"); break;
      case Scenario::Undefined: EXPECT_EQ(s.answer, "Temperature causes Altitude"); break;
    }
  }
}

TEST(Finetune, UndefinedWithoutKnowledgeIsUngradable) {
  auto corpus = generate_samples({pair("p", "q")}, 4, small());
  for (const auto& s : corpus.samples) EXPECT_EQ(s.gradable, s.scenario != Scenario::Undefined);
}

TEST(Finetune, InstructionContent) {
  auto corpus = generate_samples({pair("Altitude", "Temperature")}, 5, small());
  for (const auto& s : corpus.samples) {
    const auto& t = s.instruction;
    EXPECT_NE(t.find("Altitude: definition of Altitude"), std::string::npos);
    EXPECT_NE(t.find("Temperature: definition of Temperature"), std::string::npos);
    EXPECT_NE(t.find("utilize your knowledge to infer the causal pairs"), std::string::npos);
    EXPECT_NE(t.find("p-value " + format_fixed(s.y_on_x.p_value, 3)), std::string::npos);
    EXPECT_NE(t.find("p-value " + format_fixed(s.x_on_y.p_value, 3)), std::string::npos);
    const auto first = t.find("- Altitude:"), second = t.find("- Temperature:");
    EXPECT_EQ(first < second, s.a_first);
    EXPECT_EQ(t.find("(independent)") != std::string::npos, s.y_on_x.independent || s.x_on_y.independent);
    EXPECT_EQ(t.find("(dependent)") != std::string::npos, !s.y_on_x.independent || !s.x_on_y.independent);
  }
}

TEST(Finetune, EvidenceReproducibleFromSeeds) {
  auto cfg = small();
  auto corpus = generate_samples({pair("u", "v"), pair("w", "z")}, 11, cfg);
  for (const auto& s : corpus.samples) {
    auto again = simulate_pair_for_scenario(s.scenario, cfg.n, s.sim_seed, cfg.sim);
    EXPECT_EQ(again.attempt_seed, s.attempt_seed);
    auto sample = regenerate_scenario_candidate(s.scenario, cfg.n, s.attempt_seed, cfg.sim);
    auto label = classify_pair(sample, cfg.sim.lingam);
    EXPECT_EQ(label.kind, s.scenario);
    EXPECT_EQ(label.y_on_x.p_value, s.y_on_x.p_value);
    EXPECT_EQ(label.x_on_y.statistic, s.x_on_y.statistic);
  }
}

TEST(Finetune, ThreadCountDoesNotChangeOutput) {
  std::vector<PairCatalogEntry> cat{pair("a1", "b1"), pair("a2", "b2"), pair("a3", "b3")};
  auto one = small(), many = small();
  many.threads = 3;
  EXPECT_EQ(generate_samples(cat, 2, one).samples, generate_samples(cat, 2, many).samples);
}

TEST(Finetune, FailingPairDroppedWhole) {
  auto cfg = small();
  cfg.sim.noise = NoiseSpec::gaussian(1);  // linear Gaussian pairs rarely identify a direction
  cfg.sim.max_attempts = 1;
  std::vector<PairCatalogEntry> cat;
  for (int i = 0; i < 4; ++i) cat.push_back(pair("a" + std::to_string(i), "b" + std::to_string(i)));
  auto corpus = generate_samples(cat, 1, cfg);
  EXPECT_FALSE(corpus.dropped.empty());
  EXPECT_EQ(corpus.samples.size(), 4 * (cat.size() - corpus.dropped.size()));
  for (const auto& d : corpus.dropped)
    for (const auto& s : corpus.samples) EXPECT_NE(s.pair_id, d.pair_id);
}

TEST(Finetune, Validation) {
  EXPECT_THROW(generate_samples({}, 0, small()), InvalidArgument);
  EXPECT_THROW(generate_samples({pair("x", "x")}, 0, small()), InvalidArgument);
  PairCatalogEntry no_def{"x", "y", "", "d", std::nullopt};
  EXPECT_THROW(generate_samples({no_def}, 0, small()), InvalidArgument);
}

TEST(Jsonl, RoundTripAndCardinality) {
  auto corpus = generate_samples({pair("Altitude", "Temperature", KnowledgeDirection::AToB)}, 9, small());
  auto path = temp_file("rt.jsonl");
  emit_jsonl(corpus.samples, path);
  EXPECT_EQ(split_lines(read_file(path)).size(), 4u);
  EXPECT_EQ(read_jsonl(path), corpus.samples);
  auto first = nlohmann::ordered_json::parse(split_lines(read_file(path))[0]);
  EXPECT_EQ(first.begin().key(), "instruction");
  std::filesystem::remove(path);
}

TEST(Jsonl, EmptyListGivesEmptyFile) {
  auto path = temp_file("empty.jsonl");
  emit_jsonl({}, path);
  EXPECT_EQ(read_file(path), "");
  EXPECT_TRUE(read_jsonl(path).empty());
  std::filesystem::remove(path);
}

TEST(Catalog, ParsesDirections) {
  auto cat = catalog_from_csv(
      "var_a,var_b,definition_a,definition_b,knowledge_direction\n"
      "Altitude,Temperature,height above sea level,mean air temperature,a->b\n"
      "Rain,Crop yield,\"rainfall, mm\",harvest per hectare,Crop yield -> Rain\n"
      "x,y,dx,dy,\n");
  ASSERT_EQ(cat.size(), 3u);
  EXPECT_EQ(cat[0].knowledge_direction, KnowledgeDirection::AToB);
  EXPECT_EQ(cat[1].knowledge_direction, KnowledgeDirection::BToA);
  EXPECT_EQ(cat[1].definition_a, "rainfall, mm");
  EXPECT_FALSE(cat[2].knowledge_direction);
}

TEST(Catalog, Errors) {
  EXPECT_THROW(catalog_from_csv("var_a,var_b\nx,y\n"), ParseError);
  EXPECT_THROW(catalog_from_csv("var_a,var_b,definition_a,definition_b,knowledge_direction\nx,y,a,b,sideways\n"),
               ParseError);
  EXPECT_THROW(catalog_from_csv("var_a,var_b,definition_a,definition_b\nx,x,a,b\n"), ParseError);
}

TEST(Manifest, ListsSeedsAndDrops) {
  FinetuneCorpus corpus;
  corpus.dropped.push_back({3, "could not realize"});
  auto m = corpus_manifest(corpus, 5, 42, small());
  EXPECT_EQ(m["seed"], 42);
  EXPECT_EQ(m["pairs"], 5);
  EXPECT_EQ(m["dropped"][0]["pair_id"], 3);
}
