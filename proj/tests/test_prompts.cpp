#include <gtest/gtest.h>

#include <map>

#include "cattr/prompts.hpp"

using namespace cattr;

namespace {

TabularDataset galton(std::size_t rows = 120) {
  std::vector<Column> cols{{"Family", {}}, {"Gene", {}}, {"Gender", {}}, {"Height", {}}};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].values.push_back(double(r) + 0.1 * double(c) + 1000.0 * c);
  return TabularDataset(std::move(cols), "galton");
}

CausalDag galton_truth() {
  return from_edge_list("Gene -> Height\nGene -> Gender\nGender -> Height",
                        std::vector<std::string>{"Family", "Gene", "Gender", "Height"});
}

std::size_t count_lines(const std::string& s) { return split_lines(s).size(); }

bool contains_word(const std::string& text, const std::string& word) { return text.find(word) != std::string::npos; }

}  // namespace

TEST(ShuffleColumns, SingleColumnUnchanged) {
  TabularDataset ds({{"only", {1, 2, 3}}});
  EXPECT_EQ(shuffle_columns(ds, 9), ds);
}

TEST(ShuffleColumns, DeterministicAndRowsIntact) {
  auto ds = galton(10);
  auto a = shuffle_columns(ds, 5), b = shuffle_columns(ds, 5);
  EXPECT_EQ(a, b);
  for (const auto& c : a.columns()) EXPECT_EQ(c.values, ds.column(c.name).values);
}

TEST(ShuffleColumns, UniformOverPermutations) {
  TabularDataset ds({{"a", {1}}, {"b", {2}}, {"c", {3}}, {"d", {4}}});
  std::map<std::string, int> counts;
  const int trials = 1000;
  for (int s = 0; s < trials; ++s) counts[join(shuffle_columns(ds, s).names(), "")]++;
  ASSERT_EQ(counts.size(), 24u);
  double chi2 = 0;
  const double expected = trials / 24.0;
  for (const auto& [perm, n] : counts) {
    EXPECT_NEAR(n / double(trials), 1.0 / 24.0, 0.02) << perm;
    chi2 += (n - expected) * (n - expected) / expected;
  }
  EXPECT_LT(chi2, 41.64);  // chi-square 0.99 quantile, 23 degrees of freedom
}

TEST(Obfuscate, DistinctPseudoWords) {
  TabularDataset ds({{"Gene", {1}}, {"Height", {2}}, {"Gender", {3}}});
  auto ob = obfuscate_names(ds, 21);
  auto names = ob.dataset.names();
  std::set<std::string> uniq(names.begin(), names.end());
  EXPECT_EQ(uniq.size(), 3u);
  std::set<char> initials;
  for (const auto& n : names) {
    ASSERT_EQ(n.size(), 6u);
    for (int i = 0; i < 6; ++i) {
      const bool vowel = std::string_view("aeiou").find(n[i]) != std::string_view::npos;
      EXPECT_EQ(vowel, i % 2 == 1) << n;
    }
    EXPECT_EQ(detail::common_words().count(n), 0u);
    const auto originals = ds.names();
    EXPECT_EQ(originals.end(), std::find(originals.begin(), originals.end(), n));
    for (char c : initials) EXPECT_GE(std::abs(c - n[0]), 2) << n;
    initials.insert(n[0]);
  }
  EXPECT_EQ(obfuscate_names(ds, 21).dataset.names(), names);
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(deobfuscate(names[i], ob.mapping), ds.names()[i]);
}

TEST(Obfuscate, LargeSetsStillUnique) {
  std::vector<Column> cols;
  for (int i = 0; i < 30; ++i) cols.push_back({"v" + std::to_string(i), {double(i)}});
  auto ob = obfuscate_names(TabularDataset(cols), 4);
  auto names = ob.dataset.names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 30u);
  EXPECT_EQ(ob.mapping.size(), 30u);
}

TEST(Reverse, ChainSwapsEnds) {
  TabularDataset ds({{"A", {1, 1}}, {"B", {2, 2}}, {"C", {3, 3}}});
  auto truth = from_edge_list("A -> B\nB -> C");
  auto rev = reverse_relabel(ds, truth);
  EXPECT_EQ(rev.dataset.names(), ds.names());
  EXPECT_EQ(rev.dataset.column("A").values, ds.column("C").values);
  EXPECT_EQ(rev.dataset.column("C").values, ds.column("A").values);
  EXPECT_EQ(rev.dataset.column("B").values, ds.column("B").values);
  EXPECT_EQ(rev.reversed_truth.edges(), (EdgeSet{{"B", "A"}, {"C", "B"}}));
}

TEST(Reverse, Involution) {
  auto ds = galton(5);
  auto truth = galton_truth();
  EXPECT_EQ(reverse_relabel(reverse_relabel(ds, truth).dataset, truth).dataset, ds);
}

TEST(Reverse, GaltonReversedTruth) {
  auto rev = reverse_relabel(galton(5), galton_truth());
  EXPECT_TRUE(rev.reversed_truth.has_edge("Height", "Gender"));
  EXPECT_TRUE(rev.reversed_truth.has_edge("Height", "Gene"));
}

TEST(Reverse, MismatchRejected) {
  TabularDataset ds({{"A", {1}}, {"B", {2}}});
  EXPECT_THROW(reverse_relabel(ds, from_edge_list("A -> C")), InvalidArgument);
}

TEST(BuildPrompt, RawDataGalton) {
  PromptConfig cfg;
  cfg.seed = 3;
  auto p = build_prompt(galton(), Condition::RawData, cfg);
  EXPECT_EQ(p.system_text,
            "You are a helpful assistant to suggest potential causal pairs with direction (A \xE2\x86\x92 B means A "
            "causes B)");
  EXPECT_TRUE(p.user_text.starts_with(
      "Suggest causal pairs with direction among following variables after analyzing following data:\n"));
  EXPECT_TRUE(p.user_text.ends_with(
      "MUST Suggest ONLY the causal pairs with direction without saying any other things"));
  EXPECT_EQ(count_lines(p.user_text), 1u + 1u + 50u + 1u);
  EXPECT_EQ(p.row_indices.size(), 50u);
  EXPECT_TRUE(std::is_sorted(p.row_indices.begin(), p.row_indices.end()));
  EXPECT_EQ(split_lines(p.user_text)[1], join(p.presented_names, ","));
  EXPECT_TRUE(p.name_mapping.empty());
}

TEST(BuildPrompt, RowsRenderSampledValues) {
  PromptConfig cfg;
  cfg.seed = 8;
  cfg.max_rows = 3;
  auto ds = galton(10);
  auto p = build_prompt(ds, Condition::RawData, cfg);
  auto lines = split_lines(p.user_text);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<std::string> cells;
    for (auto c : p.column_order) cells.push_back(format_sig4(ds.column(c).values[p.row_indices[k]]));
    EXPECT_EQ(lines[2 + k], join(cells, ","));
  }
}

TEST(BuildPrompt, OmitDataDiffersOnlyByData) {
  PromptConfig cfg;
  cfg.seed = 4;
  auto raw = build_prompt(galton(), Condition::RawData, cfg);
  auto od = build_prompt(galton(), Condition::OmitData, cfg);
  EXPECT_EQ(od.presented_names, raw.presented_names);
  EXPECT_EQ(od.row_indices, raw.row_indices);
  EXPECT_EQ(od.user_text, "Suggest causal pairs with direction among following variables:\n" +
                              join(raw.presented_names, ",") +
                              "\nMUST Suggest ONLY the causal pairs with direction without saying any other things");
}

TEST(BuildPrompt, OmitKnowledgeHidesNames) {
  PromptConfig cfg;
  cfg.seed = 6;
  auto p = build_prompt(galton(), Condition::OmitKnowledge, cfg);
  for (const auto& n : galton().names()) EXPECT_FALSE(contains_word(p.user_text, n)) << n;
  EXPECT_EQ(p.name_mapping.size(), 4u);
  EXPECT_EQ(count_lines(p.user_text), 53u);
}

TEST(BuildPrompt, RandomGuessOnlyPseudoWords) {
  PromptConfig cfg;
  cfg.seed = 6;
  auto p = build_prompt(galton(), Condition::RandomGuess, cfg);
  auto lines = split_lines(p.user_text);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1], join(p.presented_names, ","));
  for (const auto& n : p.presented_names) EXPECT_TRUE(p.name_mapping.count(n));
}

TEST(BuildPrompt, ReversedNeedsTruthAndSwapsData) {
  PromptConfig cfg;
  cfg.seed = 2;
  EXPECT_THROW(build_prompt(galton(), Condition::Reversed, cfg), InvalidArgument);
  auto truth = galton_truth();
  auto p = build_prompt(galton(), Condition::Reversed, cfg, &truth);
  auto raw = build_prompt(galton(), Condition::RawData, cfg);
  EXPECT_EQ(p.presented_names, raw.presented_names);
  EXPECT_NE(p.user_text, raw.user_text);
}

TEST(BuildPrompt, Deterministic) {
  PromptConfig cfg;
  cfg.seed = 99;
  for (auto c : kAllConditions) {
    auto truth = galton_truth();
    EXPECT_EQ(build_prompt(galton(), c, cfg, &truth).user_text, build_prompt(galton(), c, cfg, &truth).user_text);
  }
  cfg.max_rows = 0;
  EXPECT_THROW(build_prompt(galton(), Condition::RawData, cfg), InvalidArgument);
}

TEST(Parse, UnicodeArrows) {
  auto p = parse_response("Gene \xE2\x86\x92 Height\nGender \xE2\x86\x92 Height", {"Gene", "Height", "Gender"});
  EXPECT_EQ(p.edges, (EdgeSet{{"Gene", "Height"}, {"Gender", "Height"}}));
}

TEST(Parse, ObfuscatedWithUnknownMention) {
  NameMapping m{{"bryoto", "Gene"}, {"nienet", "Height"}};
  auto p = parse_response("bryoto -> nienet\nalso maybe qq -> zz", {"bryoto", "nienet"}, m);
  EXPECT_EQ(p.edges, (EdgeSet{{"Gene", "Height"}}));
  EXPECT_EQ(p.ignored_mentions, 1u);
}

TEST(Parse, RefusalIsEmpty) {
  auto p = parse_response("There are no causal relations.", {"A", "B"});
  EXPECT_TRUE(p.edges.empty());
  EXPECT_EQ(p.raw_text, "There are no causal relations.");
}

TEST(Parse, FormatsAndNoise) {
  std::vector<std::string> names{"Age", "Income", "Education level"};
  auto p = parse_response(
      "1. Age --> Income\n- education level => income\n* **Age** causes Education level; Income -> Income\n"
      "Age causes happiness",
      names);
  EXPECT_EQ(p.edges, (EdgeSet{{"Age", "Income"}, {"Education level", "Income"}, {"Age", "Education level"}}));
}

TEST(Parse, ChainsAndDuplicates) {
  auto p = parse_response("A -> B -> C\nA -> B", {"A", "B", "C"});
  EXPECT_EQ(p.edges, (EdgeSet{{"A", "B"}, {"B", "C"}}));
}

TEST(Parse, RoundTripCanonical) {
  Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    auto names = default_node_names(2 + rng.below(6));
    auto g = random_dag(names, 0.5, rng);
    EXPECT_EQ(parse_response(render_edges(g.edges()), names).edges, g.edges());
  }
}

TEST(Transcript, RecordsReproductionInputs) {
  PromptConfig cfg;
  cfg.seed = 1;
  auto p = build_prompt(galton(), Condition::OmitKnowledge, cfg);
  auto t = render_transcript(p);
  EXPECT_TRUE(contains_word(t, "condition: omit-knowledge"));
  EXPECT_TRUE(contains_word(t, "name_mapping:"));
  EXPECT_TRUE(contains_word(t, p.user_text));
}
