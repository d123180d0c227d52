#pragma once

// Four-scenario instruction-tuning corpus. For every catalog pair, one sample
// per LiNGAM outcome (undefined, no relation, either direction): simulated
// data realizing that outcome, the two residual-independence verdicts in the
// instruction, and the answer the verdicts imply.
//
// In the simulation X is var_a and Y is var_b. Which of the two is
// introduced first is balanced per pair: two of its four samples list var_a
// first, two list var_b first.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cattr/dataset.hpp"
#include "cattr/error.hpp"
#include "cattr/lingam.hpp"
#include "cattr/simulate.hpp"
#include "cattr/text.hpp"

namespace cattr {

enum class KnowledgeDirection { AToB, BToA };

struct PairCatalogEntry {
  std::string var_a;
  std::string var_b;
  std::string definition_a;
  std::string definition_b;
  std::optional<KnowledgeDirection> knowledge_direction;

  void validate() const {
    if (trim(var_a).empty() || trim(var_b).empty()) throw InvalidArgument("catalog pair with an empty name");
    if (var_a == var_b) throw InvalidArgument("catalog pair names must differ: " + var_a);
    if (trim(definition_a).empty() || trim(definition_b).empty())
      throw InvalidArgument("catalog pair " + var_a + "/" + var_b + " is missing a definition");
  }
};

struct FinetuneSample {
  std::string instruction;
  std::string answer;
  Scenario scenario = Scenario::Undefined;
  std::size_t pair_id = 0;
  bool a_first = true;  // var_a introduced before var_b
  bool gradable = true;
  IndependenceVerdict y_on_x;  // var_b regressed on var_a
  IndependenceVerdict x_on_y;  // var_a regressed on var_b
  std::uint64_t sim_seed = 0;      // seed handed to simulate_pair_for_scenario
  std::uint64_t attempt_seed = 0;  // stream of the accepted candidate
  int attempts = 0;

  bool operator==(const FinetuneSample& o) const {
    auto same = [](const IndependenceVerdict& a, const IndependenceVerdict& b) {
      return a.statistic == b.statistic && a.p_value == b.p_value && a.independent == b.independent;
    };
    return instruction == o.instruction && answer == o.answer && scenario == o.scenario && pair_id == o.pair_id &&
           a_first == o.a_first && gradable == o.gradable && same(y_on_x, o.y_on_x) && same(x_on_y, o.x_on_y) &&
           sim_seed == o.sim_seed && attempt_seed == o.attempt_seed && attempts == o.attempts;
  }
};

struct DroppedPair {
  std::size_t pair_id = 0;
  std::string reason;
};

struct FinetuneCorpus {
  std::vector<FinetuneSample> samples;
  std::vector<DroppedPair> dropped;
};

struct FinetuneConfig {
  std::size_t n = 1000;
  ScenarioSimConfig sim;
  unsigned threads = 0;  // 0 = hardware concurrency
};

inline constexpr std::string_view kNoCausalRelation = "No Causal Relation";

inline std::string format_verdict_line(const std::string& response, const std::string& predictor,
                                       const IndependenceVerdict& v) {
  return "- Regressing " + response + " on " + predictor + ": distance correlation " + format_fixed(v.statistic, 3) +
         ", p-value " + format_fixed(v.p_value, 3) + " (" + (v.independent ? "independent" : "dependent") + ")\n";
}

inline std::string render_instruction(const PairCatalogEntry& pair, bool a_first, const ScenarioLabel& label) {
  const std::string& first = a_first ? pair.var_a : pair.var_b;
  const std::string& second = a_first ? pair.var_b : pair.var_a;
  const std::string& def_first = a_first ? pair.definition_a : pair.definition_b;
  const std::string& def_second = a_first ? pair.definition_b : pair.definition_a;
  // Verdict of regressing `second` on `first`, and the reverse.
  const auto& second_on_first = a_first ? label.y_on_x : label.x_on_y;
  const auto& first_on_second = a_first ? label.x_on_y : label.y_on_x;

  std::string s;
  s += "Two variables were measured and analysed with pairwise LiNGAM: each variable was regressed on the other "
       "and the fitted residual was tested for independence from the predictor.\n\n";
  s += "Variables:\n";
  s += "- " + first + ": " + def_first + "\n";
  s += "- " + second + ": " + def_second + "\n\n";
  s += "Decision rules:\n";
  s += "1. If the residual is dependent on the predictor in both regressions, the causal relationship is undefined. "
       "If the causal relationship is undefined, utilize your knowledge to infer the causal pairs.\n";
  s += "2. If the residual is independent of the predictor in both regressions, there is no causal relation between " +
       first + " and " + second + ".\n";
  s += "3. If regressing " + second + " on " + first + " leaves a residual independent of " + first +
       " while regressing " + first + " on " + second + " leaves a residual dependent on " + second + ", then " +
       first + " causes " + second + ".\n";
  s += "4. If regressing " + first + " on " + second + " leaves a residual independent of " + second +
       " while regressing " + second + " on " + first + " leaves a residual dependent on " + first + ", then " +
       second + " causes " + first + ".\n\n";
  s += "LiNGAM results:\n";
  s += format_verdict_line(second, first, second_on_first);
  s += format_verdict_line(first, second, first_on_second);
  s += "\nAnswer with the causal pair as \"<cause> causes <effect>\", or \"" + std::string(kNoCausalRelation) + "\".";
  return s;
}

// The answer implied by the LiNGAM outcome; the catalog's knowledge direction
// is consulted only when the outcome is undefined.
inline std::pair<std::string, bool> answer_for(const PairCatalogEntry& pair, Scenario scenario) {
  switch (scenario) {
    case Scenario::XCausesY: return {pair.var_a + " causes " + pair.var_b, true};
    case Scenario::YCausesX: return {pair.var_b + " causes " + pair.var_a, true};
    case Scenario::NoRelation: return {std::string(kNoCausalRelation), true};
    case Scenario::Undefined:
      if (pair.knowledge_direction == KnowledgeDirection::AToB) return {pair.var_a + " causes " + pair.var_b, true};
      if (pair.knowledge_direction == KnowledgeDirection::BToA) return {pair.var_b + " causes " + pair.var_a, true};
      return {"Undefined from the data; infer the direction between " + pair.var_a + " and " + pair.var_b +
                  " from knowledge.",
              false};
  }
  return {};
}

inline std::uint64_t scenario_seed(std::uint64_t seed, std::size_t pair_id, Scenario s) {
  return derive_seed(seed, "pair", static_cast<std::uint64_t>(pair_id), "scenario", std::string_view(to_string(s)));
}

namespace detail {

struct PairResult {
  std::vector<FinetuneSample> samples;
  std::optional<std::string> failure;
};

inline PairResult generate_pair(const PairCatalogEntry& pair, std::size_t pair_id, std::uint64_t seed,
                                const FinetuneConfig& config) {
  PairResult out;
  Rng order_rng(derive_seed(seed, "presentation", static_cast<std::uint64_t>(pair_id)));
  auto order = order_rng.permutation(4);  // scenarios at order[0], order[1] list var_a first
  for (std::size_t k = 0; k < 4; ++k) {
    const Scenario sc = kAllScenarios[k];
    const std::uint64_t sim_seed = scenario_seed(seed, pair_id, sc);
    try {
      auto draw = simulate_pair_for_scenario(sc, config.n, sim_seed, config.sim);
      FinetuneSample s;
      s.scenario = sc;
      s.pair_id = pair_id;
      s.a_first = order[0] == k || order[1] == k;
      s.y_on_x = draw.realized.y_on_x;
      s.x_on_y = draw.realized.x_on_y;
      s.sim_seed = sim_seed;
      s.attempt_seed = draw.attempt_seed;
      s.attempts = draw.attempts;
      s.instruction = render_instruction(pair, s.a_first, draw.realized);
      std::tie(s.answer, s.gradable) = answer_for(pair, draw.realized.kind);
      out.samples.push_back(std::move(s));
    } catch (const SimulationError& e) {
      out.samples.clear();
      out.failure = e.what();
      return out;
    }
  }
  return out;
}

}  // namespace detail

// Pairs are processed independently (optionally on several threads) and
// merged in (pair id, scenario) order, so output does not depend on threading.
inline FinetuneCorpus generate_samples(const std::vector<PairCatalogEntry>& catalog, std::uint64_t seed,
                                       const FinetuneConfig& config = {}) {
  if (catalog.empty()) throw InvalidArgument("empty pair catalog");
  for (const auto& p : catalog) p.validate();
  std::vector<detail::PairResult> results(catalog.size());
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(catalog.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < catalog.size(); ++i) results[i] = detail::generate_pair(catalog[i], i, seed, config);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t)
      workers.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < catalog.size();)
          results[i] = detail::generate_pair(catalog[i], i, seed, config);
      });
  }
  FinetuneCorpus corpus;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].failure) {
      corpus.dropped.push_back({i, *results[i].failure});
      continue;
    }
    for (auto& s : results[i].samples) corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

// --- serialization --------------------------------------------------------

inline nlohmann::ordered_json verdict_json(const IndependenceVerdict& v) {
  return {{"statistic", v.statistic}, {"p_value", v.p_value}, {"independent", v.independent}};
}

inline IndependenceVerdict verdict_from_json(const nlohmann::json& j) {
  return {j.at("statistic").get<double>(), j.at("p_value").get<double>(), j.at("independent").get<bool>()};
}

inline nlohmann::ordered_json sample_json(const FinetuneSample& s) {
  return {{"instruction", s.instruction},
          {"answer", s.answer},
          {"scenario", std::string(to_string(s.scenario))},
          {"pair_id", s.pair_id},
          {"presentation_order", s.a_first ? "a_first" : "b_first"},
          {"gradable", s.gradable},
          {"sim_seed", s.sim_seed},
          {"attempt_seed", s.attempt_seed},
          {"attempts", s.attempts},
          {"evidence", {{"y_on_x", verdict_json(s.y_on_x)}, {"x_on_y", verdict_json(s.x_on_y)}}}};
}

inline FinetuneSample sample_from_json(const nlohmann::json& j) {
  FinetuneSample s;
  s.instruction = j.at("instruction").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  s.pair_id = j.at("pair_id").get<std::size_t>();
  s.a_first = j.at("presentation_order").get<std::string>() == "a_first";
  s.gradable = j.at("gradable").get<bool>();
  s.sim_seed = j.at("sim_seed").get<std::uint64_t>();
  s.attempt_seed = j.at("attempt_seed").get<std::uint64_t>();
  s.attempts = j.at("attempts").get<int>();
  s.y_on_x = verdict_from_json(j.at("evidence").at("y_on_x"));
  s.x_on_y = verdict_from_json(j.at("evidence").at("x_on_y"));
  return s;
}

inline std::string to_jsonl(const std::vector<FinetuneSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += sample_json(s).dump() + "\n";
  return out;
}

inline void emit_jsonl(const std::vector<FinetuneSample>& samples, const std::filesystem::path& path) {
  write_file(path, to_jsonl(samples));
}

inline std::vector<FinetuneSample> read_jsonl(const std::filesystem::path& path) {
  std::vector<FinetuneSample> out;
  std::size_t line_no = 0;
  const auto text = read_file(path);
  for (auto line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad corpus record: ") + e.what(), line_no);
    }
  }
  return out;
}

inline nlohmann::ordered_json corpus_manifest(const FinetuneCorpus& corpus, std::size_t catalog_size,
                                              std::uint64_t seed, const FinetuneConfig& config) {
  nlohmann::ordered_json dropped = nlohmann::ordered_json::array();
  for (const auto& d : corpus.dropped) dropped.push_back({{"pair_id", d.pair_id}, {"reason", d.reason}});
  return {{"seed", seed},
          {"n", config.n},
          {"alpha", config.sim.lingam.alpha},
          {"n_permutations", config.sim.lingam.n_permutations},
          {"test_seed", config.sim.lingam.seed},
          {"noise", config.sim.noise.describe()},
          {"max_attempts", config.sim.max_attempts},
          {"pairs", catalog_size},
          {"samples", corpus.samples.size()},
          {"dropped", dropped}};
}

// CSV with columns var_a, var_b, definition_a, definition_b and an optional
// knowledge_direction ("a->b", "b->a", "<var_a> -> <var_b>", or empty).
inline std::vector<PairCatalogEntry> catalog_from_csv(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("empty catalog");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[std::string(trim(rows[0][i]))] = i;
  for (const char* req : {"var_a", "var_b", "definition_a", "definition_b"})
    if (!col.count(req)) throw ParseError(std::string("catalog is missing column ") + req, 1);
  std::vector<PairCatalogEntry> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      if (it == col.end() || it->second >= row.size()) return {};
      return std::string(trim(row[it->second]));
    };
    PairCatalogEntry e{get("var_a"), get("var_b"), get("definition_a"), get("definition_b"), std::nullopt};
    const std::string dir = get("knowledge_direction");
    if (!dir.empty()) {
      std::string compact;
      for (char c : dir)
        if (c != ' ') compact += c;
      auto strip = [](std::string s) {
        s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
        return s;
      };
      const std::string lc = to_lower(compact);
      if (lc == "a->b" || compact == strip(e.var_a) + "->" + strip(e.var_b))
        e.knowledge_direction = KnowledgeDirection::AToB;
      else if (lc == "b->a" || compact == strip(e.var_b) + "->" + strip(e.var_a))
        e.knowledge_direction = KnowledgeDirection::BToA;
      else
        throw ParseError("unrecognised knowledge_direction '" + dir + "'", r + 1);
    }
    try {
      e.validate();
    } catch (const InvalidArgument& ex) {
      throw ParseError(ex.what(), r + 1);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace cattr
