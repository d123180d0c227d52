#pragma once

// Counterfactual prompt conditions and response parsing.
//
// Every condition starts from the same seeded column permutation and the same
// seeded row subsample, then changes exactly one component:
//
//   RawData        names + data
//   OmitData       names only (data clause and rows dropped)
//   OmitKnowledge  pseudo-word names + data
//   RandomGuess    pseudo-word names only
//   Reversed       data columns swapped along the reversed topological order
//
// Streams: columns derive_seed(seed, "columns"), rows derive_seed(seed, "rows"),
// pseudo-words derive_seed(seed, "pseudowords").

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cattr/dataset.hpp"
#include "cattr/error.hpp"
#include "cattr/graph.hpp"
#include "cattr/rng.hpp"
#include "cattr/text.hpp"

namespace cattr {

enum class Condition { RawData, OmitData, OmitKnowledge, RandomGuess, Reversed };

inline constexpr Condition kAllConditions[] = {Condition::RawData, Condition::OmitData, Condition::OmitKnowledge,
                                               Condition::RandomGuess, Condition::Reversed};

inline std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::RawData: return "raw";
    case Condition::OmitData: return "omit-data";
    case Condition::OmitKnowledge: return "omit-knowledge";
    case Condition::RandomGuess: return "random-guess";
    case Condition::Reversed: return "reversed";
  }
  return "raw";
}

inline Condition condition_from_string(std::string_view s) {
  for (auto c : kAllConditions)
    if (to_string(c) == s) return c;
  throw ParseError("unknown condition: " + std::string(s));
}

inline bool carries_data(Condition c) { return c != Condition::OmitData && c != Condition::RandomGuess; }
inline bool hides_names(Condition c) { return c == Condition::OmitKnowledge || c == Condition::RandomGuess; }

// placeholder -> original name. Empty means names are presented unchanged.
using NameMapping = std::map<std::string, std::string>;

// --- column permutation ---------------------------------------------------

inline std::vector<std::size_t> column_permutation(std::size_t n_columns, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "columns"));
  return rng.permutation(n_columns);
}

inline TabularDataset permute_columns(const TabularDataset& ds, const std::vector<std::size_t>& order) {
  std::vector<Column> cols;
  cols.reserve(order.size());
  for (auto i : order) cols.push_back(ds.column(i));
  return TabularDataset(std::move(cols), ds.provenance());
}

inline TabularDataset shuffle_columns(const TabularDataset& ds, std::uint64_t seed) {
  return permute_columns(ds, column_permutation(ds.n_columns(), seed));
}

// --- pseudo-word names ----------------------------------------------------

namespace detail {

inline constexpr std::string_view kConsonants = "bcdfghjklmnprstvz";
inline constexpr std::string_view kVowels = "aeiou";

// Everyday words that happen to fit the consonant-vowel pattern.
inline const std::set<std::string>& common_words() {
  static const std::set<std::string> words = {
      "banana", "bikini", "camera", "canine", "casino", "cinema", "decade", "decide", "decode", "define",
      "delete", "demise", "denote", "derive", "desire", "devote", "divide", "domino", "donate", "figure",
      "finite", "futile", "future", "garage", "gelato", "genome", "humane", "karate", "kimono", "legume",
      "locate", "manure", "marine", "mature", "minute", "mobile", "motive", "native", "nature", "negate",
      "notice", "pinata", "pirate", "police", "polite", "potato", "ravine", "rebate", "recipe", "refuse",
      "relate", "remote", "remove", "reside", "resume", "retire", "revise", "safari", "salute", "secure",
      "sedate", "senate", "serene", "solute", "sonata", "tenure", "tirade", "tomato", "volume", "wasabi",
      "bonito", "debone", "ramada", "medusa", "mimosa", "parade", "patina", "salami", "samosa", "lagune",
      "camise", "fumado", "havana", "jubile", "lazare", "madame", "menace", "palace", "rodeos", "tamale"};
  return words;
}

inline std::string pseudo_word(char initial, Rng& rng) {
  std::string w(6, ' ');
  w[0] = initial;
  for (int i = 1; i < 6; ++i) {
    auto pool = (i % 2 == 1) ? kVowels : kConsonants;
    w[i] = pool[rng.below(pool.size())];
  }
  return w;
}

// Initial letters pairwise at least two apart in the alphabet, so no two
// placeholders start with the same or neighbouring letters.
inline std::optional<std::vector<char>> spread_initials(std::size_t count, Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::string pool(kConsonants);
    rng.shuffle(std::span<char>(pool.data(), pool.size()));
    std::vector<char> chosen;
    for (char c : pool) {
      if (chosen.size() == count) break;
      bool ok = std::all_of(chosen.begin(), chosen.end(), [&](char o) { return std::abs(o - c) >= 2; });
      if (ok) chosen.push_back(c);
    }
    if (chosen.size() == count) return chosen;
  }
  return std::nullopt;
}

}  // namespace detail

// `count` distinct six-letter consonant-vowel pseudo-words. None is a common
// word or (case-insensitively) one of `avoid`. Initials are spread apart
// whenever the set is small enough to allow it.
inline std::vector<std::string> make_pseudowords(std::size_t count, std::uint64_t seed,
                                                 const std::vector<std::string>& avoid = {}) {
  std::set<std::string> banned;
  for (const auto& a : avoid) banned.insert(to_lower(a));
  Rng rng(derive_seed(seed, "pseudowords"));
  auto initials = detail::spread_initials(count, rng);
  std::vector<std::string> out;
  std::set<std::string> used;
  for (std::size_t i = 0; i < count; ++i) {
    for (;;) {
      char initial = initials ? (*initials)[i] : detail::kConsonants[rng.below(detail::kConsonants.size())];
      auto w = detail::pseudo_word(initial, rng);
      if (detail::common_words().count(w) || banned.count(w) || used.count(w)) continue;
      used.insert(w);
      out.push_back(std::move(w));
      break;
    }
  }
  return out;
}

struct Obfuscation {
  TabularDataset dataset;
  NameMapping mapping;  // placeholder -> original
};

inline Obfuscation obfuscate_names(const TabularDataset& ds, std::uint64_t seed) {
  const auto names = ds.names();
  const auto words = make_pseudowords(names.size(), seed, names);
  std::vector<Column> cols;
  NameMapping mapping;
  for (std::size_t i = 0; i < names.size(); ++i) {
    cols.push_back({words[i], ds.column(i).values});
    mapping[words[i]] = names[i];
  }
  return {TabularDataset(std::move(cols), ds.provenance()), std::move(mapping)};
}

inline std::string deobfuscate(const std::string& presented, const NameMapping& mapping) {
  auto it = mapping.find(presented);
  return it == mapping.end() ? presented : it->second;
}

// --- reverse relabelling --------------------------------------------------

struct Reversal {
  TabularDataset dataset;
  CausalDag reversed_truth;
};

// With ord = topological_order(truth) of length d, the column named ord[i]
// receives the values of ord[d-1-i]. Column names and their order are kept.
// The reversed truth is flip_edges(truth).
inline Reversal reverse_relabel(const TabularDataset& ds, const CausalDag& truth) {
  auto names = ds.names();
  if (std::set<std::string>(names.begin(), names.end()) !=
      std::set<std::string>(truth.nodes().begin(), truth.nodes().end()))
    throw InvalidArgument("dataset columns do not match the graph nodes");
  const auto ord = topological_order(truth).names;
  const std::size_t d = ord.size();
  std::map<std::string, const std::vector<double>*> source;
  for (std::size_t i = 0; i < d; ++i) source[ord[i]] = &ds.column(ord[d - 1 - i]).values;
  std::vector<Column> cols;
  for (const auto& c : ds.columns()) cols.push_back({c.name, *source.at(c.name)});
  return {TabularDataset(std::move(cols), ds.provenance()), flip_edges(truth)};
}

// --- prompt construction --------------------------------------------------

struct PromptTemplate {
  std::string system = "You are a helpful assistant to suggest potential causal pairs with direction (A \xE2\x86\x92 B means A causes B)";
  std::string lead = "Suggest causal pairs with direction among following variables";
  std::string data_clause = " after analyzing following data";
  std::string closing = "MUST Suggest ONLY the causal pairs with direction without saying any other things";
};

struct PromptConfig {
  std::size_t max_rows = 50;
  std::uint64_t seed = 0;
  PromptTemplate templ;
};

struct PromptSpec {
  std::string system_text;
  std::string user_text;
  Condition condition = Condition::RawData;
  NameMapping name_mapping;                  // placeholder -> original, empty when unobfuscated
  std::vector<std::string> presented_names;  // in presented column order
  std::vector<std::size_t> column_order;     // presented column k is dataset column column_order[k]
  std::vector<std::size_t> row_indices;      // sampled rows, ascending; rendered only when data is carried
  std::uint64_t seed = 0;
};

inline std::vector<std::size_t> sample_rows(std::size_t n_rows, std::size_t max_rows, std::uint64_t seed) {
  std::vector<std::size_t> idx(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) idx[i] = i;
  if (n_rows > max_rows) {
    Rng rng(derive_seed(seed, "rows"));
    for (std::size_t i = 0; i < max_rows; ++i) std::swap(idx[i], idx[i + rng.below(n_rows - i)]);
    idx.resize(max_rows);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

inline std::string render_user_text(const PromptTemplate& t, const std::vector<std::string>& names,
                                    const TabularDataset* data, const std::vector<std::size_t>& rows) {
  std::string out = t.lead;
  if (data) out += t.data_clause;
  out += ":\n";
  out += join(names, ",");
  out += "\n";
  if (data) {
    for (auto r : rows) {
      for (std::size_t c = 0; c < data->n_columns(); ++c) {
        if (c) out += ',';
        out += format_sig4(data->column(c).values[r]);
      }
      out += "\n";
    }
  }
  out += t.closing;
  return out;
}

// `truth` is required for Condition::Reversed.
inline PromptSpec build_prompt(const TabularDataset& dataset, Condition condition, const PromptConfig& config,
                               const CausalDag* truth = nullptr) {
  if (dataset.n_columns() == 0) throw InvalidArgument("dataset has no columns");
  if (carries_data(condition) && config.max_rows < 1) throw InvalidArgument("max_rows must be at least 1");
  if (carries_data(condition) && dataset.n_rows() == 0) throw InvalidArgument("dataset has no rows");

  PromptSpec spec;
  spec.condition = condition;
  spec.seed = config.seed;
  spec.system_text = config.templ.system;

  TabularDataset base = dataset;
  if (condition == Condition::Reversed) {
    if (!truth) throw InvalidArgument("reversed condition needs the ground-truth graph");
    base = reverse_relabel(dataset, *truth).dataset;
  }
  spec.column_order = column_permutation(base.n_columns(), config.seed);
  TabularDataset presented = permute_columns(base, spec.column_order);
  if (hides_names(condition)) {
    auto ob = obfuscate_names(presented, config.seed);
    presented = std::move(ob.dataset);
    spec.name_mapping = std::move(ob.mapping);
  }
  spec.presented_names = presented.names();
  spec.row_indices = sample_rows(base.n_rows(), std::max<std::size_t>(config.max_rows, 1), config.seed);
  spec.user_text = render_user_text(config.templ, spec.presented_names, carries_data(condition) ? &presented : nullptr,
                                    spec.row_indices);
  return spec;
}

// --- response parsing -----------------------------------------------------

struct PredictionSet {
  EdgeSet edges;  // original-name space
  std::size_t ignored_mentions = 0;
  std::string raw_text;
};

namespace detail {

inline std::string normalize_arrows(std::string text) {
  static const std::array<std::pair<std::string_view, std::string_view>, 10> arrows = {{
      {"\xE2\x9F\xB6", "->"},      // long rightwards arrow
      {"\xE2\x86\x92", "->"},      // rightwards arrow
      {"\xE2\x9E\x94", "->"},      // heavy wide-headed arrow
      {"\xE2\x87\x92", "->"},      // rightwards double arrow
      {"\xE2\x80\x94>", "->"},     // em dash + >
      {"\xE2\x80\x93>", "->"},     // en dash + >
      {"-->", "->"},
      {"==>", "->"},
      {"=>", "->"},
      {"\xC2\xA0", " "},           // no-break space
  }};
  for (const auto& [from, to] : arrows) text = replace_all(std::move(text), from, to);
  while (text.find("-->") != std::string::npos) text = replace_all(std::move(text), "-->", "->");
  return text;
}

inline std::string_view strip_list_marker(std::string_view s) {
  s = trim(s);
  if (s.starts_with("\xE2\x80\xA2")) return trim(s.substr(3));  // bullet
  if (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == '+') && s.size() > 1 && s[1] == ' ') return trim(s.substr(2));
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) return trim(s.substr(i + 1));
  return s;
}

inline std::string clean_token(std::string_view s) {
  s = trim(s);
  if (auto colon = s.rfind(':'); colon != std::string_view::npos) s = trim(s.substr(colon + 1));
  constexpr std::string_view junk = "\"'`*_()[]{}.!?<>";
  while (!s.empty() && junk.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
  while (!s.empty() && junk.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
  return std::string(trim(s));
}

// Case-insensitive position of the whole word `word` in `s`.
inline std::size_t find_word(std::string_view s, std::string_view word) {
  const std::string ls = to_lower(s);
  std::size_t pos = 0;
  while ((pos = ls.find(word, pos)) != std::string::npos) {
    bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(ls[pos - 1]));
    bool right = pos + word.size() >= ls.size() || !std::isalnum(static_cast<unsigned char>(ls[pos + word.size()]));
    if (left && right) return pos;
    ++pos;
  }
  return std::string::npos;
}

}  // namespace detail

// Extracts directed pairs written as `A -> B` (also unicode arrows, `-->`,
// chains `A -> B -> C`) or `A causes B`. Names are matched case-insensitively
// against `known_names` (as presented) and mapped back through `mapping`.
// Arrow pairs naming an unknown variable count as ignored mentions; `causes`
// phrases count only when both sides are known names.
inline PredictionSet parse_response(std::string_view text, const std::vector<std::string>& known_names,
                                    const NameMapping& mapping = {}) {
  PredictionSet out;
  out.raw_text = std::string(text);
  std::map<std::string, std::string> lookup;
  for (const auto& n : known_names) lookup.emplace(to_lower(trim(n)), n);
  auto resolve = [&](const std::string& token) -> std::optional<std::string> {
    if (token.empty()) return std::nullopt;
    auto it = lookup.find(to_lower(token));
    if (it == lookup.end()) return std::nullopt;
    return deobfuscate(it->second, mapping);
  };
  auto add = [&](const std::string& a, const std::string& b) {
    if (a != b) out.edges.insert({a, b});
  };

  const std::string normalized = detail::normalize_arrows(std::string(text));
  for (auto raw_line : split_lines(normalized)) {
    auto line = detail::strip_list_marker(raw_line);
    if (line.empty()) continue;
    // Clauses separated by ',' or ';'.
    std::vector<std::string_view> clauses;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',' || line[i] == ';') {
        clauses.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    for (auto clause : clauses) {
      if (clause.find("->") != std::string_view::npos) {
        std::vector<std::string> tokens;
        std::size_t s = 0, p;
        while ((p = clause.find("->", s)) != std::string_view::npos) {
          tokens.push_back(detail::clean_token(clause.substr(s, p - s)));
          s = p + 2;
        }
        tokens.push_back(detail::clean_token(clause.substr(s)));
        for (std::size_t k = 0; k + 1 < tokens.size(); ++k) {
          auto a = resolve(tokens[k]);
          auto b = resolve(tokens[k + 1]);
          if (a && b)
            add(*a, *b);
          else
            ++out.ignored_mentions;
        }
        continue;
      }
      if (auto pos = detail::find_word(clause, "causes"); pos != std::string::npos) {
        auto a = resolve(detail::clean_token(clause.substr(0, pos)));
        auto b = resolve(detail::clean_token(clause.substr(pos + 6)));
        if (a && b) add(*a, *b);
      }
    }
  }
  return out;
}

// Canonical "A -> B" lines, one per edge.
inline std::string render_edges(const EdgeSet& edges) {
  std::string out;
  for (const auto& e : edges) out += e.cause + " -> " + e.effect + "\n";
  return out;
}

// Human-readable record of a prompt, sufficient to reproduce it.
inline std::string render_transcript(const PromptSpec& p) {
  std::string out;
  out += "condition: " + std::string(to_string(p.condition)) + "\n";
  out += "seed: " + std::to_string(p.seed) + "\n";
  std::vector<std::string> order;
  for (auto i : p.column_order) order.push_back(std::to_string(i));
  out += "column_order: " + join(order, " ") + "\n";
  std::vector<std::string> rows;
  for (auto i : p.row_indices) rows.push_back(std::to_string(i));
  out += "row_indices: " + join(rows, " ") + "\n";
  if (!p.name_mapping.empty()) {
    out += "name_mapping:\n";
    for (const auto& [k, v] : p.name_mapping) out += "  " + k + " = " + v + "\n";
  }
  out += "--- system ---\n" + p.system_text + "\n";
  out += "--- user ---\n" + p.user_text + "\n";
  return out;
}

}  // namespace cattr
