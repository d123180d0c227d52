#pragma once

// Experiment orchestration: replicated perturbation runs over datasets and
// backends, scoring, attribution, and report rendering.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cattr/attribution.hpp"
#include "cattr/dataset.hpp"
#include "cattr/error.hpp"
#include "cattr/gateway.hpp"
#include "cattr/graph.hpp"
#include "cattr/lingam.hpp"
#include "cattr/metrics.hpp"
#include "cattr/prompts.hpp"
#include "cattr/simulate.hpp"
#include "cattr/text.hpp"

namespace cattr {

inline constexpr std::string_view kVersion = "0.1.0";

// Six scorings of five prompts: the reversed prompt is scored against the
// flipped graph (Reverse) and against the original one (ReverseRaw).
enum class Scoring { Raw, OmitData, OmitKnowledge, RandomGuess, Reverse, ReverseRaw };

inline constexpr Scoring kAllScorings[] = {Scoring::Raw,         Scoring::OmitData, Scoring::OmitKnowledge,
                                           Scoring::RandomGuess, Scoring::Reverse,  Scoring::ReverseRaw};

inline std::string_view to_string(Scoring s) {
  switch (s) {
    case Scoring::Raw: return "raw";
    case Scoring::OmitData: return "omit-data";
    case Scoring::OmitKnowledge: return "omit-knowledge";
    case Scoring::RandomGuess: return "random-guess";
    case Scoring::Reverse: return "reverse";
    case Scoring::ReverseRaw: return "reverse-raw";
  }
  return "?";
}

inline Scoring scoring_from_string(std::string_view s) {
  for (auto k : kAllScorings)
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown scoring '" + std::string(s) + "'");
}

inline Condition prompt_condition(Scoring s) {
  switch (s) {
    case Scoring::Raw: return Condition::RawData;
    case Scoring::OmitData: return Condition::OmitData;
    case Scoring::OmitKnowledge: return Condition::OmitKnowledge;
    case Scoring::RandomGuess: return Condition::RandomGuess;
    case Scoring::Reverse:
    case Scoring::ReverseRaw: return Condition::Reversed;
  }
  return Condition::RawData;
}

struct DatasetEntry {
  std::string name;
  std::filesystem::path csv;
  std::filesystem::path truth;
};

struct LoadedDataset {
  std::string name;
  TabularDataset data;
  CausalDag truth;
};

struct ExperimentPlan {
  std::vector<DatasetEntry> datasets;
  std::vector<BackendSpec> backends;
  std::vector<Scoring> conditions{std::begin(kAllScorings), std::end(kAllScorings)};
  std::size_t replications = 15;
  std::size_t max_rows = 50;
  std::uint64_t master_seed = 0;
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path output_dir = "report";
  bool offline = false;  // cached transcripts only

  void validate() const {
    if (replications < 1) throw InvalidArgument("replications must be at least 1");
    if (max_rows < 1) throw InvalidArgument("max_rows must be at least 1");
    if (backends.empty()) throw InvalidArgument("plan has no backends");
    if (conditions.empty()) throw InvalidArgument("plan has no conditions");
    for (const auto& b : backends) b.validate();
    std::set<std::string> names;
    for (const auto& d : datasets)
      if (!names.insert(d.name).second) throw InvalidArgument("duplicate dataset name " + d.name);
  }
};

// The CSV header declares the node set; every truth endpoint must be a column.
inline LoadedDataset load_dataset(const DatasetEntry& entry) {
  auto data = load_dataset_csv(entry.csv);
  auto truth = from_edge_list(read_file(entry.truth), data.names());
  return {entry.name.empty() ? entry.csv.stem().string() : entry.name, std::move(data), std::move(truth)};
}

struct ReplicationRow {
  std::string dataset;
  std::string backend;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  Scoring scoring = Scoring::Raw;
  ScoreCard card;
  std::size_t shd = 0;
  std::size_t ignored_mentions = 0;
  std::string prompt_digest;
};

struct AttributionRow {
  std::string dataset;
  std::string backend;
  std::size_t replication = 0;
  AttributionScores scores;
};

struct MetricAggregate {
  AggregateScore tdr;
  std::optional<AggregateScore> fdr;  // over replications where FDR is defined
  AggregateScore f1;
  AggregateScore shd;
};

struct CellReport {
  std::string dataset;
  std::string backend;
  std::optional<std::string> failure;  // set when the cell was aborted
  std::vector<ReplicationRow> rows;
  std::vector<AttributionRow> attributions;
  std::map<Scoring, MetricAggregate> metrics;
  std::optional<AttributionAggregate> attribution;
};

struct AttributionReport {
  std::vector<std::string> datasets;
  std::vector<BackendSpec> backends;
  std::vector<Scoring> conditions;
  std::size_t replications = 0;
  std::size_t max_rows = 0;
  std::uint64_t master_seed = 0;
  std::vector<CellReport> cells;  // dataset-major, then backend

  const CellReport* find(const std::string& dataset, const std::string& backend) const {
    for (const auto& c : cells)
      if (c.dataset == dataset && c.backend == backend) return &c;
    return nullptr;
  }
  bool partial() const {
    return std::any_of(cells.begin(), cells.end(), [](const CellReport& c) { return c.failure.has_value(); });
  }
};

inline std::uint64_t replication_seed(std::uint64_t master, const std::string& dataset, std::size_t r) {
  return derive_seed(master, "dataset", dataset, static_cast<std::uint64_t>(r));
}

inline bool has_scoring(const std::vector<Scoring>& v, Scoring s) { return std::find(v.begin(), v.end(), s) != v.end(); }

inline bool attribution_possible(const std::vector<Scoring>& v) {
  return has_scoring(v, Scoring::Raw) && has_scoring(v, Scoring::OmitData) && has_scoring(v, Scoring::OmitKnowledge) &&
         has_scoring(v, Scoring::RandomGuess);
}

// Recomputes per-condition aggregates and attribution from the raw rows.
inline void summarize(CellReport& cell, const std::vector<Scoring>& conditions) {
  cell.metrics.clear();
  cell.attribution.reset();
  if (cell.failure) return;
  for (auto s : conditions) {
    std::vector<double> tdr, fdr, f1, shd;
    for (const auto& r : cell.rows) {
      if (r.scoring != s) continue;
      tdr.push_back(r.card.tdr);
      if (r.card.fdr_defined) fdr.push_back(r.card.fdr);
      f1.push_back(r.card.f1);
      shd.push_back(static_cast<double>(r.shd));
    }
    if (tdr.empty()) continue;
    MetricAggregate m{aggregate(tdr), std::nullopt, aggregate(f1), aggregate(shd)};
    if (!fdr.empty()) m.fdr = aggregate(fdr);
    cell.metrics[s] = m;
  }
  if (!cell.attributions.empty()) {
    std::vector<double> cak, cad, mad, mak;
    for (const auto& a : cell.attributions) {
      cak.push_back(a.scores.cak);
      cad.push_back(a.scores.cad);
      mad.push_back(a.scores.mad);
      mak.push_back(a.scores.mak);
    }
    cell.attribution = AttributionAggregate{aggregate(cak), aggregate(cad), aggregate(mad), aggregate(mak)};
  }
}

namespace detail {

struct ReplicationResult {
  std::vector<ReplicationRow> rows;
  std::optional<AttributionRow> attribution;
};

inline ReplicationResult run_replication(const LoadedDataset& ds, Gateway& gateway, const ExperimentPlan& plan,
                                         std::size_t r) {
  ReplicationResult out;
  PromptConfig pc;
  pc.max_rows = plan.max_rows;
  pc.seed = replication_seed(plan.master_seed, ds.name, r);
  const CausalDag flipped = flip_edges(ds.truth);
  std::map<Condition, std::pair<PredictionSet, std::string>> answers;
  ConditionTdr tdr;
  for (auto s : plan.conditions) {
    const Condition c = prompt_condition(s);
    auto it = answers.find(c);
    if (it == answers.end()) {
      auto prompt = build_prompt(ds.data, c, pc, &ds.truth);
      auto completion = gateway.cached_complete(prompt, plan.cache_dir);
      auto parsed = parse_response(completion.text, prompt.presented_names, prompt.name_mapping);
      it = answers.emplace(c, std::make_pair(std::move(parsed), completion.digest)).first;
    }
    const auto& [pred, digest] = it->second;
    const CausalDag& target = s == Scoring::Reverse ? flipped : ds.truth;
    ReplicationRow row{ds.name, gateway.spec().name(), r, pc.seed, s, score(pred.edges, target),
                       shd(pred.edges, target), pred.ignored_mentions, digest};
    switch (s) {
      case Scoring::Raw: tdr.raw = row.card.tdr; break;
      case Scoring::OmitData: tdr.omit_data = row.card.tdr; break;
      case Scoring::OmitKnowledge: tdr.omit_knowledge = row.card.tdr; break;
      case Scoring::RandomGuess: tdr.random_guess = row.card.tdr; break;
      case Scoring::Reverse: tdr.reverse = row.card.tdr; break;
      case Scoring::ReverseRaw: tdr.reverse_raw = row.card.tdr; break;
    }
    out.rows.push_back(std::move(row));
  }
  if (attribution_possible(plan.conditions))
    out.attribution = AttributionRow{ds.name, gateway.spec().name(), r, estimate(tdr)};
  return out;
}

// An oracle mock without its own ground truth answers with the dataset's.
inline BackendSpec bind_backend(const BackendSpec& spec, const CausalDag& truth) {
  BackendSpec b = spec;
  if (auto* o = std::get_if<MockOracle>(&b.kind); o && !o->truth) o->truth = truth;
  return b;
}

}  // namespace detail

// Replications within a cell run on up to `concurrency` threads of the
// backend; results are merged by replication index, so output is independent
// of scheduling.
inline AttributionReport run_experiment(const std::vector<LoadedDataset>& datasets, const ExperimentPlan& plan,
                                        Transport transport = httplib_transport) {
  plan.validate();
  if (datasets.empty()) throw InvalidArgument("plan has no datasets");
  for (const auto& ds : datasets)
    if (ds.truth.edges().empty()) throw InvalidArgument("dataset " + ds.name + " has an empty ground truth");

  AttributionReport report;
  for (const auto& ds : datasets) report.datasets.push_back(ds.name);
  report.backends = plan.backends;
  report.conditions = plan.conditions;
  report.replications = plan.replications;
  report.max_rows = plan.max_rows;
  report.master_seed = plan.master_seed;

  for (const auto& ds : datasets) {
    for (const auto& spec : plan.backends) {
      Gateway gateway(detail::bind_backend(spec, ds.truth), transport);
      gateway.set_offline(plan.offline);
      CellReport cell;
      cell.dataset = ds.name;
      cell.backend = spec.name();
      std::vector<std::optional<detail::ReplicationResult>> results(plan.replications);
      std::vector<std::string> errors(plan.replications);
      auto work = [&](std::size_t r) {
        try {
          results[r] = detail::run_replication(ds, gateway, plan, r);
        } catch (const Error& e) {
          errors[r] = e.what();
        }
      };
      const std::size_t threads = std::min<std::size_t>(spec.concurrency, plan.replications);
      if (threads <= 1) {
        for (std::size_t r = 0; r < plan.replications; ++r) work(r);
      } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
          pool.emplace_back([&] {
            for (std::size_t r; (r = next.fetch_add(1)) < plan.replications;) work(r);
          });
      }
      for (std::size_t r = 0; r < plan.replications; ++r) {
        if (!results[r]) {
          cell.failure = "replication " + std::to_string(r) + ": " + errors[r];
          cell.rows.clear();
          cell.attributions.clear();
          break;
        }
        for (auto& row : results[r]->rows) cell.rows.push_back(std::move(row));
        if (results[r]->attribution) cell.attributions.push_back(*results[r]->attribution);
      }
      summarize(cell, plan.conditions);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

inline AttributionReport run_experiment(const ExperimentPlan& plan, Transport transport = httplib_transport) {
  plan.validate();
  if (plan.datasets.empty()) throw InvalidArgument("plan has no datasets");
  std::vector<LoadedDataset> loaded;
  for (const auto& d : plan.datasets) loaded.push_back(load_dataset(d));  // fails before any backend call
  return run_experiment(loaded, plan, std::move(transport));
}

// --- rendering ------------------------------------------------------------

inline constexpr std::string_view kUndefinedCell = "\xE2\x80\x94";  // shown where FDR is undefined

// Shortest round-trip decimal, so raw CSVs are exact and byte-stable.
inline std::string exact_number(double v) { return format_shortest(v); }

inline std::string mean_sd(const AggregateScore& a, int decimals = 3) {
  return format_fixed(a.mean, decimals) + "\xC2\xB1" + format_fixed(a.sd, decimals);
}

enum class Metric { Tdr, Fdr, F1, Shd };
inline constexpr Metric kAllMetrics[] = {Metric::Tdr, Metric::Fdr, Metric::F1, Metric::Shd};

inline std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Tdr: return "TDR";
    case Metric::Fdr: return "FDR";
    case Metric::F1: return "F1";
    case Metric::Shd: return "SHD";
  }
  return "?";
}

inline std::string metric_cell(const CellReport* cell, Scoring s, Metric m) {
  if (!cell || cell->failure) return "failed";
  auto it = cell->metrics.find(s);
  if (it == cell->metrics.end()) return "";
  const auto& a = it->second;
  switch (m) {
    case Metric::Tdr: return mean_sd(a.tdr);
    case Metric::Fdr: return a.fdr ? mean_sd(*a.fdr) : std::string(kUndefinedCell);
    case Metric::F1: return mean_sd(a.f1);
    case Metric::Shd: return mean_sd(a.shd);
  }
  return "";
}

inline constexpr std::string_view kAttributionNames[] = {"CAK", "CAD", "MAD", "MAK"};

inline std::string attribution_cell(const CellReport* cell, std::size_t which) {
  if (!cell || cell->failure) return "failed";
  if (!cell->attribution) return "";
  const auto& a = *cell->attribution;
  const AggregateScore* parts[] = {&a.cak, &a.cad, &a.mad, &a.mak};
  return mean_sd(*parts[which]);
}

// A rendered table: header row plus body rows of already formatted cells.
// Markdown and CSV are both written from this, so they carry identical text.
struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<Table> report_tables(const AttributionReport& report) {
  std::vector<Table> tables;
  for (const auto& b : report.backends) {
    for (auto m : kAllMetrics) {
      Table t;
      t.title = b.name() + " " + std::string(metric_name(m));
      t.header.push_back("condition");
      for (const auto& d : report.datasets) t.header.push_back(d);
      for (auto s : report.conditions) {
        std::vector<std::string> row{std::string(to_string(s))};
        for (const auto& d : report.datasets) row.push_back(metric_cell(report.find(d, b.name()), s, m));
        t.rows.push_back(std::move(row));
      }
      tables.push_back(std::move(t));
    }
  }
  if (attribution_possible(report.conditions)) {
    Table t;
    t.title = "attribution";
    t.header.push_back("score");
    for (const auto& d : report.datasets)
      for (const auto& b : report.backends) t.header.push_back(d + " (" + b.name() + ")");
    for (std::size_t k = 0; k < 4; ++k) {
      std::vector<std::string> row{std::string(kAttributionNames[k])};
      for (const auto& d : report.datasets)
        for (const auto& b : report.backends) row.push_back(attribution_cell(report.find(d, b.name()), k));
      t.rows.push_back(std::move(row));
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

inline std::string render_markdown(const AttributionReport& report) {
  std::string out = "# Attribution report\n\n";
  out += "master seed " + std::to_string(report.master_seed) + ", " + std::to_string(report.replications) +
         " replications, at most " + std::to_string(report.max_rows) + " rows per prompt\n";
  if (report.partial()) {
    out += "\n**Partial report.** Failed cells:\n\n";
    for (const auto& c : report.cells)
      if (c.failure) out += "- " + c.dataset + " / " + c.backend + ": " + *c.failure + "\n";
  }
  for (const auto& t : report_tables(report)) {
    out += "\n## " + t.title + "\n\n";
    out += "| " + join(t.header, " | ") + " |\n|";
    for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : t.rows) out += "| " + join(r, " | ") + " |\n";
  }
  return out;
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::vector<std::string> esc;
  for (const auto& c : cells) esc.push_back(csv_escape(c));
  return join(esc, ",") + "\n";
}

// Long-form table file: one line per body row, prefixed with the table title.
inline std::string render_tables_csv(const AttributionReport& report) {
  std::string out;
  for (const auto& t : report_tables(report)) {
    std::vector<std::string> head{"table"};
    head.insert(head.end(), t.header.begin(), t.header.end());
    out += csv_line(head);
    for (const auto& r : t.rows) {
      std::vector<std::string> line{t.title};
      line.insert(line.end(), r.begin(), r.end());
      out += csv_line(line);
    }
  }
  return out;
}

inline std::string render_raw_csv(const AttributionReport& report) {
  std::string out =
      "dataset,backend,replication,seed,scoring,tdr,fdr,fdr_defined,f1,shd,n_true,n_predicted,n_correct,"
      "ignored_mentions,prompt_digest\n";
  for (const auto& c : report.cells)
    for (const auto& r : c.rows)
      out += csv_line({r.dataset, r.backend, std::to_string(r.replication), std::to_string(r.seed),
                       std::string(to_string(r.scoring)), exact_number(r.card.tdr), exact_number(r.card.fdr),
                       r.card.fdr_defined ? "1" : "0", exact_number(r.card.f1), std::to_string(r.shd),
                       std::to_string(r.card.n_true), std::to_string(r.card.n_predicted),
                       std::to_string(r.card.n_correct), std::to_string(r.ignored_mentions), r.prompt_digest});
  return out;
}

inline std::string render_attribution_raw_csv(const AttributionReport& report) {
  std::string out = "dataset,backend,replication,cak,cad,mad,mak\n";
  for (const auto& c : report.cells)
    for (const auto& a : c.attributions)
      out += csv_line({a.dataset, a.backend, std::to_string(a.replication), exact_number(a.scores.cak),
                       exact_number(a.scores.cad), exact_number(a.scores.mad), exact_number(a.scores.mak)});
  return out;
}

inline nlohmann::ordered_json report_metadata(const AttributionReport& report) {
  nlohmann::ordered_json backends = nlohmann::ordered_json::array();
  for (const auto& b : report.backends) backends.push_back(b.identity());
  nlohmann::ordered_json conditions = nlohmann::ordered_json::array();
  for (auto s : report.conditions) conditions.push_back(std::string(to_string(s)));
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& c : report.cells)
    if (c.failure) failures.push_back({{"dataset", c.dataset}, {"backend", c.backend}, {"error", *c.failure}});
  return {{"version", std::string(kVersion)},
          {"master_seed", report.master_seed},
          {"replications", report.replications},
          {"max_rows", report.max_rows},
          {"datasets", report.datasets},
          {"backends", backends},
          {"conditions", conditions},
          {"partial", report.partial()},
          {"failures", failures}};
}

enum class ReportFormat { Markdown, Csv };

// Writes the requested table rendering plus the raw per-replication CSVs and
// run metadata, which are always emitted. Returns the files written.
inline std::vector<std::filesystem::path> render_report(const AttributionReport& report, ReportFormat format,
                                                        const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  };
  if (format == ReportFormat::Markdown)
    put("report.md", render_markdown(report));
  else
    put("tables.csv", render_tables_csv(report));
  put("raw.csv", render_raw_csv(report));
  put("attribution_raw.csv", render_attribution_raw_csv(report));
  put("metadata.json", report_metadata(report).dump(2) + "\n");
  return written;
}

// --- config file ----------------------------------------------------------

// Flat `key = value` text, `#` comments. Keys:
//   dataset.<name>.csv, dataset.<name>.truth   paths, relative to the file
//   backend          repeatable backend spec (see parse_backend)
//   conditions       comma-separated scorings
//   replications, max_rows, seed, cache_dir, output_dir, concurrency
inline ExperimentPlan parse_plan_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  ExperimentPlan plan;
  std::map<std::string, DatasetEntry> datasets;
  std::vector<std::string> dataset_order;
  std::optional<std::size_t> concurrency;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  auto to_size = [](const std::string& v, std::size_t line) {
    std::size_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ParseError("expected an integer: " + v, line);
    return out;
  };
  std::size_t line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto hash = raw.find('#');
    auto line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.rfind("dataset.", 0) == 0) {
      auto dot = key.rfind('.');
      const std::string name = key.substr(8, dot - 8);
      const std::string field = key.substr(dot + 1);
      if (name.empty() || dot <= 8) throw ParseError("malformed dataset key " + key, line_no);
      if (!datasets.count(name)) dataset_order.push_back(name);
      auto& d = datasets[name];
      d.name = name;
      if (field == "csv")
        d.csv = resolve(value);
      else if (field == "truth")
        d.truth = resolve(value);
      else
        throw ParseError("unknown dataset field " + field, line_no);
    } else if (key == "backend") {
      plan.backends.push_back(parse_backend(value));
    } else if (key == "conditions") {
      plan.conditions.clear();
      for (auto part : split_lines(replace_all(value, ",", "\n")))
        if (!trim(part).empty()) plan.conditions.push_back(scoring_from_string(trim(part)));
    } else if (key == "replications") {
      plan.replications = to_size(value, line_no);
    } else if (key == "max_rows") {
      plan.max_rows = to_size(value, line_no);
    } else if (key == "seed") {
      plan.master_seed = to_size(value, line_no);
    } else if (key == "cache_dir") {
      plan.cache_dir = resolve(value);
    } else if (key == "output_dir") {
      plan.output_dir = resolve(value);
    } else if (key == "concurrency") {
      concurrency = to_size(value, line_no);
    } else {
      throw ParseError("unknown key " + key, line_no);
    }
  }
  for (const auto& name : dataset_order) {
    const auto& d = datasets[name];
    if (d.csv.empty() || d.truth.empty()) throw ParseError("dataset " + name + " needs both csv and truth");
    plan.datasets.push_back(d);
  }
  if (concurrency)
    for (auto& b : plan.backends) b.concurrency = *concurrency;
  return plan;
}

// --- pairwise baseline ----------------------------------------------------

// Simulated pair styles: slope magnitude band crossed with noise-to-signal
// ratio. Slopes carry a random sign.
struct PairStyle {
  std::string name;
  double slope_lo;
  double slope_hi;
  double noise_ratio;  // noise sd as a multiple of |slope|
};

inline std::vector<PairStyle> default_pair_styles() {
  std::vector<PairStyle> out;
  const std::pair<double, double> bands[] = {{0.5, 1.0}, {1.0, 1.5}, {1.5, 2.0}};
  const char* band_names[] = {"weak", "medium", "strong"};
  const double ratios[] = {0.5, 0.75, 1.0};
  const char* ratio_names[] = {"low-noise", "mid-noise", "high-noise"};
  for (int b = 0; b < 3; ++b)
    for (int r = 0; r < 3; ++r)
      out.push_back({std::string(band_names[b]) + "/" + ratio_names[r], bands[b].first, bands[b].second, ratios[r]});
  return out;
}

struct PairwiseConfig {
  std::vector<PairStyle> styles = default_pair_styles();
  std::size_t replications = 20;
  std::size_t n = 1000;
  NoiseSpec noise = NoiseSpec::chi_squared(4.0);
  LingamConfig lingam;
  std::uint64_t seed = 0;
};

struct PairwiseStyleResult {
  std::string style;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::map<Scenario, std::size_t> predicted;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct PairwiseReport {
  std::vector<PairwiseStyleResult> styles;
  std::size_t correct() const {
    std::size_t c = 0;
    for (const auto& s : styles) c += s.correct;
    return c;
  }
  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& s : styles) t += s.total;
    return t;
  }
  double accuracy() const { return total() ? static_cast<double>(correct()) / static_cast<double>(total()) : 0.0; }
};

// One simulated pair of a style; the true direction is drawn at random.
inline std::pair<PairSample, Scenario> simulate_style_pair(const PairStyle& style, std::size_t n,
                                                           const NoiseSpec& noise, std::uint64_t seed) {
  Rng rng(seed);
  const double mag = rng.uniform(style.slope_lo, style.slope_hi);
  const double slope = rng.bernoulli(0.5) ? mag : -mag;
  const bool x_causes_y = rng.bernoulli(0.5);
  std::vector<double> cause(n), effect(n);
  for (auto& c : cause) c = noise.draw_standardized(rng);
  const double noise_sd = std::abs(slope) * style.noise_ratio;
  for (std::size_t i = 0; i < n; ++i) effect[i] = slope * cause[i] + noise_sd * noise.draw_standardized(rng);
  if (x_causes_y) return {PairSample(std::move(cause), std::move(effect)), Scenario::XCausesY};
  return {PairSample(std::move(effect), std::move(cause)), Scenario::YCausesX};
}

inline PairwiseReport run_pairwise_benchmark(const PairwiseConfig& config = {}) {
  if (config.noise.is_gaussian()) throw InvalidArgument("pairwise benchmark needs non-Gaussian noise");
  if (config.replications < 1) throw InvalidArgument("replications must be at least 1");
  PairwiseReport report;
  for (std::size_t s = 0; s < config.styles.size(); ++s) {
    const auto& style = config.styles[s];
    PairwiseStyleResult res;
    res.style = style.name;
    for (std::size_t r = 0; r < config.replications; ++r) {
      auto [sample, truth] = simulate_style_pair(
          style, config.n, config.noise,
          derive_seed(config.seed, "pairwise", style.name, static_cast<std::uint64_t>(r)));
      auto lc = config.lingam;
      lc.seed = derive_seed(config.lingam.seed, style.name, static_cast<std::uint64_t>(r));
      const Scenario got = pairwise_direction(sample, lc);
      ++res.predicted[got];
      ++res.total;
      if (got == truth) ++res.correct;
    }
    report.styles.push_back(std::move(res));
  }
  return report;
}

inline std::string render_pairwise(const PairwiseReport& report) {
  std::string out = "| style | accuracy | correct | total |\n| --- | --- | --- | --- |\n";
  for (const auto& s : report.styles)
    out += "| " + s.style + " | " + format_fixed(s.accuracy(), 3) + " | " + std::to_string(s.correct) + " | " +
           std::to_string(s.total) + " |\n";
  out += "| overall | " + format_fixed(report.accuracy(), 3) + " | " + std::to_string(report.correct()) + " | " +
         std::to_string(report.total()) + " |\n";
  return out;
}

}  // namespace cattr
