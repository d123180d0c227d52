// cattr: command-line front end for the attribution harness.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cattr/finetune.hpp"
#include "cattr/harness.hpp"

namespace {

using namespace cattr;

struct PlanOptions {
  std::string config;
  std::vector<std::string> datasets;
  std::vector<std::string> truths;
  std::vector<std::string> backends;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> max_rows;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> concurrency;
  std::string out;
  std::string cache;
  std::string format = "markdown";
  std::vector<std::string> conditions;
};

void add_plan_options(CLI::App* app, PlanOptions& o) {
  app->add_option("--config", o.config, "flat key = value plan file")->check(CLI::ExistingFile);
  app->add_option("--dataset", o.datasets, "dataset CSV (repeatable, paired with --truth)");
  app->add_option("--truth", o.truths, "ground-truth edge list (repeatable)");
  app->add_option("--backend", o.backends, "backend spec: oracle, oracle:blind, random:P[:SEED], order-biased, remote:MODEL");
  app->add_option("--replications", o.replications, "replications per dataset")->check(CLI::PositiveNumber);
  app->add_option("--max-rows", o.max_rows, "rows sampled into each prompt")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--concurrency", o.concurrency, "in-flight requests per backend")->check(CLI::PositiveNumber);
  app->add_option("--conditions", o.conditions, "subset of raw, omit-data, omit-knowledge, random-guess, reverse, reverse-raw")
      ->delimiter(',');
  app->add_option("--out", o.out, "report directory");
  app->add_option("--cache", o.cache, "transcript cache directory");
  app->add_option("--format", o.format, "table format")->check(CLI::IsMember({"markdown", "csv"}));
}

ExperimentPlan build_plan(const PlanOptions& o) {
  ExperimentPlan plan;
  if (!o.config.empty()) {
    std::filesystem::path p(o.config);
    plan = parse_plan_config(read_file(p), p.parent_path());
  }
  if (o.datasets.size() != o.truths.size()) throw InvalidArgument("every --dataset needs a matching --truth");
  if (!o.datasets.empty()) {
    plan.datasets.clear();
    for (std::size_t i = 0; i < o.datasets.size(); ++i) {
      std::filesystem::path csv(o.datasets[i]);
      plan.datasets.push_back({csv.stem().string(), csv, o.truths[i]});
    }
  }
  if (!o.backends.empty()) {
    plan.backends.clear();
    for (const auto& b : o.backends) plan.backends.push_back(parse_backend(b));
  }
  if (!o.conditions.empty()) {
    plan.conditions.clear();
    for (const auto& c : o.conditions) plan.conditions.push_back(scoring_from_string(c));
  }
  if (o.replications) plan.replications = *o.replications;
  if (o.max_rows) plan.max_rows = *o.max_rows;
  if (o.seed) plan.master_seed = *o.seed;
  if (o.concurrency)
    for (auto& b : plan.backends) b.concurrency = *o.concurrency;
  if (!o.out.empty()) plan.output_dir = o.out;
  if (!o.cache.empty()) plan.cache_dir = o.cache;
  if (plan.datasets.empty()) throw InvalidArgument("no datasets given (use --dataset/--truth or --config)");
  if (plan.backends.empty()) plan.backends.push_back(parse_backend("oracle"));
  return plan;
}

int run_plan(const PlanOptions& o, bool offline) {
  auto plan = build_plan(o);
  plan.offline = offline;
  auto report = run_experiment(plan);
  auto files = render_report(report, o.format == "csv" ? ReportFormat::Csv : ReportFormat::Markdown, plan.output_dir);
  if (o.format == "markdown") std::cout << render_markdown(report);
  for (const auto& f : files) std::cerr << "wrote " << f.string() << "\n";
  return report.partial() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge/data attribution harness for LLM causal discovery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  PlanOptions run_opts;
  auto* run = app.add_subcommand("run", "run a replicated perturbation experiment");
  add_plan_options(run, run_opts);

  PlanOptions score_opts;
  auto* score_cmd = app.add_subcommand("score", "rebuild a report from cached transcripts only");
  add_plan_options(score_cmd, score_opts);

  PairwiseConfig pw;
  std::string pw_noise = "chi2:4";
  std::uint64_t pw_seed = 0;
  auto* pairwise = app.add_subcommand("pairwise", "pairwise LiNGAM baseline on simulated pairs");
  pairwise->add_option("--replications", pw.replications, "replications per style")->check(CLI::PositiveNumber);
  pairwise->add_option("-n,--rows", pw.n, "samples per pair")->check(CLI::Range(20, 1000000));
  pairwise->add_option("--noise", pw_noise, "non-Gaussian noise family");
  pairwise->add_option("--alpha", pw.lingam.alpha, "independence test level")->check(CLI::Range(0.0, 1.0));
  pairwise->add_option("--permutations", pw.lingam.n_permutations, "permutations per test")->check(CLI::Range(99, 100000));
  pairwise->add_option("--seed", pw_seed, "master seed");

  std::string ft_catalog, ft_out = "corpus.jsonl", ft_manifest;
  std::uint64_t ft_seed = 0;
  FinetuneConfig ft;
  auto* gen = app.add_subcommand("gen-finetune", "generate the four-scenario instruction corpus");
  gen->add_option("--catalog", ft_catalog, "pair catalog CSV")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", ft_out, "JSONL output path");
  gen->add_option("--manifest", ft_manifest, "manifest path (default: <out>.manifest.json)");
  gen->add_option("--seed", ft_seed, "master seed");
  gen->add_option("-n,--rows", ft.n, "samples per simulated pair")->check(CLI::Range(100, 1000000));
  gen->add_option("--threads", ft.threads, "worker threads (0 = all cores)");
  gen->add_option("--max-attempts", ft.sim.max_attempts, "realization attempts per scenario")->check(CLI::PositiveNumber);
  gen->add_flag("--confounded-undefined", ft.sim.undefined_via_confounder, "realize undefined pairs with a latent confounder");

  std::string sim_truth, sim_out, sim_noise = "chi2:4", sim_scenario;
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "simulate a linear non-Gaussian SCM or a scenario pair to CSV");
  sim->add_option("--truth", sim_truth, "edge list of the SCM graph")->check(CLI::ExistingFile);
  sim->add_option("--scenario", sim_scenario, "pair scenario instead of an SCM")
      ->check(CLI::IsMember({"undefined", "no_relation", "y_causes_x", "x_causes_y"}));
  sim->add_option("-n,--rows", sim_n, "rows")->check(CLI::PositiveNumber);
  sim->add_option("--noise", sim_noise, "noise family, e.g. chi2:4, uniform:-1:1, laplace:1");
  sim->add_option("--seed", sim_seed, "seed");
  sim->add_option("--out", sim_out, "CSV path (default: stdout)");

  std::string ip_dataset, ip_truth, ip_condition = "raw", ip_name;
  std::size_t ip_rows = 50, ip_rep = 0;
  std::uint64_t ip_seed = 0;
  auto* inspect = app.add_subcommand("inspect-prompt", "print the exact prompt for one condition; no backend call");
  inspect->add_option("--dataset", ip_dataset, "dataset CSV")->required()->check(CLI::ExistingFile);
  inspect->add_option("--truth", ip_truth, "edge list (needed for reversed)")->check(CLI::ExistingFile);
  inspect->add_option("--condition", ip_condition, "raw, omit-data, omit-knowledge, random-guess, reversed")
      ->check(CLI::IsMember({"raw", "omit-data", "omit-knowledge", "random-guess", "reversed"}));
  inspect->add_option("--max-rows", ip_rows, "rows sampled")->check(CLI::PositiveNumber);
  inspect->add_option("--seed", ip_seed, "master seed");
  inspect->add_option("--replication", ip_rep, "replication index");
  inspect->add_option("--name", ip_name, "dataset name used for seeding (default: file stem)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_plan(run_opts, false);
    if (*score_cmd) return run_plan(score_opts, true);

    if (*pairwise) {
      pw.noise = NoiseSpec::parse(pw_noise);
      pw.seed = pw_seed;
      pw.lingam.seed = derive_seed(pw_seed, "lingam");
      auto report = run_pairwise_benchmark(pw);
      std::cout << render_pairwise(report);
      return 0;
    }

    if (*gen) {
      auto catalog = catalog_from_csv(read_file(ft_catalog));
      auto corpus = generate_samples(catalog, ft_seed, ft);
      emit_jsonl(corpus.samples, ft_out);
      const std::string manifest = ft_manifest.empty() ? ft_out + ".manifest.json" : ft_manifest;
      write_file(manifest, corpus_manifest(corpus, catalog.size(), ft_seed, ft).dump(2) + "\n");
      std::cerr << corpus.samples.size() << " samples from " << catalog.size() << " pairs";
      if (!corpus.dropped.empty()) std::cerr << ", " << corpus.dropped.size() << " pairs dropped";
      std::cerr << "\n";
      return corpus.dropped.empty() ? 0 : 2;
    }

    if (*sim) {
      const auto noise = NoiseSpec::parse(sim_noise);
      std::string csv;
      if (!sim_scenario.empty()) {
        ScenarioSimConfig cfg;
        cfg.noise = noise;
        auto draw = simulate_pair_for_scenario(scenario_from_string(sim_scenario), sim_n, sim_seed, cfg);
        csv = dataset_to_csv(TabularDataset({{"X", draw.sample.x()}, {"Y", draw.sample.y()}}, "scenario"));
      } else {
        if (sim_truth.empty()) throw InvalidArgument("simulate needs --truth or --scenario");
        auto dag = from_edge_list(read_file(sim_truth));
        csv = dataset_to_csv(simulate_scm(random_scm(dag, noise, sim_seed), sim_n, sim_seed));
      }
      if (sim_out.empty())
        std::cout << csv;
      else
        write_file(sim_out, csv);
      return 0;
    }

    if (*inspect) {
      auto data = load_dataset_csv(ip_dataset);
      std::optional<CausalDag> truth;
      if (!ip_truth.empty()) truth = from_edge_list(read_file(ip_truth), data.names());
      PromptConfig pc;
      pc.max_rows = ip_rows;
      pc.seed = replication_seed(ip_seed, ip_name.empty() ? std::filesystem::path(ip_dataset).stem().string() : ip_name,
                                 ip_rep);
      auto prompt = build_prompt(data, condition_from_string(ip_condition), pc, truth ? &*truth : nullptr);
      std::cout << render_transcript(prompt);
      return 0;
    }
  } catch (const cattr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
