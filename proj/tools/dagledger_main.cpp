// dagledger: command-line front end for single runs and experiment sweeps.

#include "dagledger/config.hpp"
#include "dagledger/emit.hpp"
#include "dagledger/errors.hpp"
#include "dagledger/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace dagledger;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> trials;
  std::optional<std::uint32_t> turns;
  std::optional<std::string> k;
  std::optional<double> alpha;
  std::optional<std::uint32_t> eta;
  std::optional<std::uint32_t> lambda;
  std::optional<double> gamma;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
  std::optional<std::string> trace;
  bool dump_trials = false;
  bool pgm = false;
};

void add_options(CLI::App *cmd, Overrides &o, bool single_run) {
  cmd->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed (single run: simulation seed)");
  cmd->add_option("--trials", o.trials, "trials per grid point");
  cmd->add_option("--turns", o.turns, "time horizon T");
  cmd->add_option("--k", o.k, "pointer limit: positive integer or 'inf'");
  cmd->add_option("--alpha", o.alpha, "score weight on depth, in [0,1]");
  cmd->add_option("--eta", o.eta, "max regular transactions per block");
  cmd->add_option("--lambda", o.lambda, "nature transactions per turn (default: eta)");
  cmd->add_option("--gamma", o.gamma, "Poisson mean of dependency count");
  cmd->add_option("--out", o.out, "output path stem");
  cmd->add_option("--format", o.format, "csv|json|both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
  cmd->add_flag("--dump-trials", o.dump_trials, "also write per-trial metrics");
  if (single_run) {
    cmd->add_option("--trace", o.trace, "write the final ledger state as JSON");
  } else {
    cmd->add_flag("--pgm", o.pgm, "write PGM heatmaps of fairness panels");
  }
}

ExperimentConfig resolve(ExperimentKind kind, const Overrides &o) {
  ExperimentConfig c = o.config_path.empty() ? default_config(kind) : load_config(o.config_path);
  if (c.experiment != kind)
    throw ConfigError("config describes '" + to_string(c.experiment) + "' but subcommand is '" +
                      to_string(kind) + "'");
  if (o.seed) {
    c.master_seed = *o.seed;
    c.base.seed = *o.seed;
  }
  if (o.trials) c.trials = *o.trials;
  if (o.turns) c.base.horizon = *o.turns;
  if (o.k) {
    c.base.k = PointerLimit::parse(*o.k);
    c.axes.k = {c.base.k};
  }
  if (o.alpha) c.base.score.alpha = *o.alpha;
  if (o.eta) c.base.eta = *o.eta;
  if (o.lambda) c.base.lambda = *o.lambda;
  if (o.gamma) c.base.gamma = *o.gamma;
  if (o.out) c.output_path = *o.out;
  if (o.format) {
    c.format = *o.format == "json" ? OutputFormat::json
               : *o.format == "both" ? OutputFormat::both
                                     : OutputFormat::csv;
  }
  if (o.threads) c.threads = *o.threads;
  if (o.dump_trials) c.dump_trials = true;
  if (o.pgm) c.pgm = true;
  return c;
}

int execute(ExperimentKind kind, const Overrides &o) {
  const ExperimentConfig config = resolve(kind, o);
  const bool single = kind == ExperimentKind::single_run;
  ExperimentConfig run_config = config;
  if (single) run_config.dump_trials = true; // metrics are printed below
  ExperimentResult result = run_experiment(run_config);
  const std::vector<TrialRecord> trials = result.trials;
  if (!config.dump_trials) result.trials.clear();
  for (const auto &path : emit(config, result)) std::cerr << "wrote " << path.string() << '\n';

  if (single) {
    const TrialMetrics &m = trials.front().metrics;
    nlohmann::json out{{"seed", config.base.seed},
                       {"pow_efficiency", m.pow_efficiency},
                       {"orphan_rate", m.orphan_rate},
                       {"lag", m.lag},
                       {"blocks_mined", m.blocks_mined},
                       {"blocks_valid", m.blocks_valid},
                       {"shares", m.shares},
                       {"surplus", m.surplus}};
    out["mean_inclusion_delay"] =
        m.mean_inclusion_delay ? nlohmann::json(*m.mean_inclusion_delay) : nlohmann::json(nullptr);
    std::cout << out.dump(2) << '\n';
    if (o.trace) {
      write_file(*o.trace, trace_json(run(config.base).state).dump() + "\n");
      std::cerr << "wrote " << *o.trace << '\n';
    }
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Discrete-time simulator and experiment harness for DAG-based ledgers"};
  app.require_subcommand(1);

  Overrides sim, fair, effq, effn;
  add_options(app.add_subcommand("simulate", "run one seeded simulation"), sim, true);
  add_options(app.add_subcommand("fairness-grid", "two-miner surplus grid over (k, q0, q1, h1)"),
              fair, false);
  add_options(app.add_subcommand("efficiency-q", "efficiency metrics over (k, q)"), effq, false);
  add_options(app.add_subcommand("efficiency-n", "efficiency metrics over (k, n) with q = h = 1/n"),
              effn, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate")) return execute(ExperimentKind::single_run, sim);
    if (app.got_subcommand("fairness-grid")) return execute(ExperimentKind::fairness_grid, fair);
    if (app.got_subcommand("efficiency-q")) return execute(ExperimentKind::efficiency_q, effq);
    if (app.got_subcommand("efficiency-n")) return execute(ExperimentKind::efficiency_n, effn);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
