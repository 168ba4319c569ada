#pragma once

// Seeded multi-trial experiments: fairness grids over (k, q0, q1, h1) and
// efficiency sweeps over (k, q) and (k, n).
//
// Each trial of each parameter point gets its own seed,
//   derive_trial_seed(master_seed, point_hash(point), trial_index),
// and owns its simulation, so results do not depend on how trials are
// scheduled across worker threads. Aggregation walks trials in index order.

#include "dagledger/ledger.hpp"
#include "dagledger/metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dagledger {

enum class ExperimentKind : std::uint8_t { single_run, fairness_grid, efficiency_q, efficiency_n };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string &name);

enum class OutputFormat : std::uint8_t { csv, json, both };

struct GridAxes {
  std::vector<PointerLimit> k;
  std::vector<double> q0;
  std::vector<double> q1;
  std::vector<double> h1;
  std::vector<double> q;
  std::vector<std::uint32_t> n;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::single_run;
  SimParams base;
  GridAxes axes;
  std::uint32_t trials = 50;
  std::uint64_t master_seed = 1;
  std::string output_path = "dagledger_out";
  OutputFormat format = OutputFormat::csv;
  unsigned threads = 0; // 0: hardware concurrency
  bool dump_trials = false;
  bool pgm = false;

  void validate() const;
};

/// Default axes (and horizon) for an experiment kind.
GridAxes default_axes(ExperimentKind kind);
std::uint32_t default_horizon(ExperimentKind kind);

/// Parameter coordinates of one record.
struct PointDescriptor {
  ExperimentKind experiment = ExperimentKind::single_run;
  PointerLimit k = PointerLimit::finite(1);
  std::uint32_t n = 0;
  double q0 = 0.0, q1 = 0.0, h1 = 0.0; // fairness grid
  double q = 0.0;                      // efficiency sweeps
  std::uint32_t horizon = 0;
  std::uint32_t eta = 0, lambda = 0;
  double alpha = 0.0, gamma = 0.0;

  friend bool operator==(const PointDescriptor &, const PointDescriptor &) = default;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0; // sample standard deviation, 0 for one trial

  friend bool operator==(const Stat &, const Stat &) = default;
};

Stat summarize(const std::vector<double> &values);

struct AggregateRecord {
  PointDescriptor point;
  std::uint32_t trials = 0;
  std::uint32_t focus_miner = 0; // miner whose share/surplus is reported
  Stat share;
  Stat surplus;
  Stat pow_efficiency;
  Stat orphan_rate;
  Stat lag;
  std::optional<Stat> inclusion_delay;

  friend bool operator==(const AggregateRecord &, const AggregateRecord &) = default;
};

/// One trial as stored in the optional per-trial dump.
struct TrialRecord {
  std::uint32_t point = 0; // index into the record list
  std::uint32_t trial = 0;
  std::uint64_t seed = 0;
  TrialMetrics metrics;
};

/// Stable 64-bit hash of everything in `params` except the seed.
std::uint64_t point_hash(const SimParams &params);

struct ExperimentResult {
  std::vector<AggregateRecord> records;
  std::vector<TrialRecord> trials; // filled when requested
};

/// A point to simulate plus the coordinates it is reported under.
struct GridPoint {
  SimParams params;
  PointDescriptor descriptor;
  std::uint32_t focus_miner = 0;
};

/// Runs `trials` trials of each point across `threads` workers.
ExperimentResult run_points(const std::vector<GridPoint> &points, std::uint32_t trials,
                            std::uint64_t master_seed, unsigned threads, bool keep_trials);

AggregateRecord aggregate(const GridPoint &point, const std::vector<TrialMetrics> &trials);

AggregateRecord run_trials(const SimParams &point, std::uint32_t trials,
                           std::uint64_t master_seed, unsigned threads = 1);

std::vector<GridPoint> fairness_points(const ExperimentConfig &config);
std::vector<GridPoint> efficiency_q_points(const ExperimentConfig &config);
std::vector<GridPoint> efficiency_n_points(const ExperimentConfig &config);

ExperimentResult fairness_grid(const ExperimentConfig &config);
ExperimentResult efficiency_sweep_q(const ExperimentConfig &config);
ExperimentResult efficiency_sweep_n(const ExperimentConfig &config);

/// Dispatches on config.experiment. single_run yields one record with trials=1.
ExperimentResult run_experiment(const ExperimentConfig &config);

/// Miners for n equal atomic miners sharing informational parameter q.
std::vector<MinerSpec> equal_miners(std::uint32_t n, double q);

} // namespace dagledger
