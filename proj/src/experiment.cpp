#include "dagledger/experiment.hpp"

#include "dagledger/errors.hpp"
#include "dagledger/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace dagledger {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::single_run: return "single-run";
  case ExperimentKind::fairness_grid: return "fairness-grid";
  case ExperimentKind::efficiency_q: return "efficiency-q";
  case ExperimentKind::efficiency_n: return "efficiency-n";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string &name) {
  if (name == "single-run" || name == "simulate") return ExperimentKind::single_run;
  if (name == "fairness-grid") return ExperimentKind::fairness_grid;
  if (name == "efficiency-q") return ExperimentKind::efficiency_q;
  if (name == "efficiency-n") return ExperimentKind::efficiency_n;
  throw ConfigError("unknown experiment '" + name + "'");
}

GridAxes default_axes(ExperimentKind kind) {
  GridAxes a;
  switch (kind) {
  case ExperimentKind::fairness_grid:
    a.k = {PointerLimit::finite(1), PointerLimit::finite(2), PointerLimit::finite(3)};
    a.q0 = {0.005, 0.05, 0.2};
    for (int i = 0; i <= 20; ++i) a.q1.push_back(i / 20.0);
    for (int i = 1; i <= 20; ++i) a.h1.push_back(i / 40.0);
    break;
  case ExperimentKind::efficiency_q:
    a.k = {PointerLimit::finite(1), PointerLimit::finite(2), PointerLimit::finite(3),
           PointerLimit::unbounded()};
    a.q = {0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    a.n = {4};
    break;
  case ExperimentKind::efficiency_n:
    a.k = {PointerLimit::finite(1), PointerLimit::finite(2), PointerLimit::finite(3),
           PointerLimit::unbounded()};
    for (std::uint32_t n = 1; n <= 20; ++n) a.n.push_back(n);
    break;
  case ExperimentKind::single_run:
    break;
  }
  return a;
}

std::uint32_t default_horizon(ExperimentKind kind) {
  return kind == ExperimentKind::fairness_grid || kind == ExperimentKind::single_run ? 50 : 100;
}

void ExperimentConfig::validate() const {
  if (trials == 0) throw ConfigError("trials must be >= 1");
  auto nonempty = [](const auto &v, const char *name) {
    if (v.empty()) throw ConfigError(std::string("grid axis '") + name + "' is empty");
  };
  switch (experiment) {
  case ExperimentKind::fairness_grid:
    nonempty(axes.k, "k");
    nonempty(axes.q0, "q0");
    nonempty(axes.q1, "q1");
    nonempty(axes.h1, "h1");
    break;
  case ExperimentKind::efficiency_q:
    nonempty(axes.k, "k");
    nonempty(axes.q, "q");
    break;
  case ExperimentKind::efficiency_n:
    nonempty(axes.k, "k");
    nonempty(axes.n, "n");
    break;
  case ExperimentKind::single_run:
    base.validate();
    break;
  }
}

Stat summarize(const std::vector<double> &values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

// FNV-1a over a canonical byte image of the parameters.
class Fnv {
public:
  void bytes(const void *p, std::size_t n) {
    const auto *c = static_cast<const unsigned char *>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 0x100000001b3ull;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      const auto b = static_cast<unsigned char>(v >> (8 * i));
      bytes(&b, 1);
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return h_; }

private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

} // namespace

std::uint64_t point_hash(const SimParams &p) {
  Fnv h;
  h.u64(p.miners.size());
  for (const auto &m : p.miners) {
    h.f64(m.hash);
    h.f64(m.info);
    h.u64(static_cast<std::uint64_t>(m.kind));
  }
  h.u64(p.k.is_unbounded() ? 0 : p.k.value());
  h.u64(p.eta);
  h.u64(p.tx_rate());
  h.f64(p.gamma);
  h.f64(p.score.alpha);
  h.u64(p.horizon);
  h.u64(static_cast<std::uint64_t>(p.order));
  return h.value();
}

std::vector<MinerSpec> equal_miners(std::uint32_t n, double q) {
  if (n == 0) throw ConfigError("miner count must be >= 1");
  std::vector<MinerSpec> miners(n);
  double assigned = 0.0;
  for (std::uint32_t i = 0; i < n; ++i) {
    miners[i].hash = 1.0 / n;
    miners[i].info = q;
    assigned += miners[i].hash;
  }
  // keep the sum within tolerance for any n
  miners.back().hash += 1.0 - assigned;
  return miners;
}

AggregateRecord aggregate(const GridPoint &point, const std::vector<TrialMetrics> &trials) {
  AggregateRecord r;
  r.point = point.descriptor;
  r.trials = static_cast<std::uint32_t>(trials.size());
  r.focus_miner = point.focus_miner;
  std::vector<double> share, surp, eff, orphan, lag, delay;
  for (const auto &m : trials) {
    share.push_back(m.shares.at(point.focus_miner));
    surp.push_back(m.surplus.at(point.focus_miner));
    eff.push_back(m.pow_efficiency);
    orphan.push_back(m.orphan_rate);
    lag.push_back(static_cast<double>(m.lag));
    if (m.mean_inclusion_delay) delay.push_back(*m.mean_inclusion_delay);
  }
  r.share = summarize(share);
  r.surplus = summarize(surp);
  r.pow_efficiency = summarize(eff);
  r.orphan_rate = summarize(orphan);
  r.lag = summarize(lag);
  if (!delay.empty()) r.inclusion_delay = summarize(delay);
  return r;
}

ExperimentResult run_points(const std::vector<GridPoint> &points, std::uint32_t trials,
                            std::uint64_t master_seed, unsigned threads, bool keep_trials) {
  for (const auto &p : points) p.params.validate();
  if (trials == 0) throw ConfigError("trials must be >= 1");

  const std::size_t jobs = points.size() * trials;
  std::vector<std::uint64_t> hashes;
  hashes.reserve(points.size());
  for (const auto &p : points) hashes.push_back(point_hash(p.params));

  std::vector<TrialMetrics> results(jobs);
  std::vector<std::uint64_t> seeds(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        const std::size_t pi = j / trials;
        SimParams params = points[pi].params;
        params.seed = derive_trial_seed(master_seed, hashes[pi], j % trials);
        seeds[j] = params.seed;
        const RunResult run_result = run(params);
        results[j] = compute_metrics(run_result.state, params);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult out;
  out.records.reserve(points.size());
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const auto first = results.begin() + static_cast<std::ptrdiff_t>(pi * trials);
    std::vector<TrialMetrics> slice(first, first + trials);
    out.records.push_back(aggregate(points[pi], slice));
    if (keep_trials)
      for (std::uint32_t t = 0; t < trials; ++t)
        out.trials.push_back(TrialRecord{static_cast<std::uint32_t>(pi), t,
                                         seeds[pi * trials + t], std::move(slice[t])});
  }
  return out;
}

namespace {

PointDescriptor describe(ExperimentKind kind, const SimParams &p) {
  PointDescriptor d;
  d.experiment = kind;
  d.k = p.k;
  d.n = static_cast<std::uint32_t>(p.miners.size());
  d.horizon = p.horizon;
  d.eta = p.eta;
  d.lambda = p.tx_rate();
  d.alpha = p.score.alpha;
  d.gamma = p.gamma;
  return d;
}

} // namespace

AggregateRecord run_trials(const SimParams &point, std::uint32_t trials,
                           std::uint64_t master_seed, unsigned threads) {
  GridPoint gp{point, describe(ExperimentKind::single_run, point), 0};
  if (!point.miners.empty()) gp.descriptor.q = point.miners[0].info;
  return run_points({gp}, trials, master_seed, threads, false).records.front();
}

std::vector<GridPoint> fairness_points(const ExperimentConfig &config) {
  const auto &base = config.base;
  if (!base.miners.empty()) {
    if (base.miners.size() != 2)
      throw ConfigError("fairness grid needs exactly two miners (m0, m1)");
    if (base.miners[0].kind != MinerKind::non_atomic)
      throw ConfigError("fairness grid models m0 as a non-atomic miner");
  }
  for (const auto &k : config.axes.k)
    if (k.is_unbounded())
      throw ConfigError("fairness grid is restricted to finite k (k = inf is always fair)");

  std::vector<GridPoint> points;
  for (const auto &k : config.axes.k)
    for (double q0 : config.axes.q0)
      for (double q1 : config.axes.q1)
        for (double h1 : config.axes.h1) {
          if (!(h1 > 0.0 && h1 < 1.0)) throw ConfigError("h1 must lie in (0, 1)");
          SimParams p = base;
          p.k = k;
          p.miners.resize(2);
          p.miners[0].hash = 1.0 - h1;
          p.miners[0].info = q0;
          p.miners[0].kind = MinerKind::non_atomic;
          p.miners[1].hash = h1;
          p.miners[1].info = q1;
          p.miners[1].kind = MinerKind::atomic;
          GridPoint gp{p, describe(ExperimentKind::fairness_grid, p), 1};
          gp.descriptor.q0 = q0;
          gp.descriptor.q1 = q1;
          gp.descriptor.h1 = h1;
          points.push_back(std::move(gp));
        }
  return points;
}

std::vector<GridPoint> efficiency_q_points(const ExperimentConfig &config) {
  const std::uint32_t n = config.axes.n.empty()
                              ? (config.base.miners.empty()
                                     ? 4u
                                     : static_cast<std::uint32_t>(config.base.miners.size()))
                              : config.axes.n.front();
  std::vector<GridPoint> points;
  for (const auto &k : config.axes.k)
    for (double q : config.axes.q) {
      SimParams p = config.base;
      p.k = k;
      p.miners = equal_miners(n, q);
      GridPoint gp{p, describe(ExperimentKind::efficiency_q, p), 0};
      gp.descriptor.q = q;
      points.push_back(std::move(gp));
    }
  return points;
}

std::vector<GridPoint> efficiency_n_points(const ExperimentConfig &config) {
  std::vector<GridPoint> points;
  for (const auto &k : config.axes.k)
    for (std::uint32_t n : config.axes.n) {
      SimParams p = config.base;
      p.k = k;
      p.miners = equal_miners(n, 1.0 / n);
      GridPoint gp{p, describe(ExperimentKind::efficiency_n, p), 0};
      gp.descriptor.q = 1.0 / n;
      points.push_back(std::move(gp));
    }
  return points;
}

ExperimentResult fairness_grid(const ExperimentConfig &config) {
  config.validate();
  return run_points(fairness_points(config), config.trials, config.master_seed, config.threads,
                    config.dump_trials);
}

ExperimentResult efficiency_sweep_q(const ExperimentConfig &config) {
  config.validate();
  return run_points(efficiency_q_points(config), config.trials, config.master_seed,
                    config.threads, config.dump_trials);
}

ExperimentResult efficiency_sweep_n(const ExperimentConfig &config) {
  config.validate();
  return run_points(efficiency_n_points(config), config.trials, config.master_seed,
                    config.threads, config.dump_trials);
}

ExperimentResult run_experiment(const ExperimentConfig &config) {
  switch (config.experiment) {
  case ExperimentKind::fairness_grid: return fairness_grid(config);
  case ExperimentKind::efficiency_q: return efficiency_sweep_q(config);
  case ExperimentKind::efficiency_n: return efficiency_sweep_n(config);
  case ExperimentKind::single_run: break;
  }
  config.validate();
  const SimParams &p = config.base;
  const RunResult r = run(p);
  GridPoint gp{p, describe(ExperimentKind::single_run, p), 0};
  if (!p.miners.empty()) gp.descriptor.q = p.miners[0].info;
  TrialMetrics m = compute_metrics(r.state, p);
  ExperimentResult out;
  out.records.push_back(aggregate(gp, {m}));
  if (config.dump_trials) out.trials.push_back(TrialRecord{0, 0, p.seed, std::move(m)});
  return out;
}

} // namespace dagledger
