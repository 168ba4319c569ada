#include "dagledger/config.hpp"

#include "dagledger/emit.hpp"
#include "dagledger/errors.hpp"

#include <algorithm>

namespace dagledger {

using nlohmann::json;

namespace {

PointerLimit k_value(const json &j) {
  if (j.is_string()) return PointerLimit::parse(j.get<std::string>());
  if (!j.is_number_integer() || j.get<long long>() < 1)
    throw ConfigError("k must be a positive integer or \"inf\"");
  return PointerLimit::finite(j.get<std::uint32_t>());
}

MinerKind miner_kind(const std::string &s) {
  if (s == "atomic") return MinerKind::atomic;
  if (s == "non-atomic" || s == "non_atomic" || s == "non-atomic-aggregate")
    return MinerKind::non_atomic;
  throw ConfigError("unknown miner kind '" + s + "'");
}

OutputFormat output_format(const std::string &s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  if (s == "both") return OutputFormat::both;
  throw ConfigError("unknown output format '" + s + "'");
}

const char *format_name(OutputFormat f) {
  switch (f) {
  case OutputFormat::csv: return "csv";
  case OutputFormat::json: return "json";
  case OutputFormat::both: return "both";
  }
  return "csv";
}

template <typename T> std::vector<T> list(const json &j, const char *name) {
  if (!j.is_array()) throw ConfigError(std::string("axis '") + name + "' must be an array");
  return j.get<std::vector<T>>();
}

const std::vector<std::string> &known_top_level() {
  static const std::vector<std::string> keys{"experiment", "base",      "axes",
                                             "trials",     "master_seed", "output_path",
                                             "format",     "threads",   "dump_trials",
                                             "pgm",        "$schema",   "comment"};
  return keys;
}

} // namespace

SimParams sim_params_from_json(const json &j, SimParams p) {
  if (!j.is_object()) throw ConfigError("'base' must be an object");
  static const std::vector<std::string> known{"k",       "eta",  "lambda",      "gamma", "alpha",
                                              "horizon", "seed", "phase_order", "miners"};
  for (const auto &[key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown base field '" + key + "'");
  if (j.contains("k")) p.k = k_value(j["k"]);
  if (j.contains("eta")) p.eta = j["eta"].get<std::uint32_t>();
  if (j.contains("lambda")) p.lambda = j["lambda"].get<std::uint32_t>();
  if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
  if (j.contains("alpha")) p.score.alpha = j["alpha"].get<double>();
  if (j.contains("horizon")) p.horizon = j["horizon"].get<std::uint32_t>();
  if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("phase_order")) {
    const auto s = j["phase_order"].get<std::string>();
    if (s == "honest-growth") p.order = PhaseOrder::honest_growth;
    else if (s == "general") p.order = PhaseOrder::general;
    else throw ConfigError("unknown phase_order '" + s + "'");
  }
  if (j.contains("miners")) {
    p.miners.clear();
    for (const auto &m : j["miners"]) {
      MinerSpec spec;
      spec.hash = m.at("hash").get<double>();
      spec.info = m.at("info").get<double>();
      if (m.contains("kind")) spec.kind = miner_kind(m["kind"].get<std::string>());
      p.miners.push_back(spec);
    }
  }
  return p;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.axes = default_axes(kind);
  c.base.horizon = default_horizon(kind);
  c.base.eta = 6;
  c.base.gamma = 2.0;
  c.base.score.alpha = 0.5;
  if (kind == ExperimentKind::single_run) c.base.miners = equal_miners(4, 0.5);
  return c;
}

ExperimentConfig config_from_json(const json &doc) {
  try {
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    for (const auto &[key, _] : doc.items())
      if (std::find(known_top_level().begin(), known_top_level().end(), key) ==
          known_top_level().end())
        throw ConfigError("unknown config field '" + key + "'");

    const auto kind = parse_experiment_kind(doc.value("experiment", std::string("single-run")));
    ExperimentConfig c = default_config(kind);
    if (doc.contains("base")) c.base = sim_params_from_json(doc["base"], c.base);
    if (doc.contains("axes")) {
      const auto &a = doc["axes"];
      if (a.contains("k")) {
        c.axes.k.clear();
        for (const auto &k : a["k"]) c.axes.k.push_back(k_value(k));
      }
      if (a.contains("q0")) c.axes.q0 = list<double>(a["q0"], "q0");
      if (a.contains("q1")) c.axes.q1 = list<double>(a["q1"], "q1");
      if (a.contains("h1")) c.axes.h1 = list<double>(a["h1"], "h1");
      if (a.contains("q")) c.axes.q = list<double>(a["q"], "q");
      if (a.contains("n")) c.axes.n = list<std::uint32_t>(a["n"], "n");
    }
    if (doc.contains("trials")) c.trials = doc["trials"].get<std::uint32_t>();
    if (doc.contains("master_seed")) c.master_seed = doc["master_seed"].get<std::uint64_t>();
    if (doc.contains("output_path")) c.output_path = doc["output_path"].get<std::string>();
    if (doc.contains("format")) c.format = output_format(doc["format"].get<std::string>());
    if (doc.contains("threads")) c.threads = doc["threads"].get<unsigned>();
    if (doc.contains("dump_trials")) c.dump_trials = doc["dump_trials"].get<bool>();
    if (doc.contains("pgm")) c.pgm = doc["pgm"].get<bool>();
    return c;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const ExperimentConfig &c) {
  auto k_json = [](const PointerLimit &k) {
    return k.is_unbounded() ? json("inf") : json(k.value());
  };
  json miners = json::array();
  for (const auto &m : c.base.miners)
    miners.push_back({{"hash", m.hash},
                      {"info", m.info},
                      {"kind", m.kind == MinerKind::atomic ? "atomic" : "non-atomic"}});
  json base{{"k", k_json(c.base.k)},
            {"eta", c.base.eta},
            {"lambda", c.base.tx_rate()},
            {"gamma", c.base.gamma},
            {"alpha", c.base.score.alpha},
            {"horizon", c.base.horizon},
            {"seed", c.base.seed},
            {"phase_order", c.base.order == PhaseOrder::honest_growth ? "honest-growth" : "general"},
            {"miners", miners}};
  json ks = json::array();
  for (const auto &k : c.axes.k) ks.push_back(k_json(k));
  return json{{"experiment", to_string(c.experiment)},
              {"base", base},
              {"axes",
               {{"k", ks},
                {"q0", c.axes.q0},
                {"q1", c.axes.q1},
                {"h1", c.axes.h1},
                {"q", c.axes.q},
                {"n", c.axes.n}}},
              {"trials", c.trials},
              {"master_seed", c.master_seed},
              {"output_path", c.output_path},
              {"format", format_name(c.format)},
              {"threads", c.threads},
              {"dump_trials", c.dump_trials},
              {"pgm", c.pgm}};
}

} // namespace dagledger
