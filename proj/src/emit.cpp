#include "dagledger/emit.hpp"

#include "dagledger/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dagledger {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw IoError("refusing to serialise a non-finite value");
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw IoError("number formatting failed");
  return std::string(buf, end);
}

namespace {

double parse_double(const std::string &s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError("malformed number '" + s + "' in CSV");
  return v;
}

std::uint32_t parse_u32(const std::string &s) {
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError("malformed integer '" + s + "' in CSV");
  return v;
}

std::vector<std::string> split(const std::string &line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

json k_to_json(const PointerLimit &k) {
  return k.is_unbounded() ? json("inf") : json(k.value());
}

PointerLimit k_from_json(const json &j) {
  if (j.is_string()) return PointerLimit::parse(j.get<std::string>());
  return PointerLimit::finite(j.get<std::uint32_t>());
}

json stat_json(const Stat &s) { return json{{"mean", s.mean}, {"std", s.std}}; }
Stat stat_from(const json &j) { return Stat{j.at("mean").get<double>(), j.at("std").get<double>()}; }

} // namespace

std::string records_csv(const std::vector<AggregateRecord> &records) {
  if (records.empty()) throw IoError("no records to serialise");
  const bool fairness = records.front().point.experiment == ExperimentKind::fairness_grid;
  std::ostringstream out;
  out << (fairness ? kFairnessCsvHeader : kEfficiencyCsvHeader) << '\n';
  for (const auto &r : records) {
    const auto &p = r.point;
    if (fairness) {
      out << p.k.to_string() << ',' << format_double(p.q0) << ',' << format_double(p.q1) << ','
          << format_double(p.h1) << ',' << p.horizon << ',' << r.trials << ',' << p.eta << ','
          << p.lambda << ',' << format_double(p.alpha) << ',' << format_double(r.surplus.mean)
          << ',' << format_double(r.surplus.std) << ',' << format_double(r.share.mean) << '\n';
    } else {
      out << p.k.to_string() << ',' << p.n << ',' << format_double(p.q) << ',' << p.horizon << ','
          << r.trials << ',' << p.eta << ',' << p.lambda << ',' << format_double(p.alpha) << ','
          << format_double(r.pow_efficiency.mean) << ',' << format_double(r.pow_efficiency.std)
          << ',' << format_double(r.orphan_rate.mean) << ',' << format_double(r.orphan_rate.std)
          << ',' << format_double(r.lag.mean) << ',' << format_double(r.lag.std) << '\n';
    }
  }
  return out.str();
}

std::vector<AggregateRecord> parse_records_csv(const std::string &text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty CSV");
  const bool fairness = header == kFairnessCsvHeader;
  if (!fairness && header != kEfficiencyCsvHeader) throw IoError("unrecognised CSV header");
  const std::size_t columns = fairness ? 12 : 14;

  std::vector<AggregateRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line, ',');
    if (c.size() != columns) throw IoError("CSV row has wrong column count: " + line);
    AggregateRecord r;
    auto &p = r.point;
    p.k = PointerLimit::parse(c[0]);
    if (fairness) {
      p.experiment = ExperimentKind::fairness_grid;
      p.n = 2;
      p.q0 = parse_double(c[1]);
      p.q1 = parse_double(c[2]);
      p.h1 = parse_double(c[3]);
      p.horizon = parse_u32(c[4]);
      r.trials = parse_u32(c[5]);
      p.eta = parse_u32(c[6]);
      p.lambda = parse_u32(c[7]);
      p.alpha = parse_double(c[8]);
      r.surplus = {parse_double(c[9]), parse_double(c[10])};
      r.share.mean = parse_double(c[11]);
      r.focus_miner = 1;
    } else {
      p.n = parse_u32(c[1]);
      p.q = parse_double(c[2]);
      p.horizon = parse_u32(c[3]);
      r.trials = parse_u32(c[4]);
      p.eta = parse_u32(c[5]);
      p.lambda = parse_u32(c[6]);
      p.alpha = parse_double(c[7]);
      r.pow_efficiency = {parse_double(c[8]), parse_double(c[9])};
      r.orphan_rate = {parse_double(c[10]), parse_double(c[11])};
      r.lag = {parse_double(c[12]), parse_double(c[13])};
    }
    out.push_back(std::move(r));
  }
  return out;
}

json record_to_json(const AggregateRecord &r) {
  const auto &p = r.point;
  json j{{"experiment", to_string(p.experiment)},
         {"k", k_to_json(p.k)},
         {"n", p.n},
         {"q0", p.q0},
         {"q1", p.q1},
         {"h1", p.h1},
         {"q", p.q},
         {"T", p.horizon},
         {"eta", p.eta},
         {"lambda", p.lambda},
         {"alpha", p.alpha},
         {"gamma", p.gamma},
         {"trials", r.trials},
         {"focus_miner", r.focus_miner},
         {"share", stat_json(r.share)},
         {"surplus", stat_json(r.surplus)},
         {"pow_efficiency", stat_json(r.pow_efficiency)},
         {"orphan_rate", stat_json(r.orphan_rate)},
         {"lag", stat_json(r.lag)}};
  j["inclusion_delay"] = r.inclusion_delay ? stat_json(*r.inclusion_delay) : json(nullptr);
  return j;
}

AggregateRecord record_from_json(const json &j) {
  AggregateRecord r;
  auto &p = r.point;
  p.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
  p.k = k_from_json(j.at("k"));
  p.n = j.at("n").get<std::uint32_t>();
  p.q0 = j.at("q0").get<double>();
  p.q1 = j.at("q1").get<double>();
  p.h1 = j.at("h1").get<double>();
  p.q = j.at("q").get<double>();
  p.horizon = j.at("T").get<std::uint32_t>();
  p.eta = j.at("eta").get<std::uint32_t>();
  p.lambda = j.at("lambda").get<std::uint32_t>();
  p.alpha = j.at("alpha").get<double>();
  p.gamma = j.at("gamma").get<double>();
  r.trials = j.at("trials").get<std::uint32_t>();
  r.focus_miner = j.at("focus_miner").get<std::uint32_t>();
  r.share = stat_from(j.at("share"));
  r.surplus = stat_from(j.at("surplus"));
  r.pow_efficiency = stat_from(j.at("pow_efficiency"));
  r.orphan_rate = stat_from(j.at("orphan_rate"));
  r.lag = stat_from(j.at("lag"));
  if (j.contains("inclusion_delay") && !j.at("inclusion_delay").is_null())
    r.inclusion_delay = stat_from(j.at("inclusion_delay"));
  return r;
}

std::string records_json(const std::vector<AggregateRecord> &records, const json &metadata) {
  if (records.empty()) throw IoError("no records to serialise");
  json doc{{"metadata", metadata}, {"records", json::array()}};
  for (const auto &r : records) doc["records"].push_back(record_to_json(r));
  return doc.dump(2) + "\n";
}

std::vector<AggregateRecord> parse_records_json(const std::string &text) {
  const json doc = json::parse(text);
  std::vector<AggregateRecord> out;
  for (const auto &j : doc.at("records")) out.push_back(record_from_json(j));
  return out;
}

std::string trials_csv(const std::vector<AggregateRecord> &records,
                       const std::vector<TrialRecord> &trials) {
  std::ostringstream out;
  out << "point,trial,seed,share,surplus,pow_efficiency,orphan_rate,lag\n";
  for (const auto &t : trials) {
    const std::uint32_t focus = records.at(t.point).focus_miner;
    const auto &m = t.metrics;
    out << t.point << ',' << t.trial << ',' << t.seed << ',' << format_double(m.shares.at(focus))
        << ',' << format_double(m.surplus.at(focus)) << ',' << format_double(m.pow_efficiency)
        << ',' << format_double(m.orphan_rate) << ',' << m.lag << '\n';
  }
  return out.str();
}

std::uint8_t surplus_gray(double surplus) {
  const double clamped = std::clamp(surplus, -0.5, 0.5);
  return static_cast<std::uint8_t>(std::lround((clamped + 0.5) * 255.0));
}

std::string surplus_pgm(const std::vector<AggregateRecord> &panel) {
  std::vector<double> q1s, h1s;
  for (const auto &r : panel) {
    q1s.push_back(r.point.q1);
    h1s.push_back(r.point.h1);
  }
  std::sort(q1s.begin(), q1s.end());
  q1s.erase(std::unique(q1s.begin(), q1s.end()), q1s.end());
  std::sort(h1s.begin(), h1s.end(), std::greater<>());
  h1s.erase(std::unique(h1s.begin(), h1s.end()), h1s.end());

  std::map<std::pair<double, double>, double> cell;
  for (const auto &r : panel) cell[{r.point.h1, r.point.q1}] = r.surplus.mean;

  std::string out = "P5\n" + std::to_string(q1s.size()) + " " + std::to_string(h1s.size()) +
                    "\n255\n";
  for (double h : h1s)
    for (double q : q1s) {
      const auto it = cell.find({h, q});
      out.push_back(static_cast<char>(it == cell.end() ? 0 : surplus_gray(it->second)));
    }
  return out;
}

json trace_json(const LedgerState &state) {
  json blocks = json::array();
  for (const Block &b : state.blocks.blocks())
    blocks.push_back({{"id", b.id},
                      {"owner", b.owner ? json(*b.owner) : json(nullptr)},
                      {"pointers", b.pointers},
                      {"txs", b.txs}});
  json txs = json::array();
  for (TxIndex i = 0; i < state.txs.size(); ++i) {
    const auto &t = state.txs.tx(i);
    txs.push_back({{"id", i},
                   {"deps", t.deps},
                   {"turn", t.id.turn},
                   {"serial", t.id.serial},
                   {"kind", t.id.kind == TxKind::reward ? "reward" : "regular"}});
  }
  return json{{"turn", state.turn}, {"blocks", std::move(blocks)}, {"transactions", std::move(txs)}};
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.string() + ": cannot create directory: " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << content;
  out.close();
  if (!out) throw IoError(path.string() + ": write failed");
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json output_metadata(const ExperimentConfig &config) {
  json assumptions = json::array();
  if (config.experiment == ExperimentKind::fairness_grid)
    assumptions.push_back("fairness runs use eta = lambda = " + std::to_string(config.base.eta) +
                          " unless overridden");
  assumptions.push_back("lambda defaults to eta");
  assumptions.push_back("nature transactions depend on the globally valid set before the "
                        "turn's block");
  return json{{"experiment", to_string(config.experiment)},
              {"master_seed", config.master_seed},
              {"trials", config.trials},
              {"gamma", config.base.gamma},
              {"phase_order",
               config.base.order == PhaseOrder::honest_growth ? "honest-growth" : "general"},
              {"assumptions", std::move(assumptions)}};
}

std::vector<std::filesystem::path> emit(const ExperimentConfig &config,
                                        const ExperimentResult &result) {
  if (result.records.empty()) throw IoError(config.output_path + ": no records to write");
  std::filesystem::path stem(config.output_path);
  if (stem.extension() == ".csv" || stem.extension() == ".json") stem.replace_extension();
  auto with = [&](const std::string &suffix) {
    return std::filesystem::path(stem.string() + suffix);
  };

  // Serialise everything first so a formatting error leaves no partial output.
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  if (config.format != OutputFormat::json) files.emplace_back(with(".csv"), records_csv(result.records));
  if (config.format != OutputFormat::csv)
    files.emplace_back(with(".json"), records_json(result.records, output_metadata(config)));
  if (config.dump_trials) files.emplace_back(with(".trials.csv"), trials_csv(result.records, result.trials));
  if (config.pgm && config.experiment == ExperimentKind::fairness_grid) {
    std::map<std::pair<std::string, double>, std::vector<AggregateRecord>> panels;
    std::vector<std::pair<std::string, double>> order;
    for (const auto &r : result.records) {
      const auto key = std::pair{r.point.k.to_string(), r.point.q0};
      if (!panels.contains(key)) order.push_back(key);
      panels[key].push_back(r);
    }
    for (const auto &key : order)
      files.emplace_back(with("_k" + key.first + "_q0-" + format_double(key.second) + ".pgm"),
                         surplus_pgm(panels[key]));
  }

  std::vector<std::filesystem::path> written;
  for (const auto &[path, content] : files) {
    write_file(path, content);
    written.push_back(path);
  }
  return written;
}

} // namespace dagledger
