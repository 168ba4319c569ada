#pragma once

#include "dagledger/experiment.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace dagledger {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char *kFairnessCsvHeader =
    "k,q0,q1,h1,T,trials,eta,lambda,alpha,mean_surplus,std_surplus,mean_share";
inline constexpr const char *kEfficiencyCsvHeader =
    "k,n,q,T,trials,eta,lambda,alpha,mean_pow_efficiency,std_pow_efficiency,"
    "mean_orphan_rate,std_orphan_rate,mean_lag,std_lag";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Fairness records use the fairness header; every other kind uses the
/// efficiency header.
std::string records_csv(const std::vector<AggregateRecord> &records);

/// Parses CSV produced by records_csv. Only the CSV columns are populated.
std::vector<AggregateRecord> parse_records_csv(const std::string &text);

nlohmann::json record_to_json(const AggregateRecord &r);
AggregateRecord record_from_json(const nlohmann::json &j);

/// {"metadata": ..., "records": [...]}.
std::string records_json(const std::vector<AggregateRecord> &records,
                         const nlohmann::json &metadata);
std::vector<AggregateRecord> parse_records_json(const std::string &text);

/// Per-trial dump: point,trial,seed,share,surplus,pow_efficiency,orphan_rate,lag.
std::string trials_csv(const std::vector<AggregateRecord> &records,
                       const std::vector<TrialRecord> &trials);

/// Grayscale P5 image of one (k, q0) fairness panel: columns are q1
/// ascending, rows are h1 descending (largest h1 on top). Pixel value is
/// round((clamp(surplus, -0.5, 0.5) + 0.5) * 255).
std::string surplus_pgm(const std::vector<AggregateRecord> &panel);
std::uint8_t surplus_gray(double surplus);

/// Final global state as {blocks: [...], transactions: [...]}.
nlohmann::json trace_json(const LedgerState &state);

void write_file(const std::filesystem::path &path, const std::string &content);
std::string read_file(const std::filesystem::path &path);

/// Writes <stem>.csv and/or <stem>.json (plus <stem>.trials.csv and PGM
/// panels when asked). Throws IoError before touching disk if there are no
/// records. Returns written paths.
std::vector<std::filesystem::path> emit(const ExperimentConfig &config,
                                        const ExperimentResult &result);

/// Descriptive metadata block carried in JSON output.
nlohmann::json output_metadata(const ExperimentConfig &config);

} // namespace dagledger
