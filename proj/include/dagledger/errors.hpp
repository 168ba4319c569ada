#pragma once

#include <stdexcept>
#include <string>

namespace dagledger {

/// Caller passed an id or argument that does not exist in the graph.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Simulation or experiment parameters are inconsistent.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Graph data refers to something that is not stored (dangling tx id, ...).
class ConsistencyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// A strategy returned a decision that breaks the ledger rules.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Metric is not defined for the given state (e.g. shares with no mined block).
class UndefinedMetric : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

} // namespace dagledger
