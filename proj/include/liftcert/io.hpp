#pragma once

// File formats: topology, support family, parameter tuple and experiment
// config (JSON in), certificate and experiment summary (JSON out), per-pair
// and per-trial tables (CSV out).

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "liftcert/certify.hpp"
#include "liftcert/network.hpp"
#include "liftcert/recovery.hpp"
#include "liftcert/tensor.hpp"

namespace liftcert {

inline constexpr std::string_view kToolName = "liftcert";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Whole file as bytes; throws InputError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Parsers throw InputError. Syntax errors carry "line L, column C"; `origin`
// prefixes the message.

RawTopology parse_topology(std::string_view text, std::string_view origin = "topology");
/// Parses and validates.
NetworkTopology load_topology(const std::filesystem::path& path);
/// Canonical form: sorted keys, two-space indent, trailing newline.
std::string topology_to_json(const NetworkTopology& topo);

SupportFamily parse_family(std::string_view text, std::string_view origin = "family");
std::string family_to_json(const SupportFamily& family);

ParamTuple parse_params(std::string_view text, std::string_view origin = "params");
std::string params_to_json(const ParamTuple& h);

/// Config keys: "topology" (path relative to the config file, or inline
/// object), "family" (path, inline object, or {"maxSize": s} generator;
/// optional), "deltaGrid", "trials", "p" (number or "inf"),
/// "solver" {"maxIters", "tol", "restarts"}, "seed", and optional "mode"
/// ("oracle" | "search"), "corrupt", "jobs".
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir,
                                         std::string_view origin = "config");

struct CertificateInputs {
  std::string topology_path;
  std::string topology_sha256;
  std::optional<std::string> family_path;
  std::optional<std::string> family_sha256;
  std::optional<int> generator_max_size;
};

std::string certificate_to_json(const CertificationReport& report, const NetworkTopology& topo,
                                const CertificateInputs& inputs);

/// Columns: pair_index, sigma_min_nonzero, rank, indeterminate.
std::string pair_table_csv(const CertificationReport& report);

std::string experiment_summary_json(const ExperimentResult& result, const ExperimentConfig& config);

}  // namespace liftcert
