// SPDX-License-Identifier: Apache-2.0
//
// Named experiments: each resolves a config, runs its sweep, writes CSV files
// plus manifest.json into the output directory and returns its checks.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "covertower/config.hpp"
#include "covertower/fit.hpp"

namespace covertower {

/// Column order of every CSV written by the experiments.
namespace csv_schema {
inline const std::vector<std::string> stability{"j", "tau_j", "I_j", "N", "gap", "fitted_sigma", "trunc_rtol"};
inline const std::vector<std::string> variance{"j",        "tau_j",      "N",           "psi_id",  "theory_var",
                                               "emp_var", "emp_stderr", "paper_bound", "samples", "seed"};
inline const std::vector<std::string> equidist{"j", "psi_id", "theory_mean", "emp_mean", "emp_stderr", "samples", "seed"};
inline const std::vector<std::string> zeros{"seed", "level", "re", "im", "multiplicity"};
inline const std::vector<std::string> asconv{"j", "tau_j", "psi_id", "pairing", "limit", "error", "seed"};
inline const std::vector<std::string> gate{"j", "tau_j", "term", "partial_sum", "ratio"};
inline const std::vector<std::string> gtilde{"t", "series", "integral", "bound"};
inline const std::vector<std::string> kernel{"j",     "tau_j",          "I_j",               "N",
                                             "trace", "dim",            "base_locus_min",    "metric_min",
                                             "metric_max", "gap"};
}  // namespace csv_schema

/// Serialize a double with round-trip precision ("%.17g").
std::string format_double(double x);

struct Check {
  std::string name;
  bool pass = false;
  bool statistical = false;  // Monte Carlo comparison rather than a deterministic property
  std::string detail;
};

struct RunResult {
  std::string experiment;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;
  nlohmann::json summary = nlohmann::json::object();

  bool ok() const;
  /// 0 when every check passes, 3 if a deterministic check fails, else 2.
  int exit_code() const;
};

/// Optional extras for the sampling experiments.
struct DumpOptions {
  bool zeros = false;    // zeros.csv
  bool samples = false;  // samples.jsonl
};

/// Gap per level for every N of stability.n_sweep; fit of log gap against tau_j.
/// Throws DepthError if depth < 2.
RunResult run_stability_scan(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Empirical against predicted mean pairing for levels 0..min(depth-1, 2).
/// Throws DomainError if n_samples < 100.
RunResult run_equidistribution(const ExperimentConfig& cfg, const std::filesystem::path& out,
                               const DumpOptions& dump = {});

/// Predicted variance on every level, empirical variance on levels 0 and 1,
/// fitted decay constant and the scaled bound curve.
RunResult run_variance_scan(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// One section per level along a fixed seed path and the summability gate.
RunResult run_as_convergence(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Series against integral form of Gtilde on 1001 points of [0, 1].
RunResult run_gtilde_table(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Trace, base locus, metric density range and gap for each level.
RunResult run_kernel_table(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Writes manifest.json (resolved config, version, checks, files, summary).
void write_manifest(const ExperimentConfig& cfg, const RunResult& result, const std::filesystem::path& out);

const char* version();

}  // namespace covertower
