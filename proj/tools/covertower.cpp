// SPDX-License-Identifier: Apache-2.0
//
// covertower <stability|equidist|variance|asconv|gtilde|kernel-table>
//            [--config PATH] [--out DIR] [--seed U64] [--samples K] [--depth J] [--N INT]
//
// Exit codes: 0 pass, 2 statistical failure, 3 numerical failure, 4 usage.
#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "covertower/errors.hpp"
#include "covertower/experiments.hpp"

namespace ct = covertower;

namespace {

constexpr int kUsage = 4;

int exit_code_for(const ct::Error& e) {
  switch (e.kind()) {
    case ct::ErrorKind::Usage:
      return kUsage;
    case ct::ErrorKind::Numerical:
      return 3;
    case ct::ErrorKind::Statistical:
      return 2;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bergman kernels and random zeros on towers of flat tori"};
  app.set_version_flag("--version", ct::version());
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples, depth, n;
  bool dump_zeros = false, dump_samples = false;

  const char* names[][2] = {{"stability", "Bergman stability gap per level and fitted decay rate"},
                            {"equidist", "Empirical against predicted mean zero pairings"},
                            {"variance", "Predicted and empirical variance of zero pairings"},
                            {"asconv", "One section per level along a fixed seed path"},
                            {"gtilde", "Series and integral forms of the variance kernel"},
                            {"kernel-table", "Trace, base locus and metric density per level"}};
  for (const auto& [name, help] : names) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Config file (dotted key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Master seed (overrides sampling.master_seed)");
    sub->add_option("--samples", samples, "Samples per level (overrides sampling.n_samples)");
    sub->add_option("--depth", depth, "Tower depth (overrides tower.depth)");
    sub->add_option("--N", n, "Tensor power (overrides bundle.N)");
    if (std::string(name) == "equidist") {
      sub->add_flag("--dump-zeros", dump_zeros, "Write zeros.csv");
      sub->add_flag("--dump-samples", dump_samples, "Write samples.jsonl");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ct::ExperimentConfig cfg = config_path.empty() ? ct::ExperimentConfig{} : ct::ExperimentConfig::load(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.sampling_master_seed = *seed;
    if (samples) cfg.sampling_n_samples = *samples;
    if (depth) {
      if (!cfg.tower_matrices.empty()) throw ct::ConfigError("--depth conflicts with tower.matrices");
      cfg.tower_depth = *depth;
    }
    if (n) cfg.bundle_N = *n;

    ct::RunResult res;
    if (command == "stability") {
      res = ct::run_stability_scan(cfg, cfg.output_dir);
    } else if (command == "equidist") {
      res = ct::run_equidistribution(cfg, cfg.output_dir, {dump_zeros, dump_samples});
    } else if (command == "variance") {
      res = ct::run_variance_scan(cfg, cfg.output_dir);
    } else if (command == "asconv") {
      res = ct::run_as_convergence(cfg, cfg.output_dir);
    } else if (command == "gtilde") {
      res = ct::run_gtilde_table(cfg, cfg.output_dir);
    } else {
      res = ct::run_kernel_table(cfg, cfg.output_dir);
    }
    for (const auto& c : res.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
      std::cout << '\n';
    }
    for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
    return res.exit_code();
  } catch (const ct::Error& e) {
    std::cerr << "covertower " << command << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "covertower " << command << ": " << e.what() << '\n';
    return 3;
  }
}
