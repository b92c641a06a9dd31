// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssou/harness/config.hpp"
#include "ssou/harness/results.hpp"

namespace ssou::harness {

struct RunContext {
  Config config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  ///< overrides the config's `seed`
  unsigned workers = 1;
  bool full_scale = false;
  /// Stop after committing this many new cells, leaving a resumable file.
  std::optional<std::size_t> cell_limit;
};

inline constexpr std::uint64_t kDefaultSeed = 20240501;

const char* code_version();

/// Names accepted by run_experiment, in CLI order.
const std::vector<std::string>& experiment_names();

/**
 * Runs one experiment and writes `<out_dir>/<name>.csv` plus
 * `<out_dir>/manifest.json`. Unknown config keys are rejected. Results do
 * not depend on RunContext::workers.
 */
ExperimentResult run_experiment(std::string_view name, RunContext& ctx);

ExperimentResult run_phase_diagram(RunContext& ctx);
ExperimentResult run_error_vs_k(RunContext& ctx);
ExperimentResult run_nonmarkovianity_scan(RunContext& ctx);
ExperimentResult run_autocorr_check(RunContext& ctx);
ExperimentResult run_subsample_compare(RunContext& ctx);
ExperimentResult run_gru_select(RunContext& ctx);
ExperimentResult run_theory_table(RunContext& ctx);
/// Writes `<out_dir>/dataset.csv` and returns its provenance only.
ExperimentResult run_generate(RunContext& ctx);

}  // namespace ssou::harness
