// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace ssou::harness {

/// One long-format result record.
struct ResultRow {
  std::size_t cell = 0;
  int k = 0;
  double kappa = 0.0;
  double diffusion = 0.0;
  int stride = 0;
  std::string coord_name;  ///< name of the cell's extra coordinate, or "-"
  double coord = 0.0;
  std::string model;  ///< model id, "threshold", "theory" or "-"
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_effective = 0;
  std::string status = "ok";
};

struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string code_version;
};

struct ExperimentResult {
  std::string experiment;
  Provenance provenance;
  std::vector<ResultRow> rows;
  std::filesystem::path csv_path;
  bool complete = true;  ///< false when RunContext::cell_limit cut the sweep short
};

inline constexpr const char* kResultColumns =
    "cell,k,kappa,diffusion,stride,coord_name,coord,model,metric,value,stderr,n_effective,status";

std::string provenance_line(const Provenance& p);
std::string format_row(const ResultRow& row);

/**
 * @brief Cell-ordered CSV writer that survives interruption.
 *
 * A `<csv>.progress` sidecar records the config hash, the number of
 * committed cells and the byte length of the file after the last commit.
 * open() truncates a partial file back to that length and reports how many
 * cells can be skipped; a sidecar written under another config hash is
 * ignored and the file restarted. finish() removes the sidecar.
 */
class ResultWriter {
public:
  ResultWriter(std::filesystem::path csv, Provenance provenance);

  /// Number of cells already committed.
  std::size_t open();
  void commit(std::span<const ResultRow> rows);
  void finish();

  std::size_t committed() const { return committed_; }

private:
  std::filesystem::path csv_;
  std::filesystem::path sidecar_;
  Provenance provenance_;
  std::ofstream out_;
  std::size_t committed_ = 0;

  void write_sidecar(std::uintmax_t offset);
};

std::vector<ResultRow> read_results_csv(const std::filesystem::path& csv, Provenance* provenance = nullptr);

/// Checks a results file against the JSON column descriptor; throws
/// InvalidParameter naming the first offending line.
void validate_results_csv(const std::filesystem::path& csv, const std::filesystem::path& schema);

/// Location of the checked-in descriptor in the source tree.
std::filesystem::path default_schema_path();

}  // namespace ssou::harness
