#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdmet/dmet.hpp"
#include "qdmet/integrals.hpp"
#include "qdmet/vqe.hpp"

// Batch driver behind the `qdmet` executable: JSON run configuration, one
// CSV row per input, JSON-lines iteration log.
namespace qdmet::cli {

enum class Method { rhf, fci, vqe, dmet_fci, dmet_esvqe };

Method parse_method(const std::string& name);
std::string to_string(Method m);
bool is_dmet(Method m);

struct InputSpec {
  std::string label;                     ///< defaults to the file stem or "hubbard<n>"
  std::optional<std::string> fcidump;    ///< absolute, or relative to the config directory
  std::optional<HubbardParams> hubbard;
};

struct RunConfig {
  std::vector<InputSpec> inputs;
  Method method = Method::fci;
  std::optional<FragmentPartition> partition;
  bool single_orbital_fragments = false;  ///< "fragments": "single"
  DmetConfig dmet;
  VqeConfig vqe;
  std::string output;                    ///< CSV path; empty means stdout
  std::string log;                       ///< JSON-lines path; empty means none
  std::filesystem::path base_dir;        ///< relative paths resolve here

  /// Throws ValidationError naming the offending field.
  void validate() const;
  std::filesystem::path resolve(const std::string& path) const;
};

/// Parses the JSON configuration text. Field-level errors raise
/// ValidationError("field '<path>': ...").
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON text (sorted keys, defaults spelled out).
std::string serialize_config(const RunConfig& cfg);

struct RunRow {
  std::string label;
  std::string method;
  std::optional<double> energy;
  std::optional<double> mu_star;
  bool converged = false;
  std::size_t n_qubits = 0;
  double wall_seconds = 0.0;
  std::string error;
};

std::string csv_header();
std::string format_row(const RunRow& row);

/// Receives one JSON object (already serialized, no newline) per log event.
using LogSink = std::function<void(const std::string&)>;

IntegralSet load_input(const RunConfig& cfg, const InputSpec& input);
FragmentPartition partition_for(const RunConfig& cfg, std::size_t n_spatial);

/// Runs one input; solver failures become a row with the error column set.
RunRow run_input(const RunConfig& cfg, const InputSpec& input, const LogSink& log = {});

struct ScanOptions {
  int parallel = 1;
  bool allow_unconverged = false;
};

/// Runs every input and writes the CSV (header first, rows in input order,
/// flushed per row). Returns 0, or 1 when any row failed or did not converge
/// and `allow_unconverged` is off.
int run_scan(const RunConfig& cfg, const ScanOptions& opts, std::ostream& csv, const LogSink& log = {});

}  // namespace qdmet::cli
