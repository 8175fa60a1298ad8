#pragma once

// Configuration parsing, table serialization and the nls-npd subcommands.
//
// Config files are flat `section.key = value` lines; `#` starts a comment.
// Command-line `key=value` arguments override file values.  Tables are CSV
// with a header row and 17 significant digits; structured reports are JSON.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlsnpd/core.hpp"

namespace nlsnpd::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kPass = 0, kCheckFailure = 1, kConfigError = 2 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunConfig {
 public:
  /// Parses `in`; unknown keys, malformed lines and ill-typed values raise
  /// ConfigError naming the source and line.
  static RunConfig parse(std::istream& in, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  /// Applies one `key=value` override (same validation as file lines).
  void set(const std::string& assignment, const std::string& source = "<argv>");

  bool has(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_double(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  /// Model parameters from the model.* block (hbar = m = L = eta = q = 1 by
  /// default).  ConfigError on out-of-range values.
  ModelParams params() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  void assign(const std::string& key, const std::string& value,
              const std::string& where);

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origin_;
};

/// "%.17g": shortest fixed format that round-trips every double.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;

  static CsvTable read(std::istream& in);
  static CsvTable read(const std::filesystem::path& path);

  /// Column index by name; ConfigError if absent.
  std::size_t column(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct CommandOutcome {
  bool passed = true;
  std::vector<std::string> failures;
  nlohmann::json summary;
};

CommandOutcome cmd_spectrum(const RunConfig& cfg, const std::filesystem::path& out);
CommandOutcome cmd_verify(const RunConfig& cfg, const std::filesystem::path& out);
CommandOutcome cmd_evolve(const RunConfig& cfg, const std::filesystem::path& out);
CommandOutcome cmd_recurse(const RunConfig& cfg, const std::filesystem::path& out);
CommandOutcome cmd_search(const RunConfig& cfg, const std::filesystem::path& out);
CommandOutcome cmd_limits(const RunConfig& cfg, const std::filesystem::path& out);

/// `nls-npd <command> --config FILE [--out DIR] [key=value ...]`.
/// `args` is argv as given, program name first.  Prints a one-line JSON
/// status to `out`; returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

/// Worker count for sweeps: NLS_NPD_THREADS if set and positive, else the
/// hardware concurrency.
unsigned sweep_threads();

/// Params echo written into every JSON report.
nlohmann::json params_json(const ModelParams& params);

}  // namespace nlsnpd::cli
