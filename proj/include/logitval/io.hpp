#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "logitval/dataset.hpp"
#include "logitval/simstudy.hpp"

namespace logitval::io {

// Exit codes shared by the CLI surface.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitCompute = 4;

enum class ReportFormat { Csv, Json };

/// One long-format result row. Optional fields serialize as the literal
/// "NA"; failure reasons travel in `reason` (JSON field / CSV comment).
struct ResultsRow {
  std::optional<long> scenario_n;
  std::optional<double> event_rate;
  std::optional<double> effect;
  std::string estimator;
  std::string method;
  std::string metric;
  std::string statistic;
  std::optional<double> value;
  std::optional<double> mcse;
  std::optional<long> discarded;
  std::optional<long> attempted;
  std::string reason;
};

inline constexpr const char* kReportHeader =
    "scenario_n,event_rate,effect,estimator,method,metric,statistic,value,"
    "mcse,discarded,attempted";

/// Loads a headered CSV: the named outcome column must contain only literal
/// 0/1 tokens (no label inference) and every other column must be numeric.
/// Covariates keep their header order.
Dataset load_csv(const std::filesystem::path& path,
                 const std::string& outcome_column);

/// Writes rows (plus manifest comment lines) as CSV or JSON. The file is
/// written to a temporary sibling and atomically renamed, so fatal errors
/// never leave partial output. Empty row sets are an error.
void write_report(const std::vector<ResultsRow>& rows,
                  const std::filesystem::path& path, ReportFormat format,
                  const std::vector<std::string>& manifest = {});

/// Serializes to a stream (used for stdout output and by write_report).
void render_report(const std::vector<ResultsRow>& rows, std::ostream& out,
                   ReportFormat format,
                   const std::vector<std::string>& manifest = {});

struct AssessRequest {
  std::filesystem::path data_path;
  std::string outcome_column;
  std::vector<std::string> estimators = {"ml", "firth", "ridge"};
  std::vector<std::string> methods = {"apparent", "loo", "kfold", "enhboot",
                                      "632plus"};
  std::vector<std::string> metrics = {"cstat", "slope", "brier"};
  int folds = 5;
  int repetitions = 40;
  int bootstrap_count = 200;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> out_path;  // stdout when absent
  ReportFormat format = ReportFormat::Csv;
};

struct SimRequest {
  std::filesystem::path config_path;
  std::filesystem::path output_path;
  std::optional<std::string> scenario_filter;  // "n=50,rate=0.25,effect=1"
  std::optional<int> replicate_override;
  unsigned workers = 0;  // 0 = all cores
  bool per_replicate = false;
  std::optional<std::string> table;  // "s2" | "s3" | "s4" | "s6" pivot
};

/// Assesses a CSV dataset over the selected estimator x method x metric
/// grid and writes long-format rows. Returns a process exit code; error
/// text goes to `err`.
int cmd_assess(const AssessRequest& req, std::ostream& out, std::ostream& err);

/// Runs the simulation scenarios described by the config file and writes
/// summary rows (and optionally per-replicate records) to the output path.
int cmd_simulate(const SimRequest& req, std::ostream& err);

/// Parsed flat key=value simulation config.
struct SimConfig {
  std::vector<long> n_values = {50, 100};
  std::vector<double> event_rates = {0.25, 0.5};
  std::vector<double> effects = {0.0, 0.5, 1.0};
  int replicates = 1000;
  long validation_size = 100000;
  std::uint64_t seed = 1;
  simstudy::StudyGrid grid;
  std::uint64_t config_hash = 0;
};

SimConfig parse_sim_config(const std::filesystem::path& path);

}  // namespace logitval::io
