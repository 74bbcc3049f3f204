#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "logitval/io.hpp"
#include "logitval/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimism-corrected performance assessment for logistic "
               "regression (ML, Firth, ridge)"};
  app.set_version_flag("--version", std::string("logitval ") +
                                        logitval::kVersion);
  app.require_subcommand(1);

  logitval::io::AssessRequest assess;
  std::string assess_out;
  std::string assess_format = "csv";
  auto* cmd_assess = app.add_subcommand(
      "assess", "Assess a CSV dataset with resampling corrections");
  cmd_assess->add_option("--data", assess.data_path, "CSV file with header")
      ->required();
  cmd_assess->add_option("--outcome", assess.outcome_column,
                         "name of the 0/1 outcome column")
      ->required();
  cmd_assess->add_option("--estimator", assess.estimators,
                         "ml|firth|ridge (repeatable)");
  cmd_assess->add_option("--method", assess.methods,
                         "apparent|loo|lpo|kfold|enhboot|632plus|simpleboot");
  cmd_assess->add_option("--metric", assess.metrics, "cstat|slope|brier");
  cmd_assess->add_option("--folds", assess.folds, "folds for kfold");
  cmd_assess->add_option("--reps", assess.repetitions,
                         "repetitions for kfold");
  cmd_assess->add_option("--boot", assess.bootstrap_count,
                         "bootstrap resamples");
  cmd_assess->add_option("--seed", assess.seed, "base seed");
  cmd_assess->add_option("--out", assess_out, "output path (default stdout)");
  cmd_assess->add_option("--format", assess_format, "csv|json");

  logitval::io::SimRequest sim;
  std::string sim_filter;
  int sim_replicates = 0;
  std::string sim_table;
  auto* cmd_sim = app.add_subcommand(
      "simulate", "Run factorial simulation scenarios from a config file");
  cmd_sim->add_option("--config", sim.config_path, "key=value config file")
      ->required();
  cmd_sim->add_option("--out", sim.output_path, "output CSV path")->required();
  cmd_sim->add_option("--scenario", sim_filter,
                      "filter, e.g. n=50,rate=0.25,effect=1");
  cmd_sim->add_option("--replicates", sim_replicates,
                      "override replicate count");
  cmd_sim->add_option("--workers", sim.workers,
                      "worker threads (default: all cores)");
  cmd_sim->add_flag("--per-replicate", sim.per_replicate,
                    "also write per-replicate records");
  cmd_sim->add_option("--table", sim_table,
                      "write a wide pivot instead: s2|s3|s4|s6");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : logitval::io::kExitUsage;
  }

  if (cmd_assess->parsed()) {
    if (!assess_out.empty()) assess.out_path = assess_out;
    if (assess_format == "csv") {
      assess.format = logitval::io::ReportFormat::Csv;
    } else if (assess_format == "json") {
      assess.format = logitval::io::ReportFormat::Json;
    } else {
      std::cerr << "error: unknown format " << assess_format << "\n";
      return logitval::io::kExitUsage;
    }
    return logitval::io::cmd_assess(assess, std::cout, std::cerr);
  }

  if (!sim_filter.empty()) sim.scenario_filter = sim_filter;
  if (sim_replicates > 0) sim.replicate_override = sim_replicates;
  if (!sim_table.empty()) sim.table = sim_table;
  return logitval::io::cmd_simulate(sim, std::cerr);
}
