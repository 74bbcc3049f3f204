#include "logitval/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>

#include <nlohmann/json.hpp>

#include "logitval/parallel.hpp"
#include "logitval/version.hpp"

namespace logitval::io {

namespace {

using glm::EstimatorKind;
using metrics::MetricKind;
using resampling::Method;

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool parse_long(const std::string& token, long& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string opt_double(const std::optional<double>& v) {
  return v ? fmt_double(*v) : "NA";
}

std::string opt_long(const std::optional<long>& v) {
  return v ? std::to_string(*v) : "NA";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "ml") return EstimatorKind::Ml;
  if (name == "firth") return EstimatorKind::Firth;
  if (name == "ridge") return EstimatorKind::Ridge;
  throw ConfigError("unknown estimator: " + name +
                    " (expected ml, firth or ridge)");
}

Method parse_method(const std::string& name) {
  if (name == "apparent") return Method::Apparent;
  if (name == "loo") return Method::LooCv;
  if (name == "lpo") return Method::LpoCv;
  if (name == "kfold") return Method::KfoldCv;
  if (name == "enhboot") return Method::EnhancedBootstrap;
  if (name == "632plus") return Method::Dot632Plus;
  if (name == "simpleboot") return Method::SimpleBootstrap;
  throw ConfigError("unknown method: " + name);
}

MetricKind parse_metric(const std::string& name) {
  if (name == "cstat") return MetricKind::CStatistic;
  if (name == "slope") return MetricKind::DiscriminationSlope;
  if (name == "brier") return MetricKind::BrierScore;
  throw ConfigError("unknown metric: " + name);
}

glm::EstimatorSpec spec_for(EstimatorKind kind, Eigen::Index n) {
  switch (kind) {
    case EstimatorKind::Ml: return glm::EstimatorSpec::ml();
    case EstimatorKind::Firth: return glm::EstimatorSpec::firth();
    case EstimatorKind::Ridge:
      return glm::EstimatorSpec::ridge(glm::default_lambda_grid(n));
  }
  throw ConfigError("unknown estimator kind");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int classify_error(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const InvalidDataset*>(&e) ||
      dynamic_cast<const MissingColumn*>(&e) ||
      dynamic_cast<const NonBinaryOutcome*>(&e) ||
      dynamic_cast<const NonNumericCovariate*>(&e) ||
      dynamic_cast<const IoError*>(&e))
    return kExitData;
  return kExitCompute;
}

void render_csv(const std::vector<ResultsRow>& rows, std::ostream& out,
                const std::vector<std::string>& manifest) {
  for (const auto& line : manifest) out << "# " << line << "\n";
  out << kReportHeader << "\n";
  for (const auto& row : rows) {
    out << opt_long(row.scenario_n) << ',' << opt_double(row.event_rate) << ','
        << opt_double(row.effect) << ',' << row.estimator << ',' << row.method
        << ',' << row.metric << ',' << row.statistic << ','
        << opt_double(row.value) << ',' << opt_double(row.mcse) << ','
        << opt_long(row.discarded) << ',' << opt_long(row.attempted) << "\n";
    if (!row.reason.empty()) out << "# reason: " << row.reason << "\n";
  }
}

nlohmann::json row_to_json(const ResultsRow& row) {
  nlohmann::json j;
  auto set_long = [&](const char* key, const std::optional<long>& v) {
    if (v)
      j[key] = *v;
    else
      j[key] = "NA";
  };
  auto set_double = [&](const char* key, const std::optional<double>& v) {
    if (v && std::isfinite(*v))
      j[key] = *v;
    else
      j[key] = "NA";
  };
  set_long("scenario_n", row.scenario_n);
  set_double("event_rate", row.event_rate);
  set_double("effect", row.effect);
  j["estimator"] = row.estimator;
  j["method"] = row.method;
  j["metric"] = row.metric;
  j["statistic"] = row.statistic;
  set_double("value", row.value);
  set_double("mcse", row.mcse);
  set_long("discarded", row.discarded);
  set_long("attempted", row.attempted);
  if (!row.reason.empty()) j["reason"] = row.reason;
  return j;
}

void render_json(const std::vector<ResultsRow>& rows, std::ostream& out,
                 const std::vector<std::string>& manifest) {
  nlohmann::json doc;
  doc["manifest"] = manifest;
  auto& arr = doc["rows"] = nlohmann::json::array();
  for (const auto& row : rows) arr.push_back(row_to_json(row));
  out << doc.dump(2) << "\n";
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path,
                 const std::string& outcome_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line))
    throw InvalidDataset("empty file: " + path.string());
  const std::vector<std::string> header = split(line, ',');

  std::ptrdiff_t outcome_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == outcome_column) {
      outcome_idx = static_cast<std::ptrdiff_t>(j);
      break;
    }
  }
  if (outcome_idx < 0)
    throw MissingColumn("outcome column '" + outcome_column + "' not found");

  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) != outcome_idx)
      names.push_back(header[j]);
  }

  std::vector<double> y_values;
  std::vector<double> x_values;  // row-major
  long row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row_number << " has " << fields.size()
          << " fields, expected " << header.size();
      throw InvalidDataset(msg.str());
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (static_cast<std::ptrdiff_t>(j) == outcome_idx) {
        if (fields[j] == "0")
          y_values.push_back(0.0);
        else if (fields[j] == "1")
          y_values.push_back(1.0);
        else {
          std::ostringstream msg;
          msg << "outcome value '" << fields[j] << "' at row " << row_number
              << " (only literal 0/1 accepted)";
          throw NonBinaryOutcome(msg.str());
        }
      } else {
        double v = 0.0;
        if (!parse_double(fields[j], v)) {
          std::ostringstream msg;
          msg << "non-numeric value '" << fields[j] << "' in column "
              << header[j] << " at row " << row_number;
          throw NonNumericCovariate(msg.str());
        }
        x_values.push_back(v);
      }
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(y_values.size());
  const Eigen::Index p = static_cast<Eigen::Index>(names.size());
  if (p < 1) throw InvalidDataset("no covariate columns");
  Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(y_values.data(), n);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = x_values[i * p + j];
  return Dataset::create(std::move(y), std::move(X), std::move(names));
}

void render_report(const std::vector<ResultsRow>& rows, std::ostream& out,
                   ReportFormat format,
                   const std::vector<std::string>& manifest) {
  if (format == ReportFormat::Csv)
    render_csv(rows, out, manifest);
  else
    render_json(rows, out, manifest);
}

void write_report(const std::vector<ResultsRow>& rows,
                  const std::filesystem::path& path, ReportFormat format,
                  const std::vector<std::string>& manifest) {
  if (rows.empty()) throw IoError("refusing to write an empty report");
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    render_report(rows, out, format, manifest);
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move report into place at " + path.string());
  }
}

namespace {

struct AssessGrid {
  std::vector<EstimatorKind> estimators;
  std::vector<Method> methods;
  std::vector<MetricKind> metrics;
};

AssessGrid parse_assess_grid(const AssessRequest& req) {
  AssessGrid grid;
  for (const auto& name : req.estimators)
    grid.estimators.push_back(parse_estimator(name));
  for (const auto& name : req.methods)
    grid.methods.push_back(parse_method(name));
  for (const auto& name : req.metrics)
    grid.metrics.push_back(parse_metric(name));
  if (grid.estimators.empty() || grid.methods.empty() || grid.metrics.empty())
    throw ConfigError("need at least one estimator, method and metric");
  if (req.folds < 2) throw ConfigError("--folds must be at least 2");
  if (req.repetitions < 1) throw ConfigError("--reps must be at least 1");
  if (req.bootstrap_count < 1) throw ConfigError("--boot must be at least 1");
  return grid;
}

}  // namespace

int cmd_assess(const AssessRequest& req, std::ostream& out,
               std::ostream& err) {
  try {
    const AssessGrid grid = parse_assess_grid(req);
    const Dataset data = load_csv(req.data_path, req.outcome_column);

    long cells = 0;
    for (const Method method : grid.methods)
      for (const MetricKind metric : grid.metrics)
        if (!(method == Method::LpoCv && metric == MetricKind::BrierScore))
          ++cells;
    if (cells == 0)
      throw ConfigError(
          "leave-pair-out does not support the Brier score; nothing to do");

    const double event_rate =
        data.y.sum() / static_cast<double>(data.n());
    std::vector<ResultsRow> rows;
    bool skipped_lpo_brier = false;
    for (const EstimatorKind kind : grid.estimators) {
      const resampling::GlmEstimator estimator(spec_for(kind, data.n()));
      for (const Method method : grid.methods) {
        for (const MetricKind metric : grid.metrics) {
          if (method == Method::LpoCv && metric == MetricKind::BrierScore) {
            skipped_lpo_brier = true;
            continue;
          }
          resampling::ResamplePlan plan;
          plan.method = method;
          plan.folds = req.folds;
          plan.repetitions = req.repetitions;
          plan.bootstrap_count = req.bootstrap_count;
          plan.base_seed = derive_seed(req.seed, "assess", 0);
          const auto result =
              resampling::assess(data, estimator, metric, plan);
          ResultsRow row;
          row.scenario_n = static_cast<long>(data.n());
          row.event_rate = event_rate;
          row.estimator = result.estimator;
          row.method = resampling::method_name(method);
          row.metric = metrics::metric_name(metric);
          row.statistic = "value";
          row.value = result.value;
          row.discarded = result.discarded_subsets;
          row.attempted = result.attempted_subsets;
          rows.push_back(std::move(row));
        }
      }
    }

    std::vector<std::string> manifest = {
        std::string("logitval ") + kVersion + " assess",
        "seed=" + std::to_string(req.seed),
        "data=" + req.data_path.string(),
        "outcome=" + req.outcome_column,
    };
    if (skipped_lpo_brier)
      manifest.push_back(
          "note=lpo x brier cells skipped (unsupported combination)");

    if (req.out_path)
      write_report(rows, *req.out_path, req.format, manifest);
    else
      render_report(rows, out, req.format, manifest);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return classify_error(e);
  }
}

SimConfig parse_sim_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  SimConfig config;
  config.config_hash = fnv1a64(text);

  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const std::vector<std::string> list = split(value, ',');

    auto as_long = [&](const std::string& v) {
      long out = 0;
      if (!parse_long(v, out))
        throw ConfigError("config key " + key + ": bad integer '" + v + "'");
      return out;
    };
    auto as_double = [&](const std::string& v) {
      double out = 0.0;
      if (!parse_double(v, out))
        throw ConfigError("config key " + key + ": bad number '" + v + "'");
      return out;
    };

    if (key == "n") {
      config.n_values.clear();
      for (const auto& v : list) config.n_values.push_back(as_long(v));
    } else if (key == "event_rate") {
      config.event_rates.clear();
      for (const auto& v : list) config.event_rates.push_back(as_double(v));
    } else if (key == "effect") {
      config.effects.clear();
      for (const auto& v : list) config.effects.push_back(as_double(v));
    } else if (key == "replicates") {
      config.replicates = static_cast<int>(as_long(value));
    } else if (key == "validation_size") {
      config.validation_size = as_long(value);
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(as_long(value));
    } else if (key == "estimators") {
      config.grid.estimators.clear();
      for (const auto& v : list)
        config.grid.estimators.push_back(parse_estimator(v));
    } else if (key == "methods") {
      config.grid.methods.clear();
      for (const auto& v : list) config.grid.methods.push_back(parse_method(v));
    } else if (key == "metrics") {
      config.grid.metrics.clear();
      for (const auto& v : list) config.grid.metrics.push_back(parse_metric(v));
    } else if (key == "folds") {
      config.grid.folds = static_cast<int>(as_long(value));
    } else if (key == "reps") {
      config.grid.repetitions = static_cast<int>(as_long(value));
    } else if (key == "boot") {
      config.grid.bootstrap_count = static_cast<int>(as_long(value));
    } else if (key == "count_separation") {
      if (value == "true" || value == "1")
        config.grid.count_separation = true;
      else if (value == "false" || value == "0")
        config.grid.count_separation = false;
      else
        throw ConfigError("config key count_separation: expected true/false");
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  return config;
}

namespace {

struct ScenarioFilter {
  std::optional<long> n;
  std::optional<double> rate;
  std::optional<double> effect;

  bool matches(const simstudy::ScenarioConfig& s) const {
    if (n && *n != static_cast<long>(s.n)) return false;
    if (rate && std::abs(*rate - s.event_rate) > 1e-12) return false;
    if (effect && std::abs(*effect - s.effect_multiplier) > 1e-12) return false;
    return true;
  }
};

ScenarioFilter parse_filter(const std::string& text) {
  ScenarioFilter filter;
  for (const auto& part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw ConfigError("bad --scenario entry: " + part);
    const std::string key = trim(part.substr(0, eq));
    const std::string value = trim(part.substr(eq + 1));
    double v = 0.0;
    if (!parse_double(value, v))
      throw ConfigError("bad --scenario value: " + part);
    if (key == "n")
      filter.n = static_cast<long>(v);
    else if (key == "rate")
      filter.rate = v;
    else if (key == "effect")
      filter.effect = v;
    else
      throw ConfigError("bad --scenario key: " + key);
  }
  return filter;
}

void append_cell_rows(std::vector<ResultsRow>& rows,
                      const simstudy::ScenarioConfig& scenario,
                      std::span<const simstudy::ReplicateRecord> cell,
                      const std::string& estimator, const std::string& method,
                      MetricKind metric) {
  ResultsRow base;
  base.scenario_n = static_cast<long>(scenario.n);
  base.event_rate = scenario.event_rate;
  base.effect = scenario.effect_multiplier;
  base.estimator = estimator;
  base.method = method;
  base.metric = metrics::metric_name(metric);

  long discarded = 0;
  long attempted = 0;
  long missing = 0;
  std::map<std::string, long> reasons;
  std::vector<double> values;
  std::vector<double> ivs;
  for (const auto& rec : cell) {
    if (rec.resampled) {
      values.push_back(*rec.resampled);
      ivs.push_back(rec.iv_value);
      discarded += rec.discarded_subsets;
      attempted += rec.attempted_subsets;
    } else {
      ++missing;
      ++reasons[rec.fail_reason];
    }
  }
  base.discarded = discarded;
  base.attempted = attempted;

  std::string reason_note;
  if (missing > 0) {
    std::ostringstream note;
    note << missing << " replicate(s) missing:";
    for (const auto& [what, count] : reasons)
      note << " [" << count << "x] " << what;
    reason_note = note.str();
  }

  if (values.size() >= 2) {
    const auto summary = simstudy::summarize(values, ivs);
    ResultsRow mean_row = base;
    mean_row.statistic = "mean_diff";
    mean_row.value = summary.mean_diff;
    mean_row.mcse = summary.mcse_mean;
    mean_row.reason = reason_note;
    rows.push_back(mean_row);

    ResultsRow rmsd_row = base;
    rmsd_row.statistic = "rmsd";
    rmsd_row.value = summary.rmsd;
    rmsd_row.mcse = summary.mcse_rmsd;
    rows.push_back(rmsd_row);

    double sum = 0.0;
    for (const double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (const double v : values) sq += (v - mean) * (v - mean);
    const double n_used = static_cast<double>(values.size());
    ResultsRow resampled_row = base;
    resampled_row.statistic = "mean_resampled";
    resampled_row.value = mean;
    resampled_row.mcse = std::sqrt(sq / (n_used * (n_used - 1.0)));
    rows.push_back(resampled_row);

    if (metric == MetricKind::CStatistic) {
      std::vector<double> wins(values.size());
      for (std::size_t i = 0; i < values.size(); ++i)
        wins[i] = metrics::winsorize_cstat(values[i]);
      const auto wsummary = simstudy::summarize(wins, ivs);
      ResultsRow wmean = base;
      wmean.statistic = "mean_diff_wins";
      wmean.value = wsummary.mean_diff;
      wmean.mcse = wsummary.mcse_mean;
      rows.push_back(wmean);
      ResultsRow wrmsd = base;
      wrmsd.statistic = "rmsd_wins";
      wrmsd.value = wsummary.rmsd;
      wrmsd.mcse = wsummary.mcse_rmsd;
      rows.push_back(wrmsd);
    }
  } else {
    ResultsRow failed = base;
    failed.statistic = "mean_diff";
    failed.reason = reason_note.empty() ? "insufficient replicates"
                                        : reason_note;
    rows.push_back(failed);
  }
}

void append_iv_rows(std::vector<ResultsRow>& rows,
                    const simstudy::ScenarioConfig& scenario,
                    std::span<const simstudy::ReplicateRecord> cell,
                    const std::string& estimator, MetricKind metric) {
  std::vector<double> ivs;
  for (const auto& rec : cell)
    if (rec.fail_reason.empty()) ivs.push_back(rec.iv_value);
  if (ivs.size() < 2) return;
  double sum = 0.0;
  for (const double v : ivs) sum += v;
  const double mean = sum / static_cast<double>(ivs.size());
  double sq = 0.0;
  for (const double v : ivs) sq += (v - mean) * (v - mean);
  const double n_used = static_cast<double>(ivs.size());
  const double sd = std::sqrt(sq / (n_used - 1.0));

  ResultsRow base;
  base.scenario_n = static_cast<long>(scenario.n);
  base.event_rate = scenario.event_rate;
  base.effect = scenario.effect_multiplier;
  base.estimator = estimator;
  base.method = "iv";
  base.metric = metrics::metric_name(metric);

  ResultsRow mean_row = base;
  mean_row.statistic = "mean";
  mean_row.value = mean;
  mean_row.mcse = sd / std::sqrt(n_used);
  rows.push_back(mean_row);

  ResultsRow sd_row = base;
  sd_row.statistic = "sd";
  sd_row.value = sd;
  rows.push_back(sd_row);
}

}  // namespace

namespace {

// One (estimator, method, metric) cell of a scenario's records, gathered in
// grid order from the replicate-major record layout.
struct CellView {
  std::string estimator;
  Method method;
  MetricKind metric;
  std::vector<simstudy::ReplicateRecord> records;
};

std::vector<CellView> collect_cells(
    std::span<const simstudy::ReplicateRecord> records, int n_replicates) {
  std::vector<CellView> cells;
  if (records.empty() || n_replicates <= 0) return cells;
  const std::size_t n_cells = records.size() / n_replicates;
  cells.resize(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    cells[c].estimator = records[c].estimator;
    cells[c].method = records[c].method;
    cells[c].metric = records[c].metric;
    cells[c].records.reserve(n_replicates);
    for (int r = 0; r < n_replicates; ++r)
      cells[c].records.push_back(records[r * n_cells + c]);
  }
  return cells;
}

double full_data_separation_rate(
    std::span<const simstudy::ReplicateRecord> records, int n_replicates) {
  if (records.empty() || n_replicates <= 0) return 0.0;
  const std::size_t n_cells = records.size() / n_replicates;
  long separated = 0;
  for (int r = 0; r < n_replicates; ++r)
    if (records[r * n_cells].full_data_separated) ++separated;
  return static_cast<double>(separated) / n_replicates;
}

// Wide pivots mirroring the shapes of the classic summary tables: s2/s3/s4
// give mean and sd (x100) of the IV c-statistic / slope / Brier score per
// scenario and estimator; s6 gives winsorized-c mean differences and RMSDs
// (x100) per method for the n=50, rate 0.25 scenarios.
void write_pivot_table(const std::string& table,
                       const std::vector<simstudy::ScenarioConfig>& scenarios,
                       const std::vector<std::vector<CellView>>& per_scenario,
                       const std::filesystem::path& path,
                       const std::vector<std::string>& manifest) {
  std::ostringstream out;
  for (const auto& line : manifest) out << "# " << line << "\n";

  const std::vector<std::string> estimators = {"ml", "firth", "ridge"};
  if (table == "s2" || table == "s3" || table == "s4") {
    const MetricKind metric = table == "s2"   ? MetricKind::CStatistic
                              : table == "s3" ? MetricKind::DiscriminationSlope
                                              : MetricKind::BrierScore;
    out << "n,event_rate,effect";
    for (const auto& est : estimators) out << ",mean_iv_" << est;
    for (const auto& est : estimators) out << ",sd_iv_" << est;
    out << "\n";
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      out << scenarios[s].n << ',' << fmt_double(scenarios[s].event_rate)
          << ',' << fmt_double(scenarios[s].effect_multiplier);
      std::ostringstream sds;
      for (const auto& est : estimators) {
        double mean = std::numeric_limits<double>::quiet_NaN();
        double sd = std::numeric_limits<double>::quiet_NaN();
        for (const auto& cell : per_scenario[s]) {
          if (cell.estimator != est || cell.metric != metric) continue;
          std::vector<double> ivs;
          for (const auto& rec : cell.records)
            if (rec.fail_reason.empty()) ivs.push_back(rec.iv_value);
          if (ivs.size() >= 2) {
            double sum = 0.0;
            for (const double v : ivs) sum += v;
            mean = sum / static_cast<double>(ivs.size());
            double sq = 0.0;
            for (const double v : ivs) sq += (v - mean) * (v - mean);
            sd = std::sqrt(sq / (static_cast<double>(ivs.size()) - 1.0));
          }
          break;
        }
        out << ',' << fmt_double(100.0 * mean);
        sds << ',' << fmt_double(100.0 * sd);
      }
      out << sds.str() << "\n";
    }
  } else if (table == "s6") {
    out << "n,event_rate,effect,estimator,method,mean_diff_wins_x100,"
           "rmsd_wins_x100\n";
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      if (scenarios[s].n != 50 ||
          std::abs(scenarios[s].event_rate - 0.25) > 1e-12)
        continue;
      for (const auto& cell : per_scenario[s]) {
        if (cell.metric != MetricKind::CStatistic) continue;
        try {
          const auto w = simstudy::winsorized_summary(cell.records);
          out << scenarios[s].n << ','
              << fmt_double(scenarios[s].event_rate) << ','
              << fmt_double(scenarios[s].effect_multiplier) << ','
              << cell.estimator << ',' << resampling::method_name(cell.method)
              << ',' << fmt_double(100.0 * w.mean_diff) << ','
              << fmt_double(100.0 * w.rmsd) << "\n";
        } catch (const InsufficientReplicates&) {
          // cell entirely missing; skip
        }
      }
    }
  } else {
    throw ConfigError("unknown pivot table: " + table +
                      " (expected s2, s3, s4 or s6)");
  }

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string());
    f << out.str();
    f.flush();
    if (!f) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move pivot table into place");
}

}  // namespace

int cmd_simulate(const SimRequest& req, std::ostream& err) {
  try {
    SimConfig config = parse_sim_config(req.config_path);
    if (req.replicate_override) {
      if (*req.replicate_override < 2)
        throw ConfigError("--replicates must be at least 2");
      config.replicates = *req.replicate_override;
    }

    ScenarioFilter filter;
    if (req.scenario_filter) filter = parse_filter(*req.scenario_filter);

    std::vector<simstudy::ScenarioConfig> scenarios;
    for (const long n : config.n_values) {
      for (const double rate : config.event_rates) {
        for (const double effect : config.effects) {
          simstudy::ScenarioConfig s;
          s.n = n;
          s.event_rate = rate;
          s.effect_multiplier = effect;
          s.n_replicates = config.replicates;
          s.validation_size = config.validation_size;
          s.base_seed = simstudy::scenario_seed(config.seed, n, rate, effect);
          if (filter.matches(s)) scenarios.push_back(s);
        }
      }
    }
    if (scenarios.empty())
      throw ConfigError("scenario filter matched no scenarios");
    for (const auto& s : scenarios) s.validate();  // reject before compute

    const unsigned workers =
        req.workers == 0 ? default_workers() : req.workers;

    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config.config_hash));
    std::vector<std::string> manifest = {
        std::string("logitval ") + kVersion + " simulate",
        "seed=" + std::to_string(config.seed),
        std::string("config_hash=") + hash_hex,
        "scenarios=" + std::to_string(scenarios.size()),
        "replicates=" + std::to_string(config.replicates),
        "validation_size=" + std::to_string(config.validation_size),
    };

    std::optional<std::filesystem::path> replicate_tmp;
    std::ofstream replicate_out;
    if (req.per_replicate) {
      replicate_tmp = req.output_path;
      *replicate_tmp += ".replicates.csv.tmp";
      replicate_out.open(*replicate_tmp, std::ios::binary | std::ios::trunc);
      if (!replicate_out)
        throw IoError("cannot open " + replicate_tmp->string());
      for (const auto& line : manifest) replicate_out << "# " << line << "\n";
      replicate_out
          << "replicate,scenario_n,event_rate,effect,estimator,method,metric,"
             "resampled,iv,discarded,attempted,separated_subsets,"
             "full_data_separated,reason\n";
    }

    std::vector<ResultsRow> rows;
    std::vector<std::vector<CellView>> per_scenario_cells;
    for (const auto& scenario : scenarios) {
      const auto records =
          simstudy::run_scenario(scenario, config.grid, workers);

      if (req.per_replicate) {
        for (const auto& rec : records) {
          replicate_out << rec.replicate << ',' << scenario.n << ','
                        << fmt_double(scenario.event_rate) << ','
                        << fmt_double(scenario.effect_multiplier) << ','
                        << rec.estimator << ','
                        << resampling::method_name(rec.method) << ','
                        << metrics::metric_name(rec.metric) << ','
                        << (rec.resampled ? fmt_double(*rec.resampled) : "NA")
                        << ','
                        << (rec.fail_reason.empty() ? fmt_double(rec.iv_value)
                                                    : "NA")
                        << ',' << rec.discarded_subsets << ','
                        << rec.attempted_subsets << ','
                        << rec.separated_subsets << ','
                        << (rec.full_data_separated ? 1 : 0) << ','
                        << rec.fail_reason << "\n";
        }
      }

      std::vector<CellView> cells =
          collect_cells(records, scenario.n_replicates);

      for (const auto& cell : cells) {
        append_cell_rows(rows, scenario, cell.records, cell.estimator,
                         resampling::method_name(cell.method), cell.metric);
      }
      // IV summaries once per estimator x metric (method-independent).
      std::vector<std::pair<std::string, MetricKind>> iv_done;
      for (const auto& cell : cells) {
        const auto tag = std::make_pair(cell.estimator, cell.metric);
        if (std::find(iv_done.begin(), iv_done.end(), tag) != iv_done.end())
          continue;
        iv_done.push_back(tag);
        append_iv_rows(rows, scenario, cell.records, cell.estimator,
                       cell.metric);
      }

      ResultsRow sep_row;
      sep_row.scenario_n = static_cast<long>(scenario.n);
      sep_row.event_rate = scenario.event_rate;
      sep_row.effect = scenario.effect_multiplier;
      sep_row.estimator = "all";
      sep_row.method = "full_data";
      sep_row.metric = "NA";
      sep_row.statistic = "separation_rate";
      sep_row.value = full_data_separation_rate(records, scenario.n_replicates);
      sep_row.attempted = scenario.n_replicates;
      rows.push_back(sep_row);

      if (req.table) per_scenario_cells.push_back(std::move(cells));
    }

    if (req.per_replicate) {
      replicate_out.flush();
      if (!replicate_out)
        throw IoError("failed writing " + replicate_tmp->string());
      replicate_out.close();
      std::filesystem::path final_path = req.output_path;
      final_path += ".replicates.csv";
      std::error_code ec;
      std::filesystem::rename(*replicate_tmp, final_path, ec);
      if (ec) throw IoError("cannot move per-replicate file into place");
    }

    if (req.table) {
      write_pivot_table(*req.table, scenarios, per_scenario_cells,
                        req.output_path, manifest);
      return kExitOk;
    }

    write_report(rows, req.output_path, ReportFormat::Csv, manifest);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return classify_error(e);
  }
}

}  // namespace logitval::io
