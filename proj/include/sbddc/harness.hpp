#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sbddc/stoch_offline.hpp"

namespace sbddc {

enum class OperatorMode { Exact, Surrogate };
const char* operator_name(OperatorMode m);
OperatorMode parse_operator(const std::string& s);

struct ExperimentConfig {
  int ns = 8;
  int n = 8;
  double sigma2 = 0.5;
  double ell = 1.0;
  int mkl = 4;
  int nkl = 1;
  int degree = 4;
  int quad = 0;  // 0 means degree + 1
  Method method = Method::Exact;
  OperatorMode operator_mode = OperatorMode::Exact;
  int samples = 100;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int maxit = 100;
  std::string out;  // empty: standard output
  int workers = 1;
  std::string format = "csv";  // csv | table
  std::string residual_log;    // JSON lines, optional
  bool spd_fallback = false;   // use the mean preconditioner for indefinite samples
  std::string cache_dir;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Sets one field from its key (the CLI flag name without dashes).
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Reads key=value lines; '#' starts a comment.
ExperimentConfig read_config_file(const std::string& path, ExperimentConfig base = {});

struct SampleRecord {
  int sample_id = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string operator_mode;
  int iterations = 0;
  bool converged = false;
  double cond_est = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool spd_ok = true;
  bool fallback = false;
  double l2_error = -1.0;  // negative when no reference solve was made
  double wall_ms = 0.0;
  std::string error;
  std::vector<double> residuals;

  bool included() const { return converged && spd_ok && error.empty(); }
};

struct Aggregate {
  int included = 0;
  int excluded = 0;
  int converged = 0;
  int spd_ok = 0;
  double mean_iterations = 0.0;
  double mean_cond = 0.0;
  double mean_l2_error = -1.0;
  double mean_wall_ms = 0.0;
};

/// Means over the included samples (converged and SPD).
Aggregate aggregate(const std::vector<SampleRecord>& samples);

struct RunReport {
  ExperimentConfig cfg;
  std::vector<SampleRecord> samples;  // sorted by sample id
  Aggregate agg;
  double kl_energy = 0.0;  // global KL energy fraction of the mkl modes
  double offline_s = 0.0;
  double online_s = 0.0;
  double solve_s = 0.0;
  double reference_s = 0.0;
};

RunReport run_experiment(const ExperimentConfig& cfg);

/// CSV with header sample_id,seed,method,operator_mode,iterations,converged,
/// cond_est,spd_ok,l2_error,wall_ms, one row per sample and, when there are
/// samples, a final row whose sample_id is "aggregate".
void write_csv(std::ostream& os, const RunReport& r);
void write_table(std::ostream& os, const RunReport& r);
/// One JSON object per sample with its relative residual history.
void write_residual_log(std::ostream& os, const RunReport& r);
/// Writes the report to cfg.out (or stdout) in cfg.format and the residual
/// log when configured.
void emit_report(const RunReport& r);

struct ParsedCsv {
  std::vector<SampleRecord> rows;
  std::optional<Aggregate> aggregate;
};
ParsedCsv parse_csv(std::istream& is);

/// Runs base with axis set to each value. All runs share the seed, so the
/// samples are paired across values.
std::vector<RunReport> sweep(const ExperimentConfig& base, const std::string& axis,
                             const std::vector<std::string>& values);

}  // namespace sbddc
