// Experiment driver: runs Monte Carlo BDDC solves and writes CSV or a table.

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "sbddc/errors.hpp"
#include "sbddc/harness.hpp"

namespace {

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string v;
  while (std::getline(ss, v, ',')) out.push_back(v);
  return out;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic BDDC experiments"};
  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file");

  // Every flag is kept as text and applied on top of the config file.
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"ns", "subdomains per side"},
      {"n", "elements per subdomain side (H/h)"},
      {"sigma2", "variance of the log coefficient"},
      {"ell", "correlation length"},
      {"mkl", "global KL terms"},
      {"nkl", "local KL terms"},
      {"degree", "PC degree d"},
      {"quad", "Gauss-Hermite points per dimension for sc (default d+1)"},
      {"method", "exact, mpc, sg or sc"},
      {"operator", "exact or surrogate"},
      {"samples", "number of samples"},
      {"seed", "base seed"},
      {"tol", "relative residual tolerance"},
      {"maxit", "iteration cap"},
      {"out", "output file (default stdout)"},
      {"workers", "worker threads"},
      {"format", "csv or table"},
      {"residual-log", "JSON-lines file for residual histories"},
      {"spd-fallback", "use the mean preconditioner when the coarse matrix is indefinite (0/1)"},
      {"cache-dir", "directory for KL and offline caches"},
  };
  std::map<std::string, std::string> values;
  for (const auto& [name, help] : flags) app.add_option("--" + name, values[name], help);
  std::string sweep_axis, sweep_values;
  app.add_option("--sweep-axis", sweep_axis, "parameter to sweep");
  app.add_option("--sweep-values", sweep_values, "comma-separated values for the sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    sbddc::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = sbddc::read_config_file(config_path);
    for (const auto& [name, help] : flags) {
      if (app.count("--" + name) == 0) continue;
      std::string key = name;
      for (auto& ch : key)
        if (ch == '-') ch = '_';
      sbddc::apply_config_value(cfg, key, values[name]);
    }
    cfg.validate();

    if (sweep_axis.empty() != sweep_values.empty())
      throw sbddc::ConfigError("--sweep-axis and --sweep-values must be given together");
    if (sweep_axis.empty()) {
      sbddc::emit_report(sbddc::run_experiment(cfg));
      return 0;
    }
    const auto vals = split_values(sweep_values);
    const auto reports = sbddc::sweep(cfg, sweep_axis, vals);
    for (std::size_t k = 0; k < reports.size(); ++k) {
      sbddc::RunReport r = reports[k];
      const std::string suffix = "-" + sweep_axis + "=" + vals[k];
      if (!r.cfg.out.empty()) r.cfg.out = with_suffix(r.cfg.out, suffix);
      if (!r.cfg.residual_log.empty()) r.cfg.residual_log = with_suffix(r.cfg.residual_log, suffix);
      if (r.cfg.out.empty()) std::cout << "# " << sweep_axis << "=" << vals[k] << '\n';
      sbddc::emit_report(r);
    }
    return 0;
  } catch (const sbddc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const sbddc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
