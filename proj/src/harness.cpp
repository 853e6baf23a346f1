#include "sbddc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "sbddc/bddc.hpp"
#include "sbddc/cache.hpp"
#include "sbddc/errors.hpp"
#include "sbddc/krylov.hpp"
#include "sbddc/stoch_online.hpp"

namespace sbddc {

const char* operator_name(OperatorMode m) { return m == OperatorMode::Exact ? "exact" : "surrogate"; }

OperatorMode parse_operator(const std::string& s) {
  if (s == "exact") return OperatorMode::Exact;
  if (s == "surrogate") return OperatorMode::Surrogate;
  throw ConfigError("unknown operator mode '" + s + "' (expected exact or surrogate)");
}

namespace {

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size() || !std::isfinite(out)) throw ConfigError("invalid number for " + key + ": '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "ns") c.ns = parse_integer<int>(key, value);
  else if (key == "n") c.n = parse_integer<int>(key, value);
  else if (key == "sigma2") c.sigma2 = parse_real(key, value);
  else if (key == "ell") c.ell = parse_real(key, value);
  else if (key == "mkl") c.mkl = parse_integer<int>(key, value);
  else if (key == "nkl") c.nkl = parse_integer<int>(key, value);
  else if (key == "degree" || key == "d") c.degree = parse_integer<int>(key, value);
  else if (key == "quad") c.quad = parse_integer<int>(key, value);
  else if (key == "method") c.method = parse_method(value);
  else if (key == "operator") c.operator_mode = parse_operator(value);
  else if (key == "samples") c.samples = parse_integer<int>(key, value);
  else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "tol") c.tol = parse_real(key, value);
  else if (key == "maxit") c.maxit = parse_integer<int>(key, value);
  else if (key == "out") c.out = value;
  else if (key == "workers") c.workers = parse_integer<int>(key, value);
  else if (key == "format") c.format = value;
  else if (key == "residual_log") c.residual_log = value;
  else if (key == "spd_fallback") c.spd_fallback = parse_bool(key, value);
  else if (key == "cache_dir") c.cache_dir = value;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

ExperimentConfig read_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(ns >= 1 && n >= 1, "ns and n must be at least 1");
  need(sigma2 >= 0.0, "sigma2 must be nonnegative");
  need(ell > 0.0, "ell must be positive");
  need(mkl >= 1 && mkl <= 2 * ns * n * ns * n, "mkl must be between 1 and the number of cells");
  need(samples >= 0, "samples must be nonnegative");
  need(tol > 0.0 && tol < 1.0, "tol must lie in (0, 1)");
  need(maxit >= 1, "maxit must be at least 1");
  need(workers >= 1, "workers must be at least 1");
  need(format == "csv" || format == "table", "format must be csv or table");
  if (method == Method::Sg || method == Method::Sc) {
    need(sigma2 > 0.0, "the stochastic methods need sigma2 > 0");
    need(nkl >= 1 && nkl <= 2 * n * n, "nkl must be between 1 and the number of subdomain cells");
    need(degree >= 0, "degree must be nonnegative");
    need(quad >= 0, "quad must be nonnegative");
  }
  need(operator_mode == OperatorMode::Exact || method == Method::Sg || method == Method::Sc,
       "the surrogate operator requires method sg or sc");
}

Aggregate aggregate(const std::vector<SampleRecord>& samples) {
  Aggregate a;
  double l2 = 0.0;
  int l2n = 0;
  for (const auto& s : samples) {
    a.converged += s.converged;
    a.spd_ok += s.spd_ok;
    if (!s.included()) {
      ++a.excluded;
      continue;
    }
    ++a.included;
    a.mean_iterations += s.iterations;
    a.mean_cond += s.cond_est;
    a.mean_wall_ms += s.wall_ms;
    if (s.l2_error >= 0.0) {
      l2 += s.l2_error;
      ++l2n;
    }
  }
  if (a.included > 0) {
    a.mean_iterations /= a.included;
    a.mean_cond /= a.included;
    a.mean_wall_ms /= a.included;
  }
  if (l2n > 0) a.mean_l2_error = l2 / l2n;
  return a;
}

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Shared {
  const ExperimentConfig& cfg;
  Mesh mesh;
  DofPartition dofs;
  Eigen::VectorXd load;
  KLBasis basis;
  std::optional<OfflineStore> store;
  std::optional<BddcPreconditioner> mean;
};

struct Timing {
  double online = 0.0;
  double solve = 0.0;
  double reference = 0.0;
};

void record_pcg(SampleRecord& rec, const PcgReport& rep) {
  rec.iterations = rep.iterations;
  rec.converged = rep.converged;
  rec.cond_est = rep.cond;
  rec.lambda_min = rep.lambda_min;
  rec.lambda_max = rep.lambda_max;
  rec.residuals = rep.residual_history;
}

SampleRecord run_sample(const Shared& sh, int k, Timing& tm) {
  const auto& cfg = sh.cfg;
  const auto t_start = Clock::now();
  SampleRecord rec;
  rec.sample_id = k;
  rec.seed = sample_seed(cfg.seed, static_cast<std::uint64_t>(k));
  rec.method = method_name(cfg.method);
  rec.operator_mode = operator_name(cfg.operator_mode);

  auto t = Clock::now();
  const Eigen::VectorXd xi = sample_xi(rec.seed, cfg.mkl).xi;
  const Eigen::VectorXd field = evaluate_field(sh.basis, xi);
  const Eigen::VectorXd kappa = field.array().exp();
  const auto blocks = assemble_all_blocks(sh.mesh, sh.dofs, kappa);
  const InteriorSolver interior(sh.dofs, blocks);
  const SchurOperator exact_op = interior.schur();
  const Eigen::VectorXd g = interior.reduce_rhs(sh.load);

  std::optional<BddcPreconditioner> own;
  std::optional<OnlineInstance> inst;
  const BddcPreconditioner* M = nullptr;
  switch (cfg.method) {
    case Method::Exact:
      own.emplace(BddcPreconditioner::from_blocks(sh.dofs, blocks, rho_scaling(sh.mesh, sh.dofs, kappa)));
      M = &*own;
      break;
    case Method::Mpc:
      M = &*sh.mean;
      break;
    case Method::Sg:
    case Method::Sc:
      inst.emplace(instantiate(*sh.store, sh.mesh, sh.dofs, field, rec.seed));
      rec.spd_ok = inst->spd_ok;
      if (inst->spd_ok) {
        M = &*inst->preconditioner;
      } else if (cfg.spd_fallback) {
        M = &*sh.mean;
        rec.fallback = true;
      }
      break;
  }
  std::optional<SurrogateSchur> sur;
  if (cfg.operator_mode == OperatorMode::Surrogate) sur.emplace(*sh.store, sh.dofs, *inst, sh.load);
  tm.online += seconds_since(t);

  if (M == nullptr) {
    rec.error = "coarse matrix not positive definite";
    rec.wall_ms = 1e3 * seconds_since(t_start);
    return rec;
  }

  t = Clock::now();
  const LinearMap prec = [M](const Eigen::VectorXd& r) { return M->apply(r); };
  const PcgOptions opts{cfg.tol, cfg.maxit};
  Eigen::VectorXd u_gamma;
  try {
    PcgReport rep;
    if (sur) {
      rep = pcg([&](const Eigen::VectorXd& u) { return sur->apply(u); }, prec, sur->rhs(), opts);
    } else {
      rep = pcg([&](const Eigen::VectorXd& u) { return exact_op.apply(u); }, prec, g, opts);
    }
    record_pcg(rec, rep);
    u_gamma = rep.solution;
  } catch (const NumericalError& e) {
    rec.error = e.what();
  }
  tm.solve += seconds_since(t);

  if (sur && rec.error.empty()) {
    t = Clock::now();
    const BddcPreconditioner ref_m =
        BddcPreconditioner::from_blocks(sh.dofs, blocks, rho_scaling(sh.mesh, sh.dofs, kappa));
    const PcgReport ref = pcg([&](const Eigen::VectorXd& u) { return exact_op.apply(u); },
                              [&](const Eigen::VectorXd& r) { return ref_m.apply(r); }, g, {1e-12, 1000});
    const Eigen::VectorXd u_ref = interior.recover(sh.load, ref.solution);
    const Eigen::VectorXd u = sur->recover(u_gamma);
    rec.l2_error = l2_norm(sh.mesh, sh.dofs, u - u_ref) / l2_norm(sh.mesh, sh.dofs, u_ref);
    tm.reference += seconds_since(t);
  }
  rec.wall_ms = 1e3 * seconds_since(t_start);
  return rec;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport rep;
  rep.cfg = cfg;

  auto t = Clock::now();
  const CovarianceSpec spec{cfg.sigma2, cfg.ell};
  Mesh mesh(cfg.ns, cfg.n);
  DofPartition dofs(mesh);
  Shared sh{cfg, std::move(mesh), std::move(dofs), {}, {}, {}, {}};
  sh.load = load_vector(sh.mesh, sh.dofs);
  sh.basis = cached_global_kl(cfg.cache_dir, sh.mesh, spec, cfg.mkl);
  rep.kl_energy = sh.basis.energy_fraction(cfg.mkl);
  if (cfg.method == Method::Mpc || cfg.spd_fallback) sh.mean.emplace(mean_preconditioner(sh.mesh, sh.dofs, spec));
  if (cfg.method == Method::Sg || cfg.method == Method::Sc) {
    OfflineOptions o;
    o.method = cfg.method;
    o.nkl = cfg.nkl;
    o.degree = cfg.degree;
    o.quad = cfg.quad;
    o.surrogate = cfg.operator_mode == OperatorMode::Surrogate;
    sh.store.emplace(cached_offline(cfg.cache_dir, sh.mesh, sh.dofs, spec, o, sh.load));
  }
  rep.offline_s = seconds_since(t);

  rep.samples.resize(cfg.samples);
  const int nthreads = std::max(1, std::min(cfg.workers, cfg.samples));
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    Timing tm;
    while (true) {
      const int k = next.fetch_add(1);
      if (k >= cfg.samples) break;
      try {
        rep.samples[k] = run_sample(sh, k, tm);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = cfg.samples;
      }
    }
    std::lock_guard lock(mu);
    rep.online_s += tm.online;
    rep.solve_s += tm.solve;
    rep.reference_s += tm.reference;
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  rep.agg = aggregate(rep.samples);
  return rep;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v, const char* fmt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

const char* kHeader = "sample_id,seed,method,operator_mode,iterations,converged,cond_est,spd_ok,l2_error,wall_ms";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const RunReport& r) {
  os << kHeader << '\n';
  for (const auto& s : r.samples) {
    os << s.sample_id << ',' << s.seed << ',' << s.method << ',' << s.operator_mode << ',' << s.iterations << ','
       << (s.converged ? 1 : 0) << ',' << num(s.cond_est) << ',' << (s.spd_ok ? 1 : 0) << ','
       << (s.l2_error >= 0.0 ? num(s.l2_error) : "") << ',' << num(s.wall_ms) << '\n';
  }
  if (r.samples.empty()) return;
  const auto& a = r.agg;
  os << "aggregate," << a.included << ',' << method_name(r.cfg.method) << ',' << operator_name(r.cfg.operator_mode)
     << ',' << num(a.mean_iterations) << ',' << a.converged << ',' << num(a.mean_cond) << ',' << a.spd_ok << ','
     << (a.mean_l2_error >= 0.0 ? num(a.mean_l2_error) : "") << ',' << num(a.mean_wall_ms) << '\n';
}

ParsedCsv parse_csv(std::istream& is) {
  ParsedCsv out;
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw ConfigError("parse_csv: unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 10) throw ConfigError("parse_csv: expected 10 columns");
    auto real = [](const std::string& v) { return v.empty() ? -1.0 : std::stod(v); };
    if (c[0] == "aggregate") {
      Aggregate a;
      a.included = std::stoi(c[1]);
      a.mean_iterations = std::stod(c[4]);
      a.converged = std::stoi(c[5]);
      a.mean_cond = std::stod(c[6]);
      a.spd_ok = std::stoi(c[7]);
      a.mean_l2_error = real(c[8]);
      a.mean_wall_ms = std::stod(c[9]);
      a.excluded = static_cast<int>(out.rows.size()) - a.included;
      out.aggregate = a;
      continue;
    }
    SampleRecord s;
    s.sample_id = std::stoi(c[0]);
    s.seed = std::stoull(c[1]);
    s.method = c[2];
    s.operator_mode = c[3];
    s.iterations = std::stoi(c[4]);
    s.converged = c[5] == "1";
    s.cond_est = std::stod(c[6]);
    s.spd_ok = c[7] == "1";
    s.l2_error = real(c[8]);
    s.wall_ms = std::stod(c[9]);
    out.rows.push_back(std::move(s));
  }
  return out;
}

void write_table(std::ostream& os, const RunReport& r) {
  const auto& c = r.cfg;
  const auto& a = r.agg;
  os << "ns=" << c.ns << " H/h=" << c.n << " sigma2=" << c.sigma2 << " l=" << c.ell << " M_KL=" << c.mkl;
  if (c.method == Method::Sg || c.method == Method::Sc) os << " N_KL=" << c.nkl << " d=" << c.degree;
  if (c.method == Method::Sc) os << " q=" << (c.quad > 0 ? c.quad : c.degree + 1);
  os << " samples=" << c.samples << " seed=" << c.seed << '\n';
  os << "global KL energy fraction: " << short_num(100.0 * r.kl_energy, "%.2f") << "%\n";
  os << "method    operator   iter     cond     l2_error   included  excluded\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-9s %-10s %-8.2f %-8.2f %-10s %-9d %d\n", method_name(c.method),
                operator_name(c.operator_mode), a.mean_iterations, a.mean_cond,
                a.mean_l2_error >= 0.0 ? short_num(a.mean_l2_error, "%.3e").c_str() : "-", a.included, a.excluded);
  os << line;
  os << "time [s]: offline " << short_num(r.offline_s, "%.3f") << ", online " << short_num(r.online_s, "%.3f")
     << ", solve " << short_num(r.solve_s, "%.3f");
  if (r.reference_s > 0.0) os << ", reference " << short_num(r.reference_s, "%.3f");
  os << '\n';
}

void write_residual_log(std::ostream& os, const RunReport& r) {
  for (const auto& s : r.samples) {
    nlohmann::json j;
    j["sample_id"] = s.sample_id;
    j["seed"] = s.seed;
    j["method"] = s.method;
    j["operator_mode"] = s.operator_mode;
    j["converged"] = s.converged;
    j["residuals"] = s.residuals;
    if (!s.error.empty()) j["error"] = s.error;
    os << j.dump() << '\n';
  }
}

void emit_report(const RunReport& r) {
  auto write = [&](std::ostream& os) {
    if (r.cfg.format == "table")
      write_table(os, r);
    else
      write_csv(os, r);
  };
  if (r.cfg.out.empty()) {
    write(std::cout);
  } else {
    std::ofstream f(r.cfg.out);
    if (!f) throw std::runtime_error("cannot write " + r.cfg.out);
    write(f);
  }
  if (!r.cfg.residual_log.empty()) {
    std::ofstream f(r.cfg.residual_log);
    if (!f) throw std::runtime_error("cannot write " + r.cfg.residual_log);
    write_residual_log(f, r);
  }
}

std::vector<RunReport> sweep(const ExperimentConfig& base, const std::string& axis,
                             const std::vector<std::string>& values) {
  static const char* allowed[] = {"ns", "n", "sigma2", "ell", "mkl", "nkl", "degree", "d", "quad", "method",
                                  "operator", "tol", "maxit"};
  if (std::find(std::begin(allowed), std::end(allowed), axis) == std::end(allowed))
    throw ConfigError("cannot sweep over '" + axis + "'");
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ExperimentConfig> cfgs;
  for (const auto& v : values) {
    ExperimentConfig c = base;
    apply_config_value(c, axis, v);
    c.validate();
    cfgs.push_back(c);
  }
  std::vector<RunReport> out;
  for (const auto& c : cfgs) out.push_back(run_experiment(c));
  return out;
}

}  // namespace sbddc
