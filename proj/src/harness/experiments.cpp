#include "dimest/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "dimest/bandwidth.hpp"
#include "dimest/bounds.hpp"
#include "dimest/cloud_io.hpp"
#include "dimest/errors.hpp"
#include "dimest/estimators.hpp"
#include "dimest/harness/parallel.hpp"
#include "dimest/kernel.hpp"

namespace dimest::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) { return format_double(v); }
std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

struct MeanStd {
  double mean = kNaN;
  double std = kNaN;
  std::size_t count = 0;
};

// Sample standard deviation; NaN entries are skipped.
MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  double sum = 0.0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    sum += x;
    ++out.count;
  }
  if (out.count == 0) return out;
  out.mean = sum / static_cast<double>(out.count);
  if (out.count < 2) {
    out.std = 0.0;
    return out;
  }
  double ss = 0.0;
  for (double x : v) {
    if (!std::isnan(x)) ss += (x - out.mean) * (x - out.mean);
  }
  out.std = std::sqrt(ss / static_cast<double>(out.count - 1));
  return out;
}

double binomial_stderr(double p, std::size_t trials) {
  const double q = std::clamp(p, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

unsigned workers(const ExperimentConfig& cfg) { return cfg.threads > 0 ? cfg.threads : worker_count(); }

// Automatic bandwidth: 0.95 times the smallest t0 over the eps grid.
struct BandwidthChoice {
  double t;
  std::vector<double> t0_per_eps;  // NaN where eta(eps, c) is inadmissible
};

BandwidthChoice choose_bandwidth(const ExperimentConfig& cfg, const RegularityParams& reg,
                                 std::vector<std::string>& warnings, const std::string& label) {
  BandwidthChoice out;
  double t0_min = kInf;
  for (double eps : cfg.eps_list) {
    const double eta = eta_from(eps, cfg.c);
    if (!(eta < 0.5)) {
      warnings.push_back(label + ": eps = " + num(eps) + " gives eta = " + num(eta) +
                         " outside (0, 1/2); its rows are marked invalid");
      out.t0_per_eps.push_back(kNaN);
      continue;
    }
    const double t0 = compute_t0(reg, cfg.gamma, eta).t0;
    out.t0_per_eps.push_back(t0);
    t0_min = std::min(t0_min, t0);
  }
  if (!cfg.t) {
    if (std::isinf(t0_min)) throw DomainError(label + ": no eps value admits a bandwidth threshold");
    out.t = 0.95 * t0_min;
    return out;
  }
  out.t = *cfg.t;
  if (out.t > t0_min) {
    if (!cfg.allow_above_t0) throw ThresholdError(out.t, t0_min);
    warnings.push_back(label + ": t = " + num(out.t) + " exceeds t0 = " + num(t0_min) +
                       "; bounds are reported with status above_t0");
  }
  return out;
}

// Solves upper + lower tail = target for eps by bisection; +inf if no eps up to 4d reaches it.
double eps_at_bound(int d, double p_x, double t, double n, double c, double target) {
  auto bound = [&](double eps) {
    const auto tails = concentration_tails(d, p_x, t, n, eps, c);
    return tails.upper_tail + tails.lower_tail;
  };
  double lo = 0.0;
  double hi = 4.0 * d;
  if (bound(hi) > target) return kInf;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bound(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

json defaults_json(const ExperimentConfig& cfg) {
  return {{"gamma", cfg.gamma},
          {"c", cfg.c},
          {"delta", cfg.delta},
          {"t_rule", cfg.t ? "fixed" : "0.95 * min over eps of t0(gamma, eta(eps, c))"},
          {"k_rule", "ceil(2 log n) clipped to [4, n - 1]"},
          {"grid_rule", "log-spaced, " + std::to_string(cfg.grid_size) +
                            " points on [q_0.01 / 4, 4 q_0.99] of squared distances"},
          {"tie_rule", "ties in the selection score go to the smaller bandwidth"},
          {"query_point", "manifold reference point, noise-free"}};
}

ExperimentResult make_result(const ExperimentConfig& cfg) {
  ExperimentResult r;
  r.experiment = cfg.experiment;
  const json config = cfg.to_json();
  r.metadata = {{"schema_version", kCsvSchemaVersion},
                {"library_version", std::string(kLibraryVersion)},
                {"experiment", std::string(to_string(cfg.experiment))},
                {"config", config},
                {"config_hash", fnv1a_hex(config.dump())},
                {"seed", cfg.seed},
                {"defaults", defaults_json(cfg)}};
  return r;
}

void finish(ExperimentResult& r) { r.metadata["warnings"] = r.warnings; }

std::vector<double> std_doubles(const json& j, const char* key) {
  std::vector<double> out;
  if (!j.is_array()) throw DomainError(std::string("config field \"") + key + "\" must be an array");
  for (const auto& v : j) out.push_back(number_from(v));
  return out;
}

std::string status_of(const std::exception& e) {
  if (dynamic_cast<const DegenerateGeometryError*>(&e)) return "degenerate";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  return "error";
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::concentration:
      return "concentration";
    case ExperimentKind::anticoncentration:
      return "anticoncentration";
    case ExperimentKind::bandwidth_compare:
      return "bandwidth_compare";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  if (name == "concentration") return ExperimentKind::concentration;
  if (name == "anticoncentration") return ExperimentKind::anticoncentration;
  if (name == "bandwidth_compare") return ExperimentKind::bandwidth_compare;
  throw DomainError("unknown experiment '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw DomainError("trial count must be >= 1");
  if (manifolds.empty()) throw DomainError("manifold list is empty");
  if (n_list.empty()) throw DomainError("n list is empty");
  if (eps_list.empty()) throw DomainError("eps list is empty");
  if (sigma_list.empty()) throw DomainError("sigma list is empty");
  for (auto n : n_list) {
    if (n < 1) throw DomainError("sample sizes must be >= 1");
  }
  for (double e : eps_list) {
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("eps values must be positive");
  }
  for (double s : sigma_list) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("sigma values must be nonnegative");
  }
  if (!(gamma > 0.25 && gamma < 0.5)) throw DomainError("gamma must lie strictly inside (1/4, 1/2)");
  if (!(c > 0.0 && c < 1.0)) throw DomainError("c must lie in (0, 1)");
  if (t && (!(*t > 0.0) || !std::isfinite(*t))) throw DomainError("t must be positive or \"auto\"");
  if (!(target_prob > 0.0 && target_prob < 1.0)) throw DomainError("target_prob must lie in (0, 1)");
  if (grid_size < 8) throw DomainError("grid_size must be >= 8");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(tie_tolerance >= 0.0)) throw DomainError("tie_tolerance must be nonnegative");
  for (const auto& m : manifolds) m.validate();
  if (experiment == ExperimentKind::anticoncentration) {
    if (theory_n.empty()) throw DomainError("theory_n list is empty");
    if (eps_star_n.empty()) throw DomainError("eps_star_n list is empty");
    for (double n : theory_n) {
      if (!(n > 0.0)) throw DomainError("theory_n values must be positive");
    }
    for (double n : eps_star_n) {
      if (!(n > 0.0)) throw DomainError("eps_star_n values must be positive");
    }
  }
  if (experiment == ExperimentKind::bandwidth_compare) {
    for (const auto& m : manifolds) {
      const bool ok = (m.kind == ManifoldKind::ball && m.d == 3) || (m.kind == ManifoldKind::sphere && m.d == 4) ||
                      m.kind == ManifoldKind::swiss_roll || m.kind == ManifoldKind::torus;
      if (!ok) throw DomainError("bandwidth_compare supports ball d=3, sphere d=4, swiss_roll and torus; got " + m.label());
    }
  }
}

json ExperimentConfig::to_json() const {
  json ms = json::array();
  for (const auto& m : manifolds) ms.push_back(harness::to_json(m));
  json j = {{"experiment", std::string(to_string(experiment))},
            {"manifolds", ms},
            {"n", n_list},
            {"trials", trials},
            {"eps", eps_list},
            {"sigma", sigma_list},
            {"gamma", gamma},
            {"c", c},
            {"t", t ? json(*t) : json("auto")},
            {"allow_above_t0", allow_above_t0},
            {"seed", seed},
            {"grid_size", grid_size},
            {"delta", delta}};
  if (experiment == ExperimentKind::anticoncentration) {
    j["theory_n"] = theory_n;
    j["eps_star_n"] = eps_star_n;
    j["target_prob"] = target_prob;
  } else if (experiment == ExperimentKind::concentration) {
    j["target_prob"] = target_prob;
  } else {
    j["tie_tolerance"] = tie_tolerance;
  }
  return j;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  switch (kind) {
    case ExperimentKind::concentration:
      cfg.manifolds = {ManifoldSpec::ball(3)};
      cfg.n_list = {1000, 10000};
      cfg.trials = 200;
      cfg.eps_list = {0.25, 0.5, 1.0, 1.5, 2.0};
      cfg.sigma_list = {0.0};
      break;
    case ExperimentKind::anticoncentration: {
      auto cap = ManifoldSpec::spherical_cap(3, 10.0, 0.3);
      cap.profile = RegularityProfile::paper;
      cfg.manifolds = {cap};
      cfg.n_list = {100, 1000, 10000};
      cfg.trials = 200;
      for (int i = 1; i <= 20; ++i) cfg.eps_list.push_back(0.05 * i);
      cfg.sigma_list = {0.0};
      cfg.theory_n = {1e6, 1e8, 1e11};
      for (int e = 3; e <= 11; ++e) cfg.eps_star_n.push_back(std::pow(10.0, e));
      break;
    }
    case ExperimentKind::bandwidth_compare:
      cfg.manifolds = {ManifoldSpec::ball(3), ManifoldSpec::sphere(4), ManifoldSpec::swiss_roll(),
                       ManifoldSpec::torus(2.0, 0.5)};
      cfg.n_list = {100, 1000, 10000};
      cfg.trials = 10;
      cfg.eps_list = {1.0};
      cfg.sigma_list = {0.0, 0.15, 0.30, 0.50};
      break;
  }
  return cfg;
}

ExperimentConfig config_from_json(ExperimentKind kind, const json& j) {
  if (!j.is_object()) throw DomainError("experiment config must be a JSON object");
  ExperimentConfig cfg = default_config(kind);
  static const std::set<std::string> known = {
      "experiment", "manifolds", "n",          "trials",     "eps",         "sigma",     "gamma",
      "c",          "t",         "allow_above_t0", "seed",   "theory_n",    "eps_star_n", "target_prob",
      "grid_size",  "delta",     "tie_tolerance", "threads", "output_dir"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw DomainError("unknown config field \"" + key + "\"");
  }
  if (j.contains("experiment") && experiment_kind_from_string(j.at("experiment").get<std::string>()) != kind) {
    throw DomainError("config is for experiment \"" + j.at("experiment").get<std::string>() + "\"");
  }
  if (j.contains("manifolds")) {
    cfg.manifolds.clear();
    for (const auto& m : j.at("manifolds")) cfg.manifolds.push_back(manifold_from_json(m));
  }
  if (j.contains("n")) {
    cfg.n_list.clear();
    for (double n : std_doubles(j.at("n"), "n")) cfg.n_list.push_back(static_cast<std::int64_t>(std::llround(n)));
  }
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("eps")) cfg.eps_list = std_doubles(j.at("eps"), "eps");
  if (j.contains("sigma")) cfg.sigma_list = std_doubles(j.at("sigma"), "sigma");
  if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
  if (j.contains("c")) cfg.c = j.at("c").get<double>();
  if (j.contains("t")) {
    const auto& t = j.at("t");
    if (t.is_string() && t.get<std::string>() == "auto") {
      cfg.t.reset();
    } else {
      cfg.t = number_from(t);
    }
  }
  if (j.contains("allow_above_t0")) cfg.allow_above_t0 = j.at("allow_above_t0").get<bool>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("theory_n")) cfg.theory_n = std_doubles(j.at("theory_n"), "theory_n");
  if (j.contains("eps_star_n")) cfg.eps_star_n = std_doubles(j.at("eps_star_n"), "eps_star_n");
  if (j.contains("target_prob")) cfg.target_prob = j.at("target_prob").get<double>();
  if (j.contains("grid_size")) cfg.grid_size = j.at("grid_size").get<int>();
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (j.contains("tie_tolerance")) cfg.tie_tolerance = j.at("tie_tolerance").get<double>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  cfg.validate();
  return cfg;
}

std::size_t Table::column(std::string_view col) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == col) return i;
  }
  throw DomainError("table " + name + " has no column '" + std::string(col) + "'");
}

const std::string& Table::cell(std::size_t row, std::string_view col) const { return rows.at(row).at(column(col)); }

double Table::number(std::size_t row, std::string_view col) const {
  const std::string& s = cell(row, col);
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan" || s.empty()) return kNaN;
  return std::stod(s);
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

const Table& ExperimentResult::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw DomainError("result has no table '" + std::string(name) + "'");
}

ExperimentResult run_concentration(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result = make_result(cfg);

  Table trials{"concentration_trials",
               {"experiment", "manifold", "d", "n", "sigma", "trial", "method", "t", "d_hat", "error", "abs_error",
                "seed"},
               {}};
  Table summary{"concentration_summary",
                {"experiment", "manifold", "d", "n", "sigma", "eps", "t", "t0", "P_t", "trials", "mean_d_hat",
                 "mean_abs_error", "std_abs_error", "empirical_upper_freq", "empirical_lower_freq",
                 "empirical_frequency", "binomial_stderr", "upper_tail", "lower_tail", "upper_exponent",
                 "lower_exponent", "theoretical_bound", "bound_status", "eps_at_bound", "target_prob", "seed"},
                {}};

  for (std::size_t mi = 0; mi < cfg.manifolds.size(); ++mi) {
    const ManifoldSpec& m = cfg.manifolds[mi];
    const RegularityParams reg = regularity_of(m);
    const auto bw = choose_bandwidth(cfg, reg, result.warnings, m.label());
    const double t = bw.t;
    const Point x = m.reference_point();
    const double d = m.d;

    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
      const std::int64_t n = cfg.n_list[ni];
      for (std::size_t si = 0; si < cfg.sigma_list.size(); ++si) {
        const double sigma = cfg.sigma_list[si];
        const auto count = static_cast<std::size_t>(cfg.trials);
        std::vector<double> d_hat(count, kNaN);
        parallel_for(
            count,
            [&](std::size_t trial) {
              Rng rng = make_stream(cfg.seed, {1, mi, ni, si, trial});
              PointCloud cloud = sample(m, static_cast<Eigen::Index>(n), rng);
              if (sigma > 0.0) cloud = add_noise(cloud, sigma, rng);
              d_hat[trial] = local_dim_estimate(x, cloud, t).d_hat;
            },
            workers(cfg));

        std::vector<double> abs_err(count);
        for (std::size_t k = 0; k < count; ++k) {
          const double err = d_hat[k] - d;
          abs_err[k] = std::abs(err);
          trials.rows.push_back({"concentration", m.label(), num(m.d), num(n), num(sigma), num(k), "gaussian_fixed_t",
                                 num(t), num(d_hat[k]), num(err), num(abs_err[k]), num(cfg.seed)});
        }
        const auto err_stats = mean_std(abs_err);
        const auto dhat_stats = mean_std(d_hat);

        for (std::size_t ei = 0; ei < cfg.eps_list.size(); ++ei) {
          const double eps = cfg.eps_list[ei];
          std::size_t up = 0, down = 0;
          for (double v : d_hat) {
            if (v - d >= eps) ++up;
            if (v - d <= -eps) ++down;
          }
          const double fu = static_cast<double>(up) / static_cast<double>(count);
          const double fl = static_cast<double>(down) / static_cast<double>(count);
          const double f = fu + fl;
          const auto tails = concentration_tails(m.d, reg.p_x, t, static_cast<double>(n), eps, cfg.c);
          const double bound = std::min(1.0, tails.upper_tail + tails.lower_tail);
          std::string status = "ok";
          if (std::isnan(bw.t0_per_eps[ei])) {
            status = "invalid";
          } else if (t > bw.t0_per_eps[ei]) {
            status = "above_t0";
          } else if (tails.vacuous) {
            status = "vacuous";
          }
          const double eps_target =
              eps_at_bound(m.d, reg.p_x, t, static_cast<double>(n), cfg.c, cfg.target_prob);
          summary.rows.push_back({"concentration", m.label(), num(m.d), num(n), num(sigma), num(eps), num(t),
                                  num(bw.t0_per_eps[ei]), num(tails.P_t), num(count), num(dhat_stats.mean),
                                  num(err_stats.mean), num(err_stats.std), num(fu), num(fl), num(f),
                                  num(binomial_stderr(bound, count)), num(tails.upper_tail), num(tails.lower_tail),
                                  num(tails.upper_exponent), num(tails.lower_exponent), num(bound), status,
                                  num(eps_target), num(cfg.target_prob), num(cfg.seed)});
        }
      }
    }
  }
  result.tables = {std::move(trials), std::move(summary)};
  result.metadata["notes"] = {
      "empirical_frequency counts |d_hat - d| >= eps; theoretical_bound is upper_tail + lower_tail clipped to 1",
      "binomial_stderr is sqrt(b (1 - b) / trials) at the bound value b",
      "eps_at_bound solves upper_tail + lower_tail = target_prob; inf when no eps <= 4d reaches it",
      "tails are the noise-free bounds; rows with sigma > 0 report them for reference only",
      "upper_exponent and lower_exponent are the exponents inside exp(-.), linear in n"};
  finish(result);
  return result;
}

ExperimentResult run_anticoncentration(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result = make_result(cfg);

  Table empirical{"anticoncentration_empirical",
                  {"experiment", "manifold", "d", "n", "sigma", "eps", "t", "P_t", "trials", "within_frequency",
                   "binomial_stderr", "anti_bound", "anti_status", "seed"},
                  {}};
  Table theory{"anticoncentration_theory",
               {"experiment", "manifold", "d", "n", "eps", "t", "P_t", "status", "value", "unclipped", "phi_plus",
                "phi_minus", "berry_esseen", "remainder_scale", "linear", "error"},
               {}};
  Table eps_table{"anticoncentration_eps_star",
                  {"experiment", "manifold", "d", "n", "t", "P_t", "target_prob", "eps_star", "status", "error"},
                  {}};
  Table fit{"anticoncentration_fit",
            {"experiment", "manifold", "d", "n", "sigma", "eps_max", "points", "slope", "slope_stderr", "intercept",
             "intercept_stderr"},
            {}};

  auto anti_row = [&](const ManifoldSpec& m, double P_t, double n, double eps, double t) {
    std::vector<std::string> row = {"anticoncentration", m.label(), num(m.d), num(n), num(eps), num(t), num(P_t)};
    try {
      const auto a = anticoncentration_value(m.d, P_t, n, eps, cfg.c);
      const double lin = anticoncentration_linear(m.d, P_t, n, eps, cfg.c, eta_from(eps, cfg.c));
      row.insert(row.end(), {"ok", num(a.value), num(a.unclipped), num(a.phi_plus), num(a.phi_minus),
                             num(a.berry_esseen), num(a.remainder_scale), num(lin), ""});
    } catch (const PreconditionError& e) {
      row.insert(row.end(), {"invalid", num(kNaN), num(kNaN), num(kNaN), num(kNaN), num(kNaN), num(kNaN), num(kNaN),
                             std::string(e.what())});
    }
    return row;
  };

  for (std::size_t mi = 0; mi < cfg.manifolds.size(); ++mi) {
    const ManifoldSpec& m = cfg.manifolds[mi];
    const RegularityParams reg = regularity_of(m);
    const auto bw = choose_bandwidth(cfg, reg, result.warnings, m.label());
    const double t = bw.t;
    const double P_t = idealized_kernel_mass(m.d, reg.p_x, t);
    const Point x = m.reference_point();
    const double d = m.d;

    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
      const std::int64_t n = cfg.n_list[ni];
      for (std::size_t si = 0; si < cfg.sigma_list.size(); ++si) {
        const double sigma = cfg.sigma_list[si];
        const auto count = static_cast<std::size_t>(cfg.trials);
        std::vector<double> d_hat(count, kNaN);
        parallel_for(
            count,
            [&](std::size_t trial) {
              Rng rng = make_stream(cfg.seed, {2, mi, ni, si, trial});
              PointCloud cloud = sample(m, static_cast<Eigen::Index>(n), rng);
              if (sigma > 0.0) cloud = add_noise(cloud, sigma, rng);
              d_hat[trial] = local_dim_estimate(x, cloud, t).d_hat;
            },
            workers(cfg));

        std::vector<double> freqs;
        for (double eps : cfg.eps_list) {
          std::size_t within = 0;
          for (double v : d_hat) {
            if (std::abs(v - d) <= eps) ++within;
          }
          const double f = static_cast<double>(within) / static_cast<double>(count);
          freqs.push_back(f);
          std::string anti = num(kNaN);
          std::string status = "ok";
          try {
            anti = num(anticoncentration_value(m.d, P_t, static_cast<double>(n), eps, cfg.c).value);
          } catch (const PreconditionError&) {
            status = "invalid";
          }
          empirical.rows.push_back({"anticoncentration", m.label(), num(m.d), num(n), num(sigma), num(eps), num(t),
                                    num(P_t), num(count), num(f), num(binomial_stderr(f, count)), anti, status,
                                    num(cfg.seed)});
        }

        // Least-squares line through the smaller half of the eps grid (at least three points).
        std::vector<std::size_t> order(cfg.eps_list.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return cfg.eps_list[a] < cfg.eps_list[b]; });
        const std::size_t k = std::min(order.size(), std::max<std::size_t>(3, order.size() / 2));
        double sx = 0, sy = 0;
        for (std::size_t i = 0; i < k; ++i) {
          sx += cfg.eps_list[order[i]];
          sy += freqs[order[i]];
        }
        const double kk = static_cast<double>(k);
        const double mx = sx / kk, my = sy / kk;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < k; ++i) {
          const double dx = cfg.eps_list[order[i]] - mx;
          sxx += dx * dx;
          sxy += dx * (freqs[order[i]] - my);
        }
        double slope = kNaN, intercept = kNaN, se_slope = kNaN, se_int = kNaN;
        if (k >= 2 && sxx > 0.0) {
          slope = sxy / sxx;
          intercept = my - slope * mx;
          if (k >= 3) {
            double rss = 0;
            for (std::size_t i = 0; i < k; ++i) {
              const double r = freqs[order[i]] - (intercept + slope * cfg.eps_list[order[i]]);
              rss += r * r;
            }
            const double s2 = rss / (kk - 2.0);
            se_slope = std::sqrt(s2 / sxx);
            se_int = std::sqrt(s2 * (1.0 / kk + mx * mx / sxx));
          }
        }
        fit.rows.push_back({"anticoncentration", m.label(), num(m.d), num(n), num(sigma),
                            num(cfg.eps_list[order[k - 1]]), num(k), num(slope), num(se_slope), num(intercept),
                            num(se_int)});
      }
    }

    for (double n : cfg.theory_n) {
      for (double eps : cfg.eps_list) theory.rows.push_back(anti_row(m, P_t, n, eps, t));
    }

    for (double n : cfg.eps_star_n) {
      std::vector<std::string> row = {"anticoncentration", m.label(), num(m.d), num(n), num(t), num(P_t),
                                      num(cfg.target_prob)};
      try {
        const double e = eps_star_value(m.d, P_t, n, cfg.c, cfg.target_prob);
        row.insert(row.end(), {num(e), "ok", ""});
      } catch (const PreconditionError& e) {
        row.insert(row.end(), {num(kNaN), "invalid", std::string(e.what())});
      }
      eps_table.rows.push_back(std::move(row));
    }
  }

  result.tables = {std::move(empirical), std::move(theory), std::move(eps_table), std::move(fit)};
  result.metadata["notes"] = {
      "within_frequency counts |d_hat - d| <= eps over the trials",
      "theory rows evaluate the closed-form bound without sampling; value is clipped to [0, 1]",
      "remainder_scale is sqrt(P_t / n); the corresponding remainder term is not added to value",
      "linear is the small-eps linearization of the bound",
      "eps_star inverts the linearized bound at target_prob",
      "fit regresses within_frequency on eps over the smaller half of the eps grid",
      "rows whose validity conditions fail are marked invalid with the reason in error"};
  finish(result);
  return result;
}

ExperimentResult run_bandwidth_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result = make_result(cfg);

  static const std::array<const char*, 3> kMethods = {"gaussian_curvature", "gaussian_slope_max", "indicator_knn"};

  Table est{"bandwidth_estimates",
            {"experiment", "manifold", "d", "n", "sigma", "trial", "method", "d_hat", "t_star", "k", "abs_error",
             "normalized_error", "status", "seed"},
            {}};
  Table agg{"bandwidth_aggregates",
            {"experiment", "manifold", "d", "n", "sigma", "method", "count", "valid", "mean_d_hat", "std_d_hat",
             "mean_normalized_error", "std_normalized_error"},
            {}};
  Table pairs{"bandwidth_pairs",
              {"experiment", "manifold", "n", "sigma", "trial", "error_curvature", "error_slope_max", "difference",
               "outcome"},
              {}};
  Table inset{"bandwidth_inset", {"experiment", "scope", "n", "win", "lose", "tie", "incomparable", "total"}, {}};

  struct Estimate {
    double d_hat = kNaN;
    double t_star = kNaN;
    int k = 0;
    std::string status = "ok";
  };

  const std::size_t M = cfg.manifolds.size(), N = cfg.n_list.size(), S = cfg.sigma_list.size();
  const auto T = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = M * N * S * T;
  std::vector<std::array<Estimate, 3>> out(total);

  auto slot = [&](std::size_t mi, std::size_t ni, std::size_t si, std::size_t trial) {
    return ((mi * N + ni) * S + si) * T + trial;
  };

  parallel_for(
      total,
      [&](std::size_t idx) {
        const std::size_t trial = idx % T;
        const std::size_t si = (idx / T) % S;
        const std::size_t ni = (idx / (T * S)) % N;
        const std::size_t mi = idx / (T * S * N);
        const ManifoldSpec& m = cfg.manifolds[mi];
        const auto n = static_cast<Eigen::Index>(cfg.n_list[ni]);
        Rng rng = make_stream(cfg.seed, {3, mi, ni, si, trial});
        PointCloud cloud = sample(m, n, rng);
        cloud = add_noise(cloud, cfg.sigma_list[si], rng);
        const Point x = m.reference_point();
        const Vector sq = squared_distances(x, cloud);
        auto& res = out[idx];

        std::vector<double> grid;
        try {
          grid = make_grid_sq(sq, cfg.grid_size);
        } catch (const std::exception& e) {
          res[0].status = res[1].status = status_of(e);
        }
        if (!grid.empty()) {
          try {
            const auto scan = select_bandwidth_curvature_sq(sq, grid, cfg.delta);
            res[0].d_hat = scan.d_hat;
            res[0].t_star = scan.t_star;
          } catch (const std::exception& e) {
            res[0].status = status_of(e);
          }
          try {
            const auto scan = select_bandwidth_slope_max_sq(sq, grid);
            res[1].d_hat = scan.d_hat;
            res[1].t_star = scan.t_star;
          } catch (const std::exception& e) {
            res[1].status = status_of(e);
          }
        }
        if (n >= 2) {
          const int k = default_knn_k(n);
          res[2].k = k;
          try {
            res[2].d_hat = knn_dim_estimate(x, cloud, k).d_hat;
          } catch (const std::exception& e) {
            res[2].status = status_of(e);
          }
        } else {
          res[2].status = "degenerate";
        }
      },
      workers(cfg));

  for (std::size_t mi = 0; mi < M; ++mi) {
    const ManifoldSpec& m = cfg.manifolds[mi];
    const double d = m.d;
    for (std::size_t ni = 0; ni < N; ++ni) {
      const std::int64_t n = cfg.n_list[ni];
      // Aggregates per sigma, then pooled over sigma.
      std::array<std::vector<double>, 3> pooled_dhat, pooled_err;
      for (std::size_t si = 0; si < S; ++si) {
        const double sigma = cfg.sigma_list[si];
        std::array<std::vector<double>, 3> dh, ne;
        for (std::size_t trial = 0; trial < T; ++trial) {
          const auto& res = out[slot(mi, ni, si, trial)];
          for (std::size_t k = 0; k < 3; ++k) {
            const auto& e = res[k];
            const double abs_err = std::abs(e.d_hat - d);
            est.rows.push_back({"bandwidth_compare", m.label(), num(m.d), num(n), num(sigma), num(trial),
                                kMethods[k], num(e.d_hat), num(e.t_star), num(e.k), num(abs_err), num(abs_err / d),
                                e.status, num(cfg.seed)});
            dh[k].push_back(e.d_hat);
            ne[k].push_back(abs_err / d);
            pooled_dhat[k].push_back(e.d_hat);
            pooled_err[k].push_back(abs_err / d);
          }
          const double a = std::abs(res[0].d_hat - d) / d;
          const double b = std::abs(res[1].d_hat - d) / d;
          std::string outcome;
          if (std::isnan(a) || std::isnan(b)) {
            outcome = "incomparable";
          } else if (std::abs(a - b) <= cfg.tie_tolerance) {
            outcome = "tie";
          } else {
            outcome = a < b ? "win" : "lose";
          }
          pairs.rows.push_back({"bandwidth_compare", m.label(), num(n), num(sigma), num(trial), num(a), num(b),
                                num(a - b), outcome});
        }
        for (std::size_t k = 0; k < 3; ++k) {
          const auto s1 = mean_std(dh[k]);
          const auto s2 = mean_std(ne[k]);
          agg.rows.push_back({"bandwidth_compare", m.label(), num(m.d), num(n), num(sigma), kMethods[k], num(T),
                              num(s1.count), num(s1.mean), num(s1.std), num(s2.mean), num(s2.std)});
        }
      }
      for (std::size_t k = 0; k < 3; ++k) {
        const auto s1 = mean_std(pooled_dhat[k]);
        const auto s2 = mean_std(pooled_err[k]);
        agg.rows.push_back({"bandwidth_compare", m.label(), num(m.d), num(n), "all", kMethods[k],
                            num(pooled_dhat[k].size()), num(s1.count), num(s1.mean), num(s1.std), num(s2.mean),
                            num(s2.std)});
      }
    }
  }

  // Win/lose/tie of the curvature rule against slope maximization: overall, per manifold, per n.
  auto tally = [&](const std::string& scope, const std::string& n_label, auto&& keep) {
    std::size_t w = 0, l = 0, t = 0, inc = 0;
    for (std::size_t r = 0; r < pairs.rows.size(); ++r) {
      if (!keep(r)) continue;
      const std::string& o = pairs.rows[r][pairs.column("outcome")];
      if (o == "win") ++w;
      else if (o == "lose") ++l;
      else if (o == "tie") ++t;
      else ++inc;
    }
    inset.rows.push_back({"bandwidth_compare", scope, n_label, num(w), num(l), num(t), num(inc), num(w + l + t + inc)});
  };
  const std::size_t man_col = pairs.column("manifold"), n_col = pairs.column("n");
  tally("all", "all", [](std::size_t) { return true; });
  for (const auto& m : cfg.manifolds) {
    const std::string label = m.label();
    tally(label, "all", [&](std::size_t r) { return pairs.rows[r][man_col] == label; });
  }
  for (auto n : cfg.n_list) {
    const std::string ns = num(n);
    tally("all", ns, [&](std::size_t r) { return pairs.rows[r][n_col] == ns; });
  }

  result.tables = {std::move(est), std::move(agg), std::move(pairs), std::move(inset)};
  result.metadata["notes"] = {
      "estimates are taken at the noise-free manifold reference point against the noisy cloud",
      "normalized_error is |d_hat - d| / d; aggregates skip rows whose status is not ok",
      "sigma = all pools every noise level",
      "win means the curvature rule has the smaller normalized error; tie means the errors differ by at most "
      "tie_tolerance",
      "failed estimates keep their row with d_hat = nan and a status of degenerate, precondition or error"};
  finish(result);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::concentration:
      return run_concentration(cfg);
    case ExperimentKind::anticoncentration:
      return run_anticoncentration(cfg);
    case ExperimentKind::bandwidth_compare:
      return run_bandwidth_compare(cfg);
  }
  throw DomainError("unknown experiment");
}

std::vector<std::string> write_result(const ExperimentResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& table : result.tables) {
    const fs::path csv = fs::path(dir) / (table.name + ".csv");
    const fs::path meta = fs::path(dir) / (table.name + ".meta.json");
    {
      std::ofstream os(csv, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + csv.string());
      os << table.to_csv();
    }
    json sidecar = result.metadata;
    sidecar["table"] = table.name;
    sidecar["columns"] = table.columns;
    sidecar["rows"] = table.rows.size();
    {
      std::ofstream os(meta, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + meta.string());
      os << sidecar.dump(2) << '\n';
    }
    written.push_back(csv.string());
    written.push_back(meta.string());
  }
  return written;
}

}  // namespace dimest::harness
