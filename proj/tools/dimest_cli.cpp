#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dimest/bandwidth.hpp"
#include "dimest/bounds.hpp"
#include "dimest/cloud_io.hpp"
#include "dimest/errors.hpp"
#include "dimest/estimators.hpp"
#include "dimest/harness/experiments.hpp"
#include "dimest/harness/json_io.hpp"
#include "dimest/manifolds.hpp"

namespace {

using dimest::harness::json;
using dimest::harness::number;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RegularityFlags {
  int d = 1;
  double L = 0.0;
  double M = 0.0;
  double r = 1.0;
  double kappa = 0.0;
  double p = 1.0;
  double boundary = std::numeric_limits<double>::infinity();
  double gamma = 0.4;

  void add(CLI::App* app) {
    app->add_option("--d", d, "intrinsic dimension")->required();
    app->add_option("--L", L, "curvature bound");
    app->add_option("--M", M, "volume-distortion bound");
    app->add_option("--r", r, "regularity radius");
    app->add_option("--kappa", kappa, "density Lipschitz constant");
    app->add_option("--p", p, "density at the query point")->required();
    app->add_option("--boundary", boundary, "distance to the boundary");
    app->add_option("--gamma", gamma, "exponent in r0 = t^gamma, inside (1/4, 1/2)");
  }

  dimest::RegularityParams params() const {
    dimest::RegularityParams reg(L, M, r, kappa, p, d, boundary);
    reg.validate();
    return reg;
  }
};

std::optional<double> parse_auto(const std::string& s, const char* flag) {
  if (s == "auto") return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + " expects a number or \"auto\", got '" + s + "'");
  }
}

std::vector<double> parse_coords(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--point-coords expects comma-separated numbers, got '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("--point-coords is empty");
  return out;
}

dimest::PointCloud drop_row(const dimest::PointCloud& cloud, Eigen::Index row) {
  dimest::PointCloud out(cloud.rows() - 1, cloud.cols());
  out.topRows(row) = cloud.topRows(row);
  out.bottomRows(cloud.rows() - row - 1) = cloud.bottomRows(cloud.rows() - row - 1);
  return out;
}

int cmd_estimate(const std::string& input, std::optional<long long> index, const std::string& coords,
                 const std::string& method, const std::string& t_arg, const std::string& k_arg, int grid_size,
                 double delta) {
  const dimest::PointCloud cloud = dimest::read_cloud_csv(input);
  json out;

  if (method == "global") {
    const auto t = parse_auto(t_arg, "--t");
    if (!t) throw UsageError("--method global needs a numeric --t");
    const auto est = dimest::global_dim_estimate(cloud, *t, 2.0 * *t);
    out = {{"d_hat", number(est.d_hat)}, {"t_star", number(*t)}, {"method", "gaussian_global"}};
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  }

  if (index.has_value() == !coords.empty()) throw UsageError("give exactly one of --point-index or --point-coords");
  dimest::Point x;
  dimest::PointCloud others;
  std::optional<Eigen::Index> self;
  if (index) {
    if (*index < 0 || *index >= cloud.rows()) {
      throw dimest::DomainError("--point-index " + std::to_string(*index) + " is outside [0, " +
                                std::to_string(cloud.rows()) + ")");
    }
    self = static_cast<Eigen::Index>(*index);
    x = cloud.row(*self).transpose();
    if (cloud.rows() < 2) throw dimest::DomainError("cloud needs at least one point besides the query");
    others = drop_row(cloud, *self);
  } else {
    const auto v = parse_coords(coords);
    x = Eigen::Map<const dimest::Point>(v.data(), static_cast<Eigen::Index>(v.size()));
    dimest::check_point_matches(x, cloud);
    others = cloud;
  }

  if (method == "gaussian" || method == "gaussian_slope_max") {
    const auto t = parse_auto(t_arg, "--t");
    if (t) {
      const auto est = dimest::local_dim_estimate(x, others, *t);
      out = {{"d_hat", number(est.d_hat)}, {"t_star", number(*t)}, {"method", "gaussian_fixed_t"}};
    } else {
      const auto grid = dimest::make_grid(others, x, grid_size);
      const auto scan = method == "gaussian" ? dimest::select_bandwidth_curvature(x, others, grid, delta)
                                             : dimest::select_bandwidth_slope_max(x, others, grid);
      out = {{"d_hat", number(scan.d_hat)},
             {"t_star", number(scan.t_star)},
             {"method", method == "gaussian" ? "gaussian_curvature" : "gaussian_slope_max"}};
    }
  } else if (method == "knn") {
    int k = 0;
    if (k_arg == "auto") {
      k = dimest::default_knn_k(cloud.rows() - (self ? 1 : 0));
    } else {
      try {
        std::size_t pos = 0;
        k = std::stoi(k_arg, &pos);
        if (pos != k_arg.size()) throw std::invalid_argument(k_arg);
      } catch (const std::exception&) {
        throw UsageError("--k expects an integer or \"auto\", got '" + k_arg + "'");
      }
    }
    const auto est = dimest::knn_dim_estimate(x, cloud, k, self);
    out = {{"d_hat", number(est.d_hat)}, {"t_star", nullptr}, {"k", k}, {"method", "indicator_knn"}};
  } else {
    throw UsageError("unknown --method '" + method + "'");
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-kernel intrinsic dimension estimation"};
  app.require_subcommand(1);
  std::uint64_t seed = 42;
  bool seed_given = false;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& v) {
          seed = v;
          seed_given = true;
        },
        "master random seed");
  };

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate the intrinsic dimension at a point of a CSV cloud");
  std::string input, coords, method = "gaussian", t_arg = "auto", k_arg = "auto";
  std::optional<long long> point_index;
  int grid_size = dimest::kDefaultGridSize;
  double delta = dimest::kDefaultDelta;
  est->add_option("--input", input, "cloud CSV with header x0,...,x{N-1}")->required();
  est->add_option("--point-index", point_index, "row of the query point (excluded from its own neighbors)");
  est->add_option("--point-coords", coords, "query point as comma-separated coordinates");
  est->add_option("--method", method, "gaussian | gaussian_slope_max | knn | global")
      ->check(CLI::IsMember({"gaussian", "gaussian_slope_max", "knn", "global"}));
  est->add_option("--t", t_arg, "bandwidth or auto");
  est->add_option("--k", k_arg, "neighbor count or auto");
  est->add_option("--grid-size", grid_size, "bandwidth grid size for --t auto");
  est->add_option("--delta", delta, "curvature-ratio regularizer");
  add_seed(est);

  // t0
  auto* t0cmd = app.add_subcommand("t0", "print the admissible bandwidth threshold as JSON");
  RegularityFlags t0flags;
  t0flags.add(t0cmd);
  double t0_eta = 0.0, t0_eps = 1.0, t0_c = 0.5;
  auto* eta_opt = t0cmd->add_option("--eta", t0_eta, "relative moment tolerance in (0, 1/2)");
  t0cmd->add_option("--eps", t0_eps, "precision; sets eta = c tanh(eps log 2 / 4) when --eta is absent");
  t0cmd->add_option("--c", t0_c, "margin in (0, 1)");
  add_seed(t0cmd);

  // bounds
  auto* bcmd = app.add_subcommand("bounds", "print concentration and anti-concentration bounds as JSON");
  RegularityFlags bflags;
  bflags.add(bcmd);
  double b_eps = 1.0, b_c = 0.5, b_target = 0.1;
  long long b_n = 0;
  std::string b_t = "auto";
  bcmd->add_option("--eps", b_eps, "precision");
  bcmd->add_option("--c", b_c, "margin in (0, 1)");
  bcmd->add_option("--n", b_n, "sample count")->required();
  bcmd->add_option("--t", b_t, "bandwidth or auto (0.95 t0)");
  bcmd->add_option("--target-prob", b_target, "target probability for eps_star");
  add_seed(bcmd);

  // experiment
  auto* xcmd = app.add_subcommand("experiment", "run an experiment and write CSV tables");
  std::string x_name, x_config, x_out;
  unsigned x_threads = 0;
  xcmd->add_option("name", x_name, "concentration | anticoncentration | bandwidth_compare")
      ->required()
      ->check(CLI::IsMember({"concentration", "anticoncentration", "bandwidth_compare"}));
  xcmd->add_option("--config", x_config, "JSON config; omitted fields take defaults");
  xcmd->add_option("--output-dir", x_out, "directory for CSV and metadata files");
  xcmd->add_option("--threads", x_threads, "worker count (default: DIMEST_THREADS or all cores)");
  add_seed(xcmd);

  // sample
  auto* scmd = app.add_subcommand("sample", "write a sampled manifold cloud as CSV");
  std::string s_kind = "ball", s_profile = "generic", s_output;
  int s_d = 3, s_ambient = 0;
  double s_R = 1.0, s_rminor = 0.5, s_cap = 0.3, s_sigma = 0.0;
  long long s_n = 1000;
  scmd->add_option("--manifold", s_kind, "ball | sphere | spherical_cap | circle | swiss_roll | torus");
  scmd->add_option("--d", s_d, "intrinsic dimension (ball, sphere, cap)");
  scmd->add_option("--R", s_R, "radius, or torus major radius");
  scmd->add_option("--r-minor", s_rminor, "torus tube radius");
  scmd->add_option("--cap-angle", s_cap, "cap polar half-angle in radians");
  scmd->add_option("--ambient-dim", s_ambient, "ambient dimension (0: natural)");
  scmd->add_option("--n", s_n, "sample count");
  scmd->add_option("--sigma", s_sigma, "ambient Gaussian noise level");
  scmd->add_option("--output", s_output, "output path (default: stdout)");
  add_seed(scmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kExitUsage;
  }

  try {
    if (*est) return cmd_estimate(input, point_index, coords, method, t_arg, k_arg, grid_size, delta);

    if (*t0cmd) {
      const auto reg = t0flags.params();
      const double eta = eta_opt->count() ? t0_eta : dimest::eta_from(t0_eps, t0_c);
      const auto rep = dimest::compute_t0(reg, t0flags.gamma, eta);
      json out = dimest::harness::to_json(rep);
      out["eta"] = eta;
      out["gamma"] = t0flags.gamma;
      std::cout << out.dump(2) << '\n';
      return kExitOk;
    }

    if (*bcmd) {
      const auto reg = bflags.params();
      dimest::BoundConfig cfg;
      cfg.eps = b_eps;
      cfg.c = b_c;
      cfg.gamma = bflags.gamma;
      cfg.n = b_n;
      const auto t = parse_auto(b_t, "--t");
      cfg.t = t ? *t : 0.95 * dimest::compute_t0(reg, cfg.gamma, dimest::eta_from(b_eps, b_c)).t0;
      const auto rep = dimest::make_bound_report(reg, cfg, b_target);
      json out = dimest::harness::to_json(rep);
      out["t"] = number(cfg.t);
      out["eta"] = cfg.eta();
      std::cout << out.dump(2) << '\n';
      return kExitOk;
    }

    if (*xcmd) {
      const auto kind = dimest::harness::experiment_kind_from_string(x_name);
      json j = json::object();
      if (!x_config.empty()) {
        std::ifstream is(x_config);
        if (!is) throw dimest::DomainError("cannot open config '" + x_config + "'");
        try {
          j = json::parse(is);
        } catch (const json::parse_error& e) {
          throw dimest::DomainError("config '" + x_config + "' is not valid JSON: " + e.what());
        }
      }
      if (seed_given) j["seed"] = seed;
      if (!x_out.empty()) j["output_dir"] = x_out;
      if (x_threads > 0) j["threads"] = x_threads;
      const auto cfg = dimest::harness::config_from_json(kind, j);
      const auto result = dimest::harness::run_experiment(cfg);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      const auto files = dimest::harness::write_result(result, cfg.output_dir);
      std::cout << json{{"experiment", x_name}, {"files", files}}.dump(2) << '\n';
      return kExitOk;
    }

    if (*scmd) {
      dimest::ManifoldSpec spec;
      spec.kind = dimest::manifold_kind_from_string(s_kind);
      spec.d = s_d;
      spec.R = s_R;
      spec.r_minor = s_rminor;
      spec.cap_angle = s_cap;
      spec.ambient_dim = s_ambient;
      spec.profile = dimest::regularity_profile_from_string(s_profile);
      if (spec.kind == dimest::ManifoldKind::circle || spec.kind == dimest::ManifoldKind::swiss_roll ||
          spec.kind == dimest::ManifoldKind::torus) {
        spec.d = spec.kind == dimest::ManifoldKind::circle ? 1 : 2;
      }
      if (s_n < 1) throw dimest::DomainError("--n must be >= 1");
      auto rng = dimest::make_stream(seed, {0});
      dimest::PointCloud cloud = dimest::sample(spec, static_cast<Eigen::Index>(s_n), rng);
      if (s_sigma > 0.0) cloud = dimest::add_noise(cloud, s_sigma, rng);
      if (s_output.empty()) {
        dimest::write_cloud_csv(std::cout, cloud);
      } else {
        dimest::write_cloud_csv(s_output, cloud);
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitUsage;
}
