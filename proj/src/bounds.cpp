#include "dimest/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dimest/errors.hpp"
#include "dimest/special.hpp"

namespace dimest {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

double pow2(double x) { return std::exp2(x); }

// 2^{x} - 1 accurate for small x.
double pow2m1(double x) { return std::expm1(x * kLn2); }

void check_gamma(double gamma) {
  if (!(gamma > 0.25 && gamma < 0.5)) {
    throw DomainError("gamma must lie strictly inside (1/4, 1/2), got " + std::to_string(gamma));
  }
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 0.5)) {
    throw DomainError("eta must lie in (0, 1/2), got " + std::to_string(eta));
  }
}

void check_c(double c) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("margin c must lie in (0, 1)");
}

}  // namespace

RegularityParams::RegularityParams() : boundary_dist(kInf) {}

RegularityParams::RegularityParams(double L_, double M_, double r_, double kappa_, double p_x_, int d_,
                                   double boundary_dist_)
    : L(L_), M(M_), r(r_), kappa(kappa_), p_x(p_x_), d(d_), boundary_dist(boundary_dist_) {}

void RegularityParams::validate() const {
  if (!(L >= 0.0) || !(M >= 0.0) || !(kappa >= 0.0)) {
    throw DomainError("regularity bounds L, M, kappa must be nonnegative");
  }
  if (!(r > 0.0)) throw DomainError("regularity radius r must be positive");
  if (!(p_x > 0.0) || !std::isfinite(p_x)) throw DomainError("density p(x) must be positive");
  if (d < 1) throw DomainError("intrinsic dimension must be >= 1");
  if (!(boundary_dist > 0.0)) throw DomainError("distance to boundary must be positive");
}

double eta_from(double eps, double c) { return c * std::tanh(eps * kLn2 / 4.0); }

double BoundConfig::eta() const { return eta_from(eps, c); }

void BoundConfig::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive");
  check_c(c);
  check_gamma(gamma);
  if (n < 0) throw DomainError("sample count must be nonnegative");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("bandwidth must be positive");
  check_eta(eta());
}

double idealized_kernel_mass(int d, double p_x, double t) {
  const double half_d = 0.5 * d;
  return pow2(half_d) * p_x * std::pow(kPi * t, half_d);
}

MomentEnvelope moment_envelope(const RegularityParams& reg, double t, double gamma) {
  reg.validate();
  check_gamma(gamma);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("bandwidth must be positive");
  const double r0 = std::pow(t, gamma);
  if (r0 > reg.r) {
    throw PreconditionError("r0 = t^gamma = " + std::to_string(r0) +
                            " exceeds the regularity radius r = " + std::to_string(reg.r));
  }
  if (r0 > reg.boundary_dist) {
    throw PreconditionError("r0 = t^gamma = " + std::to_string(r0) +
                            " exceeds the distance to the boundary " +
                            std::to_string(reg.boundary_dist));
  }
  const double r0_sq = r0 * r0;
  const double flat = reg.p_x * std::pow(kPi * t, 0.5 * reg.d);
  const double density = 2.0 * reg.kappa * r0 / reg.p_x;
  const double volume = reg.M * r0_sq;
  const double alpha = regularized_gamma_Q(0.5 * reg.d, r0_sq / t);
  const double curvature = std::exp(-reg.L * reg.L * r0_sq * r0_sq / t);
  const double tail = std::exp(-r0_sq / t);
  return {(1.0 - density) * (1.0 - volume) * (1.0 - alpha) * curvature * flat,
          (1.0 + density) * (1.0 + volume) * flat + tail};
}

std::string_view to_string(T0Term term) {
  switch (term) {
    case T0Term::volume_distortion:
      return "volume_distortion";
    case T0Term::curvature:
      return "curvature";
    case T0Term::tail_decay:
      return "tail_decay";
    case T0Term::density_variation:
      return "density_variation";
    case T0Term::gaussian_tail:
      return "gaussian_tail";
  }
  return "unknown";
}

double tail_decay_A(int d, double p_x, double eta) {
  return -(std::log(eta / 10.0) + std::log(p_x) + 0.5 * d * std::log(kPi) - 0.5 * d * kLn2);
}

double tail_decay_f(double s, double A, int d, double gamma) {
  const double D = d / (2.0 * (1.0 - 2.0 * gamma));
  return A * s - D * s * std::log(s);
}

T0Report compute_t0(const RegularityParams& reg, double gamma, double eta) {
  reg.validate();
  check_gamma(gamma);
  check_eta(eta);

  T0Report rep{};
  auto& terms = rep.terms;
  const double tenth = eta / 10.0;

  terms[0] = reg.M > 0.0 ? std::pow(tenth / reg.M, 1.0 / (2.0 * gamma)) : kInf;
  terms[1] = reg.L > 0.0 ? std::pow(-std::log1p(-tenth) / (2.0 * reg.L * reg.L), 1.0 / (4.0 * gamma - 1.0))
                         : kInf;

  // Tail decay. f is concave with f'(s) = A + D (log(1/s) - 1), so the maximizer is
  // s* = exp(A/D - 1) and f(s*) = D s*.
  const double A = tail_decay_A(reg.d, reg.p_x, eta);
  const double D = reg.d / (2.0 * (1.0 - 2.0 * gamma));
  rep.s_star = std::exp(A / D - 1.0);
  if (!(D * rep.s_star >= 0.5)) {
    rep.s_T = kInf;
  } else {
    double lo = 0.0;
    double hi = rep.s_star;
    for (int iter = 0; iter < 256 && hi - lo > 1e-14; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (tail_decay_f(mid, A, reg.d, gamma) >= 0.5) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    // lo keeps f(lo) < 1/2, so the returned threshold satisfies the constraint.
    rep.s_T = lo;
  }
  terms[2] = std::isinf(rep.s_T) ? kInf : std::pow(rep.s_T, 1.0 / (1.0 - 2.0 * gamma));

  terms[3] = reg.kappa > 0.0 ? std::pow(reg.p_x * eta / (20.0 * reg.kappa), 1.0 / gamma) : kInf;

  const double beta = std::numbers::sqrt2 * (std::sqrt(double(reg.d)) + std::sqrt(2.0 * std::log(10.0 / eta)));
  terms[4] = std::pow(beta, -1.0 / (0.5 - gamma));

  std::size_t best = 0;
  for (std::size_t i = 1; i < kT0TermCount; ++i) {
    if (terms[i] < terms[best]) best = i;
  }
  rep.binding = static_cast<T0Term>(best);
  rep.t0 = terms[best];
  return rep;
}

T0Conditions t0_conditions(const RegularityParams& reg, double gamma, double eta, double t) {
  reg.validate();
  check_gamma(gamma);
  check_eta(eta);
  const double tenth = eta / 10.0;
  T0Conditions out{};
  auto& s = out.slack;
  s[0] = reg.M * std::pow(t, 2.0 * gamma) / tenth - 1.0;
  s[1] = 2.0 * reg.L * reg.L * std::pow(t, 4.0 * gamma - 1.0) / -std::log1p(-tenth) - 1.0;
  {
    // exp(-t^{2 gamma - 1} / 2) <= (eta/10) p pi^{d/2} (t/2)^{d/2}, compared in log form.
    const double lhs = -0.5 * std::pow(t, 2.0 * gamma - 1.0);
    const double rhs = std::log(tenth * reg.p_x) + 0.5 * reg.d * std::log(kPi * t / 2.0);
    s[2] = (lhs - rhs) / std::max(1.0, std::abs(rhs));
  }
  s[3] = 2.0 * reg.kappa * std::pow(t, gamma) / reg.p_x / tenth - 1.0;
  // r0 / sqrt(2t) >= sqrt(d) + sqrt(2 log(10/eta))
  s[4] = (std::sqrt(double(reg.d)) + std::sqrt(2.0 * std::log(10.0 / eta))) /
             (std::pow(t, gamma - 0.5) / std::numbers::sqrt2) -
         1.0;
  const double r0_sq = std::pow(t, 2.0 * gamma);
  out.alpha_slack = regularized_gamma_Q(0.5 * reg.d, r0_sq / (2.0 * t)) - tenth;
  return out;
}

ConcentrationTails concentration_tails(int d, double p_x, double t, double n, double eps, double c) {
  if (d < 1) throw DomainError("intrinsic dimension must be >= 1");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  check_c(c);
  if (!(n >= 0.0)) throw DomainError("sample count must be nonnegative");
  const double P_t = idealized_kernel_mass(d, p_x, t);
  const double c_plus = (1.0 - c) * pow2m1(eps / 2.0);
  const double c_minus = -(1.0 - c) * pow2m1(-eps / 2.0);
  const double m_plus = 1.0 + pow2((d + eps) / 2.0);
  const double m_minus = 1.0 + pow2((d - eps) / 2.0);
  const double upper_exp = n * c_plus * c_plus * P_t / (pow2(4.0 + eps) + 2.0 / 3.0 * m_plus * c_plus);
  const double lower_exp = n * c_minus * c_minus * P_t / (pow2(4.0 - eps) + 2.0 / 3.0 * m_minus * c_minus);
  return {std::exp(-upper_exp), std::exp(-lower_exp), P_t, P_t >= 1.0, upper_exp, lower_exp};
}

ConcentrationTails concentration_bound(const RegularityParams& reg, const BoundConfig& cfg) {
  reg.validate();
  cfg.validate();
  const T0Report t0 = compute_t0(reg, cfg.gamma, cfg.eta());
  if (cfg.t > t0.t0) throw ThresholdError(cfg.t, t0.t0);
  return concentration_tails(reg.d, reg.p_x, cfg.t, static_cast<double>(cfg.n), cfg.eps, cfg.c);
}

namespace detail {

AntiConcConstants anticoncentration_constants(int d, double eps, double c) {
  if (d < 1) throw DomainError("intrinsic dimension must be >= 1");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  check_c(c);
  const double two_thirds = std::pow(2.0 / 3.0, 0.5 * d);
  const double half_d = 0.5 * d;
  AntiConcConstants k{};
  k.eta = eta_from(eps, c);
  for (int sign : {+1, -1}) {
    const double e = sign * eps;
    const double gamma = 1.0 - pow2(1.0 - e / 2.0) * two_thirds + pow2(-half_d - e);
    const double weight = 1.0 + pow2(1.0 - e / 2.0) * two_thirds + pow2(-half_d - e);
    const double delta = two_thirds + 3.0 * pow2(half_d - e / 2.0) * std::pow(5.0, -half_d) +
                         3.0 * pow2(-e - d) + pow2(-1.5 * e - half_d) * std::pow(3.0, -half_d);
    const double eta_star = k.eta * weight / gamma;
    if (sign > 0) {
      k.gamma_plus = gamma;
      k.delta_plus = delta;
      k.eta_star_plus = eta_star;
    } else {
      k.gamma_minus = gamma;
      k.delta_minus = delta;
      k.eta_star_minus = eta_star;
    }
  }
  return k;
}

double gamma_zero(int d) { return 1.0 - 2.0 * std::pow(2.0 / 3.0, 0.5 * d) + std::pow(2.0, -0.5 * d); }

}  // namespace detail

AntiConcentration anticoncentration_value(int d, double P_t, double n, double eps, double c) {
  if (!(P_t > 0.0)) throw DomainError("P_t must be positive");
  if (!(n >= 0.0)) throw DomainError("sample count must be nonnegative");
  const auto k = detail::anticoncentration_constants(d, eps, c);
  if (!(k.gamma_plus > 0.0)) {
    throw PreconditionError("Gamma_+ = " + std::to_string(k.gamma_plus) + " is not positive");
  }
  if (!(k.gamma_minus > 0.0)) {
    throw PreconditionError("Gamma_- = " + std::to_string(k.gamma_minus) + " is not positive");
  }
  if (!(k.eta_star_plus < 1.0)) {
    throw PreconditionError("eta = " + std::to_string(k.eta) +
                            " violates eta < Gamma_+ / (1 + 2^{1-eps/2}(2/3)^{d/2} + 2^{-d/2-eps})"
                            " (eta*_+ = " + std::to_string(k.eta_star_plus) + ")");
  }
  if (!(k.eta_star_minus < 1.0)) {
    throw PreconditionError("eta*_- = " + std::to_string(k.eta_star_minus) + " is not below 1");
  }

  const double mass = std::sqrt(P_t * n);
  const double arg_plus =
      -pow2m1(-eps / 2.0) * (1.0 + c) * mass / std::sqrt(k.gamma_plus * (1.0 - k.eta_star_plus));
  const double arg_minus =
      pow2m1(eps / 2.0) * (1.0 + c) * mass / std::sqrt(k.gamma_minus * (1.0 - k.eta_star_minus));
  const double ratio_plus = k.delta_plus / std::pow((1.0 - k.eta_star_plus) * k.gamma_plus, 1.5);
  const double ratio_minus = k.delta_minus / std::pow((1.0 - k.eta_star_minus) * k.gamma_minus, 1.5);
  const double be = kBerryEsseenConstant * (1.0 + k.eta) * pow2(0.5 * d) / mass * (ratio_plus + ratio_minus);

  AntiConcentration out{};
  out.phi_plus = std_normal_cdf(arg_plus);
  out.phi_minus = std_normal_cdf(arg_minus);
  out.berry_esseen = be;
  out.unclipped = std_normal_cdf_centered(arg_plus) + std_normal_cdf_centered(arg_minus) + be;
  out.value = std::clamp(out.unclipped, 0.0, 1.0);
  out.remainder_scale = n > 0.0 ? std::sqrt(P_t / n) : kInf;
  return out;
}

double anticoncentration_linear(int d, double P_t, double n, double eps, double c, double eta) {
  const double g0 = detail::gamma_zero(d);
  const double eta0 = eta * (1.0 + 2.0 * std::pow(2.0 / 3.0, 0.5 * d) + std::pow(2.0, -0.5 * d)) / g0;
  return kLn2 / std::sqrt(2.0 * kPi * g0 * (1.0 - eta0)) * (1.0 + c) * std::sqrt(P_t * n) * eps;
}

double anticoncentration_bound(const RegularityParams& reg, const BoundConfig& cfg) {
  reg.validate();
  cfg.validate();
  const T0Report t0 = compute_t0(reg, cfg.gamma, cfg.eta());
  if (cfg.t > t0.t0) throw ThresholdError(cfg.t, t0.t0);
  const double P_t = idealized_kernel_mass(reg.d, reg.p_x, cfg.t);
  return anticoncentration_value(reg.d, P_t, static_cast<double>(cfg.n), cfg.eps, cfg.c).value;
}

double eps_star_value(int d, double P_t, double n, double c, double target_prob) {
  if (d < 1) throw DomainError("intrinsic dimension must be >= 1");
  check_c(c);
  if (!(target_prob > 0.0 && target_prob < 1.0)) throw DomainError("target probability must lie in (0, 1)");
  if (!(P_t > 0.0) || !(n > 0.0)) throw DomainError("P_t and n must be positive");
  const double g0 = detail::gamma_zero(d);
  if (!(g0 > 0.0)) throw PreconditionError("Gamma_0 = " + std::to_string(g0) + " is not positive");
  const double weight = 1.0 + 2.0 * std::pow(2.0 / 3.0, 0.5 * d) + std::pow(2.0, -0.5 * d);
  const double mass = std::sqrt(P_t * n);

  auto invert = [&](double eta) {
    const double eta0 = eta * weight / g0;
    if (!(eta0 < 1.0)) {
      throw PreconditionError("eta0* = " + std::to_string(eta0) + " is not below 1");
    }
    return target_prob * std::sqrt(2.0 * kPi * g0 * (1.0 - eta0)) / ((1.0 + c) * mass * kLn2);
  };

  double eta = c * (kLn2 / 4.0) / mass;
  const double eps1 = invert(eta);
  eta = eta_from(eps1, c);
  return invert(eta);
}

double eps_star(const RegularityParams& reg, const BoundConfig& cfg, double target_prob) {
  reg.validate();
  if (!(cfg.t > 0.0)) throw DomainError("bandwidth must be positive");
  const double P_t = idealized_kernel_mass(reg.d, reg.p_x, cfg.t);
  return eps_star_value(reg.d, P_t, static_cast<double>(cfg.n), cfg.c, target_prob);
}

BoundReport make_bound_report(const RegularityParams& reg, const BoundConfig& cfg, double target_prob) {
  reg.validate();
  cfg.validate();
  BoundReport rep{};
  rep.t0 = compute_t0(reg, cfg.gamma, cfg.eta());
  if (cfg.t > rep.t0.t0) throw ThresholdError(cfg.t, rep.t0.t0);
  const double n = static_cast<double>(cfg.n);
  const auto tails = concentration_tails(reg.d, reg.p_x, cfg.t, n, cfg.eps, cfg.c);
  rep.P_t = tails.P_t;
  rep.upper_tail = tails.upper_tail;
  rep.lower_tail = tails.lower_tail;
  rep.vacuous = tails.vacuous;
  rep.remainder_scale = n > 0.0 ? std::sqrt(rep.P_t / n) : kInf;
  try {
    rep.anti_conc = anticoncentration_value(reg.d, rep.P_t, n, cfg.eps, cfg.c).value;
  } catch (const std::exception& e) {
    rep.anti_conc_error = e.what();
  }
  try {
    rep.eps_star = eps_star_value(reg.d, rep.P_t, n, cfg.c, target_prob);
  } catch (const std::exception& e) {
    rep.eps_star_error = e.what();
  }
  return rep;
}

}  // namespace dimest
