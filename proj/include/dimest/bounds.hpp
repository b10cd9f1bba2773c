#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dimest {

// Local geometry and density at the query point x.
struct RegularityParams {
  double L = 0.0;        // curvature bound, 1/length
  double M = 0.0;        // volume-distortion bound, 1/length^2
  double r = 1.0;        // regularity radius
  double kappa = 0.0;    // Lipschitz constant of the density
  double p_x = 1.0;      // density at x
  int d = 1;             // intrinsic dimension
  double boundary_dist;  // distance to the boundary, +inf when boundaryless

  RegularityParams();
  RegularityParams(double L, double M, double r, double kappa, double p_x, int d,
                   double boundary_dist);

  void validate() const;
};

struct BoundConfig {
  double eps = 1.0;     // target precision
  double c = 0.5;       // margin in (0, 1)
  double gamma = 0.4;   // r0 = t^gamma exponent in (1/4, 1/2)
  std::int64_t n = 0;   // sample count
  double t = 0.0;       // bandwidth

  // eta = c (2^{eps/2} - 1) / (1 + 2^{eps/2})
  double eta() const;
  void validate() const;
};

double eta_from(double eps, double c);

// Idealized expected kernel sum at bandwidth 2t: 2^{d/2} p(x) pi^{d/2} t^{d/2}.
double idealized_kernel_mass(int d, double p_x, double t);

struct MomentEnvelope {
  double lower;
  double upper;
};

// Lower and upper envelopes of E[K_t(x, X)]. The lower value may be negative for coarse t.
MomentEnvelope moment_envelope(const RegularityParams& reg, double t, double gamma);

enum class T0Term { volume_distortion, curvature, tail_decay, density_variation, gaussian_tail };
inline constexpr std::size_t kT0TermCount = 5;

std::string_view to_string(T0Term term);

struct T0Report {
  double t0;
  std::array<double, kT0TermCount> terms;  // indexed by T0Term
  T0Term binding;
  double s_star;  // maximizer of the concave tail-decay function f
  double s_T;     // inf{s : f(s) >= 1/2}, +inf when f never reaches 1/2

  double term(T0Term which) const { return terms[static_cast<std::size_t>(which)]; }
};

// f(s) = A s + d / (2 (1 - 2 gamma)) s log(1/s), the tail-decay constraint in s = t^{1 - 2 gamma}.
double tail_decay_f(double s, double A, int d, double gamma);

// A = -log((eta/10) p(x) pi^{d/2} 2^{-d/2})
double tail_decay_A(int d, double p_x, double eta);

T0Report compute_t0(const RegularityParams& reg, double gamma, double eta);

// The five sufficient conditions behind t0, evaluated at a given t. Each entry is
// (lhs - rhs) normalized so that <= 0 means the condition holds.
struct T0Conditions {
  std::array<double, kT0TermCount> slack;
  // alpha(2t) - eta/10: the Gaussian tail fraction itself, which the gaussian_tail term bounds.
  double alpha_slack;
};
T0Conditions t0_conditions(const RegularityParams& reg, double gamma, double eta, double t);

struct ConcentrationTails {
  double upper_tail;  // bound on P(d_hat - d >= eps)
  double lower_tail;  // bound on P(d_hat - d <= -eps)
  double P_t;
  bool vacuous;  // P_t >= 1: idealized sum outside the kernel-sum range
  // Exponents before exp(-.), kept because the tails underflow for large n.
  double upper_exponent;
  double lower_exponent;
};

// Closed-form Bernstein tails without the t <= t0 guard. n may exceed int64 range in theory plots.
ConcentrationTails concentration_tails(int d, double p_x, double t, double n, double eps, double c);

// Guarded version: throws ThresholdError when cfg.t exceeds t0(reg, gamma, eta(eps, c)).
ConcentrationTails concentration_bound(const RegularityParams& reg, const BoundConfig& cfg);

namespace detail {

// Named intermediates of the anti-concentration bound.
struct AntiConcConstants {
  double gamma_plus;
  double gamma_minus;
  double delta_plus;
  double delta_minus;
  double eta;
  double eta_star_plus;
  double eta_star_minus;
};

AntiConcConstants anticoncentration_constants(int d, double eps, double c);

// Gamma_0 = 1 - 2 (2/3)^{d/2} + 2^{-d/2}, the eps -> 0 limit of Gamma_+-.
double gamma_zero(int d);

}  // namespace detail

struct AntiConcentration {
  double value;      // clipped to [0, 1]
  double unclipped;  // sum of the two Phi terms, the Berry-Esseen term, minus 1
  double phi_plus;
  double phi_minus;
  double berry_esseen;
  double remainder_scale;  // sqrt(P_t / n); the O(sqrt(P_t/n)) remainder is not added
};

inline constexpr double kBerryEsseenConstant = 0.4748;

// Closed-form anti-concentration bound in terms of P_t and n. Throws PreconditionError
// naming the violated validity condition.
AntiConcentration anticoncentration_value(int d, double P_t, double n, double eps, double c);

// Linearized small-eps form log 2 / sqrt(2 pi Gamma_0 (1 - eta0*)) (1 + c) sqrt(P_t n) eps.
double anticoncentration_linear(int d, double P_t, double n, double eps, double c, double eta);

double anticoncentration_bound(const RegularityParams& reg, const BoundConfig& cfg);

// Critical resolution: inverts the linearized anti-concentration bound at target_prob.
// eta is evaluated at the returned eps through two fixed-point steps.
double eps_star_value(int d, double P_t, double n, double c, double target_prob);
double eps_star(const RegularityParams& reg, const BoundConfig& cfg, double target_prob);

struct BoundReport {
  double P_t;
  double upper_tail;
  double lower_tail;
  std::optional<double> anti_conc;
  std::string anti_conc_error;
  double remainder_scale;
  std::optional<double> eps_star;
  std::string eps_star_error;
  T0Report t0;
  bool vacuous;
};

// All bounds for one configuration. Throws ThresholdError if cfg.t > t0; anti-concentration
// and eps_star validity failures are recorded in the report instead.
BoundReport make_bound_report(const RegularityParams& reg, const BoundConfig& cfg,
                              double target_prob = 0.1);

}  // namespace dimest
