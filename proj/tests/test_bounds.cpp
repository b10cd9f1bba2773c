#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dimest/bounds.hpp"
#include "dimest/errors.hpp"
#include "dimest/special.hpp"

using namespace dimest;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

RegularityParams flat(int d, double p) { return RegularityParams(0, 0, 1.0, 0, p, d, kInf); }

// Tail bounds written out directly in long double.
std::pair<long double, long double> tails_oracle(int d, long double p, long double t, long double n, long double eps,
                                                 long double c) {
  const long double P = std::pow(2.0L, d / 2.0L) * p * std::pow(kPi * t, d / 2.0L);
  const long double cp = (1 - c) * (std::pow(2.0L, eps / 2) - 1);
  const long double cm = (1 - c) * (1 - std::pow(2.0L, -eps / 2));
  const long double mp = 1 + std::pow(2.0L, (d + eps) / 2);
  const long double mm = 1 + std::pow(2.0L, (d - eps) / 2);
  return {std::exp(-n * cp * cp * P / (std::pow(2.0L, 4 + eps) + 2.0L / 3 * mp * cp)),
          std::exp(-n * cm * cm * P / (std::pow(2.0L, 4 - eps) + 2.0L / 3 * mm * cm))};
}

long double phi(long double x) { return 0.5L * std::erfc(-x / std::sqrt(2.0L)); }

// Anti-concentration bound written out directly, unclipped.
long double anti_oracle(int d, long double P, long double n, long double eps, long double c) {
  const long double a = std::pow(2.0L, eps / 2);
  const long double eta = c * (a - 1) / (1 + a);
  const long double tt = std::pow(2.0L / 3, d / 2.0L);
  auto G = [&](long double e) { return 1 - std::pow(2.0L, 1 - e / 2) * tt + std::pow(2.0L, -d / 2.0L - e); };
  auto W = [&](long double e) { return 1 + std::pow(2.0L, 1 - e / 2) * tt + std::pow(2.0L, -d / 2.0L - e); };
  auto D = [&](long double e) {
    return tt + 3 * std::pow(2.0L, d / 2.0L - e / 2) * std::pow(5.0L, -d / 2.0L) + 3 * std::pow(2.0L, -e - d) +
           std::pow(2.0L, -1.5L * e - d / 2.0L) * std::pow(3.0L, -d / 2.0L);
  };
  const long double gp = G(eps), gm = G(-eps);
  const long double ep = eta * W(eps) / gp, em = eta * W(-eps) / gm;
  const long double m = std::sqrt(P * n);
  const long double t1 = phi((a - 1) * (1 + c) * m / (a * std::sqrt(gp * (1 - ep))));
  const long double t2 = phi((1 - 1 / a) * (1 + c) * m / ((1 / a) * std::sqrt(gm * (1 - em))));
  const long double be = 0.4748L * (1 + eta) * std::pow(2.0L, d / 2.0L) / m *
                         (D(eps) / std::pow((1 - ep) * gp, 1.5L) + D(-eps) / std::pow((1 - em) * gm, 1.5L));
  return t1 + t2 + be - 1;
}

}  // namespace

TEST_CASE("eta from eps and c") {
  for (double eps : {0.01, 0.5, 1.0, 3.0}) {
    const double a = std::pow(2.0, eps / 2);
    CHECK(eta_from(eps, 0.5) == doctest::Approx(0.5 * (a - 1) / (1 + a)).epsilon(1e-14));
  }
  BoundConfig cfg;
  cfg.t = 0.01;
  CHECK_NOTHROW(cfg.validate());
  cfg.gamma = 0.25;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.gamma = 0.4;
  cfg.c = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("regularity validation") {
  CHECK_THROWS_AS(RegularityParams(-1, 0, 1, 0, 1, 3, kInf).validate(), DomainError);
  CHECK_THROWS_AS(RegularityParams(0, 0, 0, 0, 1, 3, kInf).validate(), DomainError);
  CHECK_THROWS_AS(RegularityParams(0, 0, 1, 0, 0, 3, kInf).validate(), DomainError);
  CHECK_THROWS_AS(RegularityParams(0, 0, 1, 0, 1, 0, kInf).validate(), DomainError);
  CHECK_THROWS_AS(RegularityParams(0, 0, 1, 0, 1, 3, 0).validate(), DomainError);
}

TEST_CASE("idealized kernel mass") {
  CHECK(idealized_kernel_mass(3, 3 / (4 * kPi), 0.01) ==
        doctest::Approx(std::pow(2.0, 1.5) * 0.75 * std::sqrt(kPi) * 1e-3).epsilon(1e-14));
  CHECK(idealized_kernel_mass(3, 3 / (4 * kPi), 0.01) == doctest::Approx(3.7599e-3).epsilon(1e-4));
}

TEST_CASE("moment envelope, flat case collapses") {
  const double gamma = 0.4;
  const double t = std::pow(50.0, 1 / (2 * gamma - 1));  // r0^2 / t = 50
  for (int d : {1, 2, 3}) {
    const double p = 0.3;
    const auto env = moment_envelope(flat(d, p), t, gamma);
    const double base = p * std::pow(kPi * t, d / 2.0);
    CHECK(env.lower == doctest::Approx((1 - regularized_gamma_Q(d / 2.0, 50)) * base).epsilon(1e-14));
    CHECK(env.upper == doctest::Approx(base + std::exp(-50.0)).epsilon(1e-14));
    CHECK(env.lower == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("moment envelope, one-dimensional quadrature") {
  const double t = 0.01, gamma = 0.4;
  const double r0 = std::pow(t, gamma);
  CHECK(r0 == doctest::Approx(0.15849).epsilon(1e-4));
  CHECK(r0 * r0 / t == doctest::Approx(2.5119).epsilon(1e-4));
  CHECK(regularized_gamma_Q(0.5, r0 * r0 / t) == doctest::Approx(std::erfc(std::sqrt(r0 * r0 / t))).epsilon(1e-12));
  // Simpson on int_{-r0}^{r0} exp(-z^2 / t) dz
  const int m = 20000;
  const long double h = 2.0L * r0 / m;
  long double acc = 0;
  for (int i = 0; i <= m; ++i) {
    const long double z = -r0 + i * h;
    const long double f = std::exp(-z * z / t);
    acc += (i == 0 || i == m) ? f : (i % 2 ? 4 * f : 2 * f);
  }
  const double integral = static_cast<double>(acc * h / 3);
  const auto env = moment_envelope(flat(1, 1.0), t, gamma);
  CHECK(env.lower == doctest::Approx(integral).epsilon(1e-10));
  CHECK(env.upper == doctest::Approx(std::sqrt(kPi * t) + std::exp(-r0 * r0 / t)).epsilon(1e-14));
}

TEST_CASE("moment envelope ordering and preconditions") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    RegularityParams reg(u(rng), u(rng), 1.0, u(rng), 0.1 + u(rng), 1 + static_cast<int>(u(rng) * 5), kInf);
    const double gamma = 0.26 + 0.23 * u(rng);
    const double t = std::pow(10.0, -1 - 6 * u(rng));
    const auto env = moment_envelope(reg, t, gamma);
    CHECK(env.upper >= env.lower);
  }
  RegularityParams small = flat(2, 1.0);
  small.r = 0.01;
  try {
    moment_envelope(small, 0.01, 0.4);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("regularity radius") != std::string::npos);
  }
  RegularityParams bounded = flat(2, 1.0);
  bounded.boundary_dist = 0.01;
  try {
    moment_envelope(bounded, 0.01, 0.4);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("boundary") != std::string::npos);
  }
}

TEST_CASE("t0, only the Gaussian tail term is finite") {
  const auto reg = flat(3, 1e9);
  const double gamma = 0.4, eta = 0.1;
  const double A = tail_decay_A(3, 1e9, eta);
  CHECK(A < 0);
  const auto rep = compute_t0(reg, gamma, eta);
  CHECK(std::isinf(rep.s_T));
  CHECK(std::isinf(rep.term(T0Term::tail_decay)));
  CHECK(std::isinf(rep.term(T0Term::curvature)));
  CHECK(std::isinf(rep.term(T0Term::volume_distortion)));
  CHECK(std::isinf(rep.term(T0Term::density_variation)));
  const double beta = std::sqrt(2.0) * (std::sqrt(3.0) + std::sqrt(2 * std::log(100.0)));
  CHECK(beta == doctest::Approx(6.741422).epsilon(1e-6));
  CHECK(rep.binding == T0Term::gaussian_tail);
  CHECK(rep.t0 == doctest::Approx(std::pow(beta, -1 / (0.5 - gamma))).epsilon(1e-13));
}

TEST_CASE("t0, volume distortion binds") {
  RegularityParams reg(0, 1e6, 1.0, 0, 3 / (4 * kPi), 3, kInf);
  const auto rep = compute_t0(reg, 0.4, 0.1);
  CHECK(rep.binding == T0Term::volume_distortion);
  CHECK(rep.t0 == doctest::Approx(1e-10).epsilon(1e-12));
}

TEST_CASE("t0, flat manifold drops curvature and volume terms") {
  const auto rep = compute_t0(flat(2, 0.5), 0.3, 0.05);
  CHECK(std::isinf(rep.term(T0Term::curvature)));
  CHECK(std::isinf(rep.term(T0Term::volume_distortion)));
  CHECK(std::isinf(rep.term(T0Term::density_variation)));
  CHECK(std::isfinite(rep.term(T0Term::tail_decay)));
}

TEST_CASE("t0 report consistency and explicit terms") {
  RegularityParams reg(0.3, 0.2, 1.0, 0.05, 0.4, 2, kInf);
  const double gamma = 0.3, eta = 0.08;
  const auto rep = compute_t0(reg, gamma, eta);
  double mn = kInf;
  for (double v : rep.terms) mn = std::min(mn, v);
  CHECK(rep.t0 == mn);
  CHECK(rep.term(rep.binding) == rep.t0);
  CHECK(rep.term(T0Term::volume_distortion) == doctest::Approx(std::pow(eta / 10 / 0.2, 1 / (2 * gamma))));
  CHECK(rep.term(T0Term::curvature) ==
        doctest::Approx(std::pow(-std::log(1 - eta / 10) / (2 * 0.09), 1 / (4 * gamma - 1))));
  CHECK(rep.term(T0Term::density_variation) == doctest::Approx(std::pow(0.4 * eta / (20 * 0.05), 1 / gamma)));
  // s* maximizes f; s_T sits on the rising branch at f = 1/2.
  const double A = tail_decay_A(2, 0.4, eta);
  const double fs = tail_decay_f(rep.s_star, A, 2, gamma);
  CHECK(fs >= tail_decay_f(rep.s_star * 1.01, A, 2, gamma));
  CHECK(fs >= tail_decay_f(rep.s_star * 0.99, A, 2, gamma));
  CHECK(tail_decay_f(rep.s_T, A, 2, gamma) < 0.5);
  CHECK(tail_decay_f(rep.s_T + 1e-13, A, 2, gamma) >= 0.5);
}

TEST_CASE("tail-decay function is concave") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + static_cast<int>(u(rng) * 4);
    const double gamma = 0.26 + 0.23 * u(rng);
    const double A = tail_decay_A(d, 0.1 + u(rng), 0.01 + 0.4 * u(rng));
    const double D = d / (2 * (1 - 2 * gamma));
    const double s_star = std::exp(A / D - 1);
    const double s1 = s_star * u(rng), s2 = s_star * u(rng);
    CHECK(tail_decay_f(0.5 * (s1 + s2), A, d, gamma) >=
          0.5 * (tail_decay_f(s1, A, d, gamma) + tail_decay_f(s2, A, d, gamma)) - 1e-12);
  }
}

TEST_CASE("t0 domain errors") {
  CHECK_THROWS_AS(compute_t0(flat(3, 1), 0.4, 0.0), DomainError);
  CHECK_THROWS_AS(compute_t0(flat(3, 1), 0.4, 0.5), DomainError);
  CHECK_THROWS_AS(compute_t0(flat(3, 1), 0.5, 0.1), DomainError);
}

TEST_CASE("concentration tails, worked example") {
  const double p = 3 / (4 * kPi);
  const auto tails = concentration_tails(3, p, 0.01, 1e6, 1.0, 0.5);
  const auto [up, lo] = tails_oracle(3, p, 0.01L, 1e6L, 1.0L, 0.5L);
  CHECK(tails.upper_tail == doctest::Approx(static_cast<double>(up)).epsilon(1e-12));
  CHECK(tails.lower_tail == doctest::Approx(static_cast<double>(lo)).epsilon(1e-12));
  CHECK(tails.upper_tail == doctest::Approx(7.2e-3).epsilon(0.01));
  CHECK(tails.P_t == doctest::Approx(3.7599e-3).epsilon(1e-4));
  CHECK(0.5 * (std::sqrt(2.0) - 1) == doctest::Approx(0.207107).epsilon(1e-6));
  CHECK(!tails.vacuous);
}

TEST_CASE("concentration tails against the oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + static_cast<int>(u(rng) * 6);
    const double p = 0.05 + u(rng), t = std::pow(10.0, -4 * u(rng)), n = std::pow(10.0, 6 * u(rng));
    const double eps = 0.05 + 2 * u(rng), c = 0.05 + 0.9 * u(rng);
    const auto tails = concentration_tails(d, p, t, n, eps, c);
    const auto [up, lo] = tails_oracle(d, p, t, n, eps, c);
    CHECK(tails.upper_tail == doctest::Approx(static_cast<double>(up)).epsilon(1e-10));
    CHECK(tails.lower_tail == doctest::Approx(static_cast<double>(lo)).epsilon(1e-10));
  }
}

TEST_CASE("concentration tails monotonicity") {
  const double p = 0.3, t = 0.02;
  const auto at = [&](double n, double eps, double c) { return concentration_tails(3, p, t, n, eps, c); };
  CHECK(at(0, 1, 0.5).upper_tail == 1.0);
  CHECK(at(0, 1, 0.5).lower_tail == 1.0);
  double prev_u = 1.1, prev_l = 1.1;
  for (double n : {1e3, 1e4, 1e5}) {
    const auto r = at(n, 1.0, 0.5);
    CHECK(r.upper_tail < prev_u);
    CHECK(r.lower_tail < prev_l);
    prev_u = r.upper_tail;
    prev_l = r.lower_tail;
  }
  prev_u = prev_l = 1.1;
  for (double eps = 0.1; eps <= 2.0; eps += 0.1) {
    const auto r = at(1e4, eps, 0.5);
    CHECK(r.upper_tail < prev_u);
    CHECK(r.lower_tail < prev_l);
    prev_u = r.upper_tail;
    prev_l = r.lower_tail;
  }
  prev_u = prev_l = -1;
  for (double c = 0.1; c < 1.0; c += 0.1) {
    const auto r = at(1e4, 1.0, c);
    CHECK(r.upper_tail > prev_u);
    CHECK(r.lower_tail > prev_l);
    prev_u = r.upper_tail;
    prev_l = r.lower_tail;
  }
  CHECK(concentration_tails(3, 1e6, 1.0, 10, 1, 0.5).vacuous);
}

TEST_CASE("concentration bound refuses bandwidths above t0") {
  const auto reg = flat(3, 3 / (4 * kPi));
  BoundConfig cfg;
  cfg.n = 1000;
  const double t0 = compute_t0(reg, cfg.gamma, cfg.eta()).t0;
  cfg.t = 2 * t0;
  try {
    concentration_bound(reg, cfg);
    FAIL("expected a threshold error");
  } catch (const ThresholdError& e) {
    CHECK(e.t() == 2 * t0);
    CHECK(e.t0() == t0);
  }
  CHECK_THROWS_AS(make_bound_report(reg, cfg), ThresholdError);
  CHECK_THROWS_AS(anticoncentration_bound(reg, cfg), ThresholdError);
  cfg.t = t0;
  CHECK_NOTHROW(concentration_bound(reg, cfg));
}

TEST_CASE("anti-concentration constants") {
  CHECK(detail::gamma_zero(3) == doctest::Approx(0.264891).epsilon(1e-6));
  const auto k = detail::anticoncentration_constants(3, 1e-7, 0.5);
  CHECK(k.gamma_plus == doctest::Approx(detail::gamma_zero(3)).epsilon(1e-6));
  CHECK(k.gamma_minus == doctest::Approx(detail::gamma_zero(3)).epsilon(1e-6));
}

TEST_CASE("anti-concentration against the oracle") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0, 1);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    const int d = 1 + static_cast<int>(u(rng) * 5);
    const double P = std::pow(10.0, -6 * u(rng)), n = std::pow(10.0, 3 + 8 * u(rng));
    const double eps = 0.01 + 0.5 * u(rng), c = 0.05 + 0.9 * u(rng);
    try {
      const auto a = anticoncentration_value(d, P, n, eps, c);
      const double oracle = static_cast<double>(anti_oracle(d, P, n, eps, c));
      CHECK(a.unclipped == doctest::Approx(oracle).epsilon(1e-9));
      CHECK(a.value == std::clamp(a.unclipped, 0.0, 1.0));
      CHECK(a.remainder_scale == doctest::Approx(std::sqrt(P / n)));
      ++checked;
    } catch (const PreconditionError&) {
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("anti-concentration saturates for large mass") {
  const auto a = anticoncentration_value(3, 1e-2, 1e14, 0.5, 0.5);
  CHECK(a.phi_plus == doctest::Approx(1.0));
  CHECK(a.phi_minus == doctest::Approx(1.0));
  CHECK(a.value == 1.0);
  // Berry-Esseen term decays like 1 / sqrt(P_t n).
  const auto b = anticoncentration_value(3, 1e-2, 1e16, 0.5, 0.5);
  CHECK(b.berry_esseen == doctest::Approx(0.1 * a.berry_esseen).epsilon(1e-12));
  CHECK(b.berry_esseen < 2e-5);
}

TEST_CASE("anti-concentration is nondecreasing in eps") {
  for (double n : {1e6, 1e8, 1e11}) {
    double prev = -1;
    int valid = 0;
    for (double eps = 0.01; eps <= 1.0; eps += 0.01) {
      try {
        const double v = anticoncentration_value(3, 1e-7, n, eps, 0.5).value;
        CHECK(v >= prev);
        prev = v;
        ++valid;
      } catch (const PreconditionError&) {
        break;  // admissible range ends here
      }
    }
    CHECK(valid >= 20);
  }
}

TEST_CASE("anti-concentration validity errors") {
  // Gamma_- turns negative for large eps in low dimension.
  bool threw = false;
  for (double eps = 0.5; eps < 8; eps += 0.5) {
    try {
      anticoncentration_value(1, 1e-3, 1e6, eps, 0.9);
    } catch (const PreconditionError& e) {
      threw = true;
      CHECK(std::string(e.what()).find("Gamma") != std::string::npos);
      break;
    }
  }
  CHECK(threw);
}

TEST_CASE("eps star scaling") {
  // eta is re-evaluated at eps*, so the ratio approaches 1/2 as P_t n grows.
  const double P = 1e-4;
  double prev_gap = 1;
  for (double n : {1e4, 1e6, 1e8}) {
    const double r = eps_star_value(3, P, 4 * n, 0.5, 0.1) / eps_star_value(3, P, n, 0.5, 0.1);
    CHECK(r == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(std::abs(r - 0.5) < prev_gap);
    prev_gap = std::abs(r - 0.5);
  }
  CHECK(prev_gap < 5e-4);
  // Doubling p(x) doubles P_t and halves eps*^2.
  const double e1 = eps_star_value(3, P, 1e8, 0.5, 0.1), e2 = eps_star_value(3, 2 * P, 1e8, 0.5, 0.1);
  CHECK(e2 * e2 / (e1 * e1) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("eps star inverts the linear form") {
  const double P = 1e-4, n = 1e7, c = 0.5;
  const double e = eps_star_value(3, P, n, c, 0.1);
  CHECK(anticoncentration_linear(3, P, n, e, c, eta_from(e, c)) == doctest::Approx(0.1).epsilon(1e-4));
  CHECK_THROWS_AS(eps_star_value(3, P, n, c, 1.5), DomainError);
}

TEST_CASE("bound report") {
  const auto reg = flat(3, 3 / (4 * kPi));
  BoundConfig cfg;
  cfg.gamma = 0.26;
  cfg.n = 1000000;
  cfg.eps = 0.5;
  cfg.t = 0.9 * compute_t0(reg, cfg.gamma, cfg.eta()).t0;
  const auto rep = make_bound_report(reg, cfg);
  CHECK(rep.P_t > 0);
  CHECK(rep.upper_tail > 0);
  CHECK(rep.upper_tail <= 1);
  CHECK(rep.lower_tail <= 1);
  CHECK(rep.remainder_scale == doctest::Approx(std::sqrt(rep.P_t / 1e6)));
  REQUIRE(rep.anti_conc.has_value());
  CHECK(*rep.anti_conc >= 0);
  CHECK(*rep.anti_conc <= 1);
  CHECK(rep.eps_star.has_value() != !rep.eps_star_error.empty());
}
