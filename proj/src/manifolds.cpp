#include "dimest/manifolds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace dimest {
namespace {

constexpr double kPi = std::numbers::pi;

double unit_ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

// Surface area of the unit d-sphere in R^{d+1}.
double unit_sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1)); }

// Composite Simpson rule for integral_0^b sin^{k}(phi) dphi.
double sine_power_integral(int k, double b) {
  constexpr int panels = 4000;
  const double h = b / panels;
  double acc = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::pow(std::sin(i * h), k);
  }
  return acc * h / 3.0;
}

Point pad(const Eigen::VectorXd& v, int ambient) {
  Point out = Point::Zero(ambient);
  out.head(v.size()) = v;
  return out;
}

}  // namespace

std::string_view to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::ball:
      return "ball";
    case ManifoldKind::sphere:
      return "sphere";
    case ManifoldKind::spherical_cap:
      return "spherical_cap";
    case ManifoldKind::circle:
      return "circle";
    case ManifoldKind::swiss_roll:
      return "swiss_roll";
    case ManifoldKind::torus:
      return "torus";
  }
  return "unknown";
}

ManifoldKind manifold_kind_from_string(std::string_view name) {
  if (name == "ball") return ManifoldKind::ball;
  if (name == "sphere") return ManifoldKind::sphere;
  if (name == "spherical_cap" || name == "cap") return ManifoldKind::spherical_cap;
  if (name == "circle") return ManifoldKind::circle;
  if (name == "swiss_roll") return ManifoldKind::swiss_roll;
  if (name == "torus") return ManifoldKind::torus;
  throw DomainError("unknown manifold kind '" + std::string(name) + "'");
}

std::string_view to_string(RegularityProfile profile) {
  return profile == RegularityProfile::paper ? "paper" : "generic";
}

RegularityProfile regularity_profile_from_string(std::string_view name) {
  if (name == "generic") return RegularityProfile::generic;
  if (name == "paper") return RegularityProfile::paper;
  throw DomainError("unknown regularity profile '" + std::string(name) + "'");
}

ManifoldSpec ManifoldSpec::ball(int d, double R) {
  ManifoldSpec s;
  s.kind = ManifoldKind::ball;
  s.d = d;
  s.R = R;
  return s;
}

ManifoldSpec ManifoldSpec::sphere(int d, double R) {
  ManifoldSpec s;
  s.kind = ManifoldKind::sphere;
  s.d = d;
  s.R = R;
  return s;
}

ManifoldSpec ManifoldSpec::spherical_cap(int d, double R, double cap_angle) {
  ManifoldSpec s;
  s.kind = ManifoldKind::spherical_cap;
  s.d = d;
  s.R = R;
  s.cap_angle = cap_angle;
  return s;
}

ManifoldSpec ManifoldSpec::circle(double R) {
  ManifoldSpec s;
  s.kind = ManifoldKind::circle;
  s.d = 1;
  s.R = R;
  return s;
}

ManifoldSpec ManifoldSpec::torus(double R, double r_minor) {
  ManifoldSpec s;
  s.kind = ManifoldKind::torus;
  s.d = 2;
  s.R = R;
  s.r_minor = r_minor;
  return s;
}

ManifoldSpec ManifoldSpec::swiss_roll() {
  ManifoldSpec s;
  s.kind = ManifoldKind::swiss_roll;
  s.d = 2;
  return s;
}

int ManifoldSpec::natural_ambient_dim() const {
  switch (kind) {
    case ManifoldKind::ball:
      return d;
    case ManifoldKind::sphere:
    case ManifoldKind::spherical_cap:
      return d + 1;
    case ManifoldKind::circle:
      return 2;
    case ManifoldKind::swiss_roll:
    case ManifoldKind::torus:
      return 3;
  }
  return d;
}

int ManifoldSpec::effective_ambient_dim() const {
  return ambient_dim == 0 ? natural_ambient_dim() : ambient_dim;
}

void ManifoldSpec::validate() const {
  if (d < 1) throw DomainError("intrinsic dimension must be >= 1");
  if (kind == ManifoldKind::circle && d != 1) throw DomainError("circle has intrinsic dimension 1");
  if ((kind == ManifoldKind::torus || kind == ManifoldKind::swiss_roll) && d != 2) {
    throw DomainError(std::string(to_string(kind)) + " has intrinsic dimension 2");
  }
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("radius must be positive");
  if (kind == ManifoldKind::torus && !(r_minor > 0.0 && r_minor < R)) {
    throw DomainError("ring torus needs 0 < r_minor < R");
  }
  if (kind == ManifoldKind::spherical_cap && !(cap_angle > 0.0 && cap_angle <= kPi)) {
    throw DomainError("cap angle must lie in (0, pi]");
  }
  if (ambient_dim != 0 && ambient_dim < natural_ambient_dim()) {
    throw ShapeError("ambient dimension " + std::to_string(ambient_dim) + " is below the natural " +
                     std::to_string(natural_ambient_dim()));
  }
}

Point ManifoldSpec::reference_point() const {
  validate();
  const int natural = natural_ambient_dim();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(natural);
  switch (kind) {
    case ManifoldKind::ball:
      break;
    case ManifoldKind::sphere:
    case ManifoldKind::spherical_cap:
      v[natural - 1] = R;
      break;
    case ManifoldKind::circle:
      v[0] = R;
      break;
    case ManifoldKind::torus:
      v[0] = R + r_minor;
      break;
    case ManifoldKind::swiss_roll:
      v << 3.0 * kPi * std::cos(3.0 * kPi), 10.5, 3.0 * kPi * std::sin(3.0 * kPi);
      break;
  }
  return pad(v, effective_ambient_dim());
}

std::string ManifoldSpec::label() const {
  std::string out(to_string(kind));
  out += "_d" + std::to_string(d);
  return out;
}

double cap_area_fraction(int d, double cap_angle) {
  if (d == 1) return cap_angle / kPi;
  return sine_power_integral(d - 1, cap_angle) / sine_power_integral(d - 1, kPi);
}

PointCloud sample(const ManifoldSpec& spec, Eigen::Index n, Rng& rng) {
  spec.validate();
  if (n < 1) throw DomainError("sample count must be >= 1");
  const int natural = spec.natural_ambient_dim();
  PointCloud out = PointCloud::Zero(n, spec.effective_ambient_dim());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto gaussian_direction = [&](int dim) {
    Eigen::VectorXd g(dim);
    double norm = 0.0;
    do {
      for (int k = 0; k < dim; ++k) g[k] = normal(rng);
      norm = g.norm();
    } while (norm == 0.0);
    return Eigen::VectorXd(g / norm);
  };

  switch (spec.kind) {
    case ManifoldKind::ball:
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd dir = gaussian_direction(spec.d);
        const double radius = spec.R * std::pow(unif(rng), 1.0 / spec.d);
        out.row(i).head(natural) = (radius * dir).transpose();
      }
      break;
    case ManifoldKind::sphere:
      for (Eigen::Index i = 0; i < n; ++i) {
        out.row(i).head(natural) = (spec.R * gaussian_direction(natural)).transpose();
      }
      break;
    case ManifoldKind::spherical_cap: {
      const double accept = cap_area_fraction(spec.d, spec.cap_angle);
      if (accept < 1e-3) {
        throw RejectionBudgetError("cap angle " + std::to_string(spec.cap_angle) +
                                   " accepts only a fraction " + std::to_string(accept) + " of sphere draws");
      }
      const double cos_cap = std::cos(spec.cap_angle);
      for (Eigen::Index i = 0; i < n;) {
        const Eigen::VectorXd dir = gaussian_direction(natural);
        if (dir[natural - 1] >= cos_cap) {
          out.row(i).head(natural) = (spec.R * dir).transpose();
          ++i;
        }
      }
      break;
    }
    case ManifoldKind::circle:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double angle = 2.0 * kPi * unif(rng);
        out(i, 0) = spec.R * std::cos(angle);
        out(i, 1) = spec.R * std::sin(angle);
      }
      break;
    case ManifoldKind::torus: {
      const double R = spec.R;
      const double r = spec.r_minor;
      for (Eigen::Index i = 0; i < n;) {
        const double theta = 2.0 * kPi * unif(rng);
        const double phi = 2.0 * kPi * unif(rng);
        // Surface element is proportional to R + r cos(theta).
        if (unif(rng) * (R + r) > R + r * std::cos(theta)) continue;
        const double ring = R + r * std::cos(theta);
        out(i, 0) = ring * std::cos(phi);
        out(i, 1) = ring * std::sin(phi);
        out(i, 2) = r * std::sin(theta);
        ++i;
      }
      break;
    }
    case ManifoldKind::swiss_roll:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = 1.5 * kPi + 3.0 * kPi * unif(rng);
        const double v = 21.0 * unif(rng);
        out(i, 0) = u * std::cos(u);
        out(i, 1) = v;
        out(i, 2) = u * std::sin(u);
      }
      break;
  }
  return out;
}

PointCloud sample(const ManifoldSpec& spec, Eigen::Index n, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  return sample(spec, n, rng);
}

RegularityParams regularity_of(const ManifoldSpec& spec) {
  spec.validate();
  const double inf = std::numeric_limits<double>::infinity();
  const int d = spec.d;
  const double R = spec.R;
  switch (spec.kind) {
    case ManifoldKind::ball:
      return {0.0, 0.0, R, 0.0, 1.0 / (unit_ball_volume(d) * std::pow(R, d)), d, R};
    case ManifoldKind::circle:
      return {1.0 / R, 1.0 / (R * R), R / 2.0, 0.0, 1.0 / (2.0 * kPi * R), 1, inf};
    case ManifoldKind::sphere:
      return {1.0 / R, 1.0 / (R * R), R / 2.0, 0.0, 1.0 / (unit_sphere_area(d) * std::pow(R, d)), d, inf};
    case ManifoldKind::spherical_cap: {
      const double area = unit_sphere_area(d) * std::pow(R, d) * cap_area_fraction(d, spec.cap_angle);
      const double boundary = 2.0 * R * std::sin(spec.cap_angle / 2.0);
      const bool paper = spec.profile == RegularityProfile::paper;
      const double L = paper ? 1.0 / (2.0 * R) : 1.0 / R;
      const double M = paper ? 1.0 / (2.0 * R * R) : 1.0 / (R * R);
      return {L, M, R / 2.0, 0.0, 1.0 / area, d, boundary};
    }
    case ManifoldKind::swiss_roll:
    case ManifoldKind::torus:
      break;
  }
  throw UnsupportedError("no closed-form regularity parameters for " + std::string(to_string(spec.kind)));
}

PointCloud add_noise(const PointCloud& cloud, double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("noise sigma must be >= 0");
  PointCloud out = cloud;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += normal(rng);
  }
  return out;
}

PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& noise) {
  if (noise.ambient_dim != cloud.cols()) {
    throw ShapeError("noise ambient dimension " + std::to_string(noise.ambient_dim) +
                     " does not match cloud dimension " + std::to_string(cloud.cols()));
  }
  Rng rng = make_stream(noise.seed);
  return add_noise(cloud, noise.sigma, rng);
}

}  // namespace dimest
