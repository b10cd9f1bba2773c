#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dimest/bounds.hpp"
#include "dimest/rng.hpp"
#include "dimest/types.hpp"

namespace dimest {

enum class ManifoldKind { ball, sphere, spherical_cap, circle, swiss_roll, torus };

// generic: second-fundamental-form values (1/R, 1/R^2, R/2).
// paper: the cap values used in the published anti-concentration experiment, L = 1/(2R), M = 1/(2R^2).
enum class RegularityProfile { generic, paper };

std::string_view to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(std::string_view name);
std::string_view to_string(RegularityProfile profile);
RegularityProfile regularity_profile_from_string(std::string_view name);

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::ball;
  int d = 3;                 // intrinsic dimension
  double R = 1.0;            // ball/sphere/cap/circle radius, torus major radius
  double r_minor = 0.5;      // torus tube radius
  double cap_angle = 0.3;    // polar half-angle of the spherical cap, radians
  int ambient_dim = 0;       // 0 selects the natural embedding dimension
  RegularityProfile profile = RegularityProfile::generic;

  static ManifoldSpec ball(int d, double R = 1.0);
  static ManifoldSpec sphere(int d, double R = 1.0);
  static ManifoldSpec spherical_cap(int d, double R, double cap_angle = 0.3);
  static ManifoldSpec circle(double R);
  static ManifoldSpec torus(double R = 2.0, double r_minor = 0.5);
  static ManifoldSpec swiss_roll();

  int natural_ambient_dim() const;
  int effective_ambient_dim() const;
  void validate() const;

  // Canonical point: ball center, sphere/cap pole, circle (R, 0), torus outer equator,
  // swiss roll mid-sheet.
  Point reference_point() const;
  std::string label() const;
};

// Fraction of the full sphere's surface covered by the cap.
double cap_area_fraction(int d, double cap_angle);

PointCloud sample(const ManifoldSpec& spec, Eigen::Index n, Rng& rng);
PointCloud sample(const ManifoldSpec& spec, Eigen::Index n, std::uint64_t seed);

RegularityParams regularity_of(const ManifoldSpec& spec);

struct NoiseSpec {
  double sigma = 0.0;
  int ambient_dim = 0;
  std::uint64_t seed = 0;
};

// Adds i.i.d. N(0, sigma^2 I_N) to every sample. sigma = 0 returns an exact copy.
PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& noise);
PointCloud add_noise(const PointCloud& cloud, double sigma, Rng& rng);

}  // namespace dimest
