#include "dimest/harness/json_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

namespace dimest::harness {

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw DomainError("expected a number, got " + j.dump());
}

json to_json(const RegularityParams& reg) {
  return {{"L", number(reg.L)},       {"M", number(reg.M)},         {"r", number(reg.r)},
          {"kappa", number(reg.kappa)}, {"p_x", number(reg.p_x)},   {"d", reg.d},
          {"boundary_dist", number(reg.boundary_dist)}};
}

json to_json(const T0Report& rep) {
  json terms = json::object();
  for (std::size_t i = 0; i < kT0TermCount; ++i) {
    terms[std::string(to_string(static_cast<T0Term>(i)))] = number(rep.terms[i]);
  }
  return {{"t0", number(rep.t0)},
          {"binding", std::string(to_string(rep.binding))},
          {"terms", terms},
          {"s_star", number(rep.s_star)},
          {"s_T", number(rep.s_T)}};
}

json to_json(const BoundReport& rep) {
  json j = {{"P_t", number(rep.P_t)},
            {"upper_tail", number(rep.upper_tail)},
            {"lower_tail", number(rep.lower_tail)},
            {"remainder_scale", number(rep.remainder_scale)},
            {"t0", to_json(rep.t0)},
            {"vacuous_warning", rep.vacuous}};
  j["anti_conc"] = rep.anti_conc ? number(*rep.anti_conc) : json(nullptr);
  if (!rep.anti_conc_error.empty()) j["anti_conc_error"] = rep.anti_conc_error;
  j["eps_star"] = rep.eps_star ? number(*rep.eps_star) : json(nullptr);
  if (!rep.eps_star_error.empty()) j["eps_star_error"] = rep.eps_star_error;
  return j;
}

json to_json(const ManifoldSpec& spec) {
  json j = {{"kind", std::string(to_string(spec.kind))},
            {"d", spec.d},
            {"R", spec.R},
            {"ambient_dim", spec.effective_ambient_dim()}};
  if (spec.kind == ManifoldKind::torus) j["r_minor"] = spec.r_minor;
  if (spec.kind == ManifoldKind::spherical_cap) {
    j["cap_angle"] = spec.cap_angle;
    j["profile"] = std::string(to_string(spec.profile));
  }
  return j;
}

ManifoldSpec manifold_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw DomainError("manifold entry needs a \"kind\"");
  const ManifoldKind kind = manifold_kind_from_string(j.at("kind").get<std::string>());
  ManifoldSpec spec;
  switch (kind) {
    case ManifoldKind::ball:
      spec = ManifoldSpec::ball(j.value("d", 3), j.value("R", 1.0));
      break;
    case ManifoldKind::sphere:
      spec = ManifoldSpec::sphere(j.value("d", 4), j.value("R", 1.0));
      break;
    case ManifoldKind::spherical_cap:
      spec = ManifoldSpec::spherical_cap(j.value("d", 3), j.value("R", 10.0), j.value("cap_angle", 0.3));
      break;
    case ManifoldKind::circle:
      spec = ManifoldSpec::circle(j.value("R", 1.0));
      break;
    case ManifoldKind::torus:
      spec = ManifoldSpec::torus(j.value("R", 2.0), j.value("r_minor", 0.5));
      break;
    case ManifoldKind::swiss_roll:
      spec = ManifoldSpec::swiss_roll();
      break;
  }
  spec.ambient_dim = j.value("ambient_dim", 0);
  if (j.contains("profile")) spec.profile = regularity_profile_from_string(j.at("profile").get<std::string>());
  spec.validate();
  return spec;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dimest::harness
