#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "owlsim/common.hpp"

namespace owlsim::geometry {

using Vec3 = Eigen::Vector3d;

struct Room {
  double length_m = 5.0;
  double width_m = 5.0;
  double height_m = 3.0;
  double rx_plane_height_m = 0.85;

  void validate() const {
    if (length_m <= 0 || width_m <= 0 || height_m <= 0)
      throw ValidationError("room dimensions must be strictly positive");
    if (rx_plane_height_m <= 0 || rx_plane_height_m >= height_m)
      throw ValidationError(
          "room.rx_plane_height_m must lie strictly between 0 and height_m");
  }

  bool contains_floor_point(double x, double y) const {
    return x >= 0.0 && x <= length_m && y >= 0.0 && y <= width_m;
  }
};

struct VcselElement {
  Vec3 position{0, 0, 0};
  Vec3 boresight{0, 0, -1};  // emission axis, must point into the lower hemisphere
  double beam_waist_m = 5e-6;
  double wavelength_m = 850e-9;
  double optical_power_w = 1.0;

  void validate() const {
    if (std::abs(boresight.norm() - 1.0) > 1e-12)
      throw ValidationError("element boresight must be unit-norm");
    if (boresight.z() > 0.0)
      throw ValidationError("element boresight must not point upward (z <= 0)");
    if (beam_waist_m <= 0 || wavelength_m <= 0 || optical_power_w <= 0)
      throw ValidationError(
          "beam_waist_m, wavelength_m, optical_power_w must be positive");
  }
};

struct TransmitterUnit {
  Vec3 center{0, 0, 0};
  std::vector<VcselElement> elements;

  void validate() const {
    if (elements.empty())
      throw ValidationError("transmitter unit needs at least one element");
    for (const auto& e : elements) {
      e.validate();
      if ((e.position - center).norm() > 0.05)
        throw ValidationError("element farther than 5 cm from unit center");
    }
  }
};

struct AdrBranch {
  double azimuth_deg = 0.0;
  double elevation_deg = 60.0;
  double fov_deg = 25.0;     // half-angle
  double area_m2 = 20e-6;

  void validate() const {
    if (azimuth_deg < 0.0 || azimuth_deg >= 360.0)
      throw ValidationError("branch azimuth_deg must be in [0, 360)");
    if (elevation_deg <= 0.0 || elevation_deg > 90.0)
      throw ValidationError("branch elevation_deg must be in (0, 90]");
    if (fov_deg <= 0.0 || fov_deg >= 90.0)
      throw ValidationError("branch fov_deg must be in (0, 90)");
    if (area_m2 <= 0.0) throw ValidationError("branch area_m2 must be positive");
  }
};

/// Angle-diversity receiver: several narrow-FOV photodiode branches facing
/// different directions, one responsivity shared by all branches.
struct Adr {
  std::vector<AdrBranch> branches;
  double responsivity_a_per_w = 0.4;

  void validate() const {
    if (branches.empty()) throw ValidationError("receiver needs branches");
    if (responsivity_a_per_w <= 0.0)
      throw ValidationError("responsivity must be positive");
    for (const auto& b : branches) b.validate();
  }
};

/// Line-of-sight link geometry between one emitter and one receiver branch.
struct LosGeometry {
  double distance_m;            // d
  double radiance_angle_rad;    // phi, emitter boresight to tx->rx ray
  double incidence_angle_rad;   // psi, branch normal to rx->tx ray
  double off_axis_m;            // r = d * sin(phi), distance from beam axis
};

/// Outward normal of a receiver branch; elevation measured from the
/// horizontal plane, so elevation 90 deg is the zenith.
inline Vec3 branch_normal(double azimuth_deg, double elevation_deg) {
  if (azimuth_deg < 0.0 || azimuth_deg >= 360.0)
    throw ValidationError("branch_normal: azimuth_deg must be in [0, 360)");
  if (elevation_deg <= 0.0 || elevation_deg > 90.0)
    throw ValidationError("branch_normal: elevation_deg must be in (0, 90]");
  const double az = deg_to_rad(azimuth_deg);
  const double el = deg_to_rad(elevation_deg);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
          std::sin(el)};
}

inline double angle_between(const Vec3& a, const Vec3& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline LosGeometry los_geometry(const VcselElement& element, const Vec3& rx_point,
                                const Vec3& branch_normal) {
  const Vec3 ray = rx_point - element.position;  // tx -> rx
  const double d = ray.norm();
  if (d < 1e-12)
    throw GeometryError("los_geometry: transmitter and receiver coincide");
  if (element.position.z() - rx_point.z() <= 0.0)
    throw GeometryError("los_geometry: receiver must sit below the emitter");
  LosGeometry g;
  g.distance_m = d;
  g.radiance_angle_rad = angle_between(element.boresight, ray);
  g.incidence_angle_rad = angle_between(branch_normal, -ray);
  g.off_axis_m = d * std::sin(g.radiance_angle_rad);
  return g;
}

/// Everything needed to lay out the transmitters and the receiver template.
/// Defaults describe one 5 m x 5 m x 3 m room with four ceiling units and a
/// four-branch receiver (azimuths 0/90/180/270, elevation 60, FOV 25).
struct SceneSpec {
  Room room;
  std::vector<Vec3> unit_centers = {
      {3.5, 3.5, 3.0}, {1.5, 3.5, 3.0}, {3.5, 1.5, 3.0}, {1.5, 1.5, 3.0}};
  int elements_per_unit = 10;
  double tilt_deg = 20.0;  // off-vertical tilt of the non-central elements
  double beam_waist_m = 5e-6;
  double wavelength_m = 850e-9;
  // Per-element transmit power, calibrated so the stock room lands in the
  // multi-Gb/s regime: at 1 W a served user's channel entries are ~1e-5 A
  // per unit symbol against a ~1e-13 A^2 thermal noise floor.
  double optical_power_w = 1.0;
  std::vector<double> adr_azimuths_deg = {0.0, 90.0, 180.0, 270.0};
  double adr_elevation_deg = 60.0;
  double adr_fov_deg = 25.0;
  double adr_area_m2 = 20e-6;
  double responsivity_a_per_w = 0.4;
};

struct Scene {
  Room room;
  std::vector<TransmitterUnit> units;
  Adr adr;  // template shared by every user

  int element_count() const {
    std::size_t n = 0;
    for (const auto& u : units) n += u.elements.size();
    return static_cast<int>(n);
  }

  /// Flattened element access, unit-major: unit 0's elements come first.
  /// This ordering defines the channel-matrix column order.
  VcselElement& element(int flat) {
    for (auto& u : units) {
      if (flat < static_cast<int>(u.elements.size())) return u.elements[flat];
      flat -= static_cast<int>(u.elements.size());
    }
    throw ValidationError("element index out of range");
  }
  const VcselElement& element(int flat) const {
    return const_cast<Scene*>(this)->element(flat);
  }

  void validate() const {
    room.validate();
    if (units.empty()) throw ValidationError("scene needs transmitter units");
    for (const auto& u : units) u.validate();
    adr.validate();
  }
};

/// Element layout inside a unit: one boresight straight down, the rest tilted
/// by tilt_deg at evenly spaced azimuths. All positions collapse onto the unit
/// center; intra-unit spacing is negligible at room scale.
inline TransmitterUnit make_unit(const Vec3& center, int n_elements,
                                 double tilt_deg, const SceneSpec& s) {
  if (n_elements < 1)
    throw ValidationError("elements_per_unit must be at least 1");
  TransmitterUnit unit;
  unit.center = center;
  const double tilt = deg_to_rad(tilt_deg);
  for (int i = 0; i < n_elements; ++i) {
    VcselElement e;
    e.position = center;
    e.beam_waist_m = s.beam_waist_m;
    e.wavelength_m = s.wavelength_m;
    e.optical_power_w = s.optical_power_w;
    if (i == 0) {
      e.boresight = Vec3(0, 0, -1);
    } else {
      const double az = 2.0 * kPi * (i - 1) / (n_elements - 1);
      e.boresight = Vec3(std::sin(tilt) * std::cos(az),
                         std::sin(tilt) * std::sin(az), -std::cos(tilt));
    }
    unit.elements.push_back(e);
  }
  return unit;
}

inline Scene build_scene(const SceneSpec& spec) {
  Scene scene;
  scene.room = spec.room;
  if (spec.unit_centers.empty())
    throw ValidationError("scene needs at least one transmitter unit");
  if (spec.tilt_deg < 0.0 || spec.tilt_deg >= 90.0)
    throw ValidationError("tilt_deg must be in [0, 90)");
  spec.room.validate();
  for (const auto& c : spec.unit_centers) {
    if (!spec.room.contains_floor_point(c.x(), c.y()) ||
        c.z() <= spec.room.rx_plane_height_m || c.z() > spec.room.height_m)
      throw ValidationError("transmitter unit center outside the room");
    scene.units.push_back(
        make_unit(c, spec.elements_per_unit, spec.tilt_deg, spec));
  }
  for (double az : spec.adr_azimuths_deg) {
    AdrBranch b;
    b.azimuth_deg = az;
    b.elevation_deg = spec.adr_elevation_deg;
    b.fov_deg = spec.adr_fov_deg;
    b.area_m2 = spec.adr_area_m2;
    scene.adr.branches.push_back(b);
  }
  scene.adr.responsivity_a_per_w = spec.responsivity_a_per_w;
  scene.validate();
  return scene;
}

inline Scene default_scene() { return build_scene(SceneSpec{}); }

/// Re-aim every element at a user: flattened element i tracks user i mod K.
/// Users must lie below the ceiling plane for the boresights to stay valid.
inline void steer_at_users(Scene& scene, const std::vector<Vec3>& users) {
  if (users.empty()) throw ValidationError("steer_at_users: no users");
  const int n = scene.element_count();
  for (int i = 0; i < n; ++i) {
    auto& e = scene.element(i);
    const Vec3& target = users[static_cast<std::size_t>(i) % users.size()];
    const Vec3 dir = target - e.position;
    if (dir.norm() < 1e-12 || dir.z() >= 0.0)
      throw GeometryError("steer_at_users: user not below element");
    e.boresight = dir.normalized();
  }
}

}  // namespace owlsim::geometry
