#pragma once

#include <cmath>

#include "owlsim/common.hpp"
#include "owlsim/geometry.hpp"

namespace owlsim::optics {

enum class GainModelKind { GaussianBeam, Lambertian };

struct GainModel {
  GainModelKind variant = GainModelKind::Lambertian;
  double lambertian_order = 1.0;  // m, used when variant == Lambertian

  void validate() const {
    if (variant == GainModelKind::Lambertian && lambertian_order < 1.0)
      throw ValidationError("lambertian_order must be >= 1");
  }
};

/// Order of the cos^m emission pattern from the half-power semi-angle:
/// m = -ln 2 / ln cos(semi_angle). 60 deg gives m = 1 (ideal Lambertian).
inline double lambertian_order(double semi_angle_deg) {
  if (semi_angle_deg <= 0.0 || semi_angle_deg >= 90.0)
    throw ValidationError("lambertian_order: semi-angle must be in (0, 90) deg");
  return -std::log(2.0) / std::log(std::cos(deg_to_rad(semi_angle_deg)));
}

/// LOS gain of a generalized Lambertian emitter into a flat detector:
/// (m+1) A / (2 pi d^2) * cos^m(phi) * cos(psi). Zero outside the branch FOV
/// and for grazing or backward emission (phi >= 90 deg).
inline double lambertian_gain(const geometry::LosGeometry& geom, double order,
                              double area_m2, double fov_deg) {
  const double fov = deg_to_rad(fov_deg);
  if (geom.incidence_angle_rad > fov) return 0.0;
  if (geom.radiance_angle_rad >= 0.5 * kPi) return 0.0;
  const double d2 = geom.distance_m * geom.distance_m;
  return (order + 1.0) * area_m2 / (2.0 * kPi * d2) *
         std::pow(std::cos(geom.radiance_angle_rad), order) *
         std::cos(geom.incidence_angle_rad);
}

/// Gaussian beam radius after propagating distance d from the waist:
/// W(d) = W0 sqrt(1 + (d/z_R)^2), Rayleigh range z_R = pi W0^2 / lambda.
inline double gaussian_beam_radius(double w0_m, double wavelength_m,
                                   double d_m) {
  if (w0_m <= 0.0 || wavelength_m <= 0.0 || d_m < 0.0)
    throw ValidationError("gaussian_beam_radius: nonpositive argument");
  const double zr = kPi * w0_m * w0_m / wavelength_m;
  const double q = d_m / zr;
  return w0_m * std::sqrt(1.0 + q * q);
}

/// Fraction of a Gaussian beam's power captured by a detector of area A at
/// off-axis distance r: intensity at the detector center times A, times the
/// incidence cosine. FOV-gated like the Lambertian model, clamped to 1 so a
/// detector can never capture more than the emitted power. The center-point
/// approximation is good while the detector is small against the beam spot.
inline double gaussian_gain(const geometry::LosGeometry& geom, double w0_m,
                            double wavelength_m, double area_m2,
                            double fov_deg) {
  const double fov = deg_to_rad(fov_deg);
  if (geom.incidence_angle_rad > fov) return 0.0;
  const double w = gaussian_beam_radius(w0_m, wavelength_m, geom.distance_m);
  const double r2 = geom.off_axis_m * geom.off_axis_m;
  const double gain = 2.0 / (kPi * w * w) * std::exp(-2.0 * r2 / (w * w)) *
                      area_m2 * std::cos(geom.incidence_angle_rad);
  return gain > 1.0 ? 1.0 : gain;
}

/// Receiver noise variance sigma^2 = NSD^2 * bandwidth, in A^2.
inline double noise_variance(double nsd_a_per_rthz, double bandwidth_hz) {
  if (nsd_a_per_rthz < 0.0 || bandwidth_hz <= 0.0)
    throw ValidationError("noise_variance: bad NSD or bandwidth");
  return nsd_a_per_rthz * nsd_a_per_rthz * bandwidth_hz;
}

inline constexpr double kElectronChargeC = 1.602176634e-19;

/// Optional shot-noise term 2 q R P_rcv B, added to the thermal variance when
/// enabled in the noise configuration.
inline double shot_noise_variance(double received_optical_w,
                                  double responsivity_a_per_w,
                                  double bandwidth_hz) {
  if (received_optical_w < 0.0)
    throw ValidationError("shot_noise_variance: negative received power");
  return 2.0 * kElectronChargeC * responsivity_a_per_w * received_optical_w *
         bandwidth_hz;
}

struct NoiseModel {
  double current_nsd_a_per_rthz = 4.47e-12;
  double bandwidth_hz = 5e9;
  double variance_a2 = 0.0;  // cached NSD^2 * B
  bool shot_enabled = false;

  static NoiseModel make(double nsd, double bandwidth, bool shot = false) {
    NoiseModel m;
    m.current_nsd_a_per_rthz = nsd;
    m.bandwidth_hz = bandwidth;
    m.variance_a2 = noise_variance(nsd, bandwidth);
    m.shot_enabled = shot;
    return m;
  }
};

}  // namespace owlsim::optics
