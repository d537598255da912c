#pragma once

#include <stdexcept>
#include <string>

namespace owlsim {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Bad user input: out-of-range parameter, malformed config, invalid scene.
/// The CLI maps this family to exit code 2.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Coincident or inverted transmitter/receiver placement.
struct GeometryError : ValidationError {
  using ValidationError::ValidationError;
};

/// Linear-algebra contract cannot be met (more users than elements, ...).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Channel matrix is rank deficient for the requested operation.
/// The message names the suspect users.
struct RankError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace owlsim
