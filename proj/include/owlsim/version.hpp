#pragma once

namespace owlsim {

inline constexpr const char* kToolName = "owlsim";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace owlsim
