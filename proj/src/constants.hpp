#pragma once

#include <cmath>

#include "errors.hpp"

namespace trapsim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// SI constants (2019 redefinition values).
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s

// Atomic reference data for the 85Rb clock transition and the D lines.
// All frequencies are stored as angular frequencies (rad/s) unless the
// field name carries an explicit _hz suffix.
struct PhysicsConstants {
    double hbar = kHbar;
    double k_b = kBoltzmann;
    double c = kSpeedOfLight;

    double omega_hfs = kTwoPi * 3.0357e9;       // ground-state hyperfine splitting
    double gamma_natural = kTwoPi * 6.07e6;     // D2 natural linewidth
    double d1_hz = 377.107e12;                  // D1 line frequency
    double d2_hz = 384.230e12;                  // D2 line frequency

    void validate() const {
        if (!(hbar > 0.0) || !(k_b > 0.0) || !(c > 0.0) || !(omega_hfs > 0.0) ||
            !(gamma_natural > 0.0) || !(d1_hz > 0.0) || !(d2_hz > 0.0)) {
            throw InvalidArgument("PhysicsConstants: all entries must be positive");
        }
        if (!(d1_hz < d2_hz)) {
            throw InvalidArgument("PhysicsConstants: expected d1_hz < d2_hz");
        }
    }
};

inline bool is_finite(double x) { return std::isfinite(x); }

} // namespace trapsim
