#pragma once

#include "constants.hpp"

namespace trapsim::trap {

// Dipole trap description. Depth is carried as U0/k_B in kelvin throughout;
// delta_eff is the single effective (red, negative) detuning that collapses
// the D1/D2 contributions.
struct TrapParams {
    double depth_k = 300e-6;        // K
    double waist_m = 9.7e-6;        // m
    double wavelength_m = 815e-9;   // m
    double delta_eff = -kTwoPi * 13.04e12; // rad/s, < 0

    void validate() const;
};

struct FieldParams {
    double bias_field_t = 50e-6; // T, along the quantization axis

    void validate() const;
};

// Inputs of the resonance-shift line: physics constants, the quadratic
// Zeeman coefficient of the clock transition, and the configured sign of
// the differential light shift relative to it.
struct ShiftModel {
    PhysicsConstants constants;
    double zeeman_coefficient_hz_per_t2 = 1.28e11; // Hz/T^2 (1280 Hz/G^2)
    int light_shift_sign = +1;

    void validate() const;
};

// Effective detuning from the 2/3 D2 + 1/3 D1 line-strength weighting:
// 1/delta_eff = (2/3)/delta_D2 + (1/3)/delta_D1. Negative for wavelengths
// red of both lines.
double effective_detuning(double wavelength_m, const PhysicsConstants& constants);

// Photon scattering rate of the trapping light at full depth:
// Gamma_sc = (Gamma_natural / |delta_eff|) * (U0 / hbar).
double scattering_rate(const TrapParams& trap, const PhysicsConstants& constants);

// Trap-bottom differential light shift of the clock transition:
// delta_ls = (omega_hfs / |delta_eff|) * (U0 / hbar).
double differential_light_shift(const TrapParams& trap,
                                const PhysicsConstants& constants);

// Quadratic Zeeman shift 2*pi*K_Z*B^2 (positive).
double quadratic_zeeman_shift(const FieldParams& field, const ShiftModel& model);

// Total resonance shift, affine in depth:
// sign_ls * delta_ls(U0) + delta_qz(B).
double total_resonance_shift(const TrapParams& trap, const FieldParams& field,
                             const ShiftModel& model);

} // namespace trapsim::trap
