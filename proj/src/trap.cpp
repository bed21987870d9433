#include "trap.hpp"

#include <cmath>

#include "errors.hpp"

namespace trapsim::trap {

void TrapParams::validate() const {
    if (!is_finite(depth_k) || depth_k < 0.0) {
        // depth 0 is the empty-trap limit used by the shift intercept
        throw InvalidArgument("TrapParams: depth_k must be >= 0");
    }
    if (!is_finite(waist_m) || !(waist_m > 0.0)) {
        throw InvalidArgument("TrapParams: waist_m must be > 0");
    }
    if (!is_finite(wavelength_m) || !(wavelength_m > 0.0)) {
        throw InvalidArgument("TrapParams: wavelength_m must be > 0");
    }
    if (!is_finite(delta_eff) || !(delta_eff < 0.0)) {
        throw InvalidArgument("TrapParams: delta_eff must be negative (red detuned)");
    }
}

void FieldParams::validate() const {
    if (!is_finite(bias_field_t) || bias_field_t < 0.0) {
        throw InvalidArgument("FieldParams: bias_field_t must be >= 0");
    }
}

void ShiftModel::validate() const {
    constants.validate();
    if (!is_finite(zeeman_coefficient_hz_per_t2) || !(zeeman_coefficient_hz_per_t2 > 0.0)) {
        throw InvalidArgument("ShiftModel: zeeman coefficient must be > 0");
    }
    if (light_shift_sign != 1 && light_shift_sign != -1) {
        throw InvalidArgument("ShiftModel: light_shift_sign must be +1 or -1");
    }
}

double effective_detuning(double wavelength_m, const PhysicsConstants& constants) {
    constants.validate();
    if (!is_finite(wavelength_m) || wavelength_m < 700e-9 || wavelength_m > 1100e-9) {
        throw InvalidArgument(
            "effective_detuning: wavelength outside the 700-1100 nm model window");
    }
    const double nu = constants.c / wavelength_m;
    const double d2 = kTwoPi * (nu - constants.d2_hz);
    const double d1 = kTwoPi * (nu - constants.d1_hz);
    if (d1 == 0.0 || d2 == 0.0) {
        throw InvalidArgument("effective_detuning: wavelength resonant with a D line");
    }
    if ((d1 > 0.0) != (d2 > 0.0)) {
        throw InvalidArgument(
            "effective_detuning: wavelength between the D lines gives an ambiguous sign");
    }
    return 1.0 / (2.0 / 3.0 / d2 + 1.0 / 3.0 / d1);
}

double scattering_rate(const TrapParams& trap, const PhysicsConstants& constants) {
    trap.validate();
    constants.validate();
    const double u0 = constants.k_b * trap.depth_k;
    return constants.gamma_natural / std::abs(trap.delta_eff) * (u0 / constants.hbar);
}

double differential_light_shift(const TrapParams& trap,
                                const PhysicsConstants& constants) {
    trap.validate();
    constants.validate();
    const double u0 = constants.k_b * trap.depth_k;
    return constants.omega_hfs / std::abs(trap.delta_eff) * (u0 / constants.hbar);
}

double quadratic_zeeman_shift(const FieldParams& field, const ShiftModel& model) {
    field.validate();
    model.validate();
    const double b = field.bias_field_t;
    return kTwoPi * model.zeeman_coefficient_hz_per_t2 * b * b;
}

double total_resonance_shift(const TrapParams& trap, const FieldParams& field,
                             const ShiftModel& model) {
    return model.light_shift_sign * differential_light_shift(trap, model.constants) +
           quadratic_zeeman_shift(field, model);
}

} // namespace trapsim::trap
