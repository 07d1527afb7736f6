#pragma once

#include "lippfm/model.hpp"

namespace lippfm {

/// Divergent component of motion and its rate, both in meters(/s) relative to
/// the pendulum base.
struct DcmSample {
    double zeta = 0.0;      // [m]
    double zeta_dot = 0.0;  // [m/s]
};

/// Foot contact interval in the sagittal plane, relative to the pendulum base.
/// Asymmetric by default (heel shorter than toe).
struct SupportPolygon {
    double x_min = -0.08;  // [m], < 0
    double x_max = 0.12;   // [m], > 0

    void validate() const;
    bool contains(double zeta) const { return zeta >= x_min && zeta <= x_max; }
};

struct PdGains {
    double k_p = 0.2;
    double k_d = 0.05;
};

enum class StepTrigger {
    none,
    dcm_outside_support,
    persistent_saturation,
    flywheel_angle_limit,
};

const char* to_string(StepTrigger t);

struct StepDecision {
    bool step_required = false;
    double landing_offset = 0.0;  // [m], relative to the current base
    StepTrigger trigger = StepTrigger::none;
};

/// Everything decide_step needs besides the instantaneous measurements.
struct StepPolicy {
    SupportPolygon support{};
    PdGains gains{};
    DcmSample reference{};            // zeta ref defaults to balancing in place
    double saturation_budget = 0.2;   // [s], tolerated continuous saturation
    double flywheel_angle_max = 20.0; // [rad]
    double max_step_length = 0.5;     // [m], leg reach clamp on the landing offset
};

/// zeta = x_c + x_c'/omega. Requires omega > 0.
double dcm_from_com(double com_pos, double com_vel, double omega);

/// y = C x + D u of the linear plant. C is derived so zeta_dot is the exact
/// time derivative of zeta under the linear dynamics; note the published form
/// of the output matrix transposes the two coefficients of row 2, which would
/// break that identity, so the derived row ordering is used here.
DcmSample measure_dcm(const LinearPlant& plant, const StateVec& x, const InputVec& u);

/// |zeta_dot_measured - d/dt zeta_measured| with the derivative taken by chain
/// rule through linear_accel. Algebraically zero; exercised as a property.
double dcm_rate_identity_residual(const ModelParams& params, const DerivedConstants& consts,
                                  const StateVec& x, const InputVec& u);

/// offset = k_p (zeta - zeta_ref) + k_d (zeta_dot - zeta_dot_ref).
double pd_step_adjustment(const DcmSample& sample, const DcmSample& ref, const PdGains& gains);

/// Steps when the DCM leaves the support polygon, the saturation streak
/// exceeds its budget, or the flywheel angle limit is hit -- the trigger
/// records the first satisfied condition in that order. The landing offset is
/// the measured DCM plus the PD correction, clamped to leg reach.
/// `sat_time` is the current uninterrupted saturation streak in seconds.
StepDecision decide_step(const DcmSample& sample, const StepPolicy& policy,
                         double sat_time, double theta_w);

} // namespace lippfm
