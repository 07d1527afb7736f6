#include "lippfm/dcm.hpp"

#include <algorithm>
#include <cmath>

namespace lippfm {

void SupportPolygon::validate() const {
    if (!(x_min < 0.0)) throw InvalidParameterError("SupportPolygon.x_min must be < 0");
    if (!(x_max > 0.0)) throw InvalidParameterError("SupportPolygon.x_max must be > 0");
}

const char* to_string(StepTrigger t) {
    switch (t) {
        case StepTrigger::none: return "none";
        case StepTrigger::dcm_outside_support: return "dcm-outside-support";
        case StepTrigger::persistent_saturation: return "persistent-saturation";
        case StepTrigger::flywheel_angle_limit: return "flywheel-angle-limit";
    }
    return "?";
}

double dcm_from_com(double com_pos, double com_vel, double omega) {
    if (!(omega > 0.0)) throw InvalidParameterError("dcm_from_com: omega must be > 0");
    return com_pos + com_vel / omega;
}

DcmSample measure_dcm(const LinearPlant& plant, const StateVec& x, const InputVec& u) {
    const Eigen::Vector2d y = plant.C * x + plant.D * u;
    return {y(0), y(1)};
}

double dcm_rate_identity_residual(const ModelParams& params, const DerivedConstants& consts,
                                  const StateVec& x, const InputVec& u) {
    const LinearPlant plant = linearize(params, consts);
    const DcmSample measured = measure_dcm(plant, x, u);
    // d/dt zeta = C row 0 . xdot (row 0 of D is zero).
    const double zeta_dot_chain = plant.C.row(0).dot(linear_accel(plant, x, u));
    return std::abs(measured.zeta_dot - zeta_dot_chain);
}

double pd_step_adjustment(const DcmSample& sample, const DcmSample& ref, const PdGains& gains) {
    return gains.k_p * (sample.zeta - ref.zeta) + gains.k_d * (sample.zeta_dot - ref.zeta_dot);
}

StepDecision decide_step(const DcmSample& sample, const StepPolicy& policy,
                         double sat_time, double theta_w) {
    StepDecision d;
    if (!policy.support.contains(sample.zeta)) {
        d.trigger = StepTrigger::dcm_outside_support;
    } else if (sat_time > policy.saturation_budget) {
        d.trigger = StepTrigger::persistent_saturation;
    } else if (std::abs(theta_w) > policy.flywheel_angle_max) {
        d.trigger = StepTrigger::flywheel_angle_limit;
    }
    d.step_required = d.trigger != StepTrigger::none;
    const double target = sample.zeta + pd_step_adjustment(sample, policy.reference, policy.gains);
    d.landing_offset = std::clamp(target, -policy.max_step_length, policy.max_step_length);
    return d;
}

} // namespace lippfm
