#include "lippfm/model.hpp"

#include <cmath>

namespace lippfm {

void ModelParams::validate() const {
    auto fail = [](const char* field, const char* what) {
        throw InvalidParameterError(std::string("ModelParams.") + field + " " + what);
    };
    if (!(flywheel_mass > 0.0)) fail("flywheel_mass", "must be > 0");
    if (!(pendulum_mass >= 0.0)) fail("pendulum_mass", "must be >= 0");
    if (!(flywheel_height > 0.0)) fail("flywheel_height", "must be > 0");
    if (!(pendulum_com_height >= 0.0)) fail("pendulum_com_height", "must be >= 0");
    if (!(pendulum_inertia >= 0.0)) fail("pendulum_inertia", "must be >= 0");
    if (!(flywheel_inertia > 0.0)) fail("flywheel_inertia", "must be > 0");
    if (!(gravity + com_vertical_accel > 0.0))
        fail("com_vertical_accel", "requires g + zc'' > 0 for a real omega");
    if (!(com_height > 0.0)) fail("com_height", "must be > 0");
}

DerivedConstants derive_constants(const ModelParams& p) {
    p.validate();
    DerivedConstants c;
    c.gamma = p.flywheel_mass * p.flywheel_height * p.flywheel_height + p.pendulum_inertia;
    c.mu = p.pendulum_mass * p.pendulum_com_height + p.flywheel_mass * p.flywheel_height;
    c.omega = std::sqrt((p.gravity + p.com_vertical_accel) / p.com_height);
    return c;
}

Accel nonlinear_accel(const ModelParams& p, const DerivedConstants& c,
                      const State& s, const TorqueCommand& cmd) {
    const double gravity_torque =
        c.mu * (p.gravity + p.com_vertical_accel) * std::sin(s.theta_a);
    Accel a;
    a.theta_a_ddot = (cmd.tau_a - cmd.tau_w + gravity_torque) / c.gamma;
    a.theta_w_ddot = cmd.tau_w / p.flywheel_inertia - a.theta_a_ddot;
    return a;
}

LinearPlant linearize(const ModelParams& p, const DerivedConstants& c) {
    const double k = c.mu * (p.gravity + p.com_vertical_accel) / c.gamma;  // [1/s^2]
    const double H = p.flywheel_height;
    const double iw = p.flywheel_inertia;

    LinearPlant plant;
    plant.A << 0.0, 1.0, 0.0,
               k, 0.0, 0.0,
               -k, 0.0, 0.0;
    plant.B << 0.0, 0.0,
               1.0 / c.gamma, -1.0 / c.gamma,
               -1.0 / c.gamma, (c.gamma + iw) / (c.gamma * iw);
    plant.C << H, H / c.omega, 0.0,
               H * k / c.omega, H, 0.0;
    plant.D << 0.0, 0.0,
               H / (c.omega * c.gamma), -H / (c.omega * c.gamma);
    return plant;
}

StateVec linear_accel(const LinearPlant& plant, const StateVec& x, const InputVec& u) {
    return plant.A * x + plant.B * u;
}

double mechanical_energy(const ModelParams& p, const DerivedConstants& c, const State& s) {
    const double spin = s.theta_a_dot + s.theta_w_dot;
    return 0.5 * c.gamma * s.theta_a_dot * s.theta_a_dot +
           0.5 * p.flywheel_inertia * spin * spin +
           c.mu * p.gravity * std::cos(s.theta_a);
}

} // namespace lippfm
