#pragma once

#include <Eigen/Dense>

#include "lippfm/errors.hpp"

namespace lippfm {

using StateVec = Eigen::Vector3d;                 // x = [theta_a, theta_a_dot, theta_w_dot]
using InputVec = Eigen::Vector2d;                 // u = [tau_a, tau_w]

/// Physical constants of the pendulum-plus-flywheel plant.
///
/// The plant is a point-mass inverted pendulum (angle theta_a from vertical)
/// carrying a flywheel at height `flywheel_height`; the planar sagittal
/// direction only. Defaults are a documented human-scale set.
struct ModelParams {
    double flywheel_mass = 10.0;       // M [kg], > 0
    double pendulum_mass = 2.0;        // m [kg], >= 0
    double flywheel_height = 0.8;      // H [m], base to flywheel COM, > 0
    double pendulum_com_height = 0.4;  // h [m], base to pendulum COM, >= 0
    double pendulum_inertia = 0.1;     // I_p [kg m^2], about the base, >= 0
    double flywheel_inertia = 0.05;    // I_w [kg m^2], about the flywheel COM, > 0
    double gravity = 9.81;             // g [m/s^2]
    double com_vertical_accel = 0.0;   // z_c'' [m/s^2], constant per episode
    double com_height = 0.8;           // z_c [m], enters omega only, > 0

    // Throws InvalidParameterError naming the offending field.
    void validate() const;
};

/// Constants derived from ModelParams; they feed every plant equation.
///   gamma = M H^2 + I_p        [kg m^2]
///   mu    = m h + M H          [kg m]
///   omega = sqrt((g + zc'')/z_c)   [1/s]
struct DerivedConstants {
    double gamma = 0.0;
    double mu = 0.0;
    double omega = 0.0;
};

/// Full simulation state. The controlled state vector is
/// x = [theta_a, theta_a_dot, theta_w_dot]; theta_w is bookkeeping for the
/// flywheel rotational-angle limit and is not fed back.
struct State {
    double theta_a = 0.0;       // [rad], ankle/pendulum angle from vertical
    double theta_a_dot = 0.0;   // [rad/s]
    double theta_w_dot = 0.0;   // [rad/s], flywheel rate
    double theta_w = 0.0;       // [rad], integrated flywheel angle

    StateVec controlled() const { return {theta_a, theta_a_dot, theta_w_dot}; }
};

/// Clamped actuator torques with per-channel saturation flags.
struct TorqueCommand {
    double tau_a = 0.0;         // [N m], ankle
    double tau_w = 0.0;         // [N m], flywheel/hip
    bool saturated_a = false;
    bool saturated_w = false;
};

/// Linearization about the upright equilibrium plus the DCM measurement map:
///   xdot = A x + B u,   y = [zeta, zeta_dot] = C x + D u.
struct LinearPlant {
    Eigen::Matrix3d A;
    Eigen::Matrix<double, 3, 2> B;
    Eigen::Matrix<double, 2, 3> C;
    Eigen::Matrix2d D;
};

struct Accel {
    double theta_a_ddot = 0.0;
    double theta_w_ddot = 0.0;
};

/// Validates params and returns the derived constants.
DerivedConstants derive_constants(const ModelParams& params);

/// Exact nonlinear dynamics (no small-angle substitution): solves the 2x2
/// mass-matrix system
///   [tau_a; tau_w] = [[gamma+I_w, I_w],[I_w, I_w]] [th_a''; th_w'']
///                    - [mu (g+zc'') sin th_a; 0]
/// in closed form. The mass matrix is invertible whenever gamma>0, I_w>0.
Accel nonlinear_accel(const ModelParams& params, const DerivedConstants& consts,
                      const State& state, const TorqueCommand& cmd);

/// State-space matrices of the upright linearization and the DCM output map.
LinearPlant linearize(const ModelParams& params, const DerivedConstants& consts);

/// xdot = A x + B u.
StateVec linear_accel(const LinearPlant& plant, const StateVec& x, const InputVec& u);

/// Total mechanical energy of the unforced plant (zc'' = 0):
///   E = 1/2 gamma th_a'^2 + 1/2 I_w (th_a' + th_w')^2 + mu g cos th_a.
/// Conserved along zero-torque trajectories; used by conservation tests.
double mechanical_energy(const ModelParams& params, const DerivedConstants& consts,
                         const State& state);

} // namespace lippfm
