#pragma once

#include <cmath>
#include <iosfwd>
#include <type_traits>
#include <vector>

#include "lippfm/control.hpp"
#include "lippfm/dcm.hpp"
#include "lippfm/model.hpp"

namespace lippfm {

enum class Classification {
    stable,          // no step, terminal angle and rate below the settle thresholds
    step_recovered,  // stepped, relocated, settled about the new base
    step_required,   // stepped without relocation, or bounded but not settled
    fallen,          // |theta_a| reached the fall threshold
    aborted,         // integrator produced a non-finite state (diagnostic)
};

const char* to_string(Classification c);

enum class EventKind {
    saturation_on,
    saturation_off,
    dcm_breach,   // zeta left the support polygon
    step,         // value = landing offset
    fall,         // value = theta_a at detection
    non_finite,
};

const char* to_string(EventKind k);

struct Event {
    double t = 0.0;
    EventKind kind{};
    int channel = -1;   // 0 = ankle, 1 = flywheel; -1 when not applicable
    double value = 0.0;
};

struct Disturbance {
    enum class Kind { none, impulse, force };
    Kind kind = Kind::none;
    double t0 = 0.0;                 // [s]
    double delta_theta_a_dot = 0.0;  // impulse: instantaneous rate increment [rad/s]
    double duration = 0.0;           // force: window length [s]
    double force = 0.0;              // force: horizontal force at flywheel height [N]
};

struct EpisodeConfig {
    State initial_state{};
    double duration = 5.0;  // T [s]
    double dt = 1e-3;       // [s], 0 < dt <= 0.01
    LqrWeights weights{};
    TorqueLimits limits{};
    StepPolicy step_policy{};
    StateVec x_ref = StateVec::Zero();
    Disturbance disturbance{};
    // true: a step decision ends the episode (no relocation, classification
    // step-required). false: the base is relocated to the landing offset and
    // the episode continues (step-recovered path).
    bool stop_on_step = true;
    bool record_samples = true;  // sweeps disable retention, summaries remain
    double fall_angle = 0.8;     // [rad]
    double settle_angle = 1e-3;  // [rad], terminal |theta_a| threshold
    double settle_rate = 1e-3;   // [rad/s], terminal |theta_a_dot| threshold

    void validate() const;  // throws InvalidParameterError naming the field
};

struct Sample {
    double t = 0.0;
    State state{};
    TorqueCommand cmd{};
    DcmSample dcm{};
};

struct EpisodeResult {
    std::vector<Sample> samples;  // spacing dt, strictly monotone in t
    std::vector<Event> events;    // sorted by time; sat on/off alternate per channel
    Classification classification = Classification::stable;
    State terminal_state{};
    bool stop_on_step = true;     // copied from config; classify() needs it
    double duration = 0.0;
    // summary scalars, accumulated even when samples are not recorded
    double max_abs_tau_a = 0.0;
    double max_abs_zeta = 0.0;
    double t_event = 0.0;  // first step/fall time; settle time for stable; else duration
};

/// Classical fixed-step RK4 update. Deterministic. Throws NonFiniteStateError
/// if any component of the result is NaN or infinite.
template <class Vec, class Deriv>
Vec rk4_step(const Deriv& deriv, const Vec& x, double dt) {
    const Vec k1 = deriv(x);
    const Vec k2 = deriv(Vec(x + (0.5 * dt) * k1));
    const Vec k3 = deriv(Vec(x + (0.5 * dt) * k2));
    const Vec k4 = deriv(Vec(x + dt * k3));
    Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    bool finite;
    if constexpr (std::is_floating_point_v<Vec>) {
        finite = std::isfinite(out);
    } else {
        finite = out.allFinite();
    }
    if (!finite) {
        throw NonFiniteStateError("rk4_step produced a non-finite state component");
    }
    return out;
}

/// Closed-loop fixed-step episode: LQR feedback on the nonlinear plant,
/// per-channel torque clamping, DCM measurement, step decision, optional base
/// relocation, disturbance injection, terminal classification.
EpisodeResult run_episode(const ModelParams& params, const EpisodeConfig& config);

/// Variant reusing a synthesized design (one synthesis shared across a sweep).
EpisodeResult run_episode(const ModelParams& params, const DerivedConstants& consts,
                          const LinearPlant& plant, const LqrDesign& design,
                          const EpisodeConfig& config);

/// Terminal classification rule, also applicable to partially filled results:
/// fallen wins, then the step/relocation path, then the settle thresholds.
/// A bounded but not settled terminal state maps to step_required.
Classification classify(const EpisodeResult& result, const EpisodeConfig& config);

/// One row per sample: t, theta_a, theta_a_dot, theta_w_dot, theta_w, tau_a,
/// tau_w, sat_a, sat_w, zeta, zeta_dot. 9 significant digits.
void write_trajectory_csv(const EpisodeResult& result, std::ostream& os);

/// JSON event list plus summary record.
void write_episode_json(const EpisodeResult& result, std::ostream& os);

} // namespace lippfm
