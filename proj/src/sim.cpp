#include "lippfm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace lippfm {
namespace {

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

const char* to_string(Classification c) {
    switch (c) {
        case Classification::stable: return "stable";
        case Classification::step_recovered: return "step-recovered";
        case Classification::step_required: return "step-required";
        case Classification::fallen: return "fallen";
        case Classification::aborted: return "aborted";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::saturation_on: return "saturation-on";
        case EventKind::saturation_off: return "saturation-off";
        case EventKind::dcm_breach: return "dcm-breach";
        case EventKind::step: return "step";
        case EventKind::fall: return "fall";
        case EventKind::non_finite: return "non-finite";
    }
    return "?";
}

void EpisodeConfig::validate() const {
    auto fail = [](const char* field, const char* what) {
        throw InvalidParameterError(std::string("EpisodeConfig.") + field + " " + what);
    };
    if (!(dt > 0.0 && dt <= 0.01)) fail("dt", "must satisfy 0 < dt <= 0.01");
    if (!(duration >= dt)) fail("duration", "must be >= dt");
    if (!(fall_angle > 0.0)) fail("fall_angle", "must be > 0");
    if (!(settle_angle > 0.0)) fail("settle_angle", "must be > 0");
    if (!(settle_rate > 0.0)) fail("settle_rate", "must be > 0");
    if (!(limits.tau_a_max > 0.0)) fail("limits.tau_a_max", "must be > 0");
    if (!(limits.tau_w_max > 0.0)) fail("limits.tau_w_max", "must be > 0");
    if (!(step_policy.gains.k_p >= 0.0)) fail("step_policy.gains.k_p", "must be >= 0");
    if (!(step_policy.gains.k_d >= 0.0)) fail("step_policy.gains.k_d", "must be >= 0");
    if (!(step_policy.saturation_budget >= 0.0)) fail("step_policy.saturation_budget", "must be >= 0");
    if (!(step_policy.flywheel_angle_max > 0.0)) fail("step_policy.flywheel_angle_max", "must be > 0");
    if (!(step_policy.max_step_length > 0.0)) fail("step_policy.max_step_length", "must be > 0");
    step_policy.support.validate();
    if (disturbance.kind != Disturbance::Kind::none) {
        if (!(disturbance.t0 >= 0.0 && disturbance.t0 <= duration))
            fail("disturbance.t0", "must lie within [0, duration]");
        if (disturbance.kind == Disturbance::Kind::force) {
            if (!(disturbance.duration >= 0.0 &&
                  disturbance.t0 + disturbance.duration <= duration))
                fail("disturbance.duration", "window must lie within [0, duration]");
        }
    }
}

Classification classify(const EpisodeResult& result, const EpisodeConfig& config) {
    bool stepped = false;
    for (const auto& e : result.events) {
        if (e.kind == EventKind::non_finite) return Classification::aborted;
        if (e.kind == EventKind::fall) return Classification::fallen;
        if (e.kind == EventKind::step) stepped = true;
    }
    const bool settled = std::abs(result.terminal_state.theta_a) < config.settle_angle &&
                         std::abs(result.terminal_state.theta_a_dot) < config.settle_rate;
    if (stepped) {
        if (config.stop_on_step) return Classification::step_required;
        return settled ? Classification::step_recovered : Classification::step_required;
    }
    return settled ? Classification::stable : Classification::step_required;
}

EpisodeResult run_episode(const ModelParams& params, const DerivedConstants& consts,
                          const LinearPlant& plant, const LqrDesign& design,
                          const EpisodeConfig& config) {
    config.validate();

    EpisodeResult result;
    result.stop_on_step = config.stop_on_step;

    State s = config.initial_state;
    const double dt = config.dt;
    const int n_steps = static_cast<int>(std::llround(config.duration / dt));
    const auto& policy = config.step_policy;
    const auto& dist = config.disturbance;
    const double force_arm = dist.force * params.flywheel_height;

    if (config.record_samples) result.samples.reserve(n_steps + 1);

    bool impulse_pending = dist.kind == Disturbance::Kind::impulse;
    double sat_streak = 0.0;
    bool was_sat_a = false, was_sat_w = false;
    bool was_breach = false, was_required = false;
    double settle_since = -1.0;
    double t_end = 0.0;
    bool fell = false, aborted = false, stepped = false;
    double first_step_t = 0.0, break_t = 0.0;

    for (int k = 0; k <= n_steps; ++k) {
        const double t = k * dt;
        t_end = t;

        if (impulse_pending && t >= dist.t0) {
            s.theta_a_dot += dist.delta_theta_a_dot;
            impulse_pending = false;
        }

        const StateVec x = s.controlled();
        const TorqueCommand cmd = feedback_torque(design, x, config.x_ref, config.limits);
        if (cmd.saturated_a != was_sat_a) {
            result.events.push_back(
                {t, cmd.saturated_a ? EventKind::saturation_on : EventKind::saturation_off, 0, 0.0});
            was_sat_a = cmd.saturated_a;
        }
        if (cmd.saturated_w != was_sat_w) {
            result.events.push_back(
                {t, cmd.saturated_w ? EventKind::saturation_on : EventKind::saturation_off, 1, 0.0});
            was_sat_w = cmd.saturated_w;
        }
        sat_streak = (cmd.saturated_a || cmd.saturated_w) ? sat_streak + dt : 0.0;

        const DcmSample dcm = measure_dcm(plant, x, {cmd.tau_a, cmd.tau_w});
        const bool breach = !policy.support.contains(dcm.zeta);
        if (breach && !was_breach) {
            result.events.push_back({t, EventKind::dcm_breach, -1, dcm.zeta});
        }
        was_breach = breach;

        if (config.record_samples) result.samples.push_back({t, s, cmd, dcm});
        result.max_abs_tau_a = std::max(result.max_abs_tau_a, std::abs(cmd.tau_a));
        result.max_abs_zeta = std::max(result.max_abs_zeta, std::abs(dcm.zeta));

        const bool settled_now = std::abs(s.theta_a) < config.settle_angle &&
                                 std::abs(s.theta_a_dot) < config.settle_rate;
        if (settled_now) {
            if (settle_since < 0.0) settle_since = t;
        } else {
            settle_since = -1.0;
        }

        if (std::abs(s.theta_a) >= config.fall_angle) {
            result.events.push_back({t, EventKind::fall, -1, s.theta_a});
            fell = true;
            break_t = t;
            break;
        }

        const StepDecision decision = decide_step(dcm, policy, sat_streak, s.theta_w);
        if (decision.step_required && !was_required) {
            result.events.push_back({t, EventKind::step, -1, decision.landing_offset});
            if (!stepped) first_step_t = t;
            stepped = true;
            if (config.stop_on_step) {
                break_t = t;
                was_required = true;
                break;
            }
            // Instantaneous base shift onto the landing offset: the flywheel
            // COM keeps its world position (H sin theta re-expressed about the
            // new base), angular rates and flywheel angle are continuous.
            const double sin_new = std::clamp(
                std::sin(s.theta_a) - decision.landing_offset / params.flywheel_height, -1.0, 1.0);
            s.theta_a = std::asin(sin_new);
            sat_streak = 0.0;
        }
        was_required = decision.step_required;

        if (k < n_steps) {
            const bool force_active = dist.kind == Disturbance::Kind::force &&
                                      t >= dist.t0 && t < dist.t0 + dist.duration;
            auto deriv = [&](const Eigen::Vector4d& y) -> Eigen::Vector4d {
                const State ys{y(0), y(1), y(2), y(3)};
                TorqueCommand eff = cmd;
                if (force_active) eff.tau_a += force_arm * std::cos(y(0));
                const Accel a = nonlinear_accel(params, consts, ys, eff);
                return {y(1), a.theta_a_ddot, a.theta_w_ddot, y(2)};
            };
            const Eigen::Vector4d y0{s.theta_a, s.theta_a_dot, s.theta_w_dot, s.theta_w};
            try {
                const Eigen::Vector4d y1 = rk4_step(deriv, y0, dt);
                s = {y1(0), y1(1), y1(2), y1(3)};
            } catch (const NonFiniteStateError&) {
                result.events.push_back({(k + 1) * dt, EventKind::non_finite, -1, 0.0});
                aborted = true;
                break_t = t;
                break;
            }
        }
    }

    result.terminal_state = s;
    result.duration = t_end;
    result.classification = classify(result, config);

    if (stepped) {
        result.t_event = first_step_t;
    } else if (fell || aborted) {
        result.t_event = break_t;
    } else if (result.classification == Classification::stable && settle_since >= 0.0) {
        result.t_event = settle_since;
    } else {
        result.t_event = t_end;
    }
    return result;
}

EpisodeResult run_episode(const ModelParams& params, const EpisodeConfig& config) {
    const DerivedConstants consts = derive_constants(params);
    const LinearPlant plant = linearize(params, consts);
    const LqrDesign design = lqr_gain(plant, config.weights);
    return run_episode(params, consts, plant, design, config);
}

void write_trajectory_csv(const EpisodeResult& result, std::ostream& os) {
    os << "t,theta_a,theta_a_dot,theta_w_dot,theta_w,tau_a,tau_w,sat_a,sat_w,zeta,zeta_dot\n";
    for (const auto& smp : result.samples) {
        os << g9(smp.t) << ',' << g9(smp.state.theta_a) << ',' << g9(smp.state.theta_a_dot)
           << ',' << g9(smp.state.theta_w_dot) << ',' << g9(smp.state.theta_w) << ','
           << g9(smp.cmd.tau_a) << ',' << g9(smp.cmd.tau_w) << ','
           << (smp.cmd.saturated_a ? 1 : 0) << ',' << (smp.cmd.saturated_w ? 1 : 0) << ','
           << g9(smp.dcm.zeta) << ',' << g9(smp.dcm.zeta_dot) << '\n';
    }
}

void write_episode_json(const EpisodeResult& result, std::ostream& os) {
    nlohmann::json j;
    j["classification"] = to_string(result.classification);
    j["duration"] = result.duration;
    j["t_event"] = result.t_event;
    j["terminal_state"] = {
        {"theta_a", result.terminal_state.theta_a},
        {"theta_a_dot", result.terminal_state.theta_a_dot},
        {"theta_w_dot", result.terminal_state.theta_w_dot},
        {"theta_w", result.terminal_state.theta_w},
    };
    j["summary"] = {
        {"max_abs_tau_a", result.max_abs_tau_a},
        {"max_abs_zeta", result.max_abs_zeta},
        {"sample_count", result.samples.size()},
        {"event_count", result.events.size()},
    };
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : result.events) {
        nlohmann::json je;
        je["t"] = e.t;
        je["kind"] = to_string(e.kind);
        if (e.channel >= 0) je["channel"] = e.channel == 0 ? "ankle" : "flywheel";
        if (e.kind == EventKind::step || e.kind == EventKind::fall ||
            e.kind == EventKind::dcm_breach) {
            je["value"] = e.value;
        }
        events.push_back(je);
    }
    j["events"] = events;
    os << j.dump(2) << '\n';
}

} // namespace lippfm
