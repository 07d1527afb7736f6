#include "lippfm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lippfm {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config: " + field + " " + what);
}

void expect_keys(const json& j, const std::string& section,
                 std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) fail(section.empty() ? key : section + "." + key, "is not a known field");
    }
}

double get_num(const json& j, const std::string& section, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) fail(section + "." + key, "must be a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& section, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) fail(section + "." + key, "must be an integer");
    return v.get<int>();
}

bool get_bool(const json& j, const std::string& section, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean()) fail(section + "." + key, "must be a boolean");
    return v.get<bool>();
}

std::string get_str(const json& j, const std::string& section, const char* key,
                    const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_string()) fail(section + "." + key, "must be a string");
    return v.get<std::string>();
}

GridAxis parse_axis(const json& j, const std::string& section, GridAxis fallback) {
    expect_keys(j, section, {"min", "max", "count"});
    GridAxis axis = fallback;
    axis.min = get_num(j, section, "min", fallback.min);
    axis.max = get_num(j, section, "max", fallback.max);
    axis.count = get_int(j, section, "count", fallback.count);
    return axis;
}

} // namespace

void GridAxis::validate(const char* name) const {
    const std::string section = std::string("grid.") + name;
    if (!(count >= 1)) fail(section + ".count", "must be >= 1");
    if (!std::isfinite(min) || !std::isfinite(max)) fail(section, "bounds must be finite");
    if (count >= 2 && !(min < max)) fail(section, "requires min < max");
}

double GridAxis::value(int i) const {
    if (count == 1) return min;
    return (min * (count - 1 - i) + max * i) / (count - 1);
}

void SweepConfig::validate() const {
    model.validate();
    theta_a.validate("theta_a");
    theta_a_dot.validate("theta_a_dot");
    if (jobs < 0) fail("jobs", "must be >= 0");
    for (int i = 0; i < 3; ++i) {
        if (weights.Q(i, i) < 0.0) fail("lqr.q_diag", "entries must be >= 0");
    }
    for (int i = 0; i < 2; ++i) {
        if (!(weights.R(i, i) > 0.0)) fail("lqr.r_diag", "entries must be > 0");
    }
    episode_config().validate();
}

EpisodeConfig SweepConfig::episode_config() const {
    EpisodeConfig ec;
    ec.initial_state = initial_state;
    ec.duration = duration;
    ec.dt = dt;
    ec.weights = weights;
    ec.limits = limits;
    ec.step_policy = step_policy;
    ec.disturbance = disturbance;
    ec.stop_on_step = stop_on_step;
    ec.fall_angle = fall_angle;
    ec.settle_angle = settle_angle;
    ec.settle_rate = settle_rate;
    return ec;
}

SweepConfig config_from_json(const json& j) {
    SweepConfig c;
    expect_keys(j, "", {"model", "lqr", "dcm", "episode", "grid", "output", "jobs"});

    if (j.contains("model")) {
        const auto& jm = j.at("model");
        expect_keys(jm, "model",
                    {"flywheel_mass", "pendulum_mass", "flywheel_height", "pendulum_com_height",
                     "pendulum_inertia", "flywheel_inertia", "gravity", "com_vertical_accel",
                     "com_height"});
        auto& m = c.model;
        m.flywheel_mass = get_num(jm, "model", "flywheel_mass", m.flywheel_mass);
        m.pendulum_mass = get_num(jm, "model", "pendulum_mass", m.pendulum_mass);
        m.flywheel_height = get_num(jm, "model", "flywheel_height", m.flywheel_height);
        m.pendulum_com_height = get_num(jm, "model", "pendulum_com_height", m.pendulum_com_height);
        m.pendulum_inertia = get_num(jm, "model", "pendulum_inertia", m.pendulum_inertia);
        m.flywheel_inertia = get_num(jm, "model", "flywheel_inertia", m.flywheel_inertia);
        m.gravity = get_num(jm, "model", "gravity", m.gravity);
        m.com_vertical_accel = get_num(jm, "model", "com_vertical_accel", m.com_vertical_accel);
        m.com_height = get_num(jm, "model", "com_height", m.com_height);
    }

    if (j.contains("lqr")) {
        const auto& jl = j.at("lqr");
        expect_keys(jl, "lqr", {"q_diag", "r_diag", "tau_a_max", "tau_w_max"});
        if (jl.contains("q_diag")) {
            const auto& q = jl.at("q_diag");
            if (!q.is_array() || q.size() != 3) fail("lqr.q_diag", "must be an array of 3 numbers");
            c.weights.Q = Eigen::Vector3d(q[0].get<double>(), q[1].get<double>(),
                                          q[2].get<double>()).asDiagonal();
        }
        if (jl.contains("r_diag")) {
            const auto& r = jl.at("r_diag");
            if (!r.is_array() || r.size() != 2) fail("lqr.r_diag", "must be an array of 2 numbers");
            c.weights.R = Eigen::Vector2d(r[0].get<double>(), r[1].get<double>()).asDiagonal();
        }
        c.limits.tau_a_max = get_num(jl, "lqr", "tau_a_max", c.limits.tau_a_max);
        c.limits.tau_w_max = get_num(jl, "lqr", "tau_w_max", c.limits.tau_w_max);
    }

    if (j.contains("dcm")) {
        const auto& jd = j.at("dcm");
        expect_keys(jd, "dcm",
                    {"k_p", "k_d", "support_x_min", "support_x_max", "saturation_budget",
                     "flywheel_angle_max", "max_step_length", "zeta_ref", "zeta_dot_ref"});
        auto& p = c.step_policy;
        p.gains.k_p = get_num(jd, "dcm", "k_p", p.gains.k_p);
        p.gains.k_d = get_num(jd, "dcm", "k_d", p.gains.k_d);
        p.support.x_min = get_num(jd, "dcm", "support_x_min", p.support.x_min);
        p.support.x_max = get_num(jd, "dcm", "support_x_max", p.support.x_max);
        p.saturation_budget = get_num(jd, "dcm", "saturation_budget", p.saturation_budget);
        p.flywheel_angle_max = get_num(jd, "dcm", "flywheel_angle_max", p.flywheel_angle_max);
        p.max_step_length = get_num(jd, "dcm", "max_step_length", p.max_step_length);
        p.reference.zeta = get_num(jd, "dcm", "zeta_ref", p.reference.zeta);
        p.reference.zeta_dot = get_num(jd, "dcm", "zeta_dot_ref", p.reference.zeta_dot);
    }

    if (j.contains("episode")) {
        const auto& je = j.at("episode");
        expect_keys(je, "episode",
                    {"duration", "dt", "fall_angle", "settle_angle", "settle_rate", "stop_on_step",
                     "initial_state", "disturbance"});
        c.duration = get_num(je, "episode", "duration", c.duration);
        c.dt = get_num(je, "episode", "dt", c.dt);
        c.fall_angle = get_num(je, "episode", "fall_angle", c.fall_angle);
        c.settle_angle = get_num(je, "episode", "settle_angle", c.settle_angle);
        c.settle_rate = get_num(je, "episode", "settle_rate", c.settle_rate);
        c.stop_on_step = get_bool(je, "episode", "stop_on_step", c.stop_on_step);
        if (je.contains("initial_state")) {
            const auto& ji = je.at("initial_state");
            expect_keys(ji, "episode.initial_state",
                        {"theta_a", "theta_a_dot", "theta_w_dot", "theta_w"});
            auto& s = c.initial_state;
            s.theta_a = get_num(ji, "episode.initial_state", "theta_a", s.theta_a);
            s.theta_a_dot = get_num(ji, "episode.initial_state", "theta_a_dot", s.theta_a_dot);
            s.theta_w_dot = get_num(ji, "episode.initial_state", "theta_w_dot", s.theta_w_dot);
            s.theta_w = get_num(ji, "episode.initial_state", "theta_w", s.theta_w);
        }
        if (je.contains("disturbance")) {
            const auto& jd = je.at("disturbance");
            expect_keys(jd, "episode.disturbance",
                        {"kind", "t0", "delta_theta_a_dot", "duration", "force"});
            auto& d = c.disturbance;
            const std::string kind = get_str(jd, "episode.disturbance", "kind", "none");
            if (kind == "none") d.kind = Disturbance::Kind::none;
            else if (kind == "impulse") d.kind = Disturbance::Kind::impulse;
            else if (kind == "force") d.kind = Disturbance::Kind::force;
            else fail("episode.disturbance.kind", "must be one of none|impulse|force");
            d.t0 = get_num(jd, "episode.disturbance", "t0", d.t0);
            d.delta_theta_a_dot =
                get_num(jd, "episode.disturbance", "delta_theta_a_dot", d.delta_theta_a_dot);
            d.duration = get_num(jd, "episode.disturbance", "duration", d.duration);
            d.force = get_num(jd, "episode.disturbance", "force", d.force);
        }
    }

    if (j.contains("grid")) {
        const auto& jg = j.at("grid");
        expect_keys(jg, "grid", {"theta_a", "theta_a_dot"});
        if (jg.contains("theta_a")) c.theta_a = parse_axis(jg.at("theta_a"), "grid.theta_a", c.theta_a);
        if (jg.contains("theta_a_dot"))
            c.theta_a_dot = parse_axis(jg.at("theta_a_dot"), "grid.theta_a_dot", c.theta_a_dot);
    }

    if (j.contains("output")) {
        const auto& jo = j.at("output");
        expect_keys(jo, "output", {"csv", "svg"});
        c.csv_name = get_str(jo, "output", "csv", c.csv_name);
        c.svg_name = get_str(jo, "output", "svg", c.svg_name);
    }

    c.jobs = get_int(j, "", "jobs", c.jobs);

    try {
        c.validate();
    } catch (const InvalidParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

SweepConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const SweepConfig& c) {
    json j;
    j["model"] = {
        {"flywheel_mass", c.model.flywheel_mass},
        {"pendulum_mass", c.model.pendulum_mass},
        {"flywheel_height", c.model.flywheel_height},
        {"pendulum_com_height", c.model.pendulum_com_height},
        {"pendulum_inertia", c.model.pendulum_inertia},
        {"flywheel_inertia", c.model.flywheel_inertia},
        {"gravity", c.model.gravity},
        {"com_vertical_accel", c.model.com_vertical_accel},
        {"com_height", c.model.com_height},
    };
    j["lqr"] = {
        {"q_diag", {c.weights.Q(0, 0), c.weights.Q(1, 1), c.weights.Q(2, 2)}},
        {"r_diag", {c.weights.R(0, 0), c.weights.R(1, 1)}},
        {"tau_a_max", c.limits.tau_a_max},
        {"tau_w_max", c.limits.tau_w_max},
    };
    j["dcm"] = {
        {"k_p", c.step_policy.gains.k_p},
        {"k_d", c.step_policy.gains.k_d},
        {"support_x_min", c.step_policy.support.x_min},
        {"support_x_max", c.step_policy.support.x_max},
        {"saturation_budget", c.step_policy.saturation_budget},
        {"flywheel_angle_max", c.step_policy.flywheel_angle_max},
        {"max_step_length", c.step_policy.max_step_length},
        {"zeta_ref", c.step_policy.reference.zeta},
        {"zeta_dot_ref", c.step_policy.reference.zeta_dot},
    };
    const char* kind = c.disturbance.kind == Disturbance::Kind::none      ? "none"
                       : c.disturbance.kind == Disturbance::Kind::impulse ? "impulse"
                                                                          : "force";
    j["episode"] = {
        {"duration", c.duration},
        {"dt", c.dt},
        {"fall_angle", c.fall_angle},
        {"settle_angle", c.settle_angle},
        {"settle_rate", c.settle_rate},
        {"stop_on_step", c.stop_on_step},
        {"initial_state",
         {
             {"theta_a", c.initial_state.theta_a},
             {"theta_a_dot", c.initial_state.theta_a_dot},
             {"theta_w_dot", c.initial_state.theta_w_dot},
             {"theta_w", c.initial_state.theta_w},
         }},
        {"disturbance",
         {
             {"kind", kind},
             {"t0", c.disturbance.t0},
             {"delta_theta_a_dot", c.disturbance.delta_theta_a_dot},
             {"duration", c.disturbance.duration},
             {"force", c.disturbance.force},
         }},
    };
    j["grid"] = {
        {"theta_a", {{"min", c.theta_a.min}, {"max", c.theta_a.max}, {"count", c.theta_a.count}}},
        {"theta_a_dot",
         {{"min", c.theta_a_dot.min}, {"max", c.theta_a_dot.max}, {"count", c.theta_a_dot.count}}},
    };
    j["output"] = {{"csv", c.csv_name}, {"svg", c.svg_name}};
    j["jobs"] = c.jobs;
    return j;
}

void write_config_echo(const SweepConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << config_to_json(config).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace lippfm
