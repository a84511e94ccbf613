#pragma once

// YAML scenario files: either a preset with parameter overrides
//
//   preset: waterlevel
//   fault: true
//   observer: true
//   horizon: 40
//   params: {level0: 8, on_delay: 0.6}
//
// or an explicit process list (see README for the kinds and their keys).

#include "aadd/scenarios/waterlevel.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace aaddsim {

using namespace aadd;
using namespace aadd::scenarios;

class ConfigError : public aadd::Error {
public:
    using Error::Error;
};

struct ConstantSpec {
    std::string name, signal;
    sim::Tick period;
    std::variant<double, bool> value;
};
struct UncertainSpec {
    std::string name, signal, symbol;
    sim::Tick period;
    double center, radius;
};
struct IntegratorSpec {
    std::string name, input, output;
    sim::Tick period;
    double initial;
};

using ProcessSpec = std::variant<ConstantSpec, UncertainSpec, IntegratorSpec, TankParams, SensorParams,
                                 ControllerParams, ActuatorParams, ObserverParams>;

struct ScenarioSpec {
    std::string name;
    std::optional<WaterLevelParams> waterlevel;
    std::vector<ProcessSpec> processes;
    std::vector<sim::Assertion> assertions;
    double horizon = 40.0;

    template <class D>
    sim::Network<D> build() const
    {
        if (waterlevel) return build_waterlevel<D>(*waterlevel);
        sim::Network<D> net;
        for (const auto& ps : processes) {
            std::visit(
                [&](const auto& p) {
                    using T = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<T, ConstantSpec>) {
                        net.add(constant_source<D>(p.name, p.signal, p.period, p.value));
                    } else if constexpr (std::is_same_v<T, UncertainSpec>) {
                        net.add(uncertain_source<D>(p.name, p.signal, p.period, p.symbol, p.center, p.radius));
                    } else if constexpr (std::is_same_v<T, IntegratorSpec>) {
                        net.add(integrator<D>(p.name, p.input, p.output, p.period, p.initial));
                    } else if constexpr (std::is_same_v<T, TankParams>) {
                        net.add(tank<D>(p));
                    } else if constexpr (std::is_same_v<T, SensorParams>) {
                        net.add(level_sensor<D>(p));
                    } else if constexpr (std::is_same_v<T, ControllerParams>) {
                        net.add(pump_controller<D>(p));
                    } else if constexpr (std::is_same_v<T, ActuatorParams>) {
                        net.add(pump_actuator<D>(p));
                    } else {
                        net.add(observer<D>(p));
                    }
                },
                ps);
        }
        return net;
    }
};

namespace detail {

inline void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where)
{
    if (!n.IsMap()) throw ConfigError(where + ": expected a mapping");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const YAML::Node& n, const std::string& key, const std::string& where)
{
    if (!n[key]) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return n[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where + ": bad value for '" + key + "'");
    }
}

template <class T>
T get_or(const YAML::Node& n, const std::string& key, T fallback, const std::string& where)
{
    return n[key] ? get<T>(n, key, where) : fallback;
}

inline double bound(const YAML::Node& n, const std::string& key, double fallback, const std::string& where)
{
    if (!n[key] || n[key].IsNull()) return fallback;
    return get<double>(n, key, where);
}

inline sim::Tick period(const YAML::Node& n, double fallback, const std::string& where)
{
    const double p = get_or<double>(n, "period", fallback, where);
    if (!(p > 0.0)) throw ConfigError(where + ": period must be positive");
    return sim::seconds(p);
}

inline Rate rate(const YAML::Node& n, Rate fallback, const std::string& where)
{
    if (!n) return fallback;
    check_keys(n, {"symbol", "center", "radius"}, where);
    return {get_or<std::string>(n, "symbol", fallback.symbol, where), get_or<double>(n, "center", fallback.center, where),
            get_or<double>(n, "radius", fallback.radius, where)};
}

inline WaterLevelParams waterlevel_params(const YAML::Node& root)
{
    WaterLevelParams wp;
    wp.fault = get_or<bool>(root, "fault", false, "config");
    wp.observer = get_or<bool>(root, "observer", false, "config");
    if (root["pump_forced"]) {
        const auto v = get<std::string>(root, "pump_forced", "config");
        if (v != "on" && v != "off") throw ConfigError("config: pump_forced must be 'on' or 'off'");
        wp.pump_forced = v == "on";
    }
    if (const YAML::Node p = root["params"]) {
        const std::string w = "params";
        check_keys(p,
                   {"level0", "fall_center", "fall_radius", "rise_center", "rise_radius", "empty", "full", "spec_lo",
                    "spec_hi", "unsafe", "period", "observer_period", "observer_timeout", "failsafe_limit", "on_delay",
                    "off_delay"},
                   w);
        wp.level0 = get_or(p, "level0", wp.level0, w);
        wp.fall_center = get_or(p, "fall_center", wp.fall_center, w);
        wp.fall_radius = get_or(p, "fall_radius", wp.fall_radius, w);
        wp.rise_center = get_or(p, "rise_center", wp.rise_center, w);
        wp.rise_radius = get_or(p, "rise_radius", wp.rise_radius, w);
        wp.empty = get_or(p, "empty", wp.empty, w);
        wp.full = get_or(p, "full", wp.full, w);
        wp.spec_lo = get_or(p, "spec_lo", wp.spec_lo, w);
        wp.spec_hi = get_or(p, "spec_hi", wp.spec_hi, w);
        wp.unsafe = get_or(p, "unsafe", wp.unsafe, w);
        wp.period = get_or(p, "period", wp.period, w);
        wp.observer_period = get_or(p, "observer_period", wp.observer_period, w);
        wp.observer_timeout = get_or(p, "observer_timeout", wp.observer_timeout, w);
        wp.failsafe_limit = get_or(p, "failsafe_limit", wp.failsafe_limit, w);
        wp.on_delay = get_or(p, "on_delay", wp.on_delay, w);
        wp.off_delay = get_or(p, "off_delay", wp.off_delay, w);
    }
    return wp;
}

inline ProcessSpec process(const YAML::Node& n, std::size_t i)
{
    const std::string where = "processes[" + std::to_string(i) + "]";
    const auto kind = get<std::string>(n, "kind", where);
    const auto name = get_or<std::string>(n, "name", kind + std::to_string(i), where);
    if (kind == "constant") {
        check_keys(n, {"kind", "name", "signal", "period", "value"}, where);
        std::variant<double, bool> v;
        const YAML::Node val = n["value"];
        if (!val) throw ConfigError(where + ": missing key 'value'");
        const auto s = val.as<std::string>();
        if (s == "true" || s == "false") {
            v = s == "true";
        } else {
            v = get<double>(n, "value", where);
        }
        return ConstantSpec{name, get<std::string>(n, "signal", where), period(n, 0.1, where), v};
    }
    if (kind == "uncertain_source") {
        check_keys(n, {"kind", "name", "signal", "period", "symbol", "center", "radius"}, where);
        const double r = get<double>(n, "radius", where);
        if (r < 0.0) throw ConfigError(where + ": radius must be non-negative");
        return UncertainSpec{name, get<std::string>(n, "signal", where), get<std::string>(n, "symbol", where),
                             period(n, 0.1, where), get<double>(n, "center", where), r};
    }
    if (kind == "integrator") {
        check_keys(n, {"kind", "name", "input", "output", "period", "initial"}, where);
        return IntegratorSpec{name, get<std::string>(n, "input", where), get<std::string>(n, "output", where),
                              period(n, 0.1, where), get_or<double>(n, "initial", 0.0, where)};
    }
    if (kind == "tank") {
        check_keys(n, {"kind", "name", "pump", "level", "period", "level0", "fall", "rise", "forced"}, where);
        TankParams p;
        p.name = name;
        p.pump_signal = get_or(n, "pump", p.pump_signal, where);
        p.level_signal = get_or(n, "level", p.level_signal, where);
        p.period = period(n, 0.1, where);
        p.level0 = get_or(n, "level0", p.level0, where);
        p.fall = rate(n["fall"], p.fall, where + ".fall");
        p.rise = rate(n["rise"], p.rise, where + ".rise");
        if (n["forced"]) p.forced = get<bool>(n, "forced", where);
        return p;
    }
    if (kind == "level_sensor") {
        check_keys(n, {"kind", "name", "level", "empty_signal", "full_signal", "period", "empty", "full", "fault"},
                   where);
        SensorParams p;
        p.name = name;
        p.level_signal = get_or(n, "level", p.level_signal, where);
        p.empty_signal = get_or(n, "empty_signal", p.empty_signal, where);
        p.full_signal = get_or(n, "full_signal", p.full_signal, where);
        p.period = period(n, 0.1, where);
        p.empty = get_or(n, "empty", p.empty, where);
        p.full = get_or(n, "full", p.full, where);
        if (n["fault"]) p.fault = get<std::string>(n, "fault", where);
        return p;
    }
    if (kind == "pump_controller") {
        check_keys(n, {"kind", "name", "empty", "full", "cmd", "error", "error_delay", "period", "limit_steps"}, where);
        ControllerParams p;
        p.name = name;
        p.empty_signal = get_or(n, "empty", p.empty_signal, where);
        p.full_signal = get_or(n, "full", p.full_signal, where);
        p.cmd_signal = get_or(n, "cmd", p.cmd_signal, where);
        p.error_signal = get_or(n, "error", p.error_signal, where);
        p.error_delay = get_or(n, "error_delay", p.error_delay, where);
        p.period = period(n, 0.1, where);
        p.limit_steps = get_or(n, "limit_steps", p.limit_steps, where);
        return p;
    }
    if (kind == "pump_actuator") {
        check_keys(n, {"kind", "name", "cmd", "phys", "period", "on_delay", "off_delay"}, where);
        ActuatorParams p;
        p.name = name;
        p.cmd_signal = get_or(n, "cmd", p.cmd_signal, where);
        p.phys_signal = get_or(n, "phys", p.phys_signal, where);
        p.period = period(n, 0.1, where);
        p.on_delay = get_or(n, "on_delay", p.on_delay, where);
        p.off_delay = get_or(n, "off_delay", p.off_delay, where);
        return p;
    }
    if (kind == "observer") {
        check_keys(n, {"kind", "name", "pump", "error", "period", "rate", "timeout"}, where);
        ObserverParams p;
        p.name = name;
        p.pump_signal = get_or(n, "pump", p.pump_signal, where);
        p.error_signal = get_or(n, "error", p.error_signal, where);
        p.period = period(n, 1.0, where);
        p.rate = get_or(n, "rate", p.rate, where);
        p.timeout = get_or(n, "timeout", p.timeout, where);
        return p;
    }
    throw ConfigError(where + ": unknown process kind '" + kind + "'");
}

inline sim::Assertion assertion(const YAML::Node& n, std::size_t i)
{
    const std::string where = "assertions[" + std::to_string(i) + "]";
    check_keys(n, {"name", "signal", "lo", "hi", "severity"}, where);
    const double inf = std::numeric_limits<double>::infinity();
    sim::Assertion a;
    a.name = get_or<std::string>(n, "name", "assert" + std::to_string(i), where);
    a.signal = get<std::string>(n, "signal", where);
    a.lo = bound(n, "lo", -inf, where);
    a.hi = bound(n, "hi", inf, where);
    const auto sev = get_or<std::string>(n, "severity", "spec", where);
    if (sev == "safety") {
        a.severity = sim::Severity::Safety;
    } else if (sev == "spec") {
        a.severity = sim::Severity::Spec;
    } else {
        throw ConfigError(where + ": severity must be 'safety' or 'spec'");
    }
    if (!(a.lo < a.hi)) throw ConfigError(where + ": lo must be below hi");
    return a;
}

}  // namespace detail

inline ScenarioSpec load_scenario(const YAML::Node& root, const std::string& name)
{
    ScenarioSpec s;
    s.name = name;
    detail::check_keys(root, {"preset", "fault", "observer", "pump_forced", "horizon", "params", "processes", "assertions"},
                       "config");
    s.horizon = detail::get_or<double>(root, "horizon", 40.0, "config");
    if (root["preset"]) {
        const auto preset = detail::get<std::string>(root, "preset", "config");
        if (preset != "waterlevel") throw ConfigError("config: unknown preset '" + preset + "'");
        if (root["processes"]) throw ConfigError("config: 'preset' and 'processes' are exclusive");
        s.waterlevel = detail::waterlevel_params(root);
        try {
            s.waterlevel->validate();
        } catch (const aadd::InvalidArgument& e) {
            throw ConfigError(e.what());
        }
        s.assertions = waterlevel_assertions(*s.waterlevel);
    } else {
        const YAML::Node ps = root["processes"];
        if (!ps || !ps.IsSequence() || ps.size() == 0) throw ConfigError("config: needs 'preset' or a 'processes' list");
        for (std::size_t i = 0; i < ps.size(); ++i) s.processes.push_back(detail::process(ps[i], i));
    }
    if (const YAML::Node as = root["assertions"]) {
        if (!as.IsSequence()) throw ConfigError("config: 'assertions' must be a list");
        for (std::size_t i = 0; i < as.size(); ++i) s.assertions.push_back(detail::assertion(as[i], i));
    }
    return s;
}

inline ScenarioSpec load_scenario_file(const std::string& path)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw ConfigError("cannot read scenario file '" + path + "'");
    } catch (const YAML::Exception& e) {
        throw ConfigError("scenario file '" + path + "': " + e.what());
    }
    return load_scenario(root, path);
}

inline ScenarioSpec builtin_waterlevel(const WaterLevelParams& wp)
{
    ScenarioSpec s;
    s.name = "waterlevel";
    s.waterlevel = wp;
    s.horizon = wp.horizon;
    s.assertions = waterlevel_assertions(wp);
    return s;
}

}  // namespace aaddsim
