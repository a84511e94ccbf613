#pragma once

// Water-level monitor: tank, level sensor (optionally with a stuck full
// sensor), pump controller with a fail-safe mode, pump actuator and a
// watchdog-style observer.
//
// The tank integrates with the controller period (0.1 s) as its step.

#include "aadd/scenarios/blocks.hpp"
#include "aadd/sim/assertions.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace aadd::scenarios {

struct WaterLevelParams {
    bool fault = false;
    bool observer = false;
    std::optional<bool> pump_forced;

    double level0 = 8.0;
    double fall_center = 2.0;
    double fall_radius = 0.1;
    double rise_center = 1.0;
    double rise_radius = 0.1;
    double empty = 5.0;
    double full = 10.0;
    double spec_lo = 1.0;
    double spec_hi = 12.0;
    double unsafe = 15.0;

    double period = 0.1;
    double observer_period = 1.0;
    int observer_timeout = 10;
    double failsafe_limit = 5.0;  // seconds of pump on-time in error mode
    double on_delay = 0.6;
    double off_delay = 2.0;
    double horizon = 40.0;

    void validate() const
    {
        if (!(spec_lo < empty && empty < full && full < spec_hi && spec_hi < unsafe)) {
            throw InvalidArgument("water level thresholds must satisfy spec_lo < empty < full < spec_hi < unsafe");
        }
        if (!(period > 0.0) || !(observer_period > 0.0)) throw InvalidArgument("periods must be positive");
        if (fall_radius < 0.0 || rise_radius < 0.0) throw InvalidArgument("rate radii must be non-negative");
    }
};

inline int steps(double seconds_value, double period)
{
    const double n = seconds_value / period;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 || r < 0) throw InvalidArgument("duration is not a whole number of periods");
    return static_cast<int>(r);
}

template <class D>
sim::Network<D> build_waterlevel(const WaterLevelParams& wp)
{
    wp.validate();
    const Tick period = sim::seconds(wp.period);
    sim::Network<D> net;

    TankParams tp;
    tp.period = period;
    tp.level0 = wp.level0;
    tp.fall = {"e1", wp.fall_center, wp.fall_radius};
    tp.rise = {"e2", wp.rise_center, wp.rise_radius};
    tp.forced = wp.pump_forced;
    net.add(tank<D>(tp));

    if (wp.pump_forced) return net;

    SensorParams sp;
    sp.period = period;
    sp.empty = wp.empty;
    sp.full = wp.full;
    if (wp.fault) sp.fault = "x1";
    net.add(level_sensor<D>(sp));

    ControllerParams cp;
    cp.period = period;
    cp.limit_steps = steps(wp.failsafe_limit, wp.period);
    const int samples = steps(wp.observer_period, wp.period);
    if (wp.observer) {
        cp.error_signal = "error_mode";
        cp.error_delay = samples;
    }
    net.add(pump_controller<D>(cp));

    ActuatorParams ap;
    ap.period = period;
    ap.on_delay = steps(wp.on_delay, wp.period);
    ap.off_delay = steps(wp.off_delay, wp.period);
    net.add(pump_actuator<D>(ap));

    if (wp.observer) {
        ObserverParams op;
        op.period = sim::seconds(wp.observer_period);
        op.rate = samples;
        op.timeout = wp.observer_timeout;
        net.add(observer<D>(op));
    }
    return net;
}

inline std::vector<sim::Assertion> waterlevel_assertions(const WaterLevelParams& wp)
{
    const double inf = std::numeric_limits<double>::infinity();
    return {
        {"spec", "level", wp.spec_lo, wp.spec_hi, sim::Severity::Spec},
        {"unsafe", "level", -inf, wp.unsafe, sim::Severity::Safety},
    };
}

}  // namespace aadd::scenarios
