#pragma once

// Reusable process kinds. Each factory returns a process that runs in any
// value domain (symbolic or numeric).

#include "aadd/sim/kernel.hpp"

#include <optional>
#include <string>
#include <variant>

namespace aadd::scenarios {

using sim::InputPort;
using sim::Kind;
using sim::OutputPort;
using sim::Process;
using sim::Tick;

template <class D>
Process<D> constant_source(std::string name, std::string signal, Tick period, std::variant<double, bool> value)
{
    Process<D> p;
    p.name = std::move(name);
    p.period = period;
    const bool is_bool = std::holds_alternative<bool>(value);
    p.outputs.push_back({"out", std::move(signal), 1, is_bool ? Kind::Bool : Kind::Real});
    p.step = [value, is_bool](D& d, sim::Activation<D>& a) {
        if (is_bool) {
            a.out("out", d.value(d.boolean(std::get<bool>(value))));
        } else {
            a.out("out", d.value(d.constant(std::get<double>(value))));
        }
    };
    return p;
}

template <class D>
Process<D> uncertain_source(std::string name, std::string signal, Tick period, std::string symbol, double center,
                            double radius)
{
    Process<D> p;
    p.name = std::move(name);
    p.period = period;
    p.outputs.push_back({"out", std::move(signal), 1, Kind::Real});
    p.step = [symbol, center, radius](D& d, sim::Activation<D>& a) {
        a.out("out", d.value(d.uncertain(symbol, center, radius)));
    };
    return p;
}

// Emits x, then x <- x + h * input with h = period.
template <class D>
Process<D> integrator(std::string name, std::string input, std::string output, Tick period, double initial)
{
    Process<D> p;
    p.name = std::move(name);
    p.period = period;
    p.inputs.push_back({"d", std::move(input)});
    p.outputs.push_back({"x", std::move(output), 1, Kind::Real});
    p.init = [initial](D& d, sim::State<D>& s) { s.emplace("x", d.value(d.constant(initial))); };
    const double h = sim::to_seconds(period);
    p.step = [h](D& d, sim::Activation<D>& a) {
        auto& x = a.state("x");
        a.out("x", x);
        x = d.value(sim::integrator_step<D>(d.as_real(x), d.as_real(a.in1("d")), h));
    };
    return p;
}

struct Rate {
    std::string symbol;
    double center = 0.0;
    double radius = 0.0;
};

struct TankParams {
    std::string name = "tank";
    std::string pump_signal = "phys";  // ignored when forced
    std::string level_signal = "level";
    Tick period = sim::seconds(0.1);
    double level0 = 8.0;
    Rate fall{"e1", 2.0, 0.1};
    Rate rise{"e2", 1.0, 0.1};
    std::optional<bool> forced;
};

// Continuous block: level' = rise while the pump runs, -fall otherwise.
template <class D>
Process<D> tank(const TankParams& tp)
{
    Process<D> p;
    p.name = tp.name;
    p.period = tp.period;
    if (!tp.forced) p.inputs.push_back({"pump", tp.pump_signal, 1, 0, false});
    p.outputs.push_back({"level", tp.level_signal, 1, Kind::Real});
    p.init = [tp](D& d, sim::State<D>& s) { s.emplace("x", d.value(d.constant(tp.level0))); };
    const double h = sim::to_seconds(tp.period);
    p.step = [tp, h](D& d, sim::Activation<D>& a) {
        auto& x = a.state("x");
        a.out("level", x);
        const auto rise = d.uncertain(tp.rise.symbol, tp.rise.center, tp.rise.radius);
        const auto fall = d.uncertain(tp.fall.symbol, tp.fall.center, tp.fall.radius);
        const auto on = tp.forced ? d.boolean(*tp.forced) : d.as_bool(a.in1("pump"));
        const auto deriv = d.ite(on, rise, -fall);
        x = d.value(sim::integrator_step<D>(d.as_real(x), deriv, h));
    };
    return p;
}

struct SensorParams {
    std::string name = "sensor";
    std::string level_signal = "level";
    std::string empty_signal = "empty";
    std::string full_signal = "full";
    Tick period = sim::seconds(0.1);
    double empty = 5.0;
    double full = 10.0;
    // When set, this free Boolean masks the full sensor (stuck at false).
    std::optional<std::string> fault;
};

template <class D>
Process<D> level_sensor(const SensorParams& sp)
{
    Process<D> p;
    p.name = sp.name;
    p.period = sp.period;
    p.inputs.push_back({"level", sp.level_signal});
    p.outputs.push_back({"empty", sp.empty_signal, 1, Kind::Bool});
    p.outputs.push_back({"full", sp.full_signal, 1, Kind::Bool});
    p.step = [sp](D& d, sim::Activation<D>& a) {
        const auto& level = d.as_real(a.in1("level"));
        auto empty = d.le(level, d.constant(sp.empty));
        auto full = d.ge(level, d.constant(sp.full));
        if (sp.fault) full = d.ite(d.free_bool(*sp.fault), d.boolean(false), full);
        a.out("empty", d.value(empty));
        a.out("full", d.value(full));
    };
    return p;
}

struct ControllerParams {
    std::string name = "controller";
    std::string empty_signal = "empty";
    std::string full_signal = "full";
    std::string cmd_signal = "cmd";
    // Empty: no fail-safe input, the controller stays in normal mode.
    std::string error_signal;
    int error_delay = 10;
    Tick period = sim::seconds(0.1);
    // Fail-safe mode switches the pump off after this many periods on.
    int limit_steps = 50;
};

// Pump on at empty, off at full; in error mode the on-time is limited.
template <class D>
Process<D> pump_controller(const ControllerParams& cp)
{
    Process<D> p;
    p.name = cp.name;
    p.period = cp.period;
    p.inputs.push_back({"empty", cp.empty_signal});
    p.inputs.push_back({"full", cp.full_signal});
    if (!cp.error_signal.empty()) p.inputs.push_back({"error_mode", cp.error_signal, 1, cp.error_delay, false});
    p.outputs.push_back({"cmd", cp.cmd_signal, 1, Kind::Bool});
    p.init = [](D& d, sim::State<D>& s) {
        s.emplace("pump", d.value(d.boolean(false)));
        s.emplace("on_t", d.value(d.constant(0.0)));
    };
    const bool has_error = !cp.error_signal.empty();
    const double limit = cp.limit_steps;
    p.step = [has_error, limit](D& d, sim::Activation<D>& a) {
        const auto& empty = d.as_bool(a.in1("empty"));
        const auto& full = d.as_bool(a.in1("full"));
        const auto pump = d.as_bool(a.state("pump"));
        const auto on = d.as_real(a.state("on_t"));
        const auto zero = d.constant(0.0);

        const auto pump_n = d.ite(full, d.boolean(false), d.ite(empty, d.boolean(true), pump));
        const auto on_n = d.ite(pump_n, on + 1.0, zero);
        if (!has_error) {
            a.state("pump") = d.value(pump_n);
            a.state("on_t") = d.value(on_n);
            a.out("cmd", d.value(pump_n));
            return;
        }
        const auto em = d.as_bool(a.in1("error_mode"));
        const auto on_inc = on + 1.0;
        const auto over = d.gt(on_inc, d.constant(limit));
        const auto pump_e = d.ite(pump, d.lnot(over), empty);
        const auto on_e = d.ite(pump, d.ite(over, zero, on_inc), zero);
        const auto next_pump = d.ite(em, pump_e, pump_n);
        a.state("pump") = d.value(next_pump);
        a.state("on_t") = d.value(d.ite(em, on_e, on_n));
        a.out("cmd", d.value(next_pump));
    };
    return p;
}

struct ActuatorParams {
    std::string name = "actuator";
    std::string cmd_signal = "cmd";
    std::string phys_signal = "phys";
    Tick period = sim::seconds(0.1);
    // Switching delays in periods (the command also takes one period to arrive).
    int on_delay = 6;
    int off_delay = 20;
};

// Pump motor: starts when the command has been on for on_delay periods, stops
// off_delay periods after the command drops.
template <class D>
Process<D> pump_actuator(const ActuatorParams& ap)
{
    Process<D> p;
    p.name = ap.name;
    p.period = ap.period;
    p.inputs.push_back({"cmd_on", ap.cmd_signal, 1, ap.on_delay + 1, false});
    p.inputs.push_back({"cmd_off", ap.cmd_signal, 1, ap.off_delay + 1, false});
    p.outputs.push_back({"phys", ap.phys_signal, 1, Kind::Bool});
    p.init = [](D& d, sim::State<D>& s) { s.emplace("phys", d.value(d.boolean(false))); };
    p.step = [](D& d, sim::Activation<D>& a) {
        auto& phys = a.state("phys");
        const auto next = d.ite(d.as_bool(phys), d.as_bool(a.in1("cmd_off")), d.as_bool(a.in1("cmd_on")));
        phys = d.value(next);
        a.out("phys", phys);
    };
    return p;
}

struct ObserverParams {
    std::string name = "observer";
    std::string pump_signal = "cmd";
    std::string error_signal = "error_mode";
    Tick period = sim::seconds(1.0);
    int rate = 10;     // samples per firing on both ports
    int timeout = 10;  // firings
};

// timer counts firings with the pump on and resets when it is off; error_mode
// latches once timer exceeds the timeout.
template <class D>
Process<D> observer(const ObserverParams& op)
{
    Process<D> p;
    p.name = op.name;
    p.period = op.period;
    p.inputs.push_back({"pump", op.pump_signal, op.rate});
    p.outputs.push_back({"error_mode", op.error_signal, op.rate, Kind::Bool});
    p.init = [](D& d, sim::State<D>& s) {
        s.emplace("timer", d.value(d.constant(0.0)));
        s.emplace("error_mode", d.value(d.boolean(false)));
    };
    const int rate = op.rate;
    const double timeout = op.timeout;
    p.step = [rate, timeout](D& d, sim::Activation<D>& a) {
        const auto pump = d.as_bool(a.in("pump").back());
        const auto timer = d.as_real(a.state("timer"));
        const auto em = d.as_bool(a.state("error_mode"));
        const auto t1 = timer + 1.0;
        const auto next_timer = d.ite(em, timer, d.ite(pump, t1, d.constant(0.0)));
        const auto next_em = d.lor(em, d.land(pump, d.gt(t1, d.constant(timeout))));
        a.state("timer") = d.value(next_timer);
        a.state("error_mode") = d.value(next_em);
        for (int k = 0; k < rate; ++k) a.out("error_mode", d.value(next_em));
    };
    return p;
}

}  // namespace aadd::scenarios
