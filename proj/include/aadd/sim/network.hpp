#pragma once

// Timed static-dataflow process networks and their static schedules.

#include "aadd/error.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

namespace aadd::sim {

// Time in integer nanoseconds.
using Tick = std::int64_t;
inline constexpr Tick kTicksPerSecond = 1'000'000'000;

inline Tick seconds(double s)
{
    if (!std::isfinite(s)) throw InvalidArgument("time must be finite");
    return static_cast<Tick>(std::llround(s * static_cast<double>(kTicksPerSecond)));
}
inline double to_seconds(Tick t) { return static_cast<double>(t) / static_cast<double>(kTicksPerSecond); }

enum class Kind { Real, Bool };

struct InputPort {
    std::string name;
    std::string signal;
    int rate = 1;
    int delay = 0;  // initial tokens
    std::variant<double, bool> initial = 0.0;
};

struct OutputPort {
    std::string name;
    std::string signal;
    int rate = 1;
    Kind kind = Kind::Real;
};

template <class D>
using State = std::map<std::string, typename D::Value>;

// Port values and state of one firing.
template <class D>
class Activation {
public:
    using Value = typename D::Value;

    Activation(Tick time, State<D>& state) : time_(time), state_(state) {}

    Tick time() const { return time_; }
    State<D>& state() { return state_; }
    Value& state(const std::string& key)
    {
        auto it = state_.find(key);
        if (it == state_.end()) throw InvalidArgument("unknown state variable '" + key + "'");
        return it->second;
    }

    const std::vector<Value>& in(const std::string& port) const
    {
        auto it = inputs_.find(port);
        if (it == inputs_.end()) throw InvalidArgument("unknown input port '" + port + "'");
        return it->second;
    }
    // Single-rate convenience: the (last) token of a port.
    const Value& in1(const std::string& port) const { return in(port).back(); }

    void out(const std::string& port, Value v) { outputs_[port].push_back(std::move(v)); }

    std::map<std::string, std::vector<Value>>& inputs() { return inputs_; }
    std::map<std::string, std::vector<Value>>& outputs() { return outputs_; }

private:
    Tick time_;
    State<D>& state_;
    std::map<std::string, std::vector<Value>> inputs_;
    std::map<std::string, std::vector<Value>> outputs_;
};

template <class D>
struct Process {
    std::string name;
    Tick period = 0;
    std::vector<InputPort> inputs;
    std::vector<OutputPort> outputs;
    // Set by processes whose firing depends on values (dynamic MoC); rejected.
    bool dynamic_activation = false;
    std::function<void(D&, State<D>&)> init;
    std::function<void(D&, Activation<D>&)> step;
};

template <class D>
struct Network {
    std::vector<Process<D>> processes;

    Process<D>& add(Process<D> p)
    {
        processes.push_back(std::move(p));
        return processes.back();
    }
};

struct Firing {
    std::size_t process = 0;
    std::size_t index = 0;  // firing number within the hyperperiod
    Tick time = 0;
};

struct SignalInfo {
    std::string name;
    std::size_t writer = 0;
    std::size_t port = 0;
    Kind kind = Kind::Real;
    Tick sample_period = 0;
    // (process, input port) pairs reading this signal
    std::vector<std::pair<std::size_t, std::size_t>> readers;
};

struct Schedule {
    Tick hyperperiod = 0;
    std::vector<Firing> firings;
    std::vector<SignalInfo> signals;  // declaration order
    std::map<std::string, std::size_t> signal_index;
    std::vector<std::string> process_names;

    std::size_t firings_of(std::size_t p) const
    {
        std::size_t n = 0;
        for (const auto& f : firings) n += f.process == p;
        return n;
    }
};

template <class D>
Schedule compile_schedule(const Network<D>& net)
{
    Schedule s;
    const auto& ps = net.processes;
    if (ps.empty()) throw InvalidArgument("empty process network");

    for (std::size_t p = 0; p < ps.size(); ++p) {
        s.process_names.push_back(ps[p].name);
        if (ps[p].dynamic_activation) {
            throw StaticMocViolation("process '" + ps[p].name + "' declares value-dependent activation");
        }
        if (ps[p].period <= 0) throw InvalidArgument("process '" + ps[p].name + "' has no positive period");
        for (std::size_t o = 0; o < ps[p].outputs.size(); ++o) {
            const auto& out = ps[p].outputs[o];
            if (out.rate <= 0) throw InvalidArgument("non-positive rate on '" + ps[p].name + "." + out.name + "'");
            if (s.signal_index.count(out.signal)) {
                throw StaticMocViolation("signal '" + out.signal + "' has more than one writer");
            }
            if (ps[p].period % out.rate != 0) {
                throw StaticMocViolation("period of '" + ps[p].name + "' is not divisible by the rate of " + out.name);
            }
            s.signal_index.emplace(out.signal, s.signals.size());
            s.signals.push_back({out.signal, p, o, out.kind, ps[p].period / out.rate, {}});
        }
    }
    for (std::size_t p = 0; p < ps.size(); ++p) {
        for (std::size_t i = 0; i < ps[p].inputs.size(); ++i) {
            const auto& in = ps[p].inputs[i];
            auto it = s.signal_index.find(in.signal);
            if (it == s.signal_index.end()) {
                throw InvalidArgument("process '" + ps[p].name + "' reads unknown signal '" + in.signal + "'");
            }
            if (in.rate <= 0 || in.delay < 0) throw InvalidArgument("bad rate or delay on '" + ps[p].name + "." + in.name + "'");
            SignalInfo& sig = s.signals[it->second];
            const auto& writer = ps[sig.writer];
            const int out_rate = writer.outputs[sig.port].rate;
            // tokens per unit time must balance
            if (writer.period * in.rate != ps[p].period * out_rate) {
                throw StaticMocViolation("rate mismatch on signal '" + in.signal + "' between '" + writer.name +
                                         "' and '" + ps[p].name + "'");
            }
            sig.readers.emplace_back(p, i);
        }
    }

    Tick h = ps.front().period;
    for (const auto& p : ps) h = std::lcm(h, p.period);
    s.hyperperiod = h;

    // Token simulation over one hyperperiod: earliest activation time first,
    // declaration order on ties.
    std::vector<std::vector<long>> tokens(ps.size());
    for (std::size_t p = 0; p < ps.size(); ++p) {
        for (const auto& in : ps[p].inputs) tokens[p].push_back(in.delay);
    }
    std::vector<std::size_t> next(ps.size(), 0);
    std::vector<std::size_t> total(ps.size());
    std::size_t remaining = 0;
    for (std::size_t p = 0; p < ps.size(); ++p) {
        total[p] = static_cast<std::size_t>(h / ps[p].period);
        remaining += total[p];
    }
    while (remaining > 0) {
        std::size_t pick = ps.size();
        Tick best = 0;
        for (std::size_t p = 0; p < ps.size(); ++p) {
            if (next[p] >= total[p]) continue;
            bool ready = true;
            for (std::size_t i = 0; i < ps[p].inputs.size(); ++i) ready &= tokens[p][i] >= ps[p].inputs[i].rate;
            if (!ready) continue;
            const Tick t = static_cast<Tick>(next[p]) * ps[p].period;
            if (pick == ps.size() || t < best) {
                pick = p;
                best = t;
            }
        }
        if (pick == ps.size()) {
            std::string names;
            for (std::size_t p = 0; p < ps.size(); ++p) {
                if (next[p] < total[p]) names += (names.empty() ? "" : ", ") + ps[p].name;
            }
            throw StaticMocViolation("zero-delay cycle (deadlock) among: " + names);
        }
        for (std::size_t i = 0; i < ps[pick].inputs.size(); ++i) tokens[pick][i] -= ps[pick].inputs[i].rate;
        for (const auto& out : ps[pick].outputs) {
            const auto& sig = s.signals[s.signal_index.at(out.signal)];
            for (auto [r, i] : sig.readers) tokens[r][i] += out.rate;
        }
        s.firings.push_back({pick, next[pick], best});
        ++next[pick];
        --remaining;
    }
    return s;
}

}  // namespace aadd::sim
