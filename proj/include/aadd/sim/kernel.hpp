#pragma once

// Bounded execution of a compiled schedule.

#include "aadd/sim/domain.hpp"
#include "aadd/sim/network.hpp"

#include <deque>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace aadd::sim {

struct TraceRow {
    Tick tag = 0;
    std::size_t signal = 0;
    Observation obs;
};

struct Trace {
    Tick hyperperiod = 0;
    Tick horizon = 0;
    std::vector<std::string> signals;
    std::vector<TraceRow> rows;  // production order

    std::size_t signal(const std::string& name) const
    {
        for (std::size_t i = 0; i < signals.size(); ++i) {
            if (signals[i] == name) return i;
        }
        throw InvalidArgument("unknown signal '" + name + "'");
    }

    std::vector<const TraceRow*> series(const std::string& name) const
    {
        const std::size_t s = signal(name);
        std::vector<const TraceRow*> out;
        for (const auto& r : rows) {
            if (r.signal == s) out.push_back(&r);
        }
        return out;
    }

    // Rows ordered by tag, then signal declaration order.
    std::vector<const TraceRow*> sorted() const
    {
        std::vector<const TraceRow*> out;
        for (const auto& r : rows) out.push_back(&r);
        std::stable_sort(out.begin(), out.end(), [](const TraceRow* a, const TraceRow* b) {
            return a->tag != b->tag ? a->tag < b->tag : a->signal < b->signal;
        });
        return out;
    }
};

template <class D>
struct RunOptions {
    bool reduce = true;
    // Record path conditions of leaves for these signals (all when record_all_paths).
    std::set<std::string> watched;
    bool record_all_paths = false;
    // Called for every produced event.
    std::function<void(const std::string& signal, Tick tag, const typename D::Value&)> on_event;
};

// x <- x + h * d: exact for derivatives constant over the step.
template <class D>
typename D::Real integrator_step(const typename D::Real& x, const typename D::Real& d, double h)
{
    return x + h * d;
}

template <class D>
Trace run_bounded(const Network<D>& net, const Schedule& sched, D& dom, Tick horizon, const RunOptions<D>& opt = {})
{
    using Value = typename D::Value;
    if (horizon <= 0 || horizon % sched.hyperperiod != 0) {
        throw InvalidArgument("horizon must be a positive multiple of the hyperperiod (" +
                              format_number(to_seconds(sched.hyperperiod)) + " s)");
    }
    const auto& ps = net.processes;

    Trace trace;
    trace.hyperperiod = sched.hyperperiod;
    trace.horizon = horizon;
    for (const auto& s : sched.signals) trace.signals.push_back(s.name);

    std::vector<State<D>> states(ps.size());
    std::vector<std::vector<std::deque<Value>>> fifos(ps.size());
    for (std::size_t p = 0; p < ps.size(); ++p) {
        if (ps[p].init) ps[p].init(dom, states[p]);
        for (const auto& in : ps[p].inputs) {
            std::deque<Value> q;
            for (int k = 0; k < in.delay; ++k) {
                if (std::holds_alternative<bool>(in.initial)) {
                    q.push_back(dom.value(dom.boolean(std::get<bool>(in.initial))));
                } else {
                    q.push_back(dom.value(dom.constant(std::get<double>(in.initial))));
                }
            }
            fifos[p].push_back(std::move(q));
        }
    }

    const auto rounds = horizon / sched.hyperperiod;
    for (Tick round = 0; round < rounds; ++round) {
        const Tick base = round * sched.hyperperiod;
        for (const Firing& f : sched.firings) {
            const Process<D>& proc = ps[f.process];
            Activation<D> act(base + f.time, states[f.process]);
            for (std::size_t i = 0; i < proc.inputs.size(); ++i) {
                auto& q = fifos[f.process][i];
                auto& tokens = act.inputs()[proc.inputs[i].name];
                for (int k = 0; k < proc.inputs[i].rate; ++k) {
                    tokens.push_back(std::move(q.front()));
                    q.pop_front();
                }
            }
            proc.step(dom, act);
            for (const auto& out : proc.outputs) {
                auto it = act.outputs().find(out.name);
                const std::size_t produced = it == act.outputs().end() ? 0 : it->second.size();
                if (produced != static_cast<std::size_t>(out.rate)) {
                    throw StaticMocViolation("process '" + proc.name + "' produced " + std::to_string(produced) +
                                             " tokens on '" + out.name + "', rate is " + std::to_string(out.rate));
                }
                const std::size_t sidx = sched.signal_index.at(out.signal);
                const SignalInfo& sig = sched.signals[sidx];
                const bool paths = opt.record_all_paths || opt.watched.count(out.signal) > 0;
                for (std::size_t k = 0; k < produced; ++k) {
                    const Value& v = it->second[k];
                    if (dom.is_real(v) != (out.kind == Kind::Real)) {
                        throw LeafKindError("signal '" + out.signal + "' got a value of the wrong kind");
                    }
                    const Tick tag = act.time() + static_cast<Tick>(k) * sig.sample_period;
                    trace.rows.push_back({tag, sidx, dom.observe(v, paths)});
                    if (opt.on_event) opt.on_event(out.signal, tag, v);
                    for (auto [r, i] : sig.readers) fifos[r][i].push_back(v);
                }
            }
        }
        if (opt.reduce) {
            for (auto& st : states) {
                for (auto& [key, v] : st) v = dom.simplify(v);
            }
            for (auto& per : fifos) {
                for (auto& q : per) {
                    for (auto& v : q) v = dom.simplify(v);
                }
            }
        }
    }
    return trace;
}

}  // namespace aadd::sim
