// aaddsim: symbolic simulation of AADD-valued dataflow scenarios.
//
// Exit codes: 0 all safety assertions pass, 2 a safety assertion is violated
// (or possibly violated), 1 usage / configuration error, 3 the corner oracle
// found a sample outside the symbolic hull.

#include "scenario_config.hpp"

#include "aadd/sim/assertions.hpp"
#include "aadd/sim/corners.hpp"
#include "aadd/sim/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

namespace fs = std::filesystem;
using namespace aaddsim;

namespace {

struct Options {
    std::string scenario;
    bool fault = false;
    bool observer = false;
    std::string pump_forced;
    std::optional<double> horizon;
    std::string out = "aaddsim_out";
    bool corners = false;
    bool dump_lp = false;
    bool emit_json = false;
    std::uint64_t seed = 1;
    int samples = 4;
    bool no_reduce = false;
};

void write_file(const fs::path& p, const std::string& content)
{
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    os << content;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

ScenarioSpec make_scenario(const Options& o)
{
    ScenarioSpec s;
    if (o.scenario == "waterlevel") {
        WaterLevelParams wp;
        wp.fault = o.fault;
        wp.observer = o.observer;
        if (!o.pump_forced.empty()) wp.pump_forced = o.pump_forced == "on";
        s = builtin_waterlevel(wp);
    } else {
        s = load_scenario_file(o.scenario);
        if (s.waterlevel) {
            s.waterlevel->fault |= o.fault;
            s.waterlevel->observer |= o.observer;
            if (!o.pump_forced.empty()) s.waterlevel->pump_forced = o.pump_forced == "on";
            s.assertions = waterlevel_assertions(*s.waterlevel);
        } else if (o.fault || o.observer || !o.pump_forced.empty()) {
            throw ConfigError("--fault, --observer and --pump-forced only apply to the waterlevel preset");
        }
    }
    if (o.horizon) s.horizon = *o.horizon;
    if (!(s.horizon > 0.0)) throw ConfigError("horizon must be positive");
    return s;
}

struct CornerOutcome {
    std::string label;
    sim::Containment containment;
    std::string csv;
};

std::vector<CornerOutcome> run_corners(const ScenarioSpec& spec, const sim::Schedule& sched, const sim::Trace& symbolic,
                                       const std::vector<sim::NumericDomain::Corner>& corners)
{
    std::vector<CornerOutcome> out(corners.size());
    const auto net = spec.build<sim::NumericDomain>();
    const sim::Tick horizon = symbolic.horizon;
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::string error;
    auto worker = [&] {
        for (std::size_t i = next++; i < corners.size(); i = next++) {
            try {
                sim::NumericDomain dom(corners[i]);
                const auto trace = sim::run_bounded(net, sched, dom, horizon);
                std::ostringstream csv;
                sim::write_csv(csv, trace);
                out[i] = {sim::corner_label(corners[i]), sim::check_containment(symbolic, trace), csv.str()};
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mutex);
                error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), corners.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (!error.empty()) throw aadd::Error("corner run failed: " + error);
    return out;
}

int run(const Options& o)
{
    const ScenarioSpec spec = make_scenario(o);
    const fs::path dir(o.out);
    fs::create_directories(dir);

    Context ctx;
    std::ofstream lp_dump;
    if (o.dump_lp) {
        lp_dump.open(dir / "lp_dump.txt", std::ios::binary);
        ctx.set_lp_dump(&lp_dump);
    }
    sim::SymbolicDomain dom(ctx);
    const auto net = spec.build<sim::SymbolicDomain>();
    const auto sched = sim::compile_schedule(net);
    const sim::Tick horizon = sim::seconds(spec.horizon);
    if (horizon % sched.hyperperiod != 0) {
        throw ConfigError("horizon " + format_number(spec.horizon) + " s is not a multiple of the hyperperiod " +
                          format_number(sim::to_seconds(sched.hyperperiod)) + " s");
    }

    sim::RunOptions<sim::SymbolicDomain> ro;
    ro.reduce = !o.no_reduce;
    ro.record_all_paths = o.emit_json;
    for (const auto& a : spec.assertions) ro.watched.insert(a.signal);

    const auto t0 = std::chrono::steady_clock::now();
    const sim::Trace trace = sim::run_bounded(net, sched, dom, horizon, ro);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto report = sim::check_assertions(trace, spec.assertions);

    {
        std::ostringstream csv;
        sim::write_csv(csv, trace);
        write_file(dir / "trace.csv", csv.str());
    }
    if (o.emit_json) write_file(dir / "trace.json", dump_json(sim::to_json(trace)));
    {
        std::ostringstream txt;
        sim::write_text(txt, report);
        write_file(dir / "assertions.txt", txt.str());
        std::cout << "scenario " << spec.name << ", horizon " << format_number(spec.horizon) << " s, "
                  << format_number(wall) << " s wall\n"
                  << txt.str();
    }
    write_file(dir / "assertions.json", dump_json(sim::to_json(report)));

    nlohmann::json stats{{"scenario", spec.name},
                         {"horizon", spec.horizon},
                         {"hyperperiod", sim::to_seconds(sched.hyperperiod)},
                         {"wall_time_s", wall},
                         {"lp_calls", ctx.stats().lp_calls.load()},
                         {"feasibility_cache_hits", ctx.stats().feasibility_cache_hits.load()},
                         {"conditions", ctx.conditions().size()},
                         {"reduce", !o.no_reduce},
                         {"seed", o.seed}};
    nlohmann::json leaf = nlohmann::json::object();
    for (const auto& name : trace.signals) {
        std::size_t peak = 0;
        nlohmann::json series = nlohmann::json::array();
        for (const auto* r : trace.series(name)) {
            peak = std::max(peak, r->obs.leaf_count);
            if (r->tag % sched.hyperperiod == 0) series.push_back({sim::to_seconds(r->tag), r->obs.leaf_count});
        }
        leaf[name] = {{"max", peak}, {"final", trace.series(name).back()->obs.leaf_count}, {"per_hyperperiod", series}};
    }
    stats["leaf_counts"] = std::move(leaf);

    int code = report.safety_ok() ? 0 : 2;
    if (o.corners) {
        std::vector<std::string> noise;
        for (const auto& [name, id] : dom.symbols()) noise.push_back(name);
        const std::vector<std::string> bools(dom.free_bools().begin(), dom.free_bools().end());
        auto corners = sim::enumerate_corners(noise, bools);
        const std::size_t n_corners = corners.size();
        std::mt19937_64 rng(o.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < o.samples; ++k) {
            sim::NumericDomain::Corner c;
            for (const auto& name : noise) c.noise[name] = u(rng);
            for (const auto& name : bools) c.bools[name] = (rng() & 1) != 0;
            corners.push_back(std::move(c));
        }
        const auto outcomes = run_corners(spec, sched, trace, corners);
        fs::create_directories(dir / "corners");
        nlohmann::json cj = nlohmann::json::array();
        std::size_t bad = 0;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            const bool is_corner = i < n_corners;
            char file[32];
            std::snprintf(file, sizeof file, is_corner ? "corner_%02zu.csv" : "sample_%02zu.csv",
                          is_corner ? i : i - n_corners);
            write_file(dir / "corners" / file, outcomes[i].csv);
            const auto& c = outcomes[i].containment;
            bad += !c.ok();
            cj.push_back({{"file", file},
                          {"assignment", outcomes[i].label},
                          {"corner", is_corner},
                          {"checked", c.checked},
                          {"outside", c.outside},
                          {"first_outside", c.first}});
        }
        write_file(dir / "corners.json", dump_json({{"runs", cj}, {"contained", bad == 0}}));
        std::cout << "corner oracle: " << n_corners << " corners + " << o.samples << " random samples, "
                  << (bad == 0 ? "all contained in the symbolic hull" : std::to_string(bad) + " runs escape the hull")
                  << '\n';
        stats["corners"] = {{"runs", outcomes.size()}, {"escaping", bad}};
        if (bad > 0 && code == 0) code = 3;
    }
    write_file(dir / "stats.json", dump_json(stats));
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Symbolic simulation with affine arithmetic decision diagrams"};
    app.require_subcommand(1);
    Options o;
    auto* run_cmd = app.add_subcommand("run", "run a scenario (builtin 'waterlevel' or a YAML file)");
    run_cmd->add_option("scenario", o.scenario, "waterlevel or path/to/scenario.yaml")->required();
    run_cmd->add_flag("--fault", o.fault, "inject the stuck full-sensor fault (waterlevel)");
    run_cmd->add_flag("--observer", o.observer, "add the observer and fail-safe mode (waterlevel)");
    run_cmd->add_option("--pump-forced", o.pump_forced, "force the pump on or off (waterlevel)")
        ->check(CLI::IsMember({"on", "off"}));
    run_cmd->add_option("--horizon", o.horizon, "simulated time in seconds");
    run_cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    run_cmd->add_flag("--corners", o.corners, "cross-check against numeric corner runs");
    run_cmd->add_flag("--dump-lp", o.dump_lp, "write every LP instance to lp_dump.txt");
    run_cmd->add_flag("--emit-json", o.emit_json, "also write trace.json with per-leaf paths");
    run_cmd->add_option("--seed", o.seed, "seed for the random interior samples of --corners")->capture_default_str();
    run_cmd->add_option("--samples", o.samples, "random interior samples for --corners")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    run_cmd->add_flag("--no-reduce", o.no_reduce, "skip diagram reduction between hyperperiods");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(o);
    } catch (const aadd::StaticMocViolation& e) {
        std::cerr << "aaddsim: static MoC violation: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "aaddsim: " << e.what() << '\n';
        return 1;
    } catch (const aadd::InvalidArgument& e) {
        std::cerr << "aaddsim: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "aaddsim: error: " << e.what() << '\n';
        return 1;
    }
}
