#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "tiltrotor/cli_io.hpp"

namespace tiltrotor {

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

RunConfig config_from(const std::string& path) {
    if (path.empty()) return default_run_config();
    return load_config(path);
}

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void print_report(const SimTrace& trace, const MetricReport& m) {
    std::printf("scenario %s: %zu steps, %s\n", trace.scenario.name.c_str(), trace.rows.size(),
                m.failed ? "FAILED" : "ok");
    if (m.transition_duration_s)
        std::printf("  transition duration   %.3f s\n", *m.transition_duration_s);
    std::printf("  max altitude dev      %.4f m\n", m.max_altitude_deviation_m);
    std::printf("  max pitch dev         %.4f deg\n", m.max_pitch_deviation_deg);
    std::printf("  peak F1 / F2          %.1f / %.1f N\n", m.peak_f1_N, m.peak_f2_N);
    if (m.step) {
        std::printf("  step overshoot        %.2f %%\n", 100.0 * m.step->overshoot);
        if (m.step->settling_time_s)
            std::printf("  step settling (2%%)    %.2f s\n", *m.step->settling_time_s);
        else
            std::printf("  step settling (2%%)    not settled\n");
    }
    for (const auto& sw : m.switches)
        std::printf("  switch to %s at %.3f s, thrust jump %.1f N\n", to_string(sw.to), sw.time_s,
                    sw.thrust_jump_N);
    if (m.corridor_violations) std::printf("  corridor violations   %zu\n", m.corridor_violations);
    if (m.failed) std::fprintf(stderr, "run failed: %s\n", m.failure.c_str());
}

// Runs one scenario and writes <name>_trace.csv and <name>_summary.json.
int run_and_write(const RunConfig& rc, const Scenario& sc, const std::string& dir) {
    const RunContext ctx = make_context(rc);
    const SimTrace trace = run_scenario(expand_disturbances(sc, rc), ctx);
    const MetricReport m = metrics(trace, trace.trim_speed_ms);
    write_trace_csv(join_path(dir, sc.name + "_trace.csv"), trace);
    write_summary(join_path(dir, sc.name + "_summary.json"), trace, m);
    print_report(trace, m);
    return m.failed ? kExitRunFailed : kExitOk;
}

int cmd_corridor(const std::string& config, std::optional<double> margin, std::string out) {
    RunConfig rc = config_from(config);
    if (margin) {
        rc.corridor.margin_frac = *margin;
        if (auto p = validate(rc); !p.empty()) throw ConfigInvalid(p);
    }
    const Corridor c = build_corridor(rc.aircraft, rc.corridor.grid, rc.corridor.margin_frac,
                                      rc.corridor.schedule);
    if (out.empty()) out = join_path(rc.output_directory, "corridor.csv");
    write_corridor_csv(out, c);

    // Area between the margined edges in deg * m/s, trapezoidal in velocity.
    double area = 0.0;
    for (std::size_t i = 1; i < c.velocity_grid_ms.size(); ++i) {
        const double w0 = rad2deg(c.upper_rad[i - 1] - c.lower_rad[i - 1]);
        const double w1 = rad2deg(c.upper_rad[i] - c.lower_rad[i]);
        area += 0.5 * (w0 + w1) * (c.velocity_grid_ms[i] - c.velocity_grid_ms[i - 1]);
    }
    std::printf("corridor: %zu x %zu grid, margin %.3f, cruise trim %.3f m/s\n",
                c.velocity_grid_ms.size(), c.tilt_grid_rad.size(), c.margin_frac, c.trim_speed_ms);
    std::printf("  feasible cells        %zu\n", c.feasible_count());
    std::printf("  margined area         %.3f deg*m/s\n", area);
    std::printf("  hover lower edge      %.3f deg (raw %.3f)\n", rad2deg(c.lower_rad.front()),
                rad2deg(c.raw_lower_rad.front()));
    if (!c.contiguous())
        std::printf("  %zu velocity columns have a split feasible set\n",
                    c.non_contiguous_velocities_ms.size());
    std::printf("  wrote %s\n", out.c_str());
    return kExitOk;
}

int cmd_gains_check(const std::string& config) {
    const RunConfig rc = config_from(config);
    struct Entry {
        const char* mode;
        const char* channel;
        const PidGains* g;
        bool active;
    };
    const GainSchedule& s = rc.gains;
    const bool heli_velocity_active =
        s.heli.velocity.kp != 0.0 || s.heli.velocity.ki != 0.0 || s.heli.velocity.kd != 0.0;
    const Entry entries[] = {
        {"heli", "altitude", &s.heli.altitude, true},
        {"heli", "velocity", &s.heli.velocity, heli_velocity_active},
        {"heli", "pitch", &s.heli.pitch, true},
        {"fw", "altitude", &s.fw.altitude, true},
        {"fw", "velocity", &s.fw.velocity, true},
        {"fw", "pitch", &s.fw.pitch, true},
    };
    bool all_stable = true;
    std::printf("%-5s %-9s %10s %10s %10s  %s\n", "mode", "channel", "kp", "ki", "kd", "verdict");
    for (const auto& e : entries) {
        std::printf("%-5s %-9s %10.5g %10.5g %10.5g  ", e.mode, e.channel, e.g->kp, e.g->ki,
                    e.g->kd);
        if (!e.active) {
            std::printf("off\n");
            continue;
        }
        const Verdict v = routh_check(*e.g);
        std::printf("%s\n", to_string(v));
        all_stable = all_stable && v == Verdict::stable;
    }
    return all_stable ? kExitOk : kExitRunFailed;
}

int cmd_simulate(const std::string& config, const std::string& name, std::string dir) {
    const RunConfig rc = config_from(config);
    const Scenario* sc = rc.find_scenario(name);
    if (!sc) {
        std::string known;
        for (const auto& s : rc.scenarios) known += " " + s.name;
        throw ConfigInvalid({"unknown scenario '" + name + "'; configured:" + known});
    }
    if (dir.empty()) dir = rc.output_directory;
    return run_and_write(rc, *sc, dir);
}

int cmd_step(const std::string& config, const std::string& channel, const std::string& mode,
             std::optional<double> magnitude, std::optional<double> duration, std::string dir) {
    RunConfig rc = config_from(config);
    const std::string name = mode + "_" + channel + "_step";
    Scenario sc;
    if (const Scenario* base = rc.find_scenario(name)) sc = *base;
    else {
        sc.name = name;
        sc.duration_s = channel == "altitude" ? 300.0 : 40.0;
    }
    sc.kind = channel == "altitude" ? ScenarioKind::altitude_step : ScenarioKind::pitch_step;
    sc.initial_mode = mode == "heli" ? FlightMode::heli_static : FlightMode::fw_static;
    if (magnitude) {
        if (channel == "altitude") sc.step_altitude_m = *magnitude;
        else sc.step_pitch_rad = deg2rad(*magnitude);
    }
    if (duration) sc.duration_s = *duration;
    if (auto p = validate(sc); !p.empty()) throw ConfigInvalid(p);
    if (dir.empty()) dir = rc.output_directory;
    return run_and_write(rc, sc, dir);
}

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    MetricReport m;
};

int cmd_sweep(const std::string& config, const std::string& name, const std::string& param,
              const std::vector<double>& values, std::string out, bool traces, unsigned jobs) {
    const RunConfig base = config_from(config);
    if (!base.find_scenario(name)) throw ConfigInvalid({"unknown scenario '" + name + "'"});
    const auto known = sweep_parameters();
    if (std::find(known.begin(), known.end(), param) == known.end()) {
        std::string list;
        for (const auto& k : known) list += " " + k;
        throw ConfigInvalid({"unknown sweep parameter '" + param + "'; known:" + list});
    }
    if (out.empty()) out = join_path(base.output_directory, name + "_sweep_" + param + ".csv");
    const std::string trace_dir = std::filesystem::path(out).parent_path().string();

    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            SweepRow& r = rows[i];
            r.value = values[i];
            try {
                RunConfig rc = base;
                set_parameter(rc, param, values[i]);
                if (auto p = validate(rc); !p.empty()) {
                    std::string msg;
                    for (const auto& s : p) msg += (msg.empty() ? "" : "; ") + s;
                    throw std::runtime_error(msg);
                }
                const Scenario sc = expand_disturbances(*rc.find_scenario(name), rc);
                const SimTrace trace = run_scenario(sc, make_context(rc));
                r.m = metrics(trace, trace.trim_speed_ms);
                if (traces)
                    write_trace_csv(join_path(trace_dir, name + "_" + param + "_" +
                                                             format_double(values[i]) + "_trace.csv"),
                                    trace);
                r.ok = !r.m.failed;
                if (r.m.failed) r.error = r.m.failure;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, values.size())));
    std::vector<std::future<void>> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();

    std::string s = param +
                    ",ok,error,transition_duration_s,max_altitude_deviation_m,"
                    "max_pitch_deviation_deg,peak_f1_N,peak_f2_N,step_overshoot,"
                    "step_settling_time_s,corridor_violations,max_thrust_discontinuity_N,"
                    "final_speed_ms,longest_authority_loss_s\r\n";
    bool all_ok = true;
    for (const auto& r : rows) {
        all_ok = all_ok && r.ok;
        const MetricReport& m = r.m;
        s += format_double(r.value) + "," + (r.ok ? "1" : "0") + "," + csv_field(r.error) + "," +
             opt_field(m.transition_duration_s) + "," + format_double(m.max_altitude_deviation_m) +
             "," + format_double(m.max_pitch_deviation_deg) + "," + format_double(m.peak_f1_N) +
             "," + format_double(m.peak_f2_N) + "," +
             (m.step ? format_double(m.step->overshoot) : "") + "," +
             (m.step ? opt_field(m.step->settling_time_s) : "") + "," +
             std::to_string(m.corridor_violations) + "," +
             format_double(m.max_thrust_discontinuity_N) + "," + format_double(m.final_speed_ms) +
             "," + format_double(m.longest_authority_loss_s) + "\r\n";
        std::printf("%s = %-12g %s%s\n", param.c_str(), r.value, r.ok ? "ok" : "FAILED ",
                    r.error.c_str());
    }
    write_file_atomic(out, s);
    std::printf("wrote %s\n", out.c_str());
    return all_ok ? kExitOk : kExitRunFailed;
}

}  // namespace

int cli(int argc, const char* const* argv) {
    CLI::App app{"Tiltrotor transition corridor, gain scheduling and simulation"};
    app.require_subcommand(1);

    std::string config;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config, "YAML run configuration (defaults built in)")
            ->check(CLI::ExistingFile);
    };

    auto* corridor = app.add_subcommand("corridor", "Compute the transition corridor and write it as CSV");
    add_config(corridor);
    std::optional<double> margin;
    std::string corridor_out;
    corridor->add_option("--margin", margin, "Safety margin fraction, overrides the config");
    corridor->add_option("-o,--out", corridor_out, "Output CSV (default <output dir>/corridor.csv)");

    auto* gains = app.add_subcommand("gains-check", "Routh-Hurwitz verdict for every gain triple");
    add_config(gains);

    auto* simulate = app.add_subcommand("simulate", "Run a configured scenario");
    add_config(simulate);
    std::string scenario = "transition";
    std::string out_dir;
    simulate->add_option("-s,--scenario", scenario, "Scenario name")->capture_default_str();
    simulate->add_option("--out-dir", out_dir, "Directory for trace and summary");

    auto* step = app.add_subcommand("step", "Altitude or pitch step from heli or fixed-wing trim");
    add_config(step);
    std::string channel, mode;
    std::optional<double> magnitude, duration;
    step->add_option("--channel", channel, "altitude or pitch")
        ->required()
        ->check(CLI::IsMember({"altitude", "pitch"}));
    step->add_option("--mode", mode, "heli or fw")->required()->check(CLI::IsMember({"heli", "fw"}));
    step->add_option("--magnitude", magnitude, "Step size in m (altitude) or deg (pitch)");
    step->add_option("--duration", duration, "Simulated seconds");
    step->add_option("--out-dir", out_dir, "Directory for trace and summary");

    auto* sweep = app.add_subcommand("sweep", "Run one scenario over a parameter grid in parallel");
    add_config(sweep);
    std::string sweep_scenario = "transition", param, sweep_out;
    std::vector<double> values;
    bool traces = false;
    unsigned jobs = 0;
    sweep->add_option("-s,--scenario", sweep_scenario, "Scenario name")->capture_default_str();
    sweep->add_option("--param", param, "Parameter name")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("-o,--out", sweep_out, "Summary CSV path");
    sweep->add_flag("--traces", traces, "Also write one trace per run");
    sweep->add_option("-j,--jobs", jobs, "Parallel runs (default: hardware threads)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (corridor->parsed()) return cmd_corridor(config, margin, corridor_out);
        if (gains->parsed()) return cmd_gains_check(config);
        if (simulate->parsed()) return cmd_simulate(config, scenario, out_dir);
        if (step->parsed()) return cmd_step(config, channel, mode, magnitude, duration, out_dir);
        if (sweep->parsed())
            return cmd_sweep(config, sweep_scenario, param, values, sweep_out, traces, jobs);
    } catch (const ConfigParseError& e) {
        std::fprintf(stderr, "config parse error: %s\n", e.what());
        return kExitParseError;
    } catch (const ConfigInvalid& e) {
        std::fprintf(stderr, "invalid configuration:\n");
        for (const auto& p : e.problems()) std::fprintf(stderr, "  - %s\n", p.c_str());
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRunFailed;
    }
    return kExitUsage;
}

}  // namespace tiltrotor
