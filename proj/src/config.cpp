#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "tiltrotor/cli_io.hpp"

namespace tiltrotor {

ConfigInvalid::ConfigInvalid(std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string msg = "configuration invalid (" + std::to_string(problems.size()) +
                            " problem" + (problems.size() == 1 ? "" : "s") + ")";
          for (const auto& p : problems) msg += "\n  - " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

const Scenario* RunConfig::find_scenario(const std::string& name) const {
    for (const auto& s : scenarios)
        if (s.name == name) return &s;
    return nullptr;
}

std::vector<Scenario> default_scenarios() {
    std::vector<Scenario> out;

    Scenario tr;
    tr.name = "transition";
    tr.kind = ScenarioKind::transition;
    tr.duration_s = 90.0;
    out.push_back(tr);

    Scenario ha;
    ha.name = "heli_altitude_step";
    ha.kind = ScenarioKind::altitude_step;
    ha.initial_mode = FlightMode::heli_static;
    ha.duration_s = 300.0;
    out.push_back(ha);

    Scenario fa = ha;
    fa.name = "fw_altitude_step";
    fa.initial_mode = FlightMode::fw_static;
    out.push_back(fa);

    Scenario hp;
    hp.name = "heli_pitch_step";
    hp.kind = ScenarioKind::pitch_step;
    hp.initial_mode = FlightMode::heli_static;
    hp.duration_s = 40.0;
    out.push_back(hp);

    Scenario hh;
    hh.name = "hover_hold";
    hh.kind = ScenarioKind::hold;
    hh.initial_mode = FlightMode::heli_static;
    hh.duration_s = 60.0;
    out.push_back(hh);

    Scenario ch = hh;
    ch.name = "cruise_hold";
    ch.initial_mode = FlightMode::fw_static;
    out.push_back(ch);
    return out;
}

RunConfig default_run_config() {
    RunConfig rc;
    rc.corridor.grid.v_max_ms = rc.aircraft.v_max_ms;
    rc.scenarios = default_scenarios();
    return rc;
}

namespace {

// One YAML mapping with typed optional reads; records every key it touches so
// leftovers can be reported as unknown.
class Section {
public:
    Section(YAML::Node node, std::string path, std::vector<std::string>& problems)
        : node_(std::move(node)), path_(std::move(path)), problems_(problems) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            problems_.push_back(path_ + ": expected a mapping");
            node_ = YAML::Node();
        }
    }

    bool present() const { return node_ && node_.IsMap(); }

    bool has(const std::string& key) const {
        if (!present()) return false;
        const YAML::Node& cn = node_;
        return cn[key].IsDefined() && !cn[key].IsNull();
    }

    void num(const std::string& key, double& out) {
        const auto v = take(key);
        if (!v) return;
        try {
            out = v->as<double>();
        } catch (const YAML::Exception&) {
            problems_.push_back(where(key) + ": expected a number");
        }
    }

    void deg(const std::string& key, double& rad_out) {
        const auto v = take(key);
        if (!v) return;
        try {
            rad_out = deg2rad(v->as<double>());
        } catch (const YAML::Exception&) {
            problems_.push_back(where(key) + ": expected a number (degrees)");
        }
    }

    void integer(const std::string& key, int& out) {
        const auto v = take(key);
        if (!v) return;
        try {
            out = v->as<int>();
        } catch (const YAML::Exception&) {
            problems_.push_back(where(key) + ": expected an integer");
        }
    }

    void uint64(const std::string& key, std::uint64_t& out) {
        const auto v = take(key);
        if (!v) return;
        try {
            out = v->as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            problems_.push_back(where(key) + ": expected a non-negative integer");
        }
    }

    void boolean(const std::string& key, bool& out) {
        const auto v = take(key);
        if (!v) return;
        try {
            out = v->as<bool>();
        } catch (const YAML::Exception&) {
            problems_.push_back(where(key) + ": expected true or false");
        }
    }

    void text(const std::string& key, std::string& out) {
        const auto v = take(key);
        if (!v) return;
        try {
            out = v->as<std::string>();
        } catch (const YAML::Exception&) {
            problems_.push_back(where(key) + ": expected a string");
        }
    }

    Section sub(const std::string& key) {
        return Section(take(key).value_or(YAML::Node()), where(key), problems_);
    }

    std::optional<YAML::Node> raw(const std::string& key) { return take(key); }

    std::string where(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    // Report keys that were never read.
    void finish() {
        if (!present()) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!seen_.count(k)) problems_.push_back(where(k) + ": unknown key");
        }
    }

    std::vector<std::string>& problems() { return problems_; }

private:
    // Absent and null keys both read as "not given". The lookup goes through
    // a const node since the mutable operator[] would insert the key.
    std::optional<YAML::Node> take(const std::string& key) {
        seen_.insert(key);
        if (!present()) return std::nullopt;
        const YAML::Node& cn = node_;
        YAML::Node v = cn[key];
        if (!v.IsDefined() || v.IsNull()) return std::nullopt;
        return v;
    }

    YAML::Node node_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

void read_polar(Section sec, Polar& p) {
    sec.num("cl0", p.cl0);
    sec.num("cl_alpha_per_rad", p.cl_alpha_per_rad);
    sec.num("cl_max", p.cl_max);
    sec.num("cd0", p.cd0);
    sec.num("induced_drag_k", p.induced_drag_k);
    sec.finish();
}

void read_lever(Section sec, LeverArm& l) {
    sec.num("tilt0_m", l.at_tilt0_m);
    sec.num("tilt90_m", l.at_tilt90_m);
    sec.finish();
}

void read_aircraft(Section sec, AircraftConfig& a) {
    sec.num("mass_kg", a.mass_kg);
    sec.num("inertia_pitch_kgm2", a.inertia_pitch_kgm2);
    sec.num("rotor_inertia_kgm2", a.rotor_inertia_kgm2);
    sec.num("wing_area_m2", a.wing_area_m2);
    sec.num("tail_area_m2", a.tail_area_m2);
    sec.num("x_wing_m", a.x_wing_m);
    sec.num("x_tail_m", a.x_tail_m);
    sec.num("y_drag_m", a.y_drag_m);
    read_lever(sec.sub("lever_front"), a.lever_front);
    read_lever(sec.sub("lever_rear"), a.lever_rear);
    sec.num("f1_max_N", a.f1_max_N);
    sec.num("f2_max_N", a.f2_max_N);
    sec.num("p_max_W", a.p_max_W);
    read_polar(sec.sub("wing"), a.wing);
    read_polar(sec.sub("tail"), a.tail);
    sec.num("rho_kg_m3", a.rho_kg_m3);
    sec.num("v_max_ms", a.v_max_ms);
    sec.num("disk_loading_kg_m2", a.disk_loading_kg_m2);
    sec.boolean("flightpath_aoa", a.flightpath_aoa);
    sec.finish();
}

void read_pid(Section sec, PidGains& g) {
    sec.num("kp", g.kp);
    sec.num("ki", g.ki);
    sec.num("kd", g.kd);
    sec.finish();
}

void read_gain_set(Section sec, GainSet& g) {
    read_pid(sec.sub("altitude"), g.altitude);
    read_pid(sec.sub("velocity"), g.velocity);
    read_pid(sec.sub("pitch"), g.pitch);
    sec.finish();
}

void read_gains(Section sec, GainSchedule& g) {
    sec.deg("tilt_hi_deg", g.tilt_hi_rad);
    sec.deg("tilt_lo_deg", g.tilt_lo_rad);
    read_gain_set(sec.sub("heli"), g.heli);
    read_gain_set(sec.sub("fw"), g.fw);
    sec.finish();
}

void read_control(Section sec, ControlConfig& c) {
    sec.num("tilt_gain_per_s", c.tilt_gain_per_s);
    sec.deg("tilt_rate_limit_deg_s", c.tilt_rate_limit_rad_s);
    sec.num("denominator_guard", c.denominator_guard);
    sec.num("lift_authority", c.lift_authority);
    sec.num("altitude_error_limit_m", c.altitude_error_limit_m);
    sec.num("accel_filter_s", c.accel_filter_s);
    sec.boolean("pitch_priority", c.pitch_priority);
    sec.num("pitch_priority_factor", c.pitch_priority_factor);
    sec.finish();
}

void read_corridor(Section sec, CorridorSettings& c, bool& v_max_given) {
    sec.num("v_min_ms", c.grid.v_min_ms);
    v_max_given = sec.has("v_max_ms");
    sec.num("v_max_ms", c.grid.v_max_ms);
    sec.integer("n_velocity", c.grid.n_velocity);
    sec.integer("n_tilt", c.grid.n_tilt);
    sec.num("margin_frac", c.margin_frac);
    sec.num("schedule_fraction", c.schedule.fraction);
    sec.boolean("schedule_cap_at_level_trim", c.schedule.cap_at_level_trim);
    sec.finish();
}

ForceBreakdown read_force(Section& sec) {
    ForceBreakdown f;
    sec.num("fx_N", f.fx_N);
    sec.num("fz_N", f.fz_N);
    sec.num("m_pitch_Nm", f.m_pitch_Nm);
    return f;
}

void read_disturbance(Section sec, Disturbance& d, RandomGusts& rg, bool& has_random) {
    if (const auto segs_opt = sec.raw("segments")) {
        const YAML::Node& segs = *segs_opt;
        if (!segs.IsSequence()) sec.problems().push_back(sec.where("segments") + ": expected a list");
        else {
            d.segments.clear();
            for (std::size_t i = 0; i < segs.size(); ++i) {
                Section s(segs[i], sec.where("segments[" + std::to_string(i) + "]"), sec.problems());
                DisturbanceSegment seg;
                s.num("start_s", seg.start_s);
                seg.value = read_force(s);
                s.finish();
                d.segments.push_back(seg);
            }
            std::stable_sort(d.segments.begin(), d.segments.end(),
                             [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
        }
    }
    if (const auto gusts_opt = sec.raw("gusts")) {
        const YAML::Node& gusts = *gusts_opt;
        if (!gusts.IsSequence()) sec.problems().push_back(sec.where("gusts") + ": expected a list");
        else {
            d.gusts.clear();
            for (std::size_t i = 0; i < gusts.size(); ++i) {
                Section s(gusts[i], sec.where("gusts[" + std::to_string(i) + "]"), sec.problems());
                GustPulse g;
                s.num("start_s", g.start_s);
                s.num("duration_s", g.duration_s);
                g.peak = read_force(s);
                s.finish();
                d.gusts.push_back(g);
            }
        }
    }
    Section r = sec.sub("random_gusts");
    if (r.present()) {
        has_random = true;
        r.integer("count", rg.count);
        r.num("max_force_N", rg.max_force_N);
        r.num("max_moment_Nm", rg.max_moment_Nm);
        r.num("duration_s", rg.duration_s);
        r.finish();
    }
    sec.finish();
}

bool parse_kind(const std::string& s, ScenarioKind& k) {
    if (s == "transition") k = ScenarioKind::transition;
    else if (s == "altitude_step") k = ScenarioKind::altitude_step;
    else if (s == "pitch_step") k = ScenarioKind::pitch_step;
    else if (s == "hold") k = ScenarioKind::hold;
    else return false;
    return true;
}

void read_scenario(Section sec, Scenario& sc, RunConfig& rc) {
    std::string kind = to_string(sc.kind);
    sec.text("kind", kind);
    if (!parse_kind(kind, sc.kind))
        sec.problems().push_back(sec.where("kind") + ": unknown kind '" + kind +
                                 "' (transition, altitude_step, pitch_step, hold)");
    std::string mode = sc.initial_mode == FlightMode::fw_static ? "fw" : "heli";
    sec.text("initial_mode", mode);
    if (mode == "heli") sc.initial_mode = FlightMode::heli_static;
    else if (mode == "fw") sc.initial_mode = FlightMode::fw_static;
    else sec.problems().push_back(sec.where("initial_mode") + ": expected heli or fw");
    sec.num("step_altitude_m", sc.step_altitude_m);
    sec.deg("step_pitch_deg", sc.step_pitch_rad);
    sec.num("step_time_s", sc.step_time_s);
    sec.num("duration_s", sc.duration_s);
    sec.num("dt_s", sc.dt_s);
    sec.num("settle_window_s", sc.settle_window_s);
    sec.num("settle_tolerance_m", sc.settle_tolerance_m);
    sec.num("authority_limit_s", sc.authority_limit_s);
    if (const auto prof_opt = sec.raw("velocity_profile")) {
        const YAML::Node& prof = *prof_opt;
        sc.velocity_profile.clear();
        bool ok = prof.IsSequence();
        if (ok) {
            for (const auto& p : prof) {
                if (!p.IsSequence() || p.size() != 2) {
                    ok = false;
                    break;
                }
                try {
                    sc.velocity_profile.push_back({p[0].as<double>(), p[1].as<double>()});
                } catch (const YAML::Exception&) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok)
            sec.problems().push_back(sec.where("velocity_profile") +
                                     ": expected a list of [t_s, v_ms] pairs");
    }
    RandomGusts rg;
    bool has_random = false;
    read_disturbance(sec.sub("disturbance"), sc.disturbance, rg, has_random);
    if (has_random) rc.random_gusts[sc.name] = rg;
    sec.finish();
}

RunConfig parse_root(const YAML::Node& root) {
    RunConfig rc = default_run_config();
    std::vector<std::string> problems;
    if (root && !root.IsNull() && !root.IsMap())
        throw ConfigParseError("configuration root must be a mapping");
    Section top(root, "", problems);
    read_aircraft(top.sub("aircraft"), rc.aircraft);
    read_gains(top.sub("gains"), rc.gains);
    read_control(top.sub("control"), rc.control);
    bool v_max_given = false;
    read_corridor(top.sub("corridor"), rc.corridor, v_max_given);
    if (!v_max_given) rc.corridor.grid.v_max_ms = rc.aircraft.v_max_ms;

    if (const auto scen_opt = top.raw("scenarios")) {
        const YAML::Node& scen = *scen_opt;
        if (!scen.IsMap()) problems.push_back("scenarios: expected a mapping of name -> scenario");
        else {
            for (const auto& kv : scen) {
                const std::string name = kv.first.as<std::string>();
                Scenario* existing = nullptr;
                for (auto& s : rc.scenarios)
                    if (s.name == name) existing = &s;
                Scenario sc = existing ? *existing : Scenario{};
                sc.name = name;
                read_scenario(Section(kv.second, "scenarios." + name, problems), sc, rc);
                if (existing) *existing = sc;
                else rc.scenarios.push_back(sc);
            }
        }
    }
    Section out = top.sub("output");
    out.text("directory", rc.output_directory);
    out.finish();
    top.uint64("seed", rc.seed);
    top.finish();

    for (auto& p : validate(rc)) problems.push_back(std::move(p));
    if (!problems.empty()) throw ConfigInvalid(std::move(problems));
    return rc;
}

}  // namespace

std::vector<std::string> validate(const RunConfig& rc) {
    std::vector<std::string> errs = validate(rc.aircraft);
    for (auto& e : validate(rc.gains)) errs.push_back(std::move(e));
    for (auto& e : validate(rc.control)) errs.push_back(std::move(e));
    const auto& g = rc.corridor.grid;
    if (g.n_velocity < 50 || g.n_tilt < 50)
        errs.push_back("corridor: n_velocity and n_tilt must each be >= 50");
    if (!(g.v_min_ms == 0.0)) errs.push_back("corridor.v_min_ms must be 0 (the hover column)");
    if (!(g.v_max_ms > g.v_min_ms)) errs.push_back("corridor.v_max_ms must exceed v_min_ms");
    if (!(rc.corridor.margin_frac >= 0.0 && rc.corridor.margin_frac < 0.5))
        errs.push_back("corridor.margin_frac must lie in [0, 0.5)");
    if (!(rc.corridor.schedule.fraction >= 0.0 && rc.corridor.schedule.fraction <= 1.0))
        errs.push_back("corridor.schedule_fraction must lie in [0, 1]");
    std::set<std::string> names;
    for (const auto& s : rc.scenarios) {
        if (!names.insert(s.name).second) errs.push_back("scenario '" + s.name + "' defined twice");
        for (auto& e : validate(s)) errs.push_back(std::move(e));
    }
    for (const auto& [name, rg] : rc.random_gusts) {
        if (rg.count < 0 || !(rg.max_force_N >= 0.0) || !(rg.max_moment_Nm >= 0.0) ||
            !(rg.duration_s > 0.0))
            errs.push_back("scenario '" + name + "': random_gusts needs count >= 0, "
                           "non-negative peaks and duration_s > 0");
    }
    // The corridor must exist for the configured aircraft, which includes a
    // feasible hover column.
    if (errs.empty()) {
        try {
            build_corridor(rc.aircraft, rc.corridor.grid, rc.corridor.margin_frac,
                           rc.corridor.schedule);
        } catch (const std::exception& e) {
            errs.push_back(std::string("corridor: ") + e.what());
        }
    }
    return errs;
}

RunConfig load_config_text(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigParseError(std::string("cannot parse configuration: ") + e.what());
    }
    return parse_root(root);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("cannot open configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str());
}

Scenario expand_disturbances(const Scenario& sc, const RunConfig& rc) {
    auto it = rc.random_gusts.find(sc.name);
    if (it == rc.random_gusts.end() || it->second.count == 0) return sc;
    const RandomGusts& rg = it->second;
    Scenario out = sc;
    // Seed mixes the run seed with the scenario name so scenarios differ.
    std::seed_seq seq{static_cast<std::uint32_t>(rc.seed), static_cast<std::uint32_t>(rc.seed >> 32),
                      static_cast<std::uint32_t>(std::hash<std::string>{}(sc.name))};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> when(0.0, std::max(0.0, sc.duration_s - rg.duration_s));
    for (int i = 0; i < rg.count; ++i) {
        GustPulse g;
        g.start_s = when(rng);
        g.duration_s = rg.duration_s;
        g.peak.fx_N = rg.max_force_N * unit(rng);
        g.peak.fz_N = rg.max_force_N * unit(rng);
        g.peak.m_pitch_Nm = rg.max_moment_Nm * unit(rng);
        out.disturbance.gusts.push_back(g);
    }
    return out;
}

RunContext make_context(const RunConfig& rc) {
    RunContext ctx;
    ctx.aircraft = rc.aircraft;
    ctx.gains = rc.gains;
    ctx.control = rc.control;
    ctx.corridor =
        build_corridor(rc.aircraft, rc.corridor.grid, rc.corridor.margin_frac, rc.corridor.schedule);
    return ctx;
}

std::vector<std::string> sweep_parameters() {
    return {"margin_frac",        "schedule_fraction",      "tilt_gain_per_s",
            "tilt_rate_limit_deg_s", "p_max_W",             "lift_authority",
            "altitude_error_limit_m", "accel_filter_s",     "dt_s",
            "duration_s",         "step_altitude_m",        "step_pitch_deg"};
}

void set_parameter(RunConfig& rc, const std::string& name, double v) {
    if (name == "margin_frac") rc.corridor.margin_frac = v;
    else if (name == "schedule_fraction") rc.corridor.schedule.fraction = v;
    else if (name == "tilt_gain_per_s") rc.control.tilt_gain_per_s = v;
    else if (name == "tilt_rate_limit_deg_s") rc.control.tilt_rate_limit_rad_s = deg2rad(v);
    else if (name == "p_max_W") rc.aircraft.p_max_W = v;
    else if (name == "lift_authority") rc.control.lift_authority = v;
    else if (name == "altitude_error_limit_m") rc.control.altitude_error_limit_m = v;
    else if (name == "accel_filter_s") rc.control.accel_filter_s = v;
    else if (name == "dt_s") for (auto& s : rc.scenarios) s.dt_s = v;
    else if (name == "duration_s") for (auto& s : rc.scenarios) s.duration_s = v;
    else if (name == "step_altitude_m") for (auto& s : rc.scenarios) s.step_altitude_m = v;
    else if (name == "step_pitch_deg") for (auto& s : rc.scenarios) s.step_pitch_rad = deg2rad(v);
    else throw std::invalid_argument("unknown parameter '" + name + "'");
}

}  // namespace tiltrotor
