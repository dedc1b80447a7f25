#include "tiltrotor/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace tiltrotor {

const char* to_string(FlightMode m) {
    switch (m) {
        case FlightMode::heli_static: return "HELI_STATIC";
        case FlightMode::transition_scheduled: return "TRANSITION_SCHEDULED";
        case FlightMode::fw_static: return "FW_STATIC";
    }
    return "UNKNOWN";
}

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::hold: return "hold";
        case ScenarioKind::altitude_step: return "altitude_step";
        case ScenarioKind::pitch_step: return "pitch_step";
        case ScenarioKind::transition: return "transition";
    }
    return "unknown";
}

std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> errs;
    const std::string where = "scenario '" + s.name + "': ";
    if (!(s.dt_s > 0.0 && s.dt_s <= 0.05)) errs.push_back(where + "dt_s must lie in (0, 0.05]");
    if (!(s.duration_s >= 10.0 * s.dt_s)) errs.push_back(where + "duration_s must be >= 10 * dt_s");
    if (!std::isfinite(s.step_altitude_m) || !std::isfinite(s.step_pitch_rad) ||
        !std::isfinite(s.step_time_s))
        errs.push_back(where + "step magnitudes must be finite");
    if (s.kind == ScenarioKind::transition && s.initial_mode != FlightMode::heli_static)
        errs.push_back(where + "a transition starts from helicopter trim");
    if (s.initial_mode == FlightMode::transition_scheduled)
        errs.push_back(where + "initial mode must be heli or fw");
    if (!(s.settle_window_s >= 0.0 && s.settle_tolerance_m > 0.0))
        errs.push_back(where + "settle window must be >= 0 and tolerance > 0");
    if (!(s.authority_limit_s > 0.0)) errs.push_back(where + "authority_limit_s must be > 0");
    for (std::size_t i = 1; i < s.velocity_profile.size(); ++i) {
        if (!(s.velocity_profile[i].t_s > s.velocity_profile[i - 1].t_s)) {
            errs.push_back(where + "velocity_profile times must be strictly increasing");
            break;
        }
    }
    return errs;
}

namespace {

std::string format_double_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

StateVector pack(const SimState& s) {
    return {s.x_m, s.z_m, s.vx_ms, s.vz_ms, s.pitch_rad, s.pitch_rate_rad_s, s.tilt_rad};
}

}  // namespace

SimState integrate_step(const SimState& s, const ControlCommand& cmd, const Disturbance& dist,
                        const AircraftConfig& cfg, double dt, StateVector* k1) {
    if (!(dt > 0.0 && dt <= 0.05)) throw std::invalid_argument("integrate_step: dt out of range");
    auto deriv = [&](double t, const StateVector& y) {
        SimState at = s;
        at.x_m = y[0];
        at.z_m = y[1];
        at.vx_ms = y[2];
        at.vz_ms = y[3];
        at.pitch_rad = y[4];
        at.pitch_rate_rad_s = y[5];
        at.tilt_rad = y[6];
        const ForceBreakdown f =
            total_forces(at, cmd.f1_N, cmd.f2_N, cmd.tilt_accel_rad_s2, dist.at(t), cfg);
        StateVector d{y[2], y[3], f.fx_N / cfg.mass_kg, f.fz_N / cfg.mass_kg,
                      y[5], f.m_pitch_Nm / cfg.inertia_pitch_kgm2, cmd.tilt_rate_cmd_rad_s};
        for (double v : d) {
            if (!std::isfinite(v))
                throw SimulationAborted("non-finite derivative at t=" + format_double_short(t));
        }
        return d;
    };
    const StateVector y = rk4_step(pack(s), s.time_s, dt, deriv, k1);
    SimState out = s;
    out.x_m = y[0];
    out.z_m = y[1];
    out.vx_ms = y[2];
    out.vz_ms = y[3];
    out.pitch_rad = y[4];
    out.pitch_rate_rad_s = y[5];
    out.tilt_rad = std::clamp(y[6], 0.0, kHalfPi);
    out.tilt_rate_rad_s = cmd.tilt_rate_cmd_rad_s;
    out.time_s = s.time_s + dt;
    return out;
}

std::vector<VelocityPoint> reference_velocity_profile(const RunContext& ctx) {
    const AircraftConfig& cfg = ctx.aircraft;
    const Corridor& cor = ctx.corridor;
    const double dt = 0.01;
    const double w = cfg.weight_N();
    const double eps = ctx.control.denominator_guard;
    const double kick = cor.velocity_grid_ms.size() > 1 ? cor.velocity_grid_ms[1] : 0.0;
    const double v_hi = cor.velocity_grid_ms.back();
    const double v_trim = cor.trim_speed_ms;

    std::vector<VelocityPoint> out{{0.0, 0.0}};
    double v = 0.0, tilt = kHalfPi, t = 0.0, acc = 0.0;
    while (tilt >= ctx.gains.tilt_lo_rad && t < 600.0) {
        const LiftDrag ld = lift_drag(v, 0.0, cfg);
        const double g = cfg.g_arm(tilt);
        const double h = cfg.h_arm(tilt);
        const double cap = std::min(cfg.f1_max_N * (g + h) / h, cfg.f2_max_N * (g + h) / g);
        const double thrust =
            std::min(std::max(0.0, w - ld.lift_N()) / std::max(std::sin(tilt), eps), cap);
        acc = (thrust * std::cos(tilt) - ld.drag_N) / cfg.mass_kg;
        const double desired = cor.schedule_at(std::clamp(std::max(v, kick), 0.0, v_hi));
        const double rate = tilt_rate_command(tilt, desired, ctx.control.tilt_gain_per_s,
                                              ctx.control.tilt_rate_limit_rad_s);
        v = std::max(0.0, v + acc * dt);
        tilt += rate * dt;
        t += dt;
        out.push_back({t, v});
    }
    if (v < v_trim) {
        const double ramp = std::max(acc, 0.5);
        out.push_back({t + (v_trim - v) / ramp, v_trim});
    }
    return out;
}

double profile_speed(const std::vector<VelocityPoint>& p, double t) {
    if (p.empty()) return 0.0;
    if (t <= p.front().t_s) return p.front().v_ms;
    if (t >= p.back().t_s) return p.back().v_ms;
    auto it = std::upper_bound(p.begin(), p.end(), t,
                               [](double x, const VelocityPoint& q) { return x < q.t_s; });
    const VelocityPoint& b = *it;
    const VelocityPoint& a = *(it - 1);
    return a.v_ms + (t - a.t_s) / (b.t_s - a.t_s) * (b.v_ms - a.v_ms);
}

SimState initial_state(const Scenario& sc, const AircraftConfig& cfg) {
    SimState s;
    if (sc.initial_mode == FlightMode::fw_static) {
        s.vx_ms = trim_cruise(cfg).speed_ms;
        s.tilt_rad = 0.0;
    } else {
        s.tilt_rad = kHalfPi;
    }
    return s;
}

SimTrace run_scenario(const Scenario& sc, const RunContext& ctx) {
    const AircraftConfig& cfg = ctx.aircraft;
    const Corridor& cor = ctx.corridor;
    const GainSchedule& gs = ctx.gains;

    SimTrace trace;
    trace.scenario = sc;
    trace.trim_speed_ms = cor.trim_speed_ms;

    const std::vector<VelocityPoint> profile =
        sc.kind == ScenarioKind::transition
            ? (sc.velocity_profile.empty() ? reference_velocity_profile(ctx) : sc.velocity_profile)
            : std::vector<VelocityPoint>{};
    const double kick = cor.velocity_grid_ms.size() > 1 ? cor.velocity_grid_ms[1] : 0.0;
    const double v_hi = cor.velocity_grid_ms.back();
    auto schedule = [&](double vx) {
        return cor.schedule_at(std::clamp(std::max(vx, kick), cor.velocity_grid_ms.front(), v_hi));
    };
    auto inside_corridor = [&](const SimState& s) {
        const double v = s.vx_ms;
        if (!(v >= cor.velocity_grid_ms.front() && v <= std::min(v_hi, cfg.v_max_ms))) return false;
        const double tol = 1e-9;
        return s.tilt_rad >= cor.lower_at(v) - tol && s.tilt_rad <= cor.upper_at(v) + tol;
    };

    Controller ctl(cfg, gs, ctx.control);
    SimState s = initial_state(sc, cfg);
    FlightMode mode = sc.initial_mode;
    trace.modes.mode = mode;

    const std::size_t n = static_cast<std::size_t>(std::llround(sc.duration_s / sc.dt_s));
    trace.rows.reserve(n);
    MeasuredAccel raw{};
    double settled_for = 0.0;
    double exhausted_for = 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * sc.dt_s;
        s.time_s = t;

        References ref;
        const bool stepped = t >= sc.step_time_s;
        if (sc.kind == ScenarioKind::altitude_step && stepped) ref.z_m = -sc.step_altitude_m;
        if (sc.kind == ScenarioKind::pitch_step && stepped) ref.pitch_rad = sc.step_pitch_rad;

        if (sc.kind == ScenarioKind::transition && !trace.trigger_s) {
            settled_for = std::abs(ref.z_m - s.z_m) < sc.settle_tolerance_m ? settled_for + sc.dt_s
                                                                           : 0.0;
            if (settled_for >= sc.settle_window_s) trace.trigger_s = t;
        }

        if (mode == FlightMode::heli_static && s.tilt_rad <= gs.tilt_hi_rad) {
            mode = FlightMode::transition_scheduled;
            trace.modes.transition_entry_s = t;
        }
        if (mode == FlightMode::transition_scheduled && s.tilt_rad < gs.tilt_lo_rad) {
            mode = FlightMode::fw_static;
            trace.modes.fw_entry_s = t;
        }
        trace.modes.mode = mode;

        if (mode == FlightMode::fw_static) {
            ref.v_ms = cor.trim_speed_ms;
        } else if (trace.trigger_s) {
            const double tt = t - *trace.trigger_s;
            ref.v_ms = profile_speed(profile, tt);
            ref.v_rate_ms2 = (profile_speed(profile, tt + sc.dt_s) - ref.v_ms) / sc.dt_s;
        }

        double tilt_desired = s.tilt_rad;
        if (sc.kind == ScenarioKind::transition) {
            if (mode == FlightMode::fw_static) tilt_desired = 0.0;
            else if (trace.trigger_s) tilt_desired = schedule(s.vx_ms);
            else tilt_desired = kHalfPi;
        }

        const ControlMode cm = mode == FlightMode::heli_static ? ControlMode::heli
                               : mode == FlightMode::fw_static ? ControlMode::fixed_wing
                                                               : ControlMode::transition;
        ControlCommand cmd;
        try {
            cmd = ctl.update(s, cm, ref, tilt_desired, raw, sc.dt_s);
        } catch (const std::exception& e) {
            trace.failed = true;
            trace.failure = std::string("controller error at t=") + format_double_short(t) + ": " +
                            e.what();
            break;
        }

        TraceRow row;
        row.state = s;
        row.mode = mode;
        row.f1_N = cmd.f1_N;
        row.f2_N = cmd.f2_N;
        row.tilt_rate_cmd_rad_s = cmd.tilt_rate_cmd_rad_s;
        row.tilt_accel_rad_s2 = cmd.tilt_accel_rad_s2;
        row.tilt_desired_rad = tilt_desired;
        row.v_desired_ms = cmd.v_desired_ms;
        row.blend_w = cmd.blend_w;
        row.flags = cmd.flags.bits();
        row.authority_exhausted = cmd.flags.authority_exhausted();
        row.gains = cmd.gains;
        row.forces = total_forces(s, cmd.f1_N, cmd.f2_N, cmd.tilt_accel_rad_s2,
                                  sc.disturbance.at(t), cfg);
        if (sc.kind == ScenarioKind::transition && trace.trigger_s &&
            mode != FlightMode::fw_static) {
            row.in_corridor = inside_corridor(s);
            if (!row.in_corridor) ++trace.corridor_violations;
        }
        trace.rows.push_back(row);

        exhausted_for = row.authority_exhausted ? exhausted_for + sc.dt_s : 0.0;
        if (exhausted_for > sc.authority_limit_s) {
            trace.failed = true;
            trace.failure = "both engines saturated for more than " +
                            format_double_short(sc.authority_limit_s) + " s at t=" +
                            format_double_short(t) + " s; flight condition left the corridor";
            break;
        }

        StateVector k1{};
        try {
            s = integrate_step(s, cmd, sc.disturbance, cfg, sc.dt_s, &k1);
        } catch (const SimulationAborted& e) {
            trace.failed = true;
            trace.failure = e.what();
            break;
        }
        if (!s.finite()) {
            trace.failed = true;
            trace.failure = "non-finite state after t=" + format_double_short(t);
            break;
        }
        raw = {k1[2], k1[3], k1[5]};
    }
    return trace;
}

StepMetrics step_response(const std::vector<double>& t, const std::vector<double>& y,
                          double t_step, double y0, double target) {
    StepMetrics m;
    m.initial = y0;
    m.target = target;
    const double d = target - y0;
    if (y.empty()) return m;
    m.final_value = y.back();
    if (d == 0.0) return m;
    const double sign = d > 0.0 ? 1.0 : -1.0;
    const double band = 0.02 * std::abs(d);
    double peak = 0.0;
    std::optional<double> last_out;
    bool any = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (t[i] < t_step) continue;
        any = true;
        peak = std::max(peak, sign * (y[i] - target));
        if (std::abs(y[i] - target) > band) last_out = t[i];
    }
    m.overshoot = peak / std::abs(d);
    if (!any) return m;
    if (!last_out) m.settling_time_s = 0.0;
    else if (*last_out < t.back()) {
        // Settled at the sample following the last excursion.
        auto it = std::upper_bound(t.begin(), t.end(), *last_out);
        m.settling_time_s = *it - t_step;
    }
    return m;
}

MetricReport metrics(const SimTrace& tr, double v_trim) {
    if (tr.rows.empty()) throw std::invalid_argument("metrics: empty trace");
    if (!(v_trim > 0.0)) throw std::invalid_argument("metrics: trim speed must be > 0");
    MetricReport r;
    r.failed = tr.failed;
    r.failure = tr.failure;
    r.corridor_violations = tr.corridor_violations;

    const SimState& first = tr.rows.front().state;
    const double dt = tr.scenario.dt_s;
    double exhausted = 0.0;
    bool was_above_85 = false;
    std::vector<double> ts, ys;
    ts.reserve(tr.rows.size());
    ys.reserve(tr.rows.size());
    r.normalized_speed.reserve(tr.rows.size());

    for (std::size_t i = 0; i < tr.rows.size(); ++i) {
        const TraceRow& row = tr.rows[i];
        const SimState& s = row.state;
        r.normalized_speed.push_back(std::hypot(s.vx_ms, s.vz_ms) / v_trim);
        r.max_altitude_deviation_m =
            std::max(r.max_altitude_deviation_m, std::abs(s.altitude_m() - first.altitude_m()));
        r.max_pitch_deviation_deg =
            std::max(r.max_pitch_deviation_deg, std::abs(rad2deg(s.pitch_rad - first.pitch_rad)));
        r.peak_f1_N = std::max(r.peak_f1_N, row.f1_N);
        r.peak_f2_N = std::max(r.peak_f2_N, row.f2_N);
        // Crossings count only when coming down from above 85 deg, so runs
        // that start in fixed-wing trim report no transition.
        if (s.tilt_rad > deg2rad(85.0)) was_above_85 = true;
        if (was_above_85 && !r.tilt85_time_s && s.tilt_rad <= deg2rad(85.0))
            r.tilt85_time_s = s.time_s;
        if (r.tilt85_time_s && !r.tilt5_time_s && s.tilt_rad < deg2rad(5.0))
            r.tilt5_time_s = s.time_s;
        if (row.flags & 15u) r.engine_saturation_s += dt;
        exhausted = row.authority_exhausted ? exhausted + dt : 0.0;
        r.longest_authority_loss_s = std::max(r.longest_authority_loss_s, exhausted);
        if (i > 0 && row.mode != tr.rows[i - 1].mode) {
            ModeSwitch sw;
            sw.time_s = s.time_s;
            sw.from = tr.rows[i - 1].mode;
            sw.to = row.mode;
            sw.thrust_jump_N =
                std::abs((row.f1_N + row.f2_N) - (tr.rows[i - 1].f1_N + tr.rows[i - 1].f2_N));
            r.max_thrust_discontinuity_N = std::max(r.max_thrust_discontinuity_N, sw.thrust_jump_N);
            r.switches.push_back(sw);
        }
        ts.push_back(s.time_s);
        if (tr.scenario.kind == ScenarioKind::pitch_step) ys.push_back(rad2deg(s.pitch_rad));
        else ys.push_back(s.altitude_m());
    }
    if (r.tilt85_time_s && r.tilt5_time_s)
        r.transition_duration_s = *r.tilt5_time_s - *r.tilt85_time_s;

    const SimState& last = tr.rows.back().state;
    r.final_speed_ms = std::hypot(last.vx_ms, last.vz_ms);
    r.final_altitude_m = last.altitude_m();
    r.final_pitch_deg = rad2deg(last.pitch_rad);

    const Scenario& sc = tr.scenario;
    if (sc.kind == ScenarioKind::altitude_step)
        r.step = step_response(ts, ys, sc.step_time_s, first.altitude_m(),
                               first.altitude_m() + sc.step_altitude_m);
    else if (sc.kind == ScenarioKind::pitch_step)
        r.step = step_response(ts, ys, sc.step_time_s, rad2deg(first.pitch_rad),
                               rad2deg(first.pitch_rad + sc.step_pitch_rad));
    return r;
}

}  // namespace tiltrotor
