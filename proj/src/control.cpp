#include "tiltrotor/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tiltrotor {

GainSchedule default_gain_schedule() {
    GainSchedule s;
    s.heli.altitude = {0.07, 0.003, 0.7};
    s.heli.velocity = {0.0, 0.0, 0.0};
    s.heli.pitch = {0.29, 0.0018, 0.5};
    s.fw.altitude = {0.31, 0.052, 0.72};
    s.fw.velocity = {1.1, 0.5, 0.7};
    s.fw.pitch = {0.6, 0.08, 0.6};
    return s;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::marginal: return "marginal";
        case Verdict::unstable: return "unstable";
    }
    return "unknown";
}

Verdict routh_check(double kp, double ki, double kd) {
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd)) return Verdict::unstable;
    if (kd > 0.0 && kp > 0.0) {
        if (ki == 0.0) return Verdict::marginal;
        if (ki > 0.0) {
            const double lead = kd * kp;
            if (lead > ki) return Verdict::stable;
            if (lead == ki) return Verdict::marginal;
        }
    }
    return Verdict::unstable;
}

std::vector<std::string> validate(const GainSchedule& s) {
    std::vector<std::string> errs;
    auto check = [&](const char* set, const char* ch, const PidGains& g, bool need_stable) {
        const std::string where = std::string("gains.") + set + "." + ch;
        if (!(g.kp >= 0.0 && g.ki >= 0.0 && g.kd >= 0.0))
            errs.push_back(where + ": gains must be finite and >= 0");
        else if (need_stable && routh_check(g) != Verdict::stable)
            errs.push_back(where + ": fails Routh-Hurwitz (" + to_string(routh_check(g)) + ")");
    };
    check("heli", "altitude", s.heli.altitude, true);
    check("heli", "pitch", s.heli.pitch, true);
    check("heli", "velocity", s.heli.velocity, false);
    check("fw", "altitude", s.fw.altitude, true);
    check("fw", "velocity", s.fw.velocity, true);
    check("fw", "pitch", s.fw.pitch, true);
    if (!(s.tilt_lo_rad < s.tilt_hi_rad))
        errs.push_back("gains: tilt_lo_deg must be below tilt_hi_deg");
    if (!(s.tilt_lo_rad >= 0.0 && s.tilt_hi_rad <= kHalfPi))
        errs.push_back("gains: thresholds must lie in [0, 90] deg");
    return errs;
}

double pid_accel(double e, double e_int, double e_dot, const PidGains& g) {
    return g.kp * e + g.ki * e_int + g.kd * e_dot;
}

double blend_weight(double tilt, const GainSchedule& s) {
    return std::clamp((tilt - s.tilt_lo_rad) / (s.tilt_hi_rad - s.tilt_lo_rad), 0.0, 1.0);
}

GainSet schedule_gains(double tilt, const GainSchedule& s) {
    if (tilt >= s.tilt_hi_rad) return s.heli;
    if (tilt <= s.tilt_lo_rad) return s.fw;
    const double w = (tilt - s.tilt_lo_rad) / (s.tilt_hi_rad - s.tilt_lo_rad);
    auto mix = [w](const PidGains& h, const PidGains& f) {
        return PidGains{w * h.kp + (1.0 - w) * f.kp, w * h.ki + (1.0 - w) * f.ki,
                        w * h.kd + (1.0 - w) * f.kd};
    };
    return {mix(s.heli.altitude, s.fw.altitude), mix(s.heli.velocity, s.fw.velocity),
            mix(s.heli.pitch, s.fw.pitch)};
}

ErrorState compute_errors(const SimState& s, const References& ref, const MeasuredAccel& acc) {
    if (!s.finite()) throw std::invalid_argument("compute_errors: non-finite state");
    ErrorState e;
    e.e_x = ref.v_ms - s.vx_ms;
    e.e_z = ref.z_m - s.z_m;
    e.e_theta = ref.pitch_rad - s.pitch_rad;
    e.int_e_x = s.int_e_x;
    e.int_e_z = s.int_e_z;
    e.int_e_theta = s.int_e_theta;
    e.dot_e_x = ref.v_rate_ms2 - acc.x_ms2;
    e.dot_e_z = -s.vz_ms;
    e.dot_e_theta = -s.pitch_rate_rad_s;
    return e;
}

std::vector<std::string> validate(const ControlConfig& c) {
    std::vector<std::string> errs;
    if (!(c.tilt_gain_per_s > 0.0)) errs.push_back("control.tilt_gain_per_s must be > 0");
    if (!(c.tilt_rate_limit_rad_s > 0.0))
        errs.push_back("control.tilt_rate_limit_deg_s must be > 0");
    if (!(c.denominator_guard > 0.0 && c.denominator_guard < 1.0))
        errs.push_back("control.denominator_guard must lie in (0, 1)");
    if (!(c.lift_authority > 0.0 && c.lift_authority < 1.0))
        errs.push_back("control.lift_authority must lie in (0, 1)");
    if (!(c.altitude_error_limit_m > 0.0))
        errs.push_back("control.altitude_error_limit_m must be > 0");
    if (!(c.accel_filter_s >= 0.0)) errs.push_back("control.accel_filter_s must be >= 0");
    if (!(c.pitch_priority_factor >= 1.0))
        errs.push_back("control.pitch_priority_factor must be >= 1");
    return errs;
}

ChannelCommands channel_commands(const SimState& s, const ChannelInputs& in,
                                 const AircraftConfig& cfg, const ControlConfig& cc,
                                 ChannelMemory& memory) {
    const LiftDrag ld = lift_drag(s, cfg);
    const ForceBreakdown aero = aero_forces(ld, cfg);
    const double m = cfg.mass_kg;
    const double dir = s.pitch_rad + s.tilt_rad;
    const double sn = std::sin(dir);
    const double cs = std::cos(dir);

    ChannelCommands out;
    out.c_theta = cfg.inertia_pitch_kgm2 * in.u_theta - aero.m_pitch_Nm -
                  cfg.rotor_inertia_kgm2 * in.tilt_accel_rad_s2;

    if (sn >= cc.denominator_guard) {
        out.thrust_vertical_N = (cfg.weight_N() - ld.lift_N() - m * in.u_z) / sn;
        memory.thrust_vertical_N = out.thrust_vertical_N;
    } else {
        out.thrust_vertical_N = memory.thrust_vertical_N;
        out.vertical_guarded = true;
    }
    if (cs >= cc.denominator_guard) {
        out.thrust_forward_N = (ld.drag_N + m * in.acc_x) / cs;
        memory.thrust_forward_N = out.thrust_forward_N;
    } else {
        out.thrust_forward_N = memory.thrust_forward_N;
        out.forward_guarded = true;
    }
    out.thrust_total_N =
        in.blend_w * out.thrust_vertical_N + (1.0 - in.blend_w) * out.thrust_forward_N;

    const double g = cfg.g_arm(s.tilt_rad);
    const double h = cfg.h_arm(s.tilt_rad);
    out.c_z_plus_xdot = out.thrust_total_N * g * h / (g + h);
    if (cc.pitch_priority) {
        // Smallest C that keeps both raw engine commands non-negative.
        const double floor = std::max(-g * out.c_theta, h * out.c_theta) / (g + h);
        if (floor > 0.0 && out.c_z_plus_xdot < floor * cc.pitch_priority_factor) {
            out.c_z_plus_xdot = floor * cc.pitch_priority_factor;
            out.thrust_total_N = out.c_z_plus_xdot * (g + h) / (g * h);
        }
    }
    return out;
}

unsigned SaturationFlags::bits() const {
    return (f1_low ? 1u : 0u) | (f1_high ? 2u : 0u) | (f2_low ? 4u : 0u) | (f2_high ? 8u : 0u) |
           (vertical_guard ? 16u : 0u) | (forward_guard ? 32u : 0u) | (lift_limited ? 64u : 0u) |
           (tilt_rate_limited ? 128u : 0u);
}

Allocation allocate_thrust(double c, double c_theta, double tilt, const AircraftConfig& cfg) {
    const double g = cfg.g_arm(tilt);
    const double h = cfg.h_arm(tilt);
    if (!(g > 0.0 && h > 0.0)) throw std::invalid_argument("allocate_thrust: lever arms must be > 0");
    Allocation a;
    a.f1_raw_N = c / g + c_theta / (g + h);
    a.f2_raw_N = c / h - c_theta / (g + h);
    a.flags.f1_low = a.f1_raw_N < 0.0;
    a.flags.f1_high = a.f1_raw_N > cfg.f1_max_N;
    a.flags.f2_low = a.f2_raw_N < 0.0;
    a.flags.f2_high = a.f2_raw_N > cfg.f2_max_N;
    a.f1_N = std::clamp(a.f1_raw_N, 0.0, cfg.f1_max_N);
    a.f2_N = std::clamp(a.f2_raw_N, 0.0, cfg.f2_max_N);
    return a;
}

double tilt_rate_command(double tilt, double tilt_desired, double k_tau, double rate_limit) {
    return std::clamp(k_tau * (tilt_desired - tilt), -rate_limit, rate_limit);
}

Controller::Controller(const AircraftConfig& cfg, const GainSchedule& gains,
                       const ControlConfig& cc)
    : cfg_(cfg), gains_(gains), cc_(cc) {}

ControlCommand Controller::update(SimState& s, ControlMode mode, const References& ref,
                                  double tilt_desired, const MeasuredAccel& raw, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("Controller::update: dt must be > 0");
    if (first_) {
        prev_rate_ = s.tilt_rate_rad_s;
        first_ = false;
    }
    const double a = cc_.accel_filter_s > 0.0 ? dt / (cc_.accel_filter_s + dt) : 1.0;
    accel_.x_ms2 += a * (raw.x_ms2 - accel_.x_ms2);
    accel_.z_ms2 += a * (raw.z_ms2 - accel_.z_ms2);
    accel_.pitch_rad_s2 += a * (raw.pitch_rad_s2 - accel_.pitch_rad_s2);

    ControlCommand cmd;
    cmd.gains = mode == ControlMode::heli         ? gains_.heli
                : mode == ControlMode::fixed_wing ? gains_.fw
                                                  : schedule_gains(s.tilt_rad, gains_);
    const double w = mode == ControlMode::heli         ? 1.0
                     : mode == ControlMode::fixed_wing ? 0.0
                                                       : blend_weight(s.tilt_rad, gains_);
    cmd.blend_w = w;

    const double raw_rate = cc_.tilt_gain_per_s * (tilt_desired - s.tilt_rad);
    cmd.tilt_rate_cmd_rad_s =
        tilt_rate_command(s.tilt_rad, tilt_desired, cc_.tilt_gain_per_s, cc_.tilt_rate_limit_rad_s);
    cmd.flags.tilt_rate_limited = std::abs(raw_rate) > cc_.tilt_rate_limit_rad_s;
    cmd.tilt_accel_rad_s2 = (cmd.tilt_rate_cmd_rad_s - prev_rate_) / dt;

    References r = ref;
    if (mode == ControlMode::heli) {
        // No velocity loop in helicopter mode.
        r.v_ms = s.vx_ms;
        r.v_rate_ms2 = 0.0;
    }

    const PidGains& gz = cmd.gains.altitude;
    const double e_z = r.z_m - s.z_m;
    const double e_z_dot = -s.vz_ms;
    bool lift_limited = false;
    if (w < 1.0) {
        // Altitude through speed: the lift the altitude loop wants sets a
        // speed offset on the velocity reference.
        const double lim = cc_.altitude_error_limit_m;
        const double e_z_lim = std::clamp(e_z, -lim, lim);
        const double u_z_lim = pid_accel(e_z_lim, s.int_e_z, e_z_dot, gz);
        const double weight = cfg_.weight_N();
        const double lift_raw = weight - cfg_.mass_kg * u_z_lim;
        const double lift_req = std::clamp(lift_raw, (1.0 - cc_.lift_authority) * weight,
                                           (1.0 + cc_.lift_authority) * weight);
        lift_limited = lift_req != lift_raw || std::abs(e_z) >= lim;

        const LiftDrag ld = lift_drag(s, cfg_);
        const double q = 0.5 * cfg_.rho_kg_m3 * ld.airspeed_ms * ld.airspeed_ms;
        const double cl_area =
            ld.airspeed_ms > 1.0 ? ld.lift_N() / q
                                 : cfg_.wing_area_m2 * cfg_.wing.lift_coefficient(0.0) +
                                       cfg_.tail_area_m2 * cfg_.tail.lift_coefficient(0.0);
        if (cl_area > 0.0) {
            const double v_lift = std::sqrt(2.0 * lift_req / (cfg_.rho_kg_m3 * cl_area));
            const double v_level = std::sqrt(2.0 * weight / (cfg_.rho_kg_m3 * cl_area));
            double v_lift_rate = 0.0;
            if (!lift_limited) {
                // d(u_z)/dt, with the measured vertical acceleration standing
                // in for the second derivative of the error.
                const double u_z_rate = gz.kp * e_z_dot + gz.ki * e_z - gz.kd * accel_.z_ms2;
                v_lift_rate = v_lift / (2.0 * lift_req) * (-cfg_.mass_kg * u_z_rate);
            }
            r.v_ms += (1.0 - w) * (v_lift - v_level);
            r.v_rate_ms2 += (1.0 - w) * v_lift_rate;
        }
    }
    cmd.flags.lift_limited = lift_limited;
    cmd.v_desired_ms = r.v_ms;

    cmd.errors = compute_errors(s, r, accel_);
    const ErrorState& e = cmd.errors;

    ChannelInputs in;
    in.u_z = pid_accel(e.e_z, e.int_e_z, e.dot_e_z, gz);
    in.u_theta = pid_accel(e.e_theta, e.int_e_theta, e.dot_e_theta, cmd.gains.pitch);
    in.acc_x = mode == ControlMode::heli
                   ? 0.0
                   : r.v_rate_ms2 + pid_accel(e.e_x, e.int_e_x, e.dot_e_x, cmd.gains.velocity);
    in.blend_w = w;
    in.tilt_accel_rad_s2 = cmd.tilt_accel_rad_s2;

    cmd.channels = channel_commands(s, in, cfg_, cc_, memory_);
    const Allocation alloc =
        allocate_thrust(cmd.channels.c_z_plus_xdot, cmd.channels.c_theta, s.tilt_rad, cfg_);
    cmd.f1_N = alloc.f1_N;
    cmd.f2_N = alloc.f2_N;
    const SaturationFlags keep = cmd.flags;
    cmd.flags = alloc.flags;
    cmd.flags.lift_limited = keep.lift_limited;
    cmd.flags.tilt_rate_limited = keep.tilt_rate_limited;
    cmd.flags.vertical_guard = cmd.channels.vertical_guarded;
    cmd.flags.forward_guard = cmd.channels.forward_guarded;

    // Integrators freeze while their path is saturated.
    if (!cmd.flags.engine_saturated()) {
        s.int_e_theta += e.e_theta * dt;
        if (!lift_limited) s.int_e_z += e.e_z * dt;
        if (w < 1.0) s.int_e_x += e.e_x * dt;
    }
    prev_rate_ = cmd.tilt_rate_cmd_rad_s;
    return cmd;
}

}  // namespace tiltrotor
