#include "tiltrotor/airframe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tiltrotor {

double Polar::lift_coefficient(double alpha_rad) const {
    return std::clamp(cl0 + cl_alpha_per_rad * alpha_rad, -cl_max, cl_max);
}

double LeverArm::at(double tilt_rad) const {
    return at_tilt0_m + (at_tilt90_m - at_tilt0_m) * (tilt_rad / kHalfPi);
}

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

bool all_finite(std::initializer_list<double> vals) {
    return std::all_of(vals.begin(), vals.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

std::vector<std::string> validate(const AircraftConfig& c) {
    std::vector<std::string> errs;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) errs.push_back(msg);
    };
    need(all_finite({c.mass_kg, c.inertia_pitch_kgm2, c.rotor_inertia_kgm2, c.wing_area_m2,
                     c.tail_area_m2, c.x_wing_m, c.x_tail_m, c.y_drag_m, c.f1_max_N, c.f2_max_N,
                     c.p_max_W, c.rho_kg_m3, c.v_max_ms, c.disk_loading_kg_m2}),
         "aircraft: all parameters must be finite");
    need(c.mass_kg > 0.0, "aircraft.mass_kg must be > 0 (got " + fmt_num(c.mass_kg) + ")");
    need(c.inertia_pitch_kgm2 > 0.0, "aircraft.inertia_pitch_kgm2 must be > 0");
    need(c.rotor_inertia_kgm2 >= 0.0, "aircraft.rotor_inertia_kgm2 must be >= 0");
    need(c.wing_area_m2 > 0.0, "aircraft.wing_area_m2 must be > 0");
    need(c.tail_area_m2 >= 0.0, "aircraft.tail_area_m2 must be >= 0");
    need(c.rho_kg_m3 > 0.0, "aircraft.rho_kg_m3 must be > 0");
    need(c.v_max_ms > 0.0, "aircraft.v_max_ms must be > 0");
    need(c.disk_loading_kg_m2 > 0.0, "aircraft.disk_loading_kg_m2 must be > 0");
    need(c.p_max_W > 0.0, "aircraft.p_max_W must be > 0");
    need(c.f2_max_N > 0.0, "aircraft.f2_max_N must be > 0");
    need(c.f1_max_N == 2.0 * c.f2_max_N,
         "aircraft: thrust ratio f1_max_N = 2 * f2_max_N required (got " + fmt_num(c.f1_max_N) +
             " vs " + fmt_num(c.f2_max_N) + ")");
    need(c.lever_rear.at_tilt90_m == 2.0 * c.lever_front.at_tilt90_m,
         "aircraft: rear lever at 90 deg must be twice the front lever (2:1 hover geometry)");
    // Affine arms are positive on the whole range iff positive at both ends.
    need(c.lever_front.at_tilt0_m > 0.0 && c.lever_front.at_tilt90_m > 0.0,
         "aircraft: front lever g(tau) must be > 0 on [0, 90] deg");
    need(c.lever_rear.at_tilt0_m > 0.0 && c.lever_rear.at_tilt90_m > 0.0,
         "aircraft: rear lever h(tau) must be > 0 on [0, 90] deg");
    need(c.max_total_thrust_N() >= 1.5 * c.weight_N() * (1.0 - 1e-12),
         "aircraft: total max thrust must be >= 1.5 * weight (got " +
             fmt_num(c.max_total_thrust_N() / c.weight_N()) + " * weight)");
    for (const auto& [name, p] : {std::pair{"wing", c.wing}, std::pair{"tail", c.tail}}) {
        std::string n(name);
        need(all_finite({p.cl0, p.cl_alpha_per_rad, p.cl_max, p.cd0, p.induced_drag_k}),
             "aircraft." + n + ": polar must be finite");
        need(p.cl_max > 0.0, "aircraft." + n + ".cl_max must be > 0");
        need(p.cd0 >= 0.0, "aircraft." + n + ".cd0 must be >= 0");
        need(p.induced_drag_k >= 0.0, "aircraft." + n + ".induced_drag_k must be >= 0");
    }
    return errs;
}

bool SimState::finite() const {
    return all_finite({x_m, z_m, vx_ms, vz_ms, pitch_rad, pitch_rate_rad_s, tilt_rad,
                       tilt_rate_rad_s, time_s, int_e_z, int_e_x, int_e_theta});
}

ForceBreakdown& ForceBreakdown::operator+=(const ForceBreakdown& o) {
    fx_N += o.fx_N;
    fz_N += o.fz_N;
    m_pitch_Nm += o.m_pitch_Nm;
    return *this;
}

bool ForceBreakdown::finite() const { return all_finite({fx_N, fz_N, m_pitch_Nm}); }

ForceBreakdown operator+(ForceBreakdown a, const ForceBreakdown& b) { return a += b; }

ForceBreakdown Disturbance::at(double t) const {
    ForceBreakdown out{};
    for (const auto& seg : segments) {
        if (seg.start_s <= t) out = seg.value;
    }
    for (const auto& g : gusts) {
        if (g.duration_s <= 0.0 || t < g.start_s || t > g.start_s + g.duration_s) continue;
        const double s = std::sin(kPi * (t - g.start_s) / g.duration_s);
        out.fx_N += g.peak.fx_N * s;
        out.fz_N += g.peak.fz_N * s;
        out.m_pitch_Nm += g.peak.m_pitch_Nm * s;
    }
    return out;
}

bool Disturbance::is_zero() const {
    for (const auto& seg : segments) {
        if (seg.value.fx_N != 0.0 || seg.value.fz_N != 0.0 || seg.value.m_pitch_Nm != 0.0)
            return false;
    }
    for (const auto& g : gusts) {
        if (g.peak.fx_N != 0.0 || g.peak.fz_N != 0.0 || g.peak.m_pitch_Nm != 0.0) return false;
    }
    return true;
}

LiftDrag lift_drag(double airspeed, double alpha, const AircraftConfig& cfg) {
    if (!std::isfinite(airspeed) || !std::isfinite(alpha))
        throw std::invalid_argument("lift_drag: non-finite airspeed or angle of attack");
    LiftDrag out;
    out.airspeed_ms = airspeed;
    out.alpha_rad = alpha;
    const double q = 0.5 * cfg.rho_kg_m3 * airspeed * airspeed;
    if (q == 0.0) return out;
    const double clw = cfg.wing.lift_coefficient(alpha);
    const double clt = cfg.tail.lift_coefficient(alpha);
    out.lift_wing_N = q * cfg.wing_area_m2 * clw;
    out.lift_tail_N = q * cfg.tail_area_m2 * clt;
    // Each surface carries its own polar, so drag sums per surface.
    out.drag_N = q * (cfg.wing_area_m2 * cfg.wing.drag_coefficient(clw) +
                      cfg.tail_area_m2 * cfg.tail.drag_coefficient(clt));
    return out;
}

double angle_of_attack(const SimState& s, const AircraftConfig& cfg) {
    if (!cfg.flightpath_aoa || (s.vx_ms == 0.0 && s.vz_ms == 0.0)) return s.pitch_rad;
    return s.pitch_rad - std::atan2(-s.vz_ms, s.vx_ms);
}

LiftDrag lift_drag(const SimState& s, const AircraftConfig& cfg) {
    if (!s.finite()) throw std::invalid_argument("lift_drag: non-finite state");
    const double v = std::hypot(s.vx_ms, s.vz_ms);
    if (s.vx_ms >= 0.0) return lift_drag(v, angle_of_attack(s, cfg), cfg);
    // Flying backwards: the surfaces stop lifting and only parasitic drag
    // remains, opposing the motion.
    LiftDrag out;
    out.airspeed_ms = v;
    out.alpha_rad = s.pitch_rad;
    const double q = 0.5 * cfg.rho_kg_m3 * v * v;
    out.drag_N = -q * (cfg.wing_area_m2 * cfg.wing.cd0 + cfg.tail_area_m2 * cfg.tail.cd0);
    return out;
}

ForceBreakdown aero_forces(const LiftDrag& ld, const AircraftConfig& cfg) {
    return {-ld.drag_N, -(ld.lift_wing_N + ld.lift_tail_N),
            ld.lift_wing_N * cfg.x_wing_m - ld.lift_tail_N * cfg.x_tail_m +
                ld.drag_N * cfg.y_drag_m};
}

ForceBreakdown aero_forces(const SimState& s, const AircraftConfig& cfg) {
    return aero_forces(lift_drag(s, cfg), cfg);
}

ForceBreakdown thrust_forces(double f1, double f2, double pitch, double tilt,
                             const AircraftConfig& cfg) {
    if (!(f1 >= 0.0) || !(f2 >= 0.0))
        throw std::invalid_argument("thrust_forces: engine thrust must be non-negative");
    if (!std::isfinite(f1) || !std::isfinite(f2) || !std::isfinite(pitch) || !std::isfinite(tilt))
        throw std::invalid_argument("thrust_forces: non-finite input");
    const double t = f1 + f2;
    const double dir = pitch + tilt;
    return {t * std::cos(dir), -t * std::sin(dir), f1 * cfg.g_arm(tilt) - f2 * cfg.h_arm(tilt)};
}

ForceBreakdown tilt_reaction(double tilt_accel, const AircraftConfig& cfg) {
    if (!std::isfinite(tilt_accel)) throw std::invalid_argument("tilt_reaction: non-finite input");
    return {0.0, 0.0, cfg.rotor_inertia_kgm2 * tilt_accel};
}

ForceBreakdown total_forces(const SimState& s, double f1, double f2, double tilt_accel,
                            const ForceBreakdown& disturbance, const AircraftConfig& cfg) {
    ForceBreakdown sum = aero_forces(s, cfg);
    sum += thrust_forces(f1, f2, s.pitch_rad, s.tilt_rad, cfg);
    sum += tilt_reaction(tilt_accel, cfg);
    sum += ForceBreakdown{0.0, cfg.weight_N(), 0.0};
    sum += disturbance;
    return sum;
}

HoverTrim trim_hover(const AircraftConfig& cfg) {
    const double g = cfg.g_arm(kHalfPi);
    const double h = cfg.h_arm(kHalfPi);
    const double w = cfg.weight_N();
    // F1 + F2 = W and F1 g = F2 h.
    return {w * h / (g + h), w * g / (g + h)};
}

CruiseTrim trim_cruise(const AircraftConfig& cfg) {
    const double w = cfg.weight_N();
    const double cl_level =
        cfg.wing_area_m2 * cfg.wing.lift_coefficient(0.0) + cfg.tail_area_m2 * cfg.tail.lift_coefficient(0.0);
    if (!(cl_level > 0.0))
        throw std::invalid_argument("trim_cruise: no positive lift at zero angle of attack");

    CruiseTrim out;
    // Damped fixed point on v <- v * sqrt(W / L(v)); lift is quadratic in v so
    // the undamped map would converge in one step, damping keeps it general.
    double v = cfg.v_max_ms;
    const double damping = 0.7;
    for (int i = 0; i < 200; ++i) {
        const double lift = lift_drag(v, 0.0, cfg).lift_N();
        const double next = v * std::sqrt(w / lift);
        const double step = damping * (next - v);
        v += step;
        out.iterations = i + 1;
        if (std::abs(step) <= 1e-13 * v) break;
    }
    const LiftDrag ld = lift_drag(v, 0.0, cfg);
    const ForceBreakdown aero = aero_forces(ld, cfg);
    const double g = cfg.g_arm(0.0);
    const double h = cfg.h_arm(0.0);
    out.speed_ms = v;
    out.thrust_N = ld.drag_N;
    // F1 + F2 = D and F1 g - F2 h = -aero moment.
    out.f1_N = (out.thrust_N * h - aero.m_pitch_Nm) / (g + h);
    out.f2_N = out.thrust_N - out.f1_N;
    return out;
}

}  // namespace tiltrotor
