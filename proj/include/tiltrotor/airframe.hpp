#pragma once

#include <array>
#include <string>
#include <vector>

namespace tiltrotor {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Linear lift curve with a symmetric stall clamp and a parabolic drag polar.
struct Polar {
    double cl0 = 0.0;
    double cl_alpha_per_rad = 0.0;
    double cl_max = 0.0;
    double cd0 = 0.0;
    double induced_drag_k = 0.0;

    double lift_coefficient(double alpha_rad) const;
    double drag_coefficient(double cl) const { return cd0 + induced_drag_k * cl * cl; }
};

// Arm length as an affine function of tilt: value at 0 deg and at 90 deg.
struct LeverArm {
    double at_tilt0_m = 1.0;
    double at_tilt90_m = 1.0;

    double at(double tilt_rad) const;
};

struct AircraftConfig {
    double mass_kg = 12000.0;
    double inertia_pitch_kgm2 = 90000.0;
    double rotor_inertia_kgm2 = 400.0;

    double wing_area_m2 = 676.0 / 12.0;  // 26 m span, aspect ratio 12
    double tail_area_m2 = 14.0;
    double x_wing_m = 0.5;  // wing centre of pressure ahead of CG
    double x_tail_m = 9.0;  // tail centre of pressure behind CG
    double y_drag_m = 0.3;  // drag centre above CG

    LeverArm lever_front{1.0, 2.0};  // g(tau)
    LeverArm lever_rear{1.0, 4.0};   // h(tau)

    double f1_max_N = 12000.0 * kStandardGravity;
    double f2_max_N = 6000.0 * kStandardGravity;
    double p_max_W = 9.0e6;

    Polar wing{0.29, 5.5, 1.4, 0.03, 0.033};
    Polar tail{0.065, 4.0, 1.0, 0.01, 0.08};

    double rho_kg_m3 = 1.225;
    double v_max_ms = 125.0;
    double disk_loading_kg_m2 = 130.0;

    // When set, angle of attack subtracts the flight-path angle instead of
    // assuming level flight.
    bool flightpath_aoa = false;

    double weight_N() const { return mass_kg * kStandardGravity; }
    double g_arm(double tilt_rad) const { return lever_front.at(tilt_rad); }
    double h_arm(double tilt_rad) const { return lever_rear.at(tilt_rad); }
    double disk_area_m2() const { return mass_kg / disk_loading_kg_m2; }
    double max_total_thrust_N() const { return f1_max_N + f2_max_N; }
};

// Every violated invariant, one message each. Empty means valid.
std::vector<std::string> validate(const AircraftConfig& cfg);

struct SimState {
    double x_m = 0.0;
    double z_m = 0.0;  // positive down
    double vx_ms = 0.0;
    double vz_ms = 0.0;
    double pitch_rad = 0.0;
    double pitch_rate_rad_s = 0.0;
    double tilt_rad = kHalfPi;
    double tilt_rate_rad_s = 0.0;
    double time_s = 0.0;
    double int_e_z = 0.0;
    double int_e_x = 0.0;
    double int_e_theta = 0.0;

    double altitude_m() const { return 0.0 - z_m; }
    bool finite() const;
};

struct ForceBreakdown {
    double fx_N = 0.0;
    double fz_N = 0.0;
    double m_pitch_Nm = 0.0;

    ForceBreakdown& operator+=(const ForceBreakdown& o);
    bool finite() const;
};

ForceBreakdown operator+(ForceBreakdown a, const ForceBreakdown& b);

// Half-sine force pulse starting at start_s.
struct GustPulse {
    double start_s = 0.0;
    double duration_s = 0.0;
    ForceBreakdown peak{};
};

// Piecewise-constant segment: holds `value` from start_s onward until the
// next segment starts.
struct DisturbanceSegment {
    double start_s = 0.0;
    ForceBreakdown value{};
};

struct Disturbance {
    std::vector<DisturbanceSegment> segments;  // sorted by start_s
    std::vector<GustPulse> gusts;

    ForceBreakdown at(double t_s) const;
    bool is_zero() const;
};

struct LiftDrag {
    double lift_wing_N = 0.0;
    double lift_tail_N = 0.0;
    double drag_N = 0.0;  // along -x body; negative in reverse flow
    double airspeed_ms = 0.0;
    double alpha_rad = 0.0;

    double lift_N() const { return lift_wing_N + lift_tail_N; }
};

// Lift and drag at a given speed and angle of attack with forward flow.
LiftDrag lift_drag(double airspeed_ms, double alpha_rad, const AircraftConfig& cfg);

// Lift and drag for the state, including the reverse-flow case.
LiftDrag lift_drag(const SimState& s, const AircraftConfig& cfg);

double angle_of_attack(const SimState& s, const AircraftConfig& cfg);

ForceBreakdown aero_forces(const SimState& s, const AircraftConfig& cfg);
ForceBreakdown aero_forces(const LiftDrag& ld, const AircraftConfig& cfg);
ForceBreakdown thrust_forces(double f1_N, double f2_N, double pitch_rad, double tilt_rad,
                             const AircraftConfig& cfg);
ForceBreakdown tilt_reaction(double tilt_accel_rad_s2, const AircraftConfig& cfg);
ForceBreakdown total_forces(const SimState& s, double f1_N, double f2_N, double tilt_accel_rad_s2,
                            const ForceBreakdown& disturbance, const AircraftConfig& cfg);

struct HoverTrim {
    double f1_N = 0.0;
    double f2_N = 0.0;
};

struct CruiseTrim {
    double speed_ms = 0.0;
    double thrust_N = 0.0;
    double f1_N = 0.0;
    double f2_N = 0.0;
    int iterations = 0;
};

// Hover at tilt 90 deg: total thrust equals weight, split so the thrust
// moment vanishes.
HoverTrim trim_hover(const AircraftConfig& cfg);

// Level fixed-wing flight at zero pitch and zero tilt: lift equals weight,
// thrust equals drag, thrust moment cancels the aero moment.
CruiseTrim trim_cruise(const AircraftConfig& cfg);

}  // namespace tiltrotor
