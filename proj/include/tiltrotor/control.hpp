#pragma once

#include "tiltrotor/airframe.hpp"

namespace tiltrotor {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
};

struct GainSet {
    PidGains altitude;
    PidGains velocity;
    PidGains pitch;
};

struct GainSchedule {
    GainSet heli;
    GainSet fw;
    double tilt_hi_rad = deg2rad(85.0);
    double tilt_lo_rad = deg2rad(5.0);
};

// Helicopter and fixed-wing gains from the reference design. The helicopter
// velocity channel has no gains and is represented as zeros.
GainSchedule default_gain_schedule();

enum class Verdict { stable, marginal, unstable };
const char* to_string(Verdict v);

// Routh-Hurwitz on l^3 + kd l^2 + kp l + ki.
Verdict routh_check(double kp, double ki, double kd);
inline Verdict routh_check(const PidGains& g) { return routh_check(g.kp, g.ki, g.kd); }

// Every violated schedule invariant. The helicopter velocity channel is
// exempt from the Routh requirement since it is switched off.
std::vector<std::string> validate(const GainSchedule& s);

double pid_accel(double e, double e_int, double e_dot, const PidGains& g);

// 1 at and above tilt_hi, 0 at and below tilt_lo, linear between.
double blend_weight(double tilt_rad, const GainSchedule& s);
GainSet schedule_gains(double tilt_rad, const GainSchedule& s);

struct References {
    double z_m = 0.0;
    double pitch_rad = 0.0;
    double v_ms = 0.0;          // desired forward speed
    double v_rate_ms2 = 0.0;    // its time derivative
};

struct MeasuredAccel {
    double x_ms2 = 0.0;
    double z_ms2 = 0.0;
    double pitch_rad_s2 = 0.0;
};

struct ErrorState {
    double e_x = 0.0, e_z = 0.0, e_theta = 0.0;
    double int_e_x = 0.0, int_e_z = 0.0, int_e_theta = 0.0;
    double dot_e_x = 0.0, dot_e_z = 0.0, dot_e_theta = 0.0;
};

// Errors are reference minus state. Derivatives use the state rates, and the
// measured forward acceleration for the velocity channel.
ErrorState compute_errors(const SimState& s, const References& ref, const MeasuredAccel& acc);

struct ControlConfig {
    double tilt_gain_per_s = 3.0;
    double tilt_rate_limit_rad_s = deg2rad(15.0);
    double denominator_guard = 0.05;
    // Altitude-through-speed path used once the velocity channel blends in:
    // demanded lift is held within (1 +- lift_authority) * W and the altitude
    // error feeding it is limited to +- altitude_error_limit_m.
    double lift_authority = 0.15;
    double altitude_error_limit_m = 3.0;
    // Time constant of the low-pass on measured accelerations.
    double accel_filter_s = 0.05;
    // Raise the thrust command when needed so neither engine would be driven
    // negative by the pitch command.
    bool pitch_priority = true;
    double pitch_priority_factor = 1.05;
};

std::vector<std::string> validate(const ControlConfig& c);

struct ChannelCommands {
    double c_z_plus_xdot = 0.0;  // N*m
    double c_theta = 0.0;        // N*m
    double thrust_total_N = 0.0;
    double thrust_vertical_N = 0.0;
    double thrust_forward_N = 0.0;
    bool vertical_guarded = false;
    bool forward_guarded = false;
};

// Last valid channel values, used when a projection denominator is guarded.
struct ChannelMemory {
    double thrust_vertical_N = 0.0;
    double thrust_forward_N = 0.0;
};

struct ChannelInputs {
    double u_z = 0.0;      // commanded vertical acceleration, positive down
    double u_theta = 0.0;  // commanded pitch acceleration
    double acc_x = 0.0;    // commanded forward acceleration
    double blend_w = 1.0;
    double tilt_accel_rad_s2 = 0.0;
};

ChannelCommands channel_commands(const SimState& s, const ChannelInputs& in,
                                 const AircraftConfig& cfg, const ControlConfig& cc,
                                 ChannelMemory& memory);

struct SaturationFlags {
    bool f1_low = false;
    bool f1_high = false;
    bool f2_low = false;
    bool f2_high = false;
    bool vertical_guard = false;
    bool forward_guard = false;
    bool lift_limited = false;
    bool tilt_rate_limited = false;

    bool engine_saturated() const { return f1_low || f1_high || f2_low || f2_high; }
    bool authority_exhausted() const { return (f1_low || f1_high) && (f2_low || f2_high); }
    unsigned bits() const;
};

struct Allocation {
    double f1_raw_N = 0.0;
    double f2_raw_N = 0.0;
    double f1_N = 0.0;
    double f2_N = 0.0;
    SaturationFlags flags;
};

Allocation allocate_thrust(double c_z_plus_xdot, double c_theta, double tilt_rad,
                           const AircraftConfig& cfg);

double tilt_rate_command(double tilt_rad, double tilt_desired_rad, double k_tau,
                         double rate_limit);

struct ControlCommand {
    double f1_N = 0.0;
    double f2_N = 0.0;
    double tilt_rate_cmd_rad_s = 0.0;
    double tilt_accel_rad_s2 = 0.0;
    SaturationFlags flags;
    GainSet gains;
    double blend_w = 1.0;
    double v_desired_ms = 0.0;  // after the altitude-through-speed offset
    ChannelCommands channels;
    ErrorState errors;
};

enum class ControlMode { heli, transition, fixed_wing };

// Stateful wrapper: holds integrators, guard memory, the acceleration filter
// and the previous tilt-rate command.
class Controller {
public:
    Controller(const AircraftConfig& cfg, const GainSchedule& gains, const ControlConfig& cc);

    // One control update. `tilt_desired` drives the tilt loop; `accel` is the
    // raw measured acceleration from the last integration step.
    ControlCommand update(SimState& s, ControlMode mode, const References& ref,
                          double tilt_desired_rad, const MeasuredAccel& accel, double dt);

    void reset_filters(const MeasuredAccel& a) { accel_ = a; }
    const MeasuredAccel& filtered_accel() const { return accel_; }

private:
    AircraftConfig cfg_;
    GainSchedule gains_;
    ControlConfig cc_;
    ChannelMemory memory_;
    MeasuredAccel accel_;
    double prev_rate_ = 0.0;
    bool first_ = true;
};

}  // namespace tiltrotor
