#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltrotor/airframe.hpp"
#include "tiltrotor/control.hpp"
#include "tiltrotor/corridor.hpp"

namespace tiltrotor {

// Classical fixed-step RK4 on a fixed-size state. `f(t, y)` returns dy/dt.
// The first stage is written to *k1 when given.
template <std::size_t N, class F>
std::array<double, N> rk4_step(const std::array<double, N>& y, double t, double dt, F&& f,
                               std::array<double, N>* k1_out = nullptr) {
    auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
        std::array<double, N> r{};
        for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    const std::array<double, N> k1 = f(t, y);
    const std::array<double, N> k2 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k1));
    const std::array<double, N> k3 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k2));
    const std::array<double, N> k4 = f(t + dt, axpy(y, dt, k3));
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (k1_out) *k1_out = k1;
    return out;
}

enum class FlightMode { heli_static, transition_scheduled, fw_static };
const char* to_string(FlightMode m);

enum class ScenarioKind { hold, altitude_step, pitch_step, transition };
const char* to_string(ScenarioKind k);

struct VelocityPoint {
    double t_s = 0.0;  // seconds after the transition trigger
    double v_ms = 0.0;
};

struct Scenario {
    std::string name = "transition";
    ScenarioKind kind = ScenarioKind::transition;
    FlightMode initial_mode = FlightMode::heli_static;  // heli or fixed-wing trim
    double step_altitude_m = 100.0;
    double step_pitch_rad = deg2rad(6.0);
    double step_time_s = 0.0;
    // Desired forward speed after the trigger. Empty: generated from a
    // reduced model of the transition.
    std::vector<VelocityPoint> velocity_profile;
    Disturbance disturbance;
    double duration_s = 90.0;
    double dt_s = 0.002;
    // Transition trigger: |altitude error| below tolerance for this long.
    double settle_window_s = 5.0;
    double settle_tolerance_m = 0.5;
    // Both engines clamped for longer than this fails the run.
    double authority_limit_s = 1.0;
};

std::vector<std::string> validate(const Scenario& s);

// Derivative of (x, z, vx, vz, pitch, pitch rate, tilt).
using StateVector = std::array<double, 7>;

class SimulationAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One RK4 step with thrust, tilt rate and tilt acceleration held over the
// step. Tilt is clamped to [0, 90] deg afterwards. The first-stage
// derivative is returned through k1 when given.
SimState integrate_step(const SimState& s, const ControlCommand& cmd, const Disturbance& dist,
                        const AircraftConfig& cfg, double dt, StateVector* k1 = nullptr);

struct TraceRow {
    SimState state;
    FlightMode mode = FlightMode::heli_static;
    double f1_N = 0.0;
    double f2_N = 0.0;
    double tilt_rate_cmd_rad_s = 0.0;
    double tilt_accel_rad_s2 = 0.0;
    double tilt_desired_rad = 0.0;
    double v_desired_ms = 0.0;
    double blend_w = 1.0;
    unsigned flags = 0;
    bool authority_exhausted = false;
    ForceBreakdown forces;
    GainSet gains;
    bool in_corridor = true;
};

struct ModeState {
    FlightMode mode = FlightMode::heli_static;
    std::optional<double> transition_entry_s;
    std::optional<double> fw_entry_s;
};

struct SimTrace {
    Scenario scenario;
    std::vector<TraceRow> rows;
    ModeState modes;
    std::optional<double> trigger_s;
    double trim_speed_ms = 0.0;
    std::size_t corridor_violations = 0;
    bool failed = false;
    std::string failure;
};

struct RunContext {
    AircraftConfig aircraft;
    GainSchedule gains;
    ControlConfig control;
    Corridor corridor;
};

// Desired forward speed during the transition from a reduced model: thrust
// closes the lift deficit (capped by the engine limits at the current
// tilt), its forward component minus drag accelerates the aircraft, and the
// tilt follows the corridor schedule through the same rate-limited law as
// the controller. Ends with a linear ramp to the cruise trim speed.
std::vector<VelocityPoint> reference_velocity_profile(const RunContext& ctx);

double profile_speed(const std::vector<VelocityPoint>& p, double t_s);

// Initial trimmed state for the scenario's starting mode.
SimState initial_state(const Scenario& sc, const AircraftConfig& cfg);

SimTrace run_scenario(const Scenario& sc, const RunContext& ctx);

struct StepMetrics {
    double initial = 0.0;
    double target = 0.0;
    double overshoot = 0.0;                 // fraction of the step size
    std::optional<double> settling_time_s;  // after the step; 2% band
    double final_value = 0.0;
};

struct ModeSwitch {
    double time_s = 0.0;
    FlightMode from = FlightMode::heli_static;
    FlightMode to = FlightMode::heli_static;
    double thrust_jump_N = 0.0;  // |F1+F2| change across the switching step
};

struct MetricReport {
    std::vector<double> normalized_speed;
    double max_altitude_deviation_m = 0.0;
    double max_pitch_deviation_deg = 0.0;
    std::optional<double> tilt85_time_s;
    std::optional<double> tilt5_time_s;
    std::optional<double> transition_duration_s;
    double peak_f1_N = 0.0;
    double peak_f2_N = 0.0;
    std::optional<StepMetrics> step;
    std::vector<ModeSwitch> switches;
    double max_thrust_discontinuity_N = 0.0;
    double final_speed_ms = 0.0;
    double final_altitude_m = 0.0;
    double final_pitch_deg = 0.0;
    double engine_saturation_s = 0.0;
    double longest_authority_loss_s = 0.0;
    std::size_t corridor_violations = 0;
    bool failed = false;
    std::string failure;
};

MetricReport metrics(const SimTrace& trace, double v_trim_ms);

// Overshoot and 2% settling of series y(t) for a step from y0 to target
// applied at t_step.
StepMetrics step_response(const std::vector<double>& t, const std::vector<double>& y,
                          double t_step, double y0, double target);

}  // namespace tiltrotor
