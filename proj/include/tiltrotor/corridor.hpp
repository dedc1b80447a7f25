#pragma once

#include <cstdint>
#include <vector>

#include "tiltrotor/airframe.hpp"

namespace tiltrotor {

struct GridSpec {
    double v_min_ms = 0.0;
    double v_max_ms = 125.0;
    int n_velocity = 101;
    int n_tilt = 91;  // over [0, 90] deg
};

// How the desired tilt is placed inside the margined interval.
//   schedule = lower + fraction * (ceiling - lower)
// ceiling is the upper boundary, or, with cap_at_level_trim, the smaller of
// the upper boundary and the tilt at which thrust alone balances the missing
// lift and the drag in level flight. fraction 0.5 without the cap gives the
// interval midline.
struct ScheduleOptions {
    double fraction = 0.1;
    bool cap_at_level_trim = true;
};

struct Corridor {
    std::vector<double> velocity_grid_ms;  // ascending, includes the cruise trim speed
    std::vector<double> tilt_grid_rad;     // ascending
    std::vector<std::uint8_t> feasible;    // row-major [velocity][tilt]
    std::vector<double> raw_lower_rad;     // per velocity, before margin (NaN if empty)
    std::vector<double> raw_upper_rad;
    std::vector<double> lower_rad;  // after margin
    std::vector<double> upper_rad;
    std::vector<double> schedule_rad;
    std::vector<double> non_contiguous_velocities_ms;  // columns whose feasible set splits
    double margin_frac = 0.0;
    double trim_speed_ms = 0.0;

    bool is_feasible(std::size_t iv, std::size_t it) const {
        return feasible[iv * tilt_grid_rad.size() + it] != 0;
    }
    bool contiguous() const { return non_contiguous_velocities_ms.empty(); }
    std::size_t feasible_count() const;

    // Piecewise-linear lookups; throw std::out_of_range outside the grid.
    double lower_at(double v_ms) const;
    double upper_at(double v_ms) const;
    double schedule_at(double v_ms) const;
};

// Vertical thrust at full power plus lift meets weight.
bool stall_feasible(double v_ms, double tilt_rad, double pitch_rad, const AircraftConfig& cfg);

// Momentum-theory power: thrust times axial inflow plus hover induced velocity.
double power_required(double v_ms, double tilt_rad, double pitch_rad, double thrust_N,
                      const AircraftConfig& cfg);

// Smallest total thrust that closes the vertical balance at this cell.
double minimum_vertical_thrust(double v_ms, double tilt_rad, double pitch_rad,
                               const AircraftConfig& cfg);

// Stall and power checks, plus the speed range.
bool cell_feasible(double v_ms, double tilt_rad, double pitch_rad, const AircraftConfig& cfg);

// Tilt at which thrust closes both the lift deficit and drag in level flight.
double level_flight_tilt(double v_ms, const AircraftConfig& cfg);

Corridor build_corridor(const AircraftConfig& cfg, const GridSpec& grid, double margin_frac,
                        const ScheduleOptions& schedule = {});

double tilt_schedule(const Corridor& c, double v_ms);

}  // namespace tiltrotor
