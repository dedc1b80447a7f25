#include "tiltrotor/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tiltrotor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty() || !(x >= xs.front()) || !(x <= xs.back()))
        throw std::out_of_range("corridor lookup outside velocity grid: " + std::to_string(x));
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return ys.back();
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    if (i == 0) return ys.front();
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

// Stall uses the clamped lift curve at alpha = pitch.
double envelope_lift(double v, double pitch, const AircraftConfig& cfg) {
    return lift_drag(v, pitch, cfg).lift_N();
}

}  // namespace

bool stall_feasible(double v, double tilt, double pitch, const AircraftConfig& cfg) {
    return cfg.max_total_thrust_N() * std::sin(pitch + tilt) + envelope_lift(v, pitch, cfg) >=
           cfg.weight_N();
}

double power_required(double v, double tilt, double pitch, double thrust,
                      const AircraftConfig& cfg) {
    if (!(thrust >= 0.0)) throw std::invalid_argument("power_required: thrust must be >= 0");
    if (thrust == 0.0) return 0.0;
    const double v_axial = v * std::sin(pitch + tilt);
    const double v_hover = std::sqrt(thrust / (2.0 * cfg.rho_kg_m3 * cfg.disk_area_m2()));
    return thrust * v_axial + thrust * v_hover;
}

double minimum_vertical_thrust(double v, double tilt, double pitch, const AircraftConfig& cfg) {
    const double deficit = std::max(0.0, cfg.weight_N() - envelope_lift(v, pitch, cfg));
    if (deficit == 0.0) return 0.0;
    const double s = std::sin(pitch + tilt);
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return deficit / s;
}

bool cell_feasible(double v, double tilt, double pitch, const AircraftConfig& cfg) {
    if (v > cfg.v_max_ms) return false;
    if (!stall_feasible(v, tilt, pitch, cfg)) return false;
    const double t = minimum_vertical_thrust(v, tilt, pitch, cfg);
    if (!std::isfinite(t)) return false;
    return power_required(v, tilt, pitch, t, cfg) <= cfg.p_max_W;
}

double level_flight_tilt(double v, const AircraftConfig& cfg) {
    const LiftDrag ld = lift_drag(v, 0.0, cfg);
    return std::clamp(std::atan2(cfg.weight_N() - ld.lift_N(), ld.drag_N), 0.0, kHalfPi);
}

std::size_t Corridor::feasible_count() const {
    return static_cast<std::size_t>(std::count(feasible.begin(), feasible.end(), 1));
}

double Corridor::lower_at(double v) const { return interp(velocity_grid_ms, lower_rad, v); }
double Corridor::upper_at(double v) const { return interp(velocity_grid_ms, upper_rad, v); }
double Corridor::schedule_at(double v) const { return interp(velocity_grid_ms, schedule_rad, v); }

double tilt_schedule(const Corridor& c, double v) { return c.schedule_at(v); }

Corridor build_corridor(const AircraftConfig& cfg, const GridSpec& grid, double margin_frac,
                        const ScheduleOptions& opts) {
    if (grid.n_velocity < 2 || grid.n_tilt < 2 || !(grid.v_max_ms > grid.v_min_ms))
        throw std::invalid_argument("build_corridor: degenerate grid");
    if (!(margin_frac >= 0.0 && margin_frac < 0.5))
        throw std::invalid_argument("build_corridor: margin_frac must lie in [0, 0.5)");
    if (!(opts.fraction >= 0.0 && opts.fraction <= 1.0))
        throw std::invalid_argument("build_corridor: schedule fraction must lie in [0, 1]");

    Corridor c;
    c.margin_frac = margin_frac;
    c.trim_speed_ms = trim_cruise(cfg).speed_ms;

    const int nv = grid.n_velocity;
    for (int i = 0; i < nv; ++i)
        c.velocity_grid_ms.push_back(grid.v_min_ms +
                                     (grid.v_max_ms - grid.v_min_ms) * i / (nv - 1));
    // The cruise trim speed becomes a node so the schedule reaches zero tilt
    // exactly there instead of being smeared across a cell.
    if (c.trim_speed_ms > grid.v_min_ms && c.trim_speed_ms < grid.v_max_ms) {
        auto& vg = c.velocity_grid_ms;
        auto it = std::lower_bound(vg.begin(), vg.end(), c.trim_speed_ms);
        if (*it != c.trim_speed_ms) vg.insert(it, c.trim_speed_ms);
    }
    for (int j = 0; j < grid.n_tilt; ++j)
        c.tilt_grid_rad.push_back(kHalfPi * j / (grid.n_tilt - 1));

    const std::size_t nvel = c.velocity_grid_ms.size();
    const std::size_t nt = c.tilt_grid_rad.size();
    c.feasible.assign(nvel * nt, 0);
    c.raw_lower_rad.assign(nvel, kNaN);
    c.raw_upper_rad.assign(nvel, kNaN);

    for (std::size_t iv = 0; iv < nvel; ++iv) {
        const double v = c.velocity_grid_ms[iv];
        int first = -1, last = -1, runs = 0;
        bool prev = false;
        for (std::size_t it = 0; it < nt; ++it) {
            const bool ok = cell_feasible(v, c.tilt_grid_rad[it], 0.0, cfg);
            c.feasible[iv * nt + it] = ok ? 1 : 0;
            if (ok) {
                if (first < 0) first = static_cast<int>(it);
                last = static_cast<int>(it);
                if (!prev) ++runs;
            }
            prev = ok;
        }
        if (runs > 1) c.non_contiguous_velocities_ms.push_back(v);
        if (first < 0) continue;
        // Bisect the lower edge between the last infeasible and first feasible
        // grid tilt; the upper edge stays on the grid.
        double lo = c.tilt_grid_rad[static_cast<std::size_t>(first)];
        if (first > 0) {
            double a = c.tilt_grid_rad[static_cast<std::size_t>(first - 1)];
            double b = lo;
            for (int k = 0; k < 60; ++k) {
                const double m = 0.5 * (a + b);
                if (cell_feasible(v, m, 0.0, cfg)) b = m;
                else a = m;
            }
            lo = b;
        }
        c.raw_lower_rad[iv] = lo;
        c.raw_upper_rad[iv] = c.tilt_grid_rad[static_cast<std::size_t>(last)];
    }
    if (std::isnan(c.raw_lower_rad.front()))
        throw std::invalid_argument("build_corridor: no feasible tilt at the lowest speed; the "
                                    "aircraft cannot hover with this configuration");

    // Margin. The lower edge moves up by margin*width but never by more than
    // its own height, so it tapers to zero where the fixed-wing trim point
    // sits on it. A 90 deg upper edge is the helicopter end point and stays.
    c.lower_rad.assign(nvel, kNaN);
    c.upper_rad.assign(nvel, kNaN);
    for (std::size_t iv = 0; iv < nvel; ++iv) {
        const double lo = c.raw_lower_rad[iv];
        const double hi = c.raw_upper_rad[iv];
        if (std::isnan(lo)) continue;
        const double shrink = margin_frac * (hi - lo);
        c.lower_rad[iv] = lo + std::min(shrink, lo);
        c.upper_rad[iv] = hi >= kHalfPi ? hi : hi - shrink;
    }

    // Schedule.
    c.schedule_rad.assign(nvel, kNaN);
    for (std::size_t iv = 0; iv < nvel; ++iv) {
        const double v = c.velocity_grid_ms[iv];
        const double lo = c.lower_rad[iv];
        const double hi = c.upper_rad[iv];
        if (std::isnan(lo)) {
            if (v < c.trim_speed_ms)
                throw std::invalid_argument("build_corridor: corridor has no feasible tilt at " +
                                            std::to_string(v) + " m/s below the trim speed");
            c.schedule_rad[iv] = 0.0;
            continue;
        }
        double ceiling = hi;
        if (opts.cap_at_level_trim) ceiling = std::min(hi, std::max(level_flight_tilt(v, cfg), lo));
        c.schedule_rad[iv] = lo + opts.fraction * (ceiling - lo);
        if (iv == 0) c.schedule_rad[iv] = std::min(kHalfPi, hi);
        if (v >= c.trim_speed_ms) c.schedule_rad[iv] = 0.0;
    }
    // Non-increasing in v while staying at or above every later lower edge,
    // which also keeps it at or above this column's own lower edge.
    std::vector<double> later_floor(nvel, 0.0);
    double run = 0.0;
    for (std::size_t k = nvel; k-- > 0;) {
        if (!std::isnan(c.lower_rad[k])) run = std::max(run, c.lower_rad[k]);
        later_floor[k] = run;
    }
    for (std::size_t iv = 1; iv < nvel; ++iv) {
        c.schedule_rad[iv] =
            std::min(c.schedule_rad[iv - 1], std::max(c.schedule_rad[iv], later_floor[iv]));
    }
    return c;
}

}  // namespace tiltrotor
