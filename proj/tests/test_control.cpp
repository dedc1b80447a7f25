#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tiltrotor/control.hpp"

using namespace tiltrotor;
using doctest::Approx;

TEST_CASE("PID law") {
    const PidGains heli_z{0.07, 0.003, 0.7};
    CHECK(pid_accel(0.0, 0.0, 0.0, heli_z) == 0.0);
    CHECK(pid_accel(100.0, 0.0, 0.0, heli_z) == Approx(7.0).epsilon(1e-12));
    CHECK(pid_accel(1.0, 2.0, 3.0, {1.0, 10.0, 100.0}) == Approx(321.0));
    for (double a : {-3.0, 0.5, 2.0})
        CHECK(pid_accel(a * 4.0, 0.0, 0.0, heli_z) == Approx(a * pid_accel(4.0, 0.0, 0.0, heli_z)));
}

TEST_CASE("Routh verdicts on the reference gains") {
    CHECK(routh_check(0.07, 0.003, 0.7) == Verdict::stable);
    CHECK(routh_check(0.31, 0.052, 0.72) == Verdict::stable);
    CHECK(routh_check(0.1, 0.1, 0.1) == Verdict::unstable);
    CHECK(oracle::pid_double_integrator(0.07, 0.003, 0.7) == oracle::Stability::stable);
    CHECK(oracle::pid_double_integrator(0.31, 0.052, 0.72) == oracle::Stability::stable);
    CHECK(oracle::pid_double_integrator(0.1, 0.1, 0.1) == oracle::Stability::unstable);

    const GainSchedule s = default_gain_schedule();
    for (const PidGains* g : {&s.heli.altitude, &s.heli.pitch, &s.fw.altitude, &s.fw.velocity,
                              &s.fw.pitch}) {
        CHECK(routh_check(*g) == Verdict::stable);
        CHECK(oracle::pid_double_integrator(g->kp, g->ki, g->kd) == oracle::Stability::stable);
    }
}

TEST_CASE("Routh edge cases") {
    CHECK(routh_check(1.0, 0.0, 1.0) == Verdict::marginal);  // root at the origin
    CHECK(routh_check(2.0, 2.0, 1.0) == Verdict::marginal);  // imaginary pair
    CHECK(oracle::pid_double_integrator(2.0, 2.0, 1.0) == oracle::Stability::boundary);
    CHECK(routh_check(-1.0, 0.1, 1.0) == Verdict::unstable);
    CHECK(routh_check(1.0, 0.1, 0.0) == Verdict::unstable);
    CHECK(routh_check(NAN, 0.1, 1.0) == Verdict::unstable);
    CHECK(routh_check(INFINITY, 0.1, 1.0) == Verdict::unstable);
}

TEST_CASE("property: Routh agrees with the cubic roots") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    int compared = 0;
    for (int i = 0; i < 1000; ++i) {
        const double kp = u(rng), ki = u(rng), kd = u(rng);
        const auto truth = oracle::pid_double_integrator(kp, ki, kd);
        if (truth == oracle::Stability::boundary) continue;
        CHECK((routh_check(kp, ki, kd) == Verdict::stable) == (truth == oracle::Stability::stable));
        ++compared;
    }
    CHECK(compared > 990);
}

TEST_CASE("gain schedule endpoints and midpoint") {
    const GainSchedule s = default_gain_schedule();
    const GainSet heli = schedule_gains(kHalfPi, s);
    CHECK(heli.altitude.kp == 0.07);
    CHECK(heli.pitch.ki == 0.0018);
    CHECK(heli.velocity.kp == 0.0);
    const GainSet fw = schedule_gains(0.0, s);
    CHECK(fw.altitude.kp == 0.31);
    CHECK(fw.velocity.kd == 0.7);
    CHECK(fw.pitch.ki == 0.08);
    const GainSet mid = schedule_gains(deg2rad(45.0), s);
    CHECK(mid.altitude.kp == Approx(0.19).epsilon(1e-12));
    CHECK(blend_weight(deg2rad(45.0), s) == Approx(0.5));
    CHECK(blend_weight(deg2rad(85.0), s) == Approx(1.0));
    CHECK(blend_weight(deg2rad(5.0), s) == Approx(0.0));
    CHECK(blend_weight(deg2rad(88.0), s) == 1.0);
    CHECK(blend_weight(deg2rad(2.0), s) == 0.0);
}

TEST_CASE("property: blend weight is monotone and gains are continuous in tilt") {
    const GainSchedule s = default_gain_schedule();
    double prev_w = -1.0;
    GainSet prev = schedule_gains(0.0, s);
    const double step = deg2rad(0.01);
    for (int k = 0; k <= 9000; ++k) {
        const double tilt = step * k;
        const double w = blend_weight(tilt, s);
        CHECK(w >= prev_w);
        prev_w = w;
        const GainSet g = schedule_gains(tilt, s);
        // Largest slope is |0.31 - 0.07| / 80 deg on kp_z, well below 0.01 per 0.01 deg.
        CHECK(std::abs(g.altitude.kp - prev.altitude.kp) < 1e-3);
        CHECK(std::abs(g.velocity.kp - prev.velocity.kp) < 1e-3);
        CHECK(std::abs(g.pitch.kp - prev.pitch.kp) < 1e-3);
        prev = g;
    }
}

TEST_CASE("gain validation") {
    CHECK(validate(default_gain_schedule()).empty());
    GainSchedule bad = default_gain_schedule();
    bad.fw.altitude = {0.1, 0.1, 0.1};
    CHECK_FALSE(validate(bad).empty());
    bad = default_gain_schedule();
    bad.tilt_hi_rad = bad.tilt_lo_rad;
    CHECK_FALSE(validate(bad).empty());
}

TEST_CASE("tracking errors") {
    SimState s;
    s.vx_ms = 40.0;
    References r;
    r.v_ms = 40.0;
    ErrorState e = compute_errors(s, r, {});
    CHECK(e.e_x == 0.0);
    CHECK(e.e_z == 0.0);
    CHECK(e.e_theta == 0.0);

    s.z_m = -100.0;
    CHECK(compute_errors(s, References{}, {}).e_z == 100.0);

    s = SimState{};
    s.vx_ms = 50.0;
    r = References{};
    r.v_ms = 125.0;
    CHECK(compute_errors(s, r, {}).e_x == 75.0);

    s.vz_ms = 2.0;
    s.pitch_rate_rad_s = 0.1;
    r.v_rate_ms2 = 1.0;
    e = compute_errors(s, r, {0.25, 0.0, 0.0});
    CHECK(e.dot_e_z == -2.0);
    CHECK(e.dot_e_theta == -0.1);
    CHECK(e.dot_e_x == 0.75);
}

TEST_CASE("hover channel commands") {
    const AircraftConfig cfg;
    const ControlConfig cc;
    ChannelMemory mem;
    const ChannelCommands c = channel_commands(SimState{}, ChannelInputs{}, cfg, cc, mem);
    CHECK(c.thrust_vertical_N == Approx(cfg.weight_N()));
    CHECK(c.thrust_total_N == Approx(cfg.weight_N()));
    CHECK(c.c_theta == 0.0);
    CHECK(c.c_z_plus_xdot == Approx(cfg.weight_N() * 2.0 * 4.0 / 6.0));
    CHECK_FALSE(c.vertical_guarded);
}

TEST_CASE("guarded denominators hold the last value") {
    const AircraftConfig cfg;
    const ControlConfig cc;
    ChannelMemory mem;
    SimState s;
    s.tilt_rad = deg2rad(45.0);
    ChannelInputs in;
    in.blend_w = 0.5;
    const ChannelCommands a = channel_commands(s, in, cfg, cc, mem);
    s.tilt_rad = 0.0;  // sin = 0: vertical projection guarded
    const ChannelCommands b = channel_commands(s, in, cfg, cc, mem);
    CHECK(b.vertical_guarded);
    CHECK(b.thrust_vertical_N == a.thrust_vertical_N);
}

TEST_CASE("pitch priority keeps both engines non-negative") {
    const AircraftConfig cfg;
    ControlConfig cc;
    ChannelMemory mem;
    SimState s;
    s.vx_ms = 105.0;
    s.tilt_rad = 0.0;
    ChannelInputs in;
    in.blend_w = 0.0;
    in.u_theta = -0.2;
    const ChannelCommands c = channel_commands(s, in, cfg, cc, mem);
    const Allocation a = allocate_thrust(c.c_z_plus_xdot, c.c_theta, s.tilt_rad, cfg);
    CHECK(a.f1_raw_N >= 0.0);
    CHECK(a.f2_raw_N >= 0.0);
    cc.pitch_priority = false;
    const ChannelCommands off = channel_commands(s, in, cfg, cc, mem);
    CHECK(off.c_z_plus_xdot <= c.c_z_plus_xdot);
}

TEST_CASE("allocation examples") {
    const AircraftConfig cfg;
    const Allocation even = allocate_thrust(120.0, 0.0, kHalfPi, cfg);
    CHECK(even.f1_N == Approx(60.0));
    CHECK(even.f2_N == Approx(30.0));
    CHECK(even.f1_N * 2.0 - even.f2_N * 4.0 == Approx(0.0));

    const Allocation pitch = allocate_thrust(0.0, 6.0, kHalfPi, cfg);
    CHECK(pitch.f1_raw_N == Approx(1.0));
    CHECK(pitch.f2_raw_N == Approx(-1.0));
    CHECK(pitch.f1_N == Approx(1.0));
    CHECK(pitch.f2_N == 0.0);
    CHECK(pitch.flags.f2_low);
    CHECK_FALSE(pitch.flags.f1_low);
    CHECK(pitch.flags.engine_saturated());
    CHECK_FALSE(pitch.flags.authority_exhausted());

    const Allocation huge = allocate_thrust(1e9, 0.0, kHalfPi, cfg);
    CHECK(huge.f1_N == cfg.f1_max_N);
    CHECK(huge.f2_N == cfg.f2_max_N);
    CHECK(huge.flags.authority_exhausted());
}

TEST_CASE("property: allocation reproduces pitch moment and total thrust before clamping") {
    const AircraftConfig cfg;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> c(-2e5, 4e5), ct(-2e5, 2e5), tilt(0.0, kHalfPi);
    for (int i = 0; i < 10000; ++i) {
        const double cz = c(rng), cth = ct(rng), t = tilt(rng);
        const Allocation a = allocate_thrust(cz, cth, t, cfg);
        const double g = cfg.g_arm(t), h = cfg.h_arm(t);
        const double total = cz * (g + h) / (g * h);
        const double moment = a.f1_raw_N * g - a.f2_raw_N * h;
        CHECK(std::abs(moment - cth) <= 1e-9 * std::max({std::abs(cth), std::abs(cz), 1.0}));
        CHECK(std::abs((a.f1_raw_N + a.f2_raw_N) - total) <=
              1e-9 * std::max({std::abs(total), std::abs(cth), 1.0}));
    }
}

TEST_CASE("tilt rate law") {
    CHECK(tilt_rate_command(0.7, 0.7, 3.0, 0.26) == 0.0);
    CHECK(tilt_rate_command(1.0, 0.5, 1.0, 0.2) == Approx(-0.2));
    CHECK(tilt_rate_command(0.4, 0.5, 0.5, 0.2) == Approx(0.05));
}

TEST_CASE("property: PID on a double integrator decays with the reference gains") {
    const GainSchedule s = default_gain_schedule();
    for (const PidGains& g : {s.heli.altitude, s.heli.pitch, s.fw.altitude, s.fw.pitch}) {
        // x'' = u, error e = -x; semi-implicit Euler at a small step.
        const double rate = -oracle::max_real_root(g.kd, g.kp, g.ki);
        REQUIRE(rate > 0.0);
        const double horizon = 12.0 / rate;
        const double dt = 1e-3;
        double x = 1.0, v = 0.0, ie = 0.0, peak_late = 0.0;
        const int n = static_cast<int>(horizon / dt);
        for (int k = 0; k < n; ++k) {
            const double e = -x;
            ie += e * dt;
            v += pid_accel(e, ie, -v, g) * dt;
            x += v * dt;
            if (k > n * 9 / 10) peak_late = std::max(peak_late, std::abs(x));
        }
        CHECK(peak_late < 0.05);
    }
}

TEST_CASE("controller holds hover trim with no correction") {
    const AircraftConfig cfg;
    Controller ctl(cfg, default_gain_schedule(), ControlConfig{});
    SimState s;
    for (int k = 0; k < 10; ++k) {
        const ControlCommand c =
            ctl.update(s, ControlMode::heli, References{}, kHalfPi, MeasuredAccel{}, 0.002);
        const HoverTrim t = trim_hover(cfg);
        CHECK(c.f1_N == Approx(t.f1_N).epsilon(1e-12));
        CHECK(c.f2_N == Approx(t.f2_N).epsilon(1e-12));
        // cos(90 deg) sits under the guard, so only the forward channel is held.
        CHECK(c.flags.forward_guard);
        CHECK_FALSE(c.flags.engine_saturated());
        CHECK_FALSE(c.flags.vertical_guard);
        CHECK_FALSE(c.flags.lift_limited);
        CHECK(c.tilt_rate_cmd_rad_s == 0.0);
    }
    CHECK(s.int_e_z == 0.0);
    CHECK(s.int_e_theta == 0.0);
}

TEST_CASE("property: controller output respects engine limits") {
    const AircraftConfig cfg;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        Controller ctl(cfg, default_gain_schedule(), ControlConfig{});
        SimState s;
        s.z_m = 200.0 * u(rng);
        s.vx_ms = 60.0 + 60.0 * u(rng);
        s.vz_ms = 10.0 * u(rng);
        s.pitch_rad = 0.3 * u(rng);
        s.pitch_rate_rad_s = 0.3 * u(rng);
        s.tilt_rad = kHalfPi * pos(rng);
        const auto mode = static_cast<ControlMode>(i % 3);
        References r;
        r.v_ms = 100.0 * pos(rng);
        const ControlCommand c =
            ctl.update(s, mode, r, kHalfPi * pos(rng), {u(rng), u(rng), u(rng)}, 0.002);
        CHECK(c.f1_N >= 0.0);
        CHECK(c.f1_N <= cfg.f1_max_N);
        CHECK(c.f2_N >= 0.0);
        CHECK(c.f2_N <= cfg.f2_max_N);
        CHECK(std::abs(c.tilt_rate_cmd_rad_s) <= ControlConfig{}.tilt_rate_limit_rad_s);
    }
}

TEST_CASE("saturation flag bits") {
    SaturationFlags f;
    CHECK(f.bits() == 0u);
    f.f1_low = true;
    f.tilt_rate_limited = true;
    CHECK(f.bits() == 129u);
}

TEST_CASE("control config validation") {
    CHECK(validate(ControlConfig{}).empty());
    ControlConfig c;
    c.tilt_rate_limit_rad_s = 0.0;
    c.denominator_guard = 2.0;
    CHECK(validate(c).size() >= 2);
}
