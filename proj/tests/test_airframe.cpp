#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tiltrotor/airframe.hpp"

using namespace tiltrotor;
using doctest::Approx;

namespace {

SimState level(double vx, double pitch_deg = 0.0, double tilt_deg = 0.0) {
    SimState s;
    s.vx_ms = vx;
    s.pitch_rad = deg2rad(pitch_deg);
    s.tilt_rad = deg2rad(tilt_deg);
    return s;
}

}  // namespace

TEST_CASE("no airspeed means no aerodynamic force") {
    const AircraftConfig cfg;
    for (double a : {-0.3, 0.0, 0.1, 0.5}) {
        const ForceBreakdown f = aero_forces(lift_drag(0.0, a, cfg), cfg);
        CHECK(f.fx_N == 0.0);
        CHECK(f.fz_N == 0.0);
        CHECK(f.m_pitch_Nm == 0.0);
    }
}

TEST_CASE("lift saturates at cl_max") {
    const AircraftConfig cfg;
    const double alpha_stall = (cfg.wing.cl_max - cfg.wing.cl0) / cfg.wing.cl_alpha_per_rad;
    const LiftDrag at = lift_drag(60.0, alpha_stall, cfg);
    const LiftDrag beyond = lift_drag(60.0, alpha_stall + 0.05, cfg);
    CHECK(at.lift_wing_N == Approx(beyond.lift_wing_N).epsilon(1e-12));
    CHECK(cfg.wing.lift_coefficient(1.0) == cfg.wing.cl_max);
    CHECK(cfg.wing.lift_coefficient(-1.0) == -cfg.wing.cl_max);
}

TEST_CASE("lift at 125 m/s and zero alpha matches the hand formula") {
    const AircraftConfig cfg;
    const LiftDrag ld = lift_drag(125.0, 0.0, cfg);
    const double wing = oracle::lift(1.225, 125.0, 676.0 / 12.0, 0.29, 5.5, 1.4, 0.0);
    const double tail = oracle::lift(1.225, 125.0, 14.0, 0.065, 4.0, 1.0, 0.0);
    CHECK(ld.lift_wing_N == Approx(wing).epsilon(1e-9));
    CHECK(ld.lift_tail_N == Approx(tail).epsilon(1e-9));
    // Per-surface parabolic drag.
    const double q = 0.5 * 1.225 * 125.0 * 125.0;
    const double drag = q * (676.0 / 12.0) * (0.03 + 0.033 * 0.29 * 0.29) +
                        q * 14.0 * (0.01 + 0.08 * 0.065 * 0.065);
    CHECK(ld.drag_N == Approx(drag).epsilon(1e-9));
}

TEST_CASE("aero force signs and moment arms") {
    const AircraftConfig cfg;
    const LiftDrag ld = lift_drag(level(80.0), cfg);
    const ForceBreakdown f = aero_forces(ld, cfg);
    CHECK(f.fx_N == Approx(-ld.drag_N));
    CHECK(f.fz_N == Approx(-ld.lift_N()));
    CHECK(f.m_pitch_Nm == Approx(ld.lift_wing_N * 0.5 - ld.lift_tail_N * 9.0 + ld.drag_N * 0.3));
}

TEST_CASE("reverse flow: no lift and drag opposes the motion") {
    const AircraftConfig cfg;
    const ForceBreakdown f = aero_forces(level(-10.0), cfg);
    CHECK(f.fx_N > 0.0);
    CHECK(f.fz_N == 0.0);
    const double q = 0.5 * 1.225 * 100.0;
    CHECK(f.fx_N == Approx(q * (676.0 / 12.0 * 0.03 + 14.0 * 0.01)));
}

TEST_CASE("thrust at hover tilt with the 2:1 split") {
    const AircraftConfig cfg;
    const ForceBreakdown f = thrust_forces(80e3, 40e3, 0.0, kHalfPi, cfg);
    CHECK(f.fx_N == Approx(0.0).epsilon(1e-9).scale(1e5));
    CHECK(f.fz_N == Approx(-120e3));
    CHECK(f.m_pitch_Nm == 0.0);
}

TEST_CASE("thrust at zero tilt is all forward") {
    const AircraftConfig cfg;
    const ForceBreakdown f = thrust_forces(60e3, 40e3, 0.0, 0.0, cfg);
    CHECK(f.fx_N == Approx(100e3));
    CHECK(f.fz_N == Approx(0.0));
}

TEST_CASE("thrust along 45 degrees") {
    const AircraftConfig cfg;
    const double expected = 100e3 * std::cos(kPi / 4.0);
    CHECK(expected == Approx(70710.678).epsilon(1e-8));
    for (double pitch_deg : {0.0, 10.0}) {
        const ForceBreakdown f =
            thrust_forces(50e3, 50e3, deg2rad(pitch_deg), deg2rad(45.0 - pitch_deg), cfg);
        CHECK(f.fx_N == Approx(70710.678).epsilon(1e-8));
        CHECK(f.fz_N == Approx(-70710.678).epsilon(1e-8));
    }
}

TEST_CASE("thrust rejects negative or non-finite engine commands") {
    const AircraftConfig cfg;
    CHECK_THROWS_AS(thrust_forces(-1.0, 0.0, 0.0, 0.0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(thrust_forces(0.0, NAN, 0.0, 0.0, cfg), std::invalid_argument);
}

TEST_CASE("tilt reaction torque") {
    AircraftConfig cfg;
    CHECK(tilt_reaction(0.0, cfg).m_pitch_Nm == 0.0);
    cfg.rotor_inertia_kgm2 = 500.0;
    const ForceBreakdown r = tilt_reaction(1.0, cfg);
    CHECK(r.fx_N == 0.0);
    CHECK(r.fz_N == 0.0);
    CHECK(r.m_pitch_Nm == Approx(500.0));
    CHECK(tilt_reaction(0.3, cfg).m_pitch_Nm > 0.0);
}

TEST_CASE("hover trim balances all forces") {
    const AircraftConfig cfg;
    const HoverTrim t = trim_hover(cfg);
    CHECK(t.f1_N + t.f2_N == Approx(cfg.weight_N()));
    CHECK(t.f1_N * 2.0 == Approx(t.f2_N * 4.0));
    SimState s;
    const ForceBreakdown f = total_forces(s, t.f1_N, t.f2_N, 0.0, {}, cfg);
    CHECK(std::abs(f.fx_N) < 1e-9 * cfg.weight_N());
    CHECK(std::abs(f.fz_N) < 1e-9 * cfg.weight_N());
    CHECK(std::abs(f.m_pitch_Nm) < 1e-9 * cfg.weight_N());
}

TEST_CASE("no thrust at rest is free fall") {
    const AircraftConfig cfg;
    const ForceBreakdown f = total_forces(SimState{}, 0.0, 0.0, 0.0, {}, cfg);
    CHECK(f.fx_N == 0.0);
    CHECK(f.fz_N == Approx(cfg.weight_N()));
    CHECK(f.m_pitch_Nm == 0.0);
}

TEST_CASE("cruise trim: lift carries the weight and the forces close") {
    const AircraftConfig cfg;
    const CruiseTrim t = trim_cruise(cfg);
    CHECK(t.speed_ms == Approx(105.547).epsilon(1e-5));
    CHECK(t.speed_ms < cfg.v_max_ms);
    const LiftDrag ld = lift_drag(t.speed_ms, 0.0, cfg);
    CHECK(ld.lift_N() == Approx(cfg.weight_N()).epsilon(1e-9));
    CHECK(t.thrust_N == Approx(ld.drag_N).epsilon(1e-9));
    const ForceBreakdown f = total_forces(level(t.speed_ms), t.f1_N, t.f2_N, 0.0, {}, cfg);
    CHECK(std::abs(f.fx_N) < 1e-6 * cfg.weight_N());
    CHECK(std::abs(f.fz_N) < 1e-6 * cfg.weight_N());
    CHECK(std::abs(f.m_pitch_Nm) < 1e-6 * cfg.weight_N());
    CHECK(t.f1_N >= 0.0);
    CHECK(t.f2_N >= 0.0);
}

TEST_CASE("lever arms are affine in tilt") {
    const AircraftConfig cfg;
    CHECK(cfg.g_arm(0.0) == Approx(1.0));
    CHECK(cfg.g_arm(kHalfPi) == Approx(2.0));
    CHECK(cfg.h_arm(0.0) == Approx(1.0));
    CHECK(cfg.h_arm(kHalfPi) == Approx(4.0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> tilt(0.0, kHalfPi), a(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double t1 = tilt(rng), t2 = tilt(rng), w = a(rng);
        CHECK(cfg.g_arm(w * t1 + (1 - w) * t2) ==
              Approx(w * cfg.g_arm(t1) + (1 - w) * cfg.g_arm(t2)).epsilon(1e-12));
        CHECK(cfg.h_arm(w * t1 + (1 - w) * t2) ==
              Approx(w * cfg.h_arm(t1) + (1 - w) * cfg.h_arm(t2)).epsilon(1e-12));
    }
}

TEST_CASE("property: total force is the sum of its parts") {
    const AircraftConfig cfg;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        SimState s;
        s.vx_ms = 130.0 * u(rng);
        s.vz_ms = 20.0 * u(rng);
        s.pitch_rad = 0.3 * u(rng);
        s.tilt_rad = kHalfPi * pos(rng);
        const double f1 = cfg.f1_max_N * pos(rng), f2 = cfg.f2_max_N * pos(rng);
        const double tdd = u(rng);
        const ForceBreakdown d{1e4 * u(rng), 1e4 * u(rng), 1e4 * u(rng)};

        const ForceBreakdown a = aero_forces(s, cfg);
        const ForceBreakdown t = thrust_forces(f1, f2, s.pitch_rad, s.tilt_rad, cfg);
        const ForceBreakdown r = tilt_reaction(tdd, cfg);
        const ForceBreakdown total = total_forces(s, f1, f2, tdd, d, cfg);
        const double scale = cfg.weight_N();
        CHECK(std::abs(total.fx_N - (a.fx_N + t.fx_N + r.fx_N + d.fx_N)) <= 1e-12 * scale);
        CHECK(std::abs(total.fz_N - (a.fz_N + t.fz_N + r.fz_N + cfg.weight_N() + d.fz_N)) <=
              1e-12 * scale);
        CHECK(std::abs(total.m_pitch_Nm - (a.m_pitch_Nm + t.m_pitch_Nm + r.m_pitch_Nm +
                                           d.m_pitch_Nm)) <= 1e-12 * scale);
    }
}

TEST_CASE("property: thrust vector length equals total thrust") {
    const AircraftConfig cfg;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double f1 = cfg.f1_max_N * u(rng), f2 = cfg.f2_max_N * u(rng);
        const ForceBreakdown t =
            thrust_forces(f1, f2, 0.4 * (u(rng) - 0.5), kHalfPi * u(rng), cfg);
        CHECK(std::hypot(t.fx_N, t.fz_N) == Approx(f1 + f2).epsilon(1e-12));
    }
}

TEST_CASE("property: the g/h split makes the thrust moment vanish at any tilt") {
    const AircraftConfig cfg;
    for (int k = 0; k <= 90; ++k) {
        const double tilt = deg2rad(k);
        const double g = cfg.g_arm(tilt), h = cfg.h_arm(tilt);
        const double total = 90e3;
        const double f1 = total * h / (g + h), f2 = total * g / (g + h);
        CHECK(std::abs(thrust_forces(f1, f2, 0.0, tilt, cfg).m_pitch_Nm) < 1e-9 * total);
    }
}

TEST_CASE("disturbance segments and half-sine gusts") {
    Disturbance d;
    d.segments = {{0.0, {1.0, 0.0, 0.0}}, {5.0, {0.0, 2.0, 0.0}}};
    d.gusts = {{10.0, 2.0, {0.0, 0.0, 100.0}}};
    CHECK(d.at(1.0).fx_N == 1.0);
    CHECK(d.at(6.0).fx_N == 0.0);
    CHECK(d.at(6.0).fz_N == 2.0);
    CHECK(d.at(11.0).m_pitch_Nm == Approx(100.0));
    CHECK(d.at(10.5).m_pitch_Nm == Approx(100.0 * std::sin(kPi / 4.0)));
    CHECK(d.at(12.5).m_pitch_Nm == 0.0);
    CHECK_FALSE(d.is_zero());
    CHECK(Disturbance{}.is_zero());
}

TEST_CASE("aircraft validation") {
    AircraftConfig cfg;
    CHECK(validate(cfg).empty());
    cfg.f2_max_N = cfg.f1_max_N;
    const auto errs = validate(cfg);
    const bool cited = std::any_of(errs.begin(), errs.end(), [](const std::string& e) {
        return e.find("thrust ratio") != std::string::npos;
    });
    CHECK(cited);

    AircraftConfig neg;
    neg.mass_kg = -1.0;
    CHECK_FALSE(validate(neg).empty());
    AircraftConfig weak;
    weak.f1_max_N = 0.5 * weak.weight_N();
    weak.f2_max_N = 0.25 * weak.weight_N();
    CHECK_FALSE(validate(weak).empty());
}
