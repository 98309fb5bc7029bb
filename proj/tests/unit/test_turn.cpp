#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gen.hpp"
#include "mixtraffic/turn/merge.hpp"

using namespace mixtraffic::turn;

namespace {

// Composite Simpson quadrature of v_des (1 - exp(-phi t)).
double integrated_profile(double t, double v_des, double phi) {
    const int n = 2000;
    const double h = t / n;
    auto f = [&](double x) { return v_des * (1.0 - std::exp(-phi * x)); };
    double s = f(0.0) + f(t);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return s * h / 3.0;
}

// Full throttle from v_c capped at v_max, fine-step forward integration.
double simulated_headway(double v_c, double d_i, double u_max, double v_max) {
    const double h = 1e-5;
    double t = 0.0, s = 0.0, v = v_c;
    while (s < d_i) {
        const double v_next = std::min(v + u_max * h, v_max);
        s += 0.5 * (v + v_next) * h;
        v = v_next;
        t += h;
    }
    return t;
}

}  // namespace

TEST_CASE("position_profile") {
    CHECK(position_profile(0.0, 12.0, 0.25) == 0.0);
    const double p4 = position_profile(4.0, 12.0, 0.25);
    CHECK(p4 == doctest::Approx(17.65).epsilon(1e-3));
    CHECK(p4 == doctest::Approx(integrated_profile(4.0, 12.0, 0.25)).epsilon(1e-10));
    const double slope = (position_profile(100.0 + 1e-4, 12.0, 0.25) -
                          position_profile(100.0 - 1e-4, 12.0, 0.25)) / 2e-4;
    CHECK(std::abs(slope - 12.0) < 1e-3);
    CHECK_THROWS_AS(position_profile(-1.0, 12.0, 0.25), std::invalid_argument);
}

TEST_CASE("solve_tau_j") {
    CHECK(solve_tau_j(1e-9, 12.0, 0.25) < 1e-3);
    CHECK(solve_tau_j(position_profile(4.0, 12.0, 0.25), 12.0, 0.25) ==
          doctest::Approx(4.0).epsilon(1e-9));
    CHECK(solve_tau_j(17.65, 12.0, 0.25) == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(std::abs(solve_tau_j(1000.0, 12.0, 0.25) - (1000.0 / 12.0 + 4.0)) < 1e-2);
    CHECK_THROWS_AS(solve_tau_j(0.0, 12.0, 0.25), std::invalid_argument);
}

TEST_CASE("tau_i_headway") {
    CHECK(tau_i_headway(12.0, 0.0, 5.0, 22.0) == 0.0);
    const double t = tau_i_headway(12.0, 50.0, 5.0, 22.0);
    CHECK(t == doctest::Approx(2.0 + 16.0 / 22.0).epsilon(1e-12));
    CHECK(std::abs(t - simulated_headway(12.0, 50.0, 5.0, 22.0)) < 1e-3);
    // Threshold (484 - 144) / 10 = 34: both branches give 2 s.
    CHECK(tau_i_headway(12.0, 34.0, 5.0, 22.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(tau_i_headway(-1.0, 10.0, 5.0, 22.0), std::invalid_argument);
    CHECK_THROWS_AS(tau_i_headway(23.0, 10.0, 5.0, 22.0), std::invalid_argument);
}

TEST_CASE("can_merge") {
    CHECK(can_merge(4.0, std::nullopt, 1.5));
    CHECK_FALSE(can_merge(4.0, 2.727, 1.5));
    CHECK(can_merge(1.0, 2.727, 1.5));
    CHECK_THROWS_AS(can_merge(1.0, 2.0, -0.1), std::invalid_argument);
}

TEST_CASE("property: solve_tau_j inverts position_profile") {
    mt_test::Gen g(51);
    for (int trial = 0; trial < 500; ++trial) {
        const double tau = g.uniform(1e-3, 100.0);
        const double v_des = g.uniform(3.0, 22.0);
        const double phi = g.uniform(0.02, 1.5);
        const double d = position_profile(tau, v_des, phi);
        const double got = solve_tau_j(d, v_des, phi);
        CHECK(std::abs(got - tau) <= 1e-6);
        CHECK(std::abs(position_profile(got, v_des, phi) - d) < 1e-9 * std::max(1.0, d));
    }
}

TEST_CASE("property: tau_i_headway matches a fine-step simulation") {
    mt_test::Gen g(52);
    for (int trial = 0; trial < 50; ++trial) {
        const double v_c = g.uniform(0.0, 22.0);
        const double d_i = g.uniform(0.5, 200.0);
        CHECK(std::abs(tau_i_headway(v_c, d_i, 5.0, 22.0) -
                       simulated_headway(v_c, d_i, 5.0, 22.0)) < 1e-3);
    }
}

TEST_CASE("property: tau_i_headway is continuous at the branch threshold") {
    mt_test::Gen g(53);
    for (int trial = 0; trial < 200; ++trial) {
        const double v_c = g.uniform(0.0, 21.9);
        const double u = g.uniform(1.0, 8.0);
        const double thr = (22.0 * 22.0 - v_c * v_c) / (2.0 * u);
        const double accel_branch = (std::sqrt(v_c * v_c + 2.0 * u * thr) - v_c) / u;
        const double cruise_branch = (22.0 - v_c) / u + (thr - thr) / 22.0;
        CHECK(std::abs(accel_branch - cruise_branch) < 1e-9);
        CHECK(std::abs(tau_i_headway(v_c, thr, u, 22.0) - cruise_branch) < 1e-9);
        CHECK(std::abs(tau_i_headway(v_c, thr * (1 + 1e-12), u, 22.0) - cruise_branch) < 1e-9);
    }
}

TEST_CASE("property: tau_i_headway monotone in distance and speed") {
    mt_test::Gen g(54);
    for (int trial = 0; trial < 300; ++trial) {
        const double v_c = g.uniform(0.0, 21.0);
        const double d = g.uniform(0.5, 200.0);
        const double t = tau_i_headway(v_c, d, 5.0, 22.0);
        CHECK(tau_i_headway(v_c, d + 0.01, 5.0, 22.0) > t);
        CHECK(tau_i_headway(v_c + 0.01, d, 5.0, 22.0) < t);
    }
}
