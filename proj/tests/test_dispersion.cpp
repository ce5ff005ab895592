#include "oracles.hpp"

#include <doctest.h>

using namespace ringsqueeze;

static DispersionModel bench_dispersion(double gvd) {
    DispersionModel d;
    d.omega_ref = units::two_pi * units::c0 / 1550e-9;
    d.v_group = 1.4944e8;
    d.k_ref = 2.0 * d.omega_ref / units::c0;
    d.gvd = gvd;
    return d;
}

TEST_CASE("forward dispersion evaluates the quadratic branch") {
    DispersionModel d = bench_dispersion(0.5e-24);
    CHECK(dispersion_k(d, d.omega_ref) == d.k_ref);
    const double dw = 3e12;
    const double expect = d.k_ref + dw / d.v_group + 0.5 * d.gvd * dw * dw;
    CHECK(dispersion_k(d, d.omega_ref + dw) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("inverse dispersion matches a bisection oracle") {
    for (double gvd : {0.0, 0.5e-24, -0.5e-24, 8e-24}) {
        DispersionModel d = bench_dispersion(gvd);
        for (double dw : {-8e12, -1e11, 0.0, 5e9, 2e12, 9e12}) {
            const double w = d.omega_ref + dw;
            const double k = dispersion_k(d, w);
            const double w_back = dispersion_omega(d, k);
            CHECK(w_back == doctest::Approx(w).epsilon(1e-12));
            const double w_oracle = oracles::bisect_omega(d, k, w - 1e10 - 1e-3 * std::abs(dw),
                                                          w + 1e10 + 1e-3 * std::abs(dw));
            CHECK(w_back == doctest::Approx(w_oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("inverse dispersion is exact-branch and rejects the far side") {
    DispersionModel d = bench_dispersion(0.5e-24);
    // turning point: dk/dw = 0 at w = omega_ref - 1/(v*gvd)
    const double w_turn = d.omega_ref - 1.0 / (d.v_group * d.gvd);
    const double k_turn = dispersion_k(d, w_turn);
    CHECK_THROWS_AS(dispersion_omega(d, k_turn - 1.0), BranchOverflow);
    CHECK_THROWS_AS(group_velocity_at(d, w_turn - 1e12), BranchOverflow);
}

TEST_CASE("group velocity matches central differences") {
    DispersionModel d = bench_dispersion(0.5e-24);
    for (double dw : {-2e12, 0.0, 2e12}) {
        const double w = d.omega_ref + dw;
        const double h = 1e9; // exact for a quadratic branch; keeps roundoff small
        const double slope = (dispersion_k(d, w + h) - dispersion_k(d, w - h)) / (2.0 * h);
        CHECK(group_velocity_at(d, w) == doctest::Approx(1.0 / slope).epsilon(1e-9));
    }
    DispersionModel flat = bench_dispersion(0.0);
    CHECK(group_velocity_at(flat, flat.omega_ref + 5e12) == doctest::Approx(flat.v_group));
}
