#include "doctest.h"

#include "oracles.hpp"
#include "ringsqueeze/nonlinear.hpp"

#include <array>
#include <cmath>
#include <complex>

using namespace ringsqueeze;
using oracles::make_bench_config;
using oracles::simpson;
using cd = std::complex<double>;

namespace {

// Bench config with bins discovered from the transmission spectrum.
SystemConfig binned_bench(const oracles::BenchParams& p, const BinPolicy& policy) {
    SystemConfig cfg = make_bench_config(p);
    cfg.bins = build_bins(cfg, policy).bins;
    return cfg;
}

// Replace the discovered bins by five bins sharing one frequency but with
// hand-picked wavenumber offsets; exercises the oscillatory integrals with
// order-one phase across an arc.
void plant_irregular_bins(SystemConfig& cfg, const std::array<double, 5>& k_offsets) {
    const double w0 = cfg.dispersion.omega_ref;
    const double k0 = dispersion_k(cfg.dispersion, w0);
    cfg.bins.clear();
    for (int i = 0; i < 5; ++i) {
        ResonanceBin b;
        b.label = all_bins[i];
        b.center_omega = w0;
        b.center_k = k0 + k_offsets[i];
        b.span_omega = 1.0;
        b.n_k = 1;
        b.dk = 1.0;
        cfg.bins.push_back(b);
    }
}

double quad_mismatch(const SystemConfig& cfg, const std::array<Bin, 4>& quad) {
    return cfg.bin(quad[0]).center_k + cfg.bin(quad[1]).center_k -
           cfg.bin(quad[2]).center_k - cfg.bin(quad[3]).center_k;
}

double quad_scale(const SystemConfig& cfg, const std::array<Bin, 4>& quad) {
    double wprod = 1.0, vprod = 1.0;
    for (const Bin b : quad) {
        wprod *= cfg.bin(b).center_omega;
        vprod *= group_velocity_at(cfg.dispersion, cfg.bin(b).center_omega);
    }
    const double wbar = std::pow(wprod, 0.25);
    const double vbar = std::pow(vprod, 0.25);
    return units::hbar * wbar * vbar * vbar * cfg.gamma_nl / (8.0 * units::pi * units::pi);
}

void check_against_quadrature(const SystemConfig& cfg, const SegmentTable& table,
                              const std::array<Bin, 4>& quad, double rel_tol) {
    const Eigen::VectorXcd lam = quad_overlap(cfg, table, quad);
    const double dk = quad_mismatch(cfg, quad);
    const double scale = quad_scale(cfg, quad);
    for (int s = 0; s < table.size(); ++s) {
        const Segment& seg = table.segments[s];
        cd expected = 0.0;
        if (seg.element != Element::waveguide) {
            expected = scale * simpson([&](double xi) { return std::exp(cd(0.0, -dk * xi)); },
                                       seg.xi_start, seg.xi_end);
        }
        const double mag = std::max(std::abs(expected), scale * 1e-6);
        CAPTURE(s);
        CHECK(std::abs(lam[s] - expected) <= rel_tol * mag);
    }
}

const std::array<std::array<Bin, 4>, 9> probe_quads{{
    {Bin::S, Bin::S, Bin::P1, Bin::P2},
    {Bin::LI, Bin::S, Bin::P1, Bin::P1},
    {Bin::RI, Bin::S, Bin::P2, Bin::P2},
    {Bin::LI, Bin::RI, Bin::P1, Bin::P2},
    {Bin::LI, Bin::P2, Bin::S, Bin::P1},
    {Bin::RI, Bin::P1, Bin::S, Bin::P2},
    {Bin::S, Bin::P1, Bin::S, Bin::P1},
    {Bin::P1, Bin::P1, Bin::P1, Bin::P1},
    {Bin::P1, Bin::P2, Bin::P1, Bin::P2},
}};

} // namespace

TEST_CASE("quad overlaps match adaptive quadrature on an irregular comb") {
    SystemConfig cfg = make_bench_config();
    const SegmentTable table = build_segments(cfg);
    // offsets give |dk * arc| of order one for the mixed quads
    plant_irregular_bins(cfg, {-8.3e4, -4.1e4, 1.7e3, 3.9e4, 8.9e4});
    for (const auto& quad : probe_quads) {
        CAPTURE(static_cast<int>(quad[0]));
        check_against_quadrature(cfg, table, quad, 1e-9);
    }
}

TEST_CASE("small-mismatch branch agrees with quadrature on both sides") {
    SystemConfig cfg = make_bench_config();
    const SegmentTable table = build_segments(cfg);
    const double arc = cfg.primary.length / cfg.primary.n_phantom;
    // dual-pump mismatch 2 kS - kP1 - kP2 equals twice the S offset here
    for (const double eps : {0.4e-8 / arc, 4.0e-8 / arc}) {
        plant_irregular_bins(cfg, {0.0, 0.0, 0.5 * eps, 0.0, 0.0});
        CAPTURE(eps);
        check_against_quadrature(cfg, table, {Bin::S, Bin::S, Bin::P1, Bin::P2}, 2e-9);
    }
}

TEST_CASE("decoupled comb is exactly phase matched") {
    // bare comb teeth are uniform in wavenumber, so every quad mismatch
    // cancels and the couplings are real and positive on every ring arc
    oracles::BenchParams p;
    p.kappa_aux = 0.0;
    SystemConfig cfg = binned_bench(p, BinPolicy{});
    const SegmentTable table = build_segments(cfg);
    for (const auto& quad : probe_quads) {
        const Eigen::VectorXcd lam = quad_overlap(cfg, table, quad);
        for (int s = 1; s < table.size(); ++s) {
            CHECK(lam[s].real() > 0.0);
            CHECK(std::abs(lam[s].imag()) <= 1e-6 * lam[s].real());
        }
    }
}

TEST_CASE("coupled comb stays nearly phase matched") {
    // aux pulling shifts the dips a little off the uniform comb; the
    // couplings pick up only a small phase
    SystemConfig cfg = binned_bench({}, BinPolicy{});
    const SegmentTable table = build_segments(cfg);
    const NonlinearTable t = build_nonlinear_table(cfg, table);
    for (const Eigen::VectorXcd* lam : {&t.dp, &t.hp, &t.bs1, &t.bs2, &t.sp1, &t.sp2}) {
        for (int s = 1; s < t.n_seg; ++s) {
            CHECK(std::abs(std::arg((*lam)[s])) < 1e-2);
        }
    }
}

TEST_CASE("reversing a quad conjugates it and pair order is irrelevant") {
    SystemConfig cfg = make_bench_config();
    const SegmentTable table = build_segments(cfg);
    plant_irregular_bins(cfg, {-8.3e4, -4.1e4, 1.7e3, 3.9e4, 8.9e4});

    const std::array<Bin, 4> quad{Bin::LI, Bin::P2, Bin::S, Bin::P1};
    const Eigen::VectorXcd fwd = quad_overlap(cfg, table, quad);
    const Eigen::VectorXcd rev = quad_overlap(cfg, table, {quad[2], quad[3], quad[0], quad[1]});
    const Eigen::VectorXcd swap12 = quad_overlap(cfg, table, {quad[1], quad[0], quad[2], quad[3]});
    const Eigen::VectorXcd swap34 = quad_overlap(cfg, table, {quad[0], quad[1], quad[3], quad[2]});
    for (int s = 0; s < table.size(); ++s) {
        CHECK(std::abs(rev[s] - std::conj(fwd[s])) <= 1e-14 * std::abs(fwd[s]) + 1e-30);
        CHECK(swap12[s] == fwd[s]);
        CHECK(swap34[s] == fwd[s]);
    }
}

TEST_CASE("waveguide segment carries no coupling") {
    SystemConfig cfg = binned_bench({}, BinPolicy{});
    const SegmentTable table = build_segments(cfg);
    const NonlinearTable t = build_nonlinear_table(cfg, table);
    CHECK(t.dp[0] == cd(0.0, 0.0));
    CHECK(t.spm[0][0] == cd(0.0, 0.0));
    CHECK(t.xpm[1][0][0] == cd(0.0, 0.0));
    CHECK(t.pump_xpm[0] == cd(0.0, 0.0));
    // and the ring arcs all do carry one
    for (int s = 1; s < t.n_seg; ++s) CHECK(std::abs(t.dp[s]) > 0.0);
}

TEST_CASE("table wiring matches the constituent quads") {
    SystemConfig cfg = binned_bench({}, BinPolicy{});
    const SegmentTable table = build_segments(cfg);
    const NonlinearTable t = build_nonlinear_table(cfg, table);
    CHECK(t.n_seg == table.size());
    CHECK(t.dp == quad_overlap(cfg, table, {Bin::S, Bin::S, Bin::P1, Bin::P2}));
    CHECK(t.bs2 == quad_overlap(cfg, table, {Bin::RI, Bin::P1, Bin::S, Bin::P2}));
    CHECK(t.xpm[0][1] == quad_overlap(cfg, table, {Bin::LI, Bin::P2, Bin::LI, Bin::P2}));
    CHECK(t.spm[1] == quad_overlap(cfg, table, {Bin::P2, Bin::P2, Bin::P2, Bin::P2}));
    CHECK(t.rate_dp == quad_phase_rate(cfg, {Bin::S, Bin::S, Bin::P1, Bin::P2}));
    CHECK(t.rate_bs1 == quad_phase_rate(cfg, {Bin::LI, Bin::P2, Bin::S, Bin::P1}));
}

TEST_CASE("phase-modulation rates vanish and rate identities hold") {
    SystemConfig cfg = binned_bench({}, BinPolicy{});
    // frequencies are ~1e15 rad/s; anything at rounding scale is zero here
    const double eps = 1.0;
    for (const Bin q : quantum_bins)
        for (const Bin p : pump_bins)
            CHECK(std::abs(quad_phase_rate(cfg, {q, p, q, p})) < eps);
    CHECK(std::abs(quad_phase_rate(cfg, {Bin::P1, Bin::P1, Bin::P1, Bin::P1})) < eps);
    CHECK(std::abs(quad_phase_rate(cfg, {Bin::P1, Bin::P2, Bin::P1, Bin::P2})) < eps);

    const SegmentTable table = build_segments(cfg);
    const NonlinearTable t = build_nonlinear_table(cfg, table);
    // both sides count the same photon imbalance, so they must agree up to
    // rounding of the ~1e15 rad/s bin frequencies
    CHECK(std::abs((t.rate_dp + t.rate_hp) - (t.rate_sp1 + t.rate_sp2)) < 2.0);
    CHECK(std::abs((t.rate_bs1 + t.rate_bs2) - (t.rate_hp - t.rate_dp)) < 2.0);
}

TEST_CASE("comb curvature sets the pair-creation rate") {
    oracles::BenchParams p;
    p.kappa_aux = 0.0;
    p.gvd = 0.5e-24; // s^2/m
    BinPolicy policy;
    policy.comb_offsets = {-10, -5, 0, 5, 10};
    SystemConfig cfg = binned_bench(p, policy);

    // teeth are uniform in wavenumber even with curvature
    const double dk_dp = quad_mismatch(cfg, {Bin::S, Bin::S, Bin::P1, Bin::P2});
    CHECK(std::abs(dk_dp) < 0.05);

    // quadratic dispersion turns uniform wavenumbers into a curved comb:
    // 2 wS - wP1 - wP2 = gvd * v^3 * (5 * 2 pi / L)^2 to leading order
    const double v = group_velocity_at(cfg.dispersion, cfg.bin(Bin::S).center_omega);
    const double dk_tooth = 5.0 * units::two_pi / cfg.primary.length;
    const double expected = p.gvd * v * v * v * dk_tooth * dk_tooth;
    const double rate = quad_phase_rate(cfg, {Bin::S, Bin::S, Bin::P1, Bin::P2});
    CHECK(rate > 0.0);
    CHECK(rate == doctest::Approx(expected).epsilon(5e-3));

    // outer pair sits twice as far out, so four times the curvature penalty
    const double rate_outer = quad_phase_rate(cfg, {Bin::S, Bin::S, Bin::LI, Bin::RI});
    CHECK(rate_outer == doctest::Approx(4.0 * rate).epsilon(2e-2));
}
