#include "doctest.h"

#include "oracles.hpp"
#include "ringsqueeze/propagator.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace ringsqueeze;
using oracles::make_bench_config;
using cd = std::complex<double>;

namespace {

Eigen::MatrixXcd randn_matrix(Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = cd(g(oracles::rng()), g(oracles::rng()));
    return m;
}

RsMatrix random_rs(Eigen::Index n) {
    RsMatrix k;
    k.P = randn_matrix(n, n);
    k.Q = randn_matrix(n, n);
    return k;
}

Eigen::MatrixXcd full_from(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXcd f(2 * n, 2 * n);
    f.topLeftCorner(n, n) = x;
    f.topRightCorner(n, n) = y;
    f.bottomLeftCorner(n, n) = y.conjugate();
    f.bottomRightCorner(n, n) = x.conjugate();
    return f;
}

struct QuantumRig {
    SystemConfig cfg;
    SegmentTable table;
    std::array<ModeBasis, 3> trio;
    std::array<ModeBasis, 2> pumps;
    NonlinearTable nl;
};

QuantumRig make_quantum_rig(const oracles::BenchParams& bp, int n_k_quantum, double e1_pj,
                            double e2_pj, double dur_ps, double gamma = 1.0) {
    QuantumRig r;
    r.cfg = make_bench_config(bp);
    r.cfg.gamma_nl = gamma;
    BinPolicy pol;
    pol.n_k_quantum = n_k_quantum;
    r.cfg.bins = build_bins(r.cfg, pol).bins;
    r.table = build_segments(r.cfg);
    const double dur = dur_ps * 1e-12;
    for (int p = 0; p < 2; ++p) {
        PumpPulse pu;
        pu.target = pump_bins[p];
        pu.energy = (p == 0 ? e1_pj : e2_pj) * 1e-12;
        pu.duration = dur;
        pu.center_k = r.cfg.bin(pu.target).center_k;
        pu.delay_pos = -5.0 * bp.vbar * dur;
        r.cfg.pumps.push_back(pu);
    }
    r.trio = {build_mode_basis(r.cfg, r.table, r.cfg.bin(Bin::LI)),
              build_mode_basis(r.cfg, r.table, r.cfg.bin(Bin::S)),
              build_mode_basis(r.cfg, r.table, r.cfg.bin(Bin::RI))};
    r.pumps = {build_mode_basis(r.cfg, r.table, r.cfg.bin(Bin::P1)),
               build_mode_basis(r.cfg, r.table, r.cfg.bin(Bin::P2))};
    r.nl = build_nonlinear_table(r.cfg, r.table);
    return r;
}

// Dense reference for one split step built from the same frozen generator.
Eigen::MatrixXcd dense_step_operator(const QuantumPropagator& prop,
                                     const std::array<Eigen::VectorXcd, 2>& sp, double t_mid,
                                     double dt) {
    const Eigen::Index dim = prop.dim();
    const int m = prop.block_dim();
    const int nk = prop.n_k();
    Eigen::MatrixXcd x, y;
    prop.generator_top(sp, t_mid, x, y);
    const Eigen::MatrixXcd xf = full_from(x, y);

    Eigen::MatrixXcd cf = Eigen::MatrixXcd::Zero(2 * dim, 2 * m);
    Eigen::MatrixXcd sf = Eigen::MatrixXcd::Zero(2 * m, 2 * dim);
    for (int i = 0; i < nk; ++i) {
        cf.block(i * m, 0, m, m) = prop.c_block(i);
        cf.block(dim + i * m, m, m, m) = prop.c_block(i).conjugate();
        sf.block(0, i * m, m, m) = Eigen::MatrixXcd::Identity(m, m);
        sf.block(m, dim + i * m, m, m) = Eigen::MatrixXcd::Identity(m, m);
    }
    const Eigen::MatrixXcd gt = sf * cf * xf;

    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(4 * m, 4 * m);
    big.topLeftCorner(2 * m, 2 * m) = gt * dt;
    big.block(0, 2 * m, 2 * m, 2 * m) = dt * Eigen::MatrixXcd::Identity(2 * m, 2 * m);
    const Eigen::MatrixXcd ser = big.exp().block(0, 2 * m, 2 * m, 2 * m);

    const Eigen::MatrixXcd b = cf * xf * ser * sf;
    Eigen::VectorXcd ef(2 * dim);
    ef << prop.half_phases(dt), prop.half_phases(dt).conjugate();
    return ef.asDiagonal() *
           (Eigen::MatrixXcd::Identity(2 * dim, 2 * dim) + b) * ef.asDiagonal();
}

std::array<Eigen::VectorXcd, 2> random_fields(int n_seg, double scale) {
    std::array<Eigen::VectorXcd, 2> sp{scale * randn_matrix(n_seg, 1),
                                       scale * randn_matrix(n_seg, 1)};
    return sp;
}

} // namespace

TEST_CASE("half-stored products match the reconstructed matrices") {
    for (int trial = 0; trial < 5; ++trial) {
        const RsMatrix a = random_rs(6);
        const RsMatrix b = random_rs(6);
        const RsMatrix c = rs_product(a, b);
        const Eigen::MatrixXcd ref = a.full() * b.full();
        CHECK((c.full() - ref).norm() <= 1e-12 * ref.norm());
    }
}

TEST_CASE("one split step matches the dense operator") {
    QuantumRig r = make_quantum_rig({}, 3, 0.0, 0.0, 70.0);
    QuantumPropagator prop(r.cfg, r.table, r.trio, r.nl, ProcessMask::all());

    for (const double dt : {1.0e-12, 3.0e-10}) { // second one forces the padded exponential
        const auto sp = random_fields(r.table.size(), 2.0e3);
        const double t_mid = 0.37e-9;
        RsMatrix k = random_rs(prop.dim());
        const Eigen::MatrixXcd k0 = k.full();
        prop.step(k, sp, t_mid, dt);
        const Eigen::MatrixXcd ref = dense_step_operator(prop, sp, t_mid, dt) * k0;
        CAPTURE(dt);
        CHECK((k.full() - ref).norm() <= 1e-11 * ref.norm());
    }
}

TEST_CASE("frozen generator has Hamiltonian structure") {
    QuantumRig r = make_quantum_rig({}, 3, 0.0, 0.0, 70.0);
    QuantumPropagator prop(r.cfg, r.table, r.trio, r.nl, ProcessMask::all());
    const auto sp = random_fields(r.table.size(), 1.5e3);
    Eigen::MatrixXcd x, y;
    prop.generator_top(sp, 0.8e-9, x, y);
    // i x must be Hermitian (photon exchange), y symmetric (pair creation)
    const Eigen::MatrixXcd h = cd(0.0, 1.0) * x;
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * h.cwiseAbs().maxCoeff());
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * y.cwiseAbs().maxCoeff());
}

TEST_CASE("fresh propagator maps in to out through the scattering matrix") {
    QuantumRig r = make_quantum_rig({}, 3, 0.0, 0.0, 70.0);
    QuantumPropagator prop(r.cfg, r.table, r.trio, r.nl, ProcessMask::all());
    const BogoliubovMaps maps = prop.to_out(prop.initial());
    CHECK(maps.W.cwiseAbs().maxCoeff() == 0.0);
    const int m = prop.block_dim();
    const int n = r.table.size();
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(prop.dim(), prop.dim());
    for (int i = 0; i < prop.n_k(); ++i)
        for (int q = 0; q < 3; ++q)
            expected.block(i * m + q * n, i * m + q * n, n, n) = r.trio[q].S[i];
    CHECK((maps.V - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("undriven flight keeps the propagator diagonal and unitary") {
    QuantumRig r = make_quantum_rig({}, 3, 40.0, 40.0, 70.0, 0.0); // gamma = 0
    const auto res = co_propagate(r.cfg, r.table, r.trio, r.pumps, r.nl, {ProcessMask::all()},
                                  1.0e-12, 0.3e-9);
    REQUIRE(res.size() == 1);
    const RsMatrix& k = res[0].K;
    CHECK(k.Q.cwiseAbs().maxCoeff() == 0.0);
    Eigen::MatrixXcd offdiag = k.P;
    offdiag.diagonal().setZero();
    CHECK(offdiag.cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < k.P.rows(); ++i)
        CHECK(std::abs(std::abs(k.P(i, i)) - 1.0) < 1e-12);
    // out maps reduce to a unitary
    CHECK(res[0].out.W.cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXcd vv = res[0].out.V * res[0].out.V.adjoint();
    CHECK((vv - Eigen::MatrixXcd::Identity(vv.rows(), vv.cols())).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("driven flight stays symplectic and confines pairs to the allowed bins") {
    QuantumRig r = make_quantum_rig({}, 5, 100.0, 100.0, 70.0);
    const auto res = co_propagate(r.cfg, r.table, r.trio, r.pumps, r.nl,
                                  {ProcessMask::all(), ProcessMask::dp_only()}, 0.0, 1.2e-9);
    REQUIRE(res.size() == 2);
    for (const auto& o : res) {
        CHECK(o.pump_photon_drift < 1e-4);
        CHECK(o.peak_ring_occupancy > 0.0);
        CHECK(o.out.W.cwiseAbs().maxCoeff() > 1e-4); // pairs were produced
        CHECK(symplectic_residual(o.out) < 1e-8);
    }
    // with only the dual-pump process, every pair involves the S bin alone
    const Eigen::MatrixXcd& w = res[1].out.W;
    const int m = 3 * r.table.size();
    const int n = r.table.size();
    double leak = 0.0;
    for (int i = 0; i < res[1].K.dim() / m; ++i)
        for (int q = 0; q < 3; q += 2) {
            leak = std::max(leak, w.middleRows(i * m + q * n, n).cwiseAbs().maxCoeff());
            leak = std::max(leak, w.middleCols(i * m + q * n, n).cwiseAbs().maxCoeff());
        }
    CHECK(leak < 1e-12 * w.cwiseAbs().maxCoeff());

    // the local propagator preserves the graded commutation metric
    const RsMatrix& k = res[0].K;
    const Eigen::Index dim = k.dim();
    Eigen::MatrixXcd metric = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
    QuantumPropagator probe(r.cfg, r.table, r.trio, r.nl, ProcessMask::all());
    for (int i = 0; i < probe.n_k(); ++i) {
        metric.block(i * m, i * m, m, m) = probe.c_block(i);
        metric.block(dim + i * m, dim + i * m, m, m) = -probe.c_block(i).conjugate();
    }
    const Eigen::MatrixXcd kf = k.full();
    const Eigen::MatrixXcd res_metric = kf * metric * kf.adjoint() - metric;
    CHECK(res_metric.cwiseAbs().maxCoeff() <= 1e-8 * metric.cwiseAbs().maxCoeff());
}

TEST_CASE("step error shrinks at second order") {
    QuantumRig r = make_quantum_rig({}, 3, 100.0, 100.0, 70.0);
    auto observable = [&](double dt) {
        const auto res = co_propagate(r.cfg, r.table, r.trio, r.pumps, r.nl,
                                      {ProcessMask::all()}, dt, 0.8e-9);
        return res[0].out.W.squaredNorm();
    };
    const double n1 = observable(2.8e-12);
    const double n2 = observable(1.4e-12);
    const double n3 = observable(0.7e-12);
    REQUIRE(n3 > 0.0);
    const double order = std::log2(std::abs(n1 - n2) / std::abs(n2 - n3));
    CHECK(order > 1.5);
    CHECK(order < 2.7);
}

TEST_CASE("automatic step policy respects every bound") {
    QuantumRig r = make_quantum_rig({}, 5, 100.0, 100.0, 70.0);
    const double dt = choose_time_step(r.cfg, r.trio, r.pumps);
    REQUIRE(dt > 0.0);
    double wq = 0.0, wp = 0.0;
    for (const auto& b : r.trio)
        for (double w : b.delta_omega) wq = std::max(wq, std::abs(w));
    for (const auto& b : r.pumps)
        for (double w : b.delta_omega) wp = std::max(wp, std::abs(w));
    CHECK(dt <= 1.0 / (40.0 * wq) + 1e-18);
    CHECK(dt <= 1.0 / (15.0 * wp) + 1e-18);
    CHECK(dt <= 70.0e-12 / 40.0 + 1e-18);
}

TEST_CASE("auto stop needs pump light") {
    QuantumRig r = make_quantum_rig({}, 3, 0.0, 0.0, 70.0);
    CHECK_THROWS_AS(co_propagate(r.cfg, r.table, r.trio, r.pumps, r.nl, {ProcessMask::all()}),
                    ConfigError);
}
