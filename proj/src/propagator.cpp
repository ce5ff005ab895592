#include "ringsqueeze/propagator.hpp"
#include "ringsqueeze/units.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace ringsqueeze {

using cd = std::complex<double>;
static const cd im{0.0, 1.0};

RsMatrix RsMatrix::identity(Eigen::Index n) {
    RsMatrix k;
    k.P = Eigen::MatrixXcd::Identity(n, n);
    k.Q = Eigen::MatrixXcd::Zero(n, n);
    return k;
}

Eigen::MatrixXcd RsMatrix::full() const {
    const Eigen::Index n = dim();
    Eigen::MatrixXcd f(2 * n, 2 * n);
    f.topLeftCorner(n, n) = P;
    f.topRightCorner(n, n) = Q;
    f.bottomLeftCorner(n, n) = Q.conjugate();
    f.bottomRightCorner(n, n) = P.conjugate();
    return f;
}

RsMatrix rs_product(const RsMatrix& a, const RsMatrix& b) {
    RsMatrix c;
    c.P.noalias() = a.P * b.P;
    c.P.noalias() += a.Q * b.Q.conjugate();
    c.Q.noalias() = a.P * b.Q;
    c.Q.noalias() += a.Q * b.P.conjugate();
    return c;
}

double symplectic_residual(const BogoliubovMaps& m) {
    const Eigen::Index n = m.V.rows();
    const Eigen::MatrixXcd unit =
        m.V * m.V.adjoint() - m.W * m.W.adjoint() - Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd pair = m.V * m.W.transpose();
    const double r1 = unit.cwiseAbs().maxCoeff();
    const double r2 = (pair - pair.transpose()).cwiseAbs().maxCoeff();
    return std::max(r1, r2);
}

QuantumPropagator::QuantumPropagator(const SystemConfig& cfg, const SegmentTable& table,
                                     const std::array<ModeBasis, 3>& trio,
                                     const NonlinearTable& nl, const ProcessMask& mask)
    : cfg_(cfg), trio_(trio), nl_(nl), mask_(mask) {
    n_seg_ = table.size();
    if (nl_.n_seg != n_seg_) throw Error("coupling table does not match the segment table");
    for (int q = 0; q < 3; ++q) {
        if (trio_[q].label != quantum_bins[q])
            throw Error("quantum mode bases must be ordered LI, S, RI");
        dk_[q] = cfg.bin(quantum_bins[q]).dk;
    }
    n_k_ = static_cast<int>(trio_[0].k.size());
    for (const auto& b : trio_)
        if (static_cast<int>(b.k.size()) != n_k_)
            throw Error("quantum bins must share one grid size");
    m_ = 3 * n_seg_;
    dim_ = static_cast<Eigen::Index>(n_k_) * m_;

    cblk_.resize(n_k_);
    houtinv_.resize(n_k_);
    hin_.resize(n_k_);
    csum_ = Eigen::MatrixXcd::Zero(m_, m_);
    for (int i = 0; i < n_k_; ++i) {
        cblk_[i] = Eigen::MatrixXcd::Zero(m_, m_);
        houtinv_[i] = Eigen::MatrixXcd::Zero(m_, m_);
        hin_[i] = Eigen::MatrixXcd::Zero(m_, m_);
        for (int q = 0; q < 3; ++q) {
            const auto blk = Eigen::seqN(q * n_seg_, n_seg_);
            cblk_[i](blk, blk) = trio_[q].C[i];
            hin_[i](blk, blk) = trio_[q].H_in[i];
            houtinv_[i](blk, blk) = trio_[q].H_out[i].partialPivLu().solve(
                Eigen::MatrixXcd::Identity(n_seg_, n_seg_));
        }
        csum_ += cblk_[i];
    }

    x_.resize(m_, m_);
    y_.resize(m_, m_);
    gtp_.resize(m_, m_);
    gtq_.resize(m_, m_);
    serp_.resize(m_, m_);
    serq_.resize(m_, m_);
    dp_.resize(m_, m_);
    dq_.resize(m_, m_);
    pk_.resize(m_, m_);
    qk_.resize(m_, m_);
    zp_.resize(m_, dim_);
    zq_.resize(m_, dim_);
    zpc_.resize(m_, dim_);
    zqc_.resize(m_, dim_);
}

RsMatrix QuantumPropagator::initial() const { return RsMatrix::identity(dim_); }

Eigen::VectorXcd QuantumPropagator::half_phases(double dt) const {
    Eigen::VectorXcd e(dim_);
    for (int i = 0; i < n_k_; ++i)
        for (int q = 0; q < 3; ++q) {
            const cd ph = std::exp(cd(0.0, -0.5 * trio_[q].delta_omega[i] * dt));
            for (int s = 0; s < n_seg_; ++s) e[i * m_ + q * n_seg_ + s] = ph;
        }
    return e;
}

void QuantumPropagator::ensure_phases(double dt) {
    if (dt == ehalf_dt_ && ehalf_.size() == dim_) return;
    ehalf_ = half_phases(dt);
    ehalf_dt_ = dt;
}

void QuantumPropagator::generator_top(const std::array<Eigen::VectorXcd, 2>& sp, double t,
                                      Eigen::MatrixXcd& x, Eigen::MatrixXcd& y) const {
    x = Eigen::MatrixXcd::Zero(m_, m_);
    y = Eigen::MatrixXcd::Zero(m_, m_);
    const int n = n_seg_;
    const auto sdk = [&](int qa, int qb) { return std::sqrt(dk_[qa] * dk_[qb]); };
    const Eigen::VectorXcd& p1 = sp[0];
    const Eigen::VectorXcd& p2 = sp[1];

    for (int s = 0; s < n; ++s) {
        const double n1 = std::norm(p1[s]);
        const double n2 = std::norm(p2[s]);
        if (mask_.xpm) {
            for (int q = 0; q < 3; ++q)
                x(q * n + s, q * n + s) +=
                    im * mult_xpm * (nl_.xpm[q][0][s] * n1 + nl_.xpm[q][1][s] * n2) * dk_[q];
        }
        if (mask_.bs1) {
            const cd g = mult_bs * nl_.bs1[s] * std::conj(p2[s]) * p1[s] *
                         std::exp(im * nl_.rate_bs1 * t) * sdk(0, 1);
            x(0 * n + s, 1 * n + s) += im * g;
            x(1 * n + s, 0 * n + s) += im * std::conj(g);
        }
        if (mask_.bs2) {
            const cd g = mult_bs * nl_.bs2[s] * std::conj(p1[s]) * p2[s] *
                         std::exp(im * nl_.rate_bs2 * t) * sdk(2, 1);
            x(2 * n + s, 1 * n + s) += im * g;
            x(1 * n + s, 2 * n + s) += im * std::conj(g);
        }
        if (mask_.dp)
            y(1 * n + s, 1 * n + s) +=
                im * mult_dp * nl_.dp[s] * p1[s] * p2[s] * std::exp(im * nl_.rate_dp * t) * dk_[1];
        if (mask_.sp1) {
            const cd g = im * mult_sp * nl_.sp1[s] * p1[s] * p1[s] *
                         std::exp(im * nl_.rate_sp1 * t) * sdk(0, 1);
            y(0 * n + s, 1 * n + s) += g;
            y(1 * n + s, 0 * n + s) += g;
        }
        if (mask_.sp2) {
            const cd g = im * mult_sp * nl_.sp2[s] * p2[s] * p2[s] *
                         std::exp(im * nl_.rate_sp2 * t) * sdk(2, 1);
            y(2 * n + s, 1 * n + s) += g;
            y(1 * n + s, 2 * n + s) += g;
        }
        if (mask_.hp) {
            const cd g = im * mult_hp * nl_.hp[s] * p1[s] * p2[s] *
                         std::exp(im * nl_.rate_hp * t) * sdk(0, 2);
            y(0 * n + s, 2 * n + s) += g;
            y(2 * n + s, 0 * n + s) += g;
        }
    }
}

void QuantumPropagator::step_integral(double dt) {
    // collapsed generator norm decides between the series and the padded
    // exponential; both give the exact flow of the frozen generator
    const double norm = (gtp_.cwiseAbs().rowwise().sum() + gtq_.cwiseAbs().rowwise().sum())
                            .maxCoeff();
    if (norm * dt < 0.25) {
        serp_ = dt * Eigen::MatrixXcd::Identity(m_, m_);
        serq_ = Eigen::MatrixXcd::Zero(m_, m_);
        Eigen::MatrixXcd tp = serp_, tq = serq_, np(m_, m_), nq(m_, m_);
        bool converged = false;
        for (int n = 1; n <= 30; ++n) {
            const double f = dt / (n + 1);
            np.noalias() = tp * gtp_;
            np.noalias() += tq * gtq_.conjugate();
            nq.noalias() = tp * gtq_;
            nq.noalias() += tq * gtp_.conjugate();
            tp = f * np;
            tq = f * nq;
            serp_ += tp;
            serq_ += tq;
            if (tp.norm() + tq.norm() < 1e-14 * (serp_.norm() + serq_.norm())) {
                converged = true;
                break;
            }
        }
        if (!converged) throw SeriesDiverged("step integral series did not settle");
        return;
    }
    // pad [[G, I], [0, 0]] so the exponential carries int_0^dt exp(G tau)
    const int f = 2 * m_;
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(2 * f, 2 * f);
    big.topLeftCorner(m_, m_) = gtp_;
    big.block(0, m_, m_, m_) = gtq_;
    big.block(m_, 0, m_, m_) = gtq_.conjugate();
    big.block(m_, m_, m_, m_) = gtp_.conjugate();
    big.topLeftCorner(f, f) *= dt;
    big.block(0, f, f, f) = dt * Eigen::MatrixXcd::Identity(f, f);
    const Eigen::MatrixXcd e = big.exp();
    serp_ = e.block(0, f, m_, m_);
    serq_ = e.block(0, f + m_, m_, m_);
}

void QuantumPropagator::step(RsMatrix& K, const std::array<Eigen::VectorXcd, 2>& sp_mid,
                             double t_mid, double dt) {
    if (!(dt > 0.0)) throw Error("propagator step must be positive");
    ensure_phases(dt);
    generator_top(sp_mid, t_mid, x_, y_);

    const bool quiet = x_.isZero(0.0) && y_.isZero(0.0);
    if (quiet) {
        // no drive: the whole step is the linear rotation
        K.P.array().colwise() *= ehalf_.array().square();
        K.Q.array().colwise() *= ehalf_.array().square();
        return;
    }

    gtp_.noalias() = csum_ * x_;
    gtq_.noalias() = csum_ * y_;
    step_integral(dt);
    dp_.noalias() = x_ * serp_;
    dp_.noalias() += y_ * serq_.conjugate();
    dq_.noalias() = x_ * serq_;
    dq_.noalias() += y_ * serp_.conjugate();

    K.P.array().colwise() *= ehalf_.array();
    K.Q.array().colwise() *= ehalf_.array();

    zp_.setZero();
    zq_.setZero();
    for (int i = 0; i < n_k_; ++i) {
        zp_ += K.P.middleRows(static_cast<Eigen::Index>(i) * m_, m_);
        zq_ += K.Q.middleRows(static_cast<Eigen::Index>(i) * m_, m_);
    }
    zpc_ = zp_.conjugate();
    zqc_ = zq_.conjugate();
    for (int i = 0; i < n_k_; ++i) {
        pk_.noalias() = cblk_[i] * dp_;
        qk_.noalias() = cblk_[i] * dq_;
        auto rp = K.P.middleRows(static_cast<Eigen::Index>(i) * m_, m_);
        auto rq = K.Q.middleRows(static_cast<Eigen::Index>(i) * m_, m_);
        rp.noalias() += pk_ * zp_;
        rp.noalias() += qk_ * zqc_;
        rq.noalias() += pk_ * zq_;
        rq.noalias() += qk_ * zpc_;
    }

    K.P.array().colwise() *= ehalf_.array();
    K.Q.array().colwise() *= ehalf_.array();
}

BogoliubovMaps QuantumPropagator::to_out(const RsMatrix& K) const {
    BogoliubovMaps out;
    out.V = K.P;
    out.W = K.Q;
    for (int i = 0; i < n_k_; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i) * m_;
        out.V.middleRows(r, m_) = (houtinv_[i] * out.V.middleRows(r, m_)).eval();
        out.W.middleRows(r, m_) = (houtinv_[i] * out.W.middleRows(r, m_)).eval();
    }
    for (int j = 0; j < n_k_; ++j) {
        const Eigen::Index c = static_cast<Eigen::Index>(j) * m_;
        out.V.middleCols(c, m_) = (out.V.middleCols(c, m_) * hin_[j]).eval();
        out.W.middleCols(c, m_) = (out.W.middleCols(c, m_) * hin_[j].conjugate()).eval();
    }
    return out;
}

double choose_time_step(const SystemConfig& cfg, const std::array<ModeBasis, 3>& trio,
                        const std::array<ModeBasis, 2>& pump_basis) {
    double wq = 0.0, wp = 0.0;
    for (const auto& b : trio)
        for (const double w : b.delta_omega) wq = std::max(wq, std::abs(w));
    for (const auto& b : pump_basis)
        for (const double w : b.delta_omega) wp = std::max(wp, std::abs(w));
    double dt = std::numeric_limits<double>::infinity();
    if (wq > 0.0) dt = std::min(dt, 1.0 / (40.0 * wq));
    if (wp > 0.0) dt = std::min(dt, 1.0 / (15.0 * wp));
    for (const PumpPulse& pu : cfg.pumps)
        if (pu.energy > 0.0 && pu.duration > 0.0) dt = std::min(dt, pu.duration / 40.0);
    if (!std::isfinite(dt)) throw Error("cannot infer a time step from flat grids");
    return dt;
}

std::vector<PropagationOutcome> co_propagate(const SystemConfig& cfg, const SegmentTable& table,
                                             const std::array<ModeBasis, 3>& trio,
                                             const std::array<ModeBasis, 2>& pump_basis,
                                             const NonlinearTable& nl,
                                             const std::vector<ProcessMask>& masks,
                                             double dt_override, double t_final_override) {
    PumpIntegrator pump(cfg, table, pump_basis, nl);
    PumpState ps = pump.initial_state();

    double dt = dt_override > 0.0 ? dt_override : cfg.time.dt;
    if (dt <= 0.0) dt = choose_time_step(cfg, trio, pump_basis);
    double t_final = t_final_override > 0.0 ? t_final_override : cfg.time.t_final;
    const bool auto_stop = t_final <= 0.0;
    if (auto_stop) {
        if (pump.injected_photons(0) + pump.injected_photons(1) <= 0.0)
            throw ConfigError("the decay stop rule needs pump light; set t_final");
        t_final = cfg.time.t0 + 25e-9; // cap
    }

    std::vector<QuantumPropagator> props;
    std::vector<PropagationOutcome> out(masks.size());
    props.reserve(masks.size());
    for (std::size_t j = 0; j < masks.size(); ++j) {
        props.emplace_back(cfg, table, trio, nl, masks[j]);
        out[j].K = props[j].initial();
        out[j].dt = dt;
    }

    const double n0[2] = {pump.photon_number(ps, 0), pump.photon_number(ps, 1)};
    auto sp_prev = pump.field_sums(ps);
    const long max_steps = static_cast<long>(std::ceil((t_final - cfg.time.t0) / dt));
    double peak = 0.0;
    long n = 0;
    for (; n < max_steps; ++n) {
        const double t = cfg.time.t0 + n * dt;
        pump.step(ps, dt);
        const auto sp_now = pump.field_sums(ps);
        const std::array<Eigen::VectorXcd, 2> sp_mid{0.5 * (sp_prev[0] + sp_now[0]),
                                                     0.5 * (sp_prev[1] + sp_now[1])};
        for (std::size_t j = 0; j < masks.size(); ++j)
            props[j].step(out[j].K, sp_mid, t + 0.5 * dt, dt);
        sp_prev = sp_now;

        if (n % 64 == 0)
            for (auto& o : out)
                if (!o.K.P.allFinite() || !o.K.Q.allFinite())
                    throw StepUnstable("quantum propagation diverged");

        const double occ = pump.ring_occupancy(ps);
        peak = std::max(peak, occ);
        if (auto_stop && peak > 0.0 && occ < 1e-4 * peak) {
            ++n;
            break;
        }
    }

    double drift = 0.0;
    for (int p = 0; p < 2; ++p)
        if (n0[p] > 0.0) drift = std::max(drift, std::abs(pump.photon_number(ps, p) / n0[p] - 1.0));
    for (std::size_t j = 0; j < masks.size(); ++j) {
        out[j].steps = static_cast<int>(n);
        out[j].t_end = cfg.time.t0 + n * dt;
        out[j].pump_photon_drift = drift;
        out[j].peak_ring_occupancy = peak;
        out[j].out = props[j].to_out(out[j].K);
    }
    return out;
}

} // namespace ringsqueeze
