#pragma once

#include "ringsqueeze/pump.hpp"

#include <array>
#include <vector>

namespace ringsqueeze {

// Top half of a 2n x 2n matrix with the conjugation symmetry
// [[P, Q], [conj(Q), conj(P)]]. Linear-response propagators over the
// (annihilator, creator) stack have this form and it survives products,
// so only the top blocks are stored and multiplied.
struct RsMatrix {
    Eigen::MatrixXcd P, Q;

    static RsMatrix identity(Eigen::Index n);
    Eigen::Index dim() const { return P.rows(); }
    Eigen::MatrixXcd full() const; // 2n x 2n reconstruction, for small checks
};

RsMatrix rs_product(const RsMatrix& a, const RsMatrix& b);

// Asymptotic in/out frequency-mode maps: b_out = V b_in + W b_in^dagger.
struct BogoliubovMaps {
    Eigen::MatrixXcd V, W;
};

// Largest violation of V V^dag - W W^dag = 1 and of the symmetry of V W^T.
double symplectic_residual(const BogoliubovMaps& m);

// Heisenberg propagator of the quantum trio (LI, S, RI) driven by the
// classical pumps. State vector stacks annihilators k-major: index
// (i, q, s) -> i * 3 * n_seg + q * n_seg + s over grid point i, bin q,
// segment s; creators mirror it in the bottom half, which stays implicit.
//
// Each step freezes the generator at the midpoint (pump fields and process
// phases), takes its exact exponential through the rank-collapsed series,
// and wraps it in half-steps of the linear detunings.
class QuantumPropagator {
public:
    QuantumPropagator(const SystemConfig& cfg, const SegmentTable& table,
                      const std::array<ModeBasis, 3>& trio, const NonlinearTable& nl,
                      const ProcessMask& mask);

    RsMatrix initial() const;
    void step(RsMatrix& K, const std::array<Eigen::VectorXcd, 2>& sp_mid, double t_mid,
              double dt);
    BogoliubovMaps to_out(const RsMatrix& K) const;

    int n_k() const { return n_k_; }
    int block_dim() const { return m_; } // 3 * n_seg
    Eigen::Index dim() const { return dim_; }
    const std::array<ModeBasis, 3>& trio() const { return trio_; }

    // top-half blocks of the frozen generator; exposed for verification
    void generator_top(const std::array<Eigen::VectorXcd, 2>& sp, double t,
                       Eigen::MatrixXcd& x, Eigen::MatrixXcd& y) const;
    const Eigen::MatrixXcd& c_block(int i) const { return cblk_[i]; }
    const Eigen::MatrixXcd& c_sum() const { return csum_; }
    Eigen::VectorXcd half_phases(double dt) const; // exp(-i dw dt/2) per row

private:
    void ensure_phases(double dt);
    // Ser = sum_{m>=0} dt^{m+1}/(m+1)! Gt^m for the collapsed generator
    void step_integral(double dt);

    const SystemConfig& cfg_;
    std::array<ModeBasis, 3> trio_;
    NonlinearTable nl_;
    ProcessMask mask_;
    int n_seg_ = 0, n_k_ = 0, m_ = 0;
    Eigen::Index dim_ = 0;
    std::array<double, 3> dk_{};
    std::vector<Eigen::MatrixXcd> cblk_;    // per i: blockdiag C_q(k_i)
    Eigen::MatrixXcd csum_;                 // sum_i cblk_
    std::vector<Eigen::MatrixXcd> houtinv_; // per i: blockdiag H_out^-1
    std::vector<Eigen::MatrixXcd> hin_;     // per i: blockdiag H_in
    Eigen::VectorXcd ehalf_;
    double ehalf_dt_ = 0.0;
    // step scratch
    Eigen::MatrixXcd x_, y_, gtp_, gtq_, serp_, serq_, dp_, dq_;
    Eigen::MatrixXcd zp_, zq_, zpc_, zqc_, pk_, qk_;
};

// Automatic step policy: resolve the fastest linear rotation in the quantum
// and pump grids and the shortest pump envelope.
double choose_time_step(const SystemConfig& cfg, const std::array<ModeBasis, 3>& trio,
                        const std::array<ModeBasis, 2>& pump_basis);

struct PropagationOutcome {
    RsMatrix K;         // local-basis propagator at t_end
    BogoliubovMaps out; // asymptotic maps at t_end
    int steps = 0;
    double t_end = 0.0;
    double dt = 0.0;
    double pump_photon_drift = 0.0;  // worst relative drift over the pumps
    double peak_ring_occupancy = 0.0;
};

// Advance one shared pump stream and one propagator per process mask.
// dt_override / t_final_override <= 0 defer to cfg.time, and failing that to
// the automatic policies (step bound above; stop once the ring occupancy has
// decayed to 1e-4 of its peak, capped at 25 ns).
std::vector<PropagationOutcome> co_propagate(const SystemConfig& cfg, const SegmentTable& table,
                                             const std::array<ModeBasis, 3>& trio,
                                             const std::array<ModeBasis, 2>& pump_basis,
                                             const NonlinearTable& nl,
                                             const std::vector<ProcessMask>& masks,
                                             double dt_override = 0.0,
                                             double t_final_override = 0.0);

} // namespace ringsqueeze
