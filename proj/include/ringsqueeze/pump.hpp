#pragma once

#include "ringsqueeze/nonlinear.hpp"

#include <array>
#include <deque>

namespace ringsqueeze {

// Classical pump envelopes in the local basis, discretized on the pump bins.
// alpha[p] is n_seg x n_k; column i belongs to grid point k_i and carries the
// sqrt(dk) weight, so plain column sums build the field integrals.
struct PumpState {
    double t = 0.0;
    std::array<Eigen::MatrixXcd, 2> alpha;
};

// Advances the two pump envelopes under detuning, self-phase and pump-pump
// cross-phase modulation. Keeps references to the config and segment table;
// both must outlive the integrator.
class PumpIntegrator {
public:
    PumpIntegrator(const SystemConfig& cfg, const SegmentTable& table,
                   const std::array<ModeBasis, 2>& basis, const NonlinearTable& nl);

    // Gaussian incoming wavepackets mapped through the in-mode matrices.
    PumpState initial_state() const;

    // Per-segment field sums Sp_p(s) = sqrt(dk_p) * sum_i alpha[p](s, i);
    // the only pump quantities the quantum generator needs.
    std::array<Eigen::VectorXcd, 2> field_sums(const PumpState& st) const;

    void rhs(const PumpState& st, std::array<Eigen::MatrixXcd, 2>& out) const;

    // One time step: classic fourth-order Runge-Kutta while the multistep
    // history fills, Adams-Bashforth 4 afterwards. Changing dt mid-run
    // resets the history (and the method order briefly).
    void step(PumpState& st, double dt);
    void reset_history();

    // Exact per-bin photon number (alpha^dagger C^{-1} alpha summed over k);
    // conserved by the dynamics up to integrator error.
    double photon_number(const PumpState& st, int pump) const;
    // Photons the initial wavepacket places inside the grid.
    double injected_photons(int pump) const;
    // Photons per segment estimated from the coherent field density at the
    // segment start; the waveguide output segment has zero span.
    Eigen::VectorXd segment_occupancy(const PumpState& st, int pump) const;
    // Occupancy summed over ring segments and both pumps; the loading
    // monitor behind the automatic stop rule.
    double ring_occupancy(const PumpState& st) const;

    const std::array<ModeBasis, 2>& basis() const { return basis_; }
    const PumpPulse& pulse(int pump) const { return pulse_[pump]; }

private:
    Eigen::VectorXcd input_envelope(int pump) const; // f(k_i) on the pump grid
    Eigen::VectorXcd nonlinear_drive(const std::array<Eigen::VectorXcd, 2>& sp, int p) const;

    const SystemConfig& cfg_;
    const SegmentTable& table_;
    std::array<ModeBasis, 2> basis_;
    NonlinearTable nl_;
    std::array<PumpPulse, 2> pulse_;
    std::array<double, 2> sqrt_dk_{0.0, 0.0};
    std::array<std::vector<Eigen::MatrixXcd>, 2> cinv_; // per k: C^{-1}
    Eigen::VectorXd ring_mask_;
    std::deque<std::array<Eigen::MatrixXcd, 2>> history_;
    double last_dt_ = 0.0;
};

} // namespace ringsqueeze
