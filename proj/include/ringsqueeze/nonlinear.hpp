#pragma once

#include "ringsqueeze/network.hpp"

namespace ringsqueeze {

// Quartic couplings between spectral bins. Every coupling is diagonal in the
// segment index (the four indicator modes must share an arc) and is stored as
// a per-segment vector in the bare single-quad normalization; the integer
// multiplicities below count the operator orderings that survive the
// equation-of-motion commutator and multiply the bare coupling there.

inline constexpr double mult_dp = 4.0;       // dual-pump pair creation
inline constexpr double mult_sp = 2.0;       // single-pump pair creation
inline constexpr double mult_hp = 4.0;       // hyper-parametric idler pair
inline constexpr double mult_bs = 4.0;       // signal-idler exchange
inline constexpr double mult_xpm = 4.0;      // cross-phase on generated bins
inline constexpr double mult_pump_spm = 2.0; // pump self-phase
inline constexpr double mult_pump_xpm = 4.0; // pump-pump cross-phase

// Bare coupling of one ordered quad (J1, J2 created; J3, J4 annihilated):
// lambda_s = hbar * wbar * vbar^2 * gamma_nl / (8 pi^2) *
//            integral over segment s of exp(-i dk xi) dxi,
// wbar and vbar geometric means over the four bin centers, dk the mismatch
// of the four center wavenumbers. Requires cfg.bins to be populated.
Eigen::VectorXcd quad_overlap(const SystemConfig& cfg, const SegmentTable& table,
                              const std::array<Bin, 4>& quad);

// Frequency mismatch of an ordered quad at the bin centers:
//   phase_rate = w1 + w2 - w3 - w4  (rad/s)
// The coupling term for annihilators of J1 oscillates as exp(i*phase_rate*t)
// in the per-bin rotating frames.
double quad_phase_rate(const SystemConfig& cfg, const std::array<Bin, 4>& quad);

struct NonlinearTable {
    int n_seg = 0;
    // generated-bin quads
    Eigen::VectorXcd dp;  // (S,S,P1,P2)
    Eigen::VectorXcd sp1; // (LI,S,P1,P1)
    Eigen::VectorXcd sp2; // (RI,S,P2,P2)
    Eigen::VectorXcd hp;  // (LI,RI,P1,P2)
    Eigen::VectorXcd bs1; // (LI,P2,S,P1)
    Eigen::VectorXcd bs2; // (RI,P1,S,P2)
    double rate_dp = 0.0, rate_sp1 = 0.0, rate_sp2 = 0.0;
    double rate_hp = 0.0, rate_bs1 = 0.0, rate_bs2 = 0.0;
    // phase modulation: [generated bin index over (LI,S,RI)][pump index]
    std::array<std::array<Eigen::VectorXcd, 2>, 3> xpm;
    // pump self- and cross-phase
    std::array<Eigen::VectorXcd, 2> spm;
    Eigen::VectorXcd pump_xpm; // (P1,P2,P1,P2)
};

NonlinearTable build_nonlinear_table(const SystemConfig& cfg, const SegmentTable& table);

// Masks for counterfactual twins: a process with a false flag contributes
// nothing to the quantum evolution. Pump dynamics (SPM/XPM between pumps)
// are never masked; xpm covers only the generated bins.
struct ProcessMask {
    bool dp = true;
    bool sp1 = true;
    bool sp2 = true;
    bool hp = true;
    bool bs1 = true;
    bool bs2 = true;
    bool xpm = true;

    static ProcessMask all() { return {}; }
    static ProcessMask dp_only() { return {true, false, false, false, false, false, true}; }
};

} // namespace ringsqueeze
