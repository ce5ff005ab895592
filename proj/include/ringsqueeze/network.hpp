#pragma once

#include "ringsqueeze/config.hpp"

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <vector>

namespace ringsqueeze {

// The interferometric network: a waveguide side-coupled to the primary ring,
// the primary point-coupled to the auxiliary ring, and fictitious phantom
// couplers standing in for distributed loss. Between couplers the field
// propagates ballistically, so each wavenumber solves a small linear cascade.

struct Segment {
    Element element;
    double xi_start; // m, along the owning element
    double xi_end;   // m (waveguide output segment: both zero)
};

// Static geometry shared by every wavenumber: segment and port enumeration.
// Segment 0 is the waveguide output; then the primary arcs in order of their
// start site; then the auxiliary arcs. Port 0 is the real waveguide channel;
// then primary phantom channels by site; then auxiliary phantoms. The counts
// match, so the in-mode matrix is square.
struct SegmentTable {
    std::vector<Segment> segments;
    int n_primary_arcs = 0;
    int n_aux_arcs = 0;
    int size() const { return static_cast<int>(segments.size()); }
};

SegmentTable build_segments(const SystemConfig& cfg);

// Solution of the cascade at one wavenumber. H_in maps asymptotic-in mode
// coefficients to slowly varying amplitudes at the arc starts (phase
// reference beta); S is the full scattering matrix over ports (unitary,
// because phantoms close the network); H_out = H_in * S^dagger maps
// asymptotic-out coefficients to the same amplitudes.
struct LinearSolve {
    Eigen::MatrixXcd H_in;
    Eigen::MatrixXcd S;
    Eigen::MatrixXcd H_out;
};

LinearSolve solve_network(const SystemConfig& cfg, const SegmentTable& table, double k,
                          double beta);

// Commutator matrix of the local (arc) modes: C = H H^dagger.
Eigen::MatrixXcd commutator_matrix(const Eigen::MatrixXcd& H);

// Closed-form waveguide transmission for this two-ring topology; equals
// S[0,0] of the full solve.
std::complex<double> waveguide_transmission(const SystemConfig& cfg, double k);
// Closed-form through-response of the auxiliary ring seen from the primary.
std::complex<double> aux_through_response(const SystemConfig& cfg, double k);

// Everything k-resolved one bin needs downstream.
struct ModeBasis {
    Bin label = Bin::S;
    std::vector<double> k;
    std::vector<double> delta_omega;      // omega(k_i) - center_omega, rad/s
    std::vector<Eigen::MatrixXcd> H_in;   // per k
    std::vector<Eigen::MatrixXcd> H_out;  // per k
    std::vector<Eigen::MatrixXcd> S;      // per k
    std::vector<Eigen::MatrixXcd> C;      // per k, = H_in H_in^dagger
    double cond_max = 0.0;                // worst conditioning of H_in over k
};

ModeBasis build_mode_basis(const SystemConfig& cfg, const SegmentTable& table,
                           const ResonanceBin& bin);

// ------------------------------------------------------------ bin discovery

struct ResonanceFeature {
    double omega_min = 0.0;        // rad/s, refined dip position
    double transmission_min = 0.0; // |h|^2 at the dip
    double fwhm = 0.0;             // rad/s, width at half depth
};

struct BinFeatures {
    Bin label = Bin::S;
    double omega_bare = 0.0; // rad/s, decoupled primary tooth
    std::vector<ResonanceFeature> dips;
    bool split = false;
    double splitting = 0.0;      // rad/s between the split pair
    double center_chosen = 0.0;  // rad/s adopted as bin center
};

// Copy of the config with the ring-ring coupler opened (cross = 0).
SystemConfig decouple_aux(const SystemConfig& cfg);

// Locate transmission dips of |h|^2 within [omega_lo, omega_hi].
std::vector<ResonanceFeature> find_resonance_features(const SystemConfig& cfg, double omega_lo,
                                                      double omega_hi);

struct BinPolicy {
    std::array<int, 5> comb_offsets{-2, -1, 0, 1, 2}; // teeth relative to S, FSR units
    int n_k_quantum = 21;
    int n_k_pump = 121;
    double quantum_span_fwhm = 12.0; // span = this * max dip width (+ splitting)
    double pump_span_fwhm = 40.0;
    double min_pump_span_k = 0.0;    // rad/m floor for pump bins (pulse bandwidth)
};

struct BinBuildResult {
    std::vector<ResonanceBin> bins;
    std::map<Bin, BinFeatures> features;
    double fsr = 0.0;          // rad/s near the S tooth
    double omega_s_bare = 0.0; // rad/s
};

BinBuildResult build_bins(const SystemConfig& cfg, const BinPolicy& policy);

// Angular frequency of the decoupled primary comb tooth n steps from the one
// nearest omega_ref (trim offsets included); Newton on the phase condition.
double primary_tooth_omega(const SystemConfig& cfg, int n);

} // namespace ringsqueeze
