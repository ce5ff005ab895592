#pragma once

#include "ringsqueeze/dispersion.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ringsqueeze {

// Spectral bin labels, ordered by center frequency.
enum class Bin { LI = 0, P1 = 1, S = 2, P2 = 3, RI = 4 };

constexpr std::array<Bin, 5> all_bins{Bin::LI, Bin::P1, Bin::S, Bin::P2, Bin::RI};
constexpr std::array<Bin, 3> quantum_bins{Bin::LI, Bin::S, Bin::RI};
constexpr std::array<Bin, 2> pump_bins{Bin::P1, Bin::P2};

const char* bin_name(Bin b);
Bin bin_from_name(const std::string& name);
inline bool is_pump_bin(Bin b) { return b == Bin::P1 || b == Bin::P2; }

enum class Element { waveguide = 0, primary = 1, auxiliary = 2 };
const char* element_name(Element e);
Element element_from_name(const std::string& name);

struct RingSpec {
    Element label = Element::primary;
    double length = 0.0;                 // m
    double round_trip_attenuation = 1.0; // net field factor per round trip
    int n_phantom = 1;
    // Per-phantom field self-couplings; empty means uniform factors whose
    // product equals round_trip_attenuation.
    std::vector<double> phantom_self_couplings;
    // Phantom positions along the ring (m from the ring's first physical
    // coupler); empty means evenly spaced starting at 0.
    std::vector<double> phantom_positions;
    // Extra round-trip phase (rad) added to k*length; trims resonance comb.
    double phase_offset = 0.0;

    std::vector<double> resolved_self_couplings() const;
    std::vector<double> resolved_positions() const;
};

struct CouplerEndpoint {
    Element element = Element::waveguide;
    double position = 0.0; // m along that element
};

struct CouplerSpec {
    double self_coupling = 1.0;  // field through-amplitude
    double cross_coupling = 0.0; // field cross-amplitude
    CouplerEndpoint a, b;
};

struct ResonanceBin {
    Bin label = Bin::S;
    double center_omega = 0.0; // rad/s
    double center_k = 0.0;     // rad/m
    double span_omega = 0.0;   // rad/s, full width covered by the grid
    int n_k = 1;               // odd
    double dk = 0.0;           // rad/m grid pitch

    // Grid point i in [0, n_k): k_i = center_k + (i - (n_k-1)/2) * dk
    double k_at(int i) const { return center_k + (i - 0.5 * (n_k - 1)) * dk; }
};

struct PumpPulse {
    Bin target = Bin::P1;
    double energy = 0.0;    // J
    double duration = 0.0;  // s, Gaussian envelope parameter
    double center_k = 0.0;  // rad/m carrier wavenumber
    double delay_pos = 0.0; // m, spatial offset of the incoming peak (negative: upstream)
};

struct TimeGrid {
    double t0 = 0.0;      // s
    double dt = 0.0;      // s; <= 0 selects the automatic step policy
    double t_final = 0.0; // s; <= 0 selects the energy-decay stop rule
};

struct SystemConfig {
    DispersionModel dispersion;
    double gamma_nl = 0.0; // (W m)^-1
    RingSpec primary, auxiliary;
    std::vector<CouplerSpec> couplers;
    std::vector<ResonanceBin> bins; // empty until bin construction runs
    std::vector<PumpPulse> pumps;
    double aux_detuning = 0.0; // rad/s, auxiliary comb offset target (bookkeeping)
    TimeGrid time;

    const RingSpec& ring(Element e) const;
    RingSpec& ring(Element e);
    const ResonanceBin& bin(Bin b) const;
    ResonanceBin* find_bin(Bin b);
    const ResonanceBin* find_bin(Bin b) const;
    // The physical coupler attached to the waveguide / joining the rings.
    const CouplerSpec& waveguide_coupler() const;
    const CouplerSpec& ring_coupler() const;
};

struct ValidationReport {
    std::vector<std::string> warnings;
};

// Throws a ConfigError subclass on hard violations; returns soft findings.
ValidationReport validate_config(const SystemConfig& cfg);

std::string dump_config(const SystemConfig& cfg); // JSON text, boundary units
SystemConfig parse_config(const std::string& json_text);
SystemConfig load_config_file(const std::string& path);
void save_config_file(const SystemConfig& cfg, const std::string& path);

// FNV-1a over the canonical JSON dump; stable across runs and platforms.
std::uint64_t config_hash(const SystemConfig& cfg);

} // namespace ringsqueeze
