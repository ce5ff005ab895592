#include "ringsqueeze/nonlinear.hpp"
#include "ringsqueeze/units.hpp"

#include <cmath>

namespace ringsqueeze {

using cd = std::complex<double>;
static const cd im{0.0, 1.0};

// closed form of int_{x1}^{x2} exp(-i dk xi) dxi
static cd phase_integral(double dk, double x1, double x2) {
    const double span = x2 - x1;
    if (std::abs(dk * span) < 1e-8) {
        // second-order midpoint expansion; branch avoids 0/0 cancellation
        const double mid = 0.5 * (x1 + x2);
        const double arg = dk * span;
        return span * std::exp(-im * dk * mid) * (1.0 - arg * arg / 24.0);
    }
    return (std::exp(-im * dk * x2) - std::exp(-im * dk * x1)) / (-im * dk);
}

Eigen::VectorXcd quad_overlap(const SystemConfig& cfg, const SegmentTable& table,
                              const std::array<Bin, 4>& quad) {
    double wprod = 1.0, vprod = 1.0, dk = 0.0;
    for (int i = 0; i < 4; ++i) {
        const ResonanceBin& b = cfg.bin(quad[i]);
        wprod *= b.center_omega;
        vprod *= group_velocity_at(cfg.dispersion, b.center_omega);
        dk += (i < 2 ? 1.0 : -1.0) * b.center_k;
    }
    const double wbar = std::pow(wprod, 0.25);
    const double vbar = std::pow(vprod, 0.25);
    const double scale = units::hbar * wbar * vbar * vbar * cfg.gamma_nl /
                         (8.0 * units::pi * units::pi);
    Eigen::VectorXcd lam = Eigen::VectorXcd::Zero(table.size());
    for (int s = 0; s < table.size(); ++s) {
        const Segment& seg = table.segments[s];
        if (seg.element == Element::waveguide) continue; // nonlinearity lives in the rings
        lam[s] = scale * phase_integral(dk, seg.xi_start, seg.xi_end);
    }
    return lam;
}

double quad_phase_rate(const SystemConfig& cfg, const std::array<Bin, 4>& quad) {
    return cfg.bin(quad[0]).center_omega + cfg.bin(quad[1]).center_omega -
           cfg.bin(quad[2]).center_omega - cfg.bin(quad[3]).center_omega;
}

NonlinearTable build_nonlinear_table(const SystemConfig& cfg, const SegmentTable& table) {
    NonlinearTable t;
    t.n_seg = table.size();
    const auto ov = [&](Bin a, Bin b, Bin c, Bin d) {
        return quad_overlap(cfg, table, {a, b, c, d});
    };
    const auto rate = [&](Bin a, Bin b, Bin c, Bin d) {
        return quad_phase_rate(cfg, {a, b, c, d});
    };
    t.dp = ov(Bin::S, Bin::S, Bin::P1, Bin::P2);
    t.sp1 = ov(Bin::LI, Bin::S, Bin::P1, Bin::P1);
    t.sp2 = ov(Bin::RI, Bin::S, Bin::P2, Bin::P2);
    t.hp = ov(Bin::LI, Bin::RI, Bin::P1, Bin::P2);
    t.bs1 = ov(Bin::LI, Bin::P2, Bin::S, Bin::P1);
    t.bs2 = ov(Bin::RI, Bin::P1, Bin::S, Bin::P2);
    t.rate_dp = rate(Bin::S, Bin::S, Bin::P1, Bin::P2);
    t.rate_sp1 = rate(Bin::LI, Bin::S, Bin::P1, Bin::P1);
    t.rate_sp2 = rate(Bin::RI, Bin::S, Bin::P2, Bin::P2);
    t.rate_hp = rate(Bin::LI, Bin::RI, Bin::P1, Bin::P2);
    t.rate_bs1 = rate(Bin::LI, Bin::P2, Bin::S, Bin::P1);
    t.rate_bs2 = rate(Bin::RI, Bin::P1, Bin::S, Bin::P2);
    for (int q = 0; q < 3; ++q)
        for (int p = 0; p < 2; ++p)
            t.xpm[q][p] = ov(quantum_bins[q], pump_bins[p], quantum_bins[q], pump_bins[p]);
    for (int p = 0; p < 2; ++p)
        t.spm[p] = ov(pump_bins[p], pump_bins[p], pump_bins[p], pump_bins[p]);
    t.pump_xpm = ov(Bin::P1, Bin::P2, Bin::P1, Bin::P2);
    return t;
}

} // namespace ringsqueeze
