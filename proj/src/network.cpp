#include "ringsqueeze/network.hpp"
#include "ringsqueeze/units.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace ringsqueeze {

using cd = std::complex<double>;
static const cd im{0.0, 1.0};

// A perfectly transparent phantom would make the local mode basis singular;
// an epsilon of coupling leaves every observable unchanged at working
// precision while keeping the basis invertible.
static double floored_sigma(double s) { return s >= 1.0 ? 1.0 - 1e-12 : s; }

static double floored_attenuation(const RingSpec& r) {
    double prod = 1.0;
    for (double s : r.resolved_self_couplings()) prod *= floored_sigma(s);
    return prod;
}

SegmentTable build_segments(const SystemConfig& cfg) {
    SegmentTable t;
    t.segments.push_back({Element::waveguide, 0.0, 0.0});
    for (Element e : {Element::primary, Element::auxiliary}) {
        const RingSpec& r = cfg.ring(e);
        const auto pos = r.resolved_positions();
        const int n = static_cast<int>(pos.size());
        for (int i = 0; i < n; ++i) {
            const double xi2 = (i + 1 < n) ? pos[i + 1] : r.length;
            t.segments.push_back({e, pos[i], xi2});
        }
        (e == Element::primary ? t.n_primary_arcs : t.n_aux_arcs) = n;
    }
    return t;
}

namespace {

enum class PointKind { phantom, wg_coupler, ring_coupler };

struct Point {
    int site = 0;
    PointKind kind = PointKind::phantom;
    double self = 1.0;
    double cross = 0.0;
    int port = -1; // phantom / waveguide channel index
    double xi = 0.0;
};

struct RingLayout {
    Element elem = Element::primary;
    double length = 0.0;
    double phase_offset = 0.0;
    std::vector<Point> points; // site-major; phantom precedes coupler at a site
    int unk0 = 0;              // global index of the first unknown
    int ring_coupler_point = -1;
    int n_sites = 0;
};

struct Layout {
    RingLayout pr, ar;
    int n_unknowns = 0;
    int n_ports = 0;
};

double endpoint_on(const CouplerSpec& c, Element e) {
    if (c.a.element == e) return c.a.position;
    if (c.b.element == e) return c.b.position;
    return -1.0;
}

RingLayout build_ring_layout(const SystemConfig& cfg, Element e, int& port_counter) {
    const RingSpec& r = cfg.ring(e);
    RingLayout lay;
    lay.elem = e;
    lay.length = r.length;
    lay.phase_offset = r.phase_offset;
    const auto pos = r.resolved_positions();
    const auto sig = r.resolved_self_couplings();
    lay.n_sites = static_cast<int>(pos.size());

    const CouplerSpec& wg = cfg.waveguide_coupler();
    const CouplerSpec& rr = cfg.ring_coupler();
    const double wg_xi = (e == Element::primary) ? endpoint_on(wg, e) : -1.0;
    const double rr_xi = endpoint_on(rr, e);
    const double tol = 1e-12 + 1e-9 * r.length;

    for (int i = 0; i < lay.n_sites; ++i) {
        const double s = floored_sigma(sig[i]);
        lay.points.push_back({i, PointKind::phantom, s, std::sqrt(1.0 - s * s),
                              port_counter++, pos[i]});
        if (wg_xi >= 0.0 && std::abs(pos[i] - wg_xi) <= tol)
            lay.points.push_back({i, PointKind::wg_coupler, wg.self_coupling,
                                  wg.cross_coupling, 0, pos[i]});
        if (rr_xi >= 0.0 && std::abs(pos[i] - rr_xi) <= tol) {
            lay.ring_coupler_point = static_cast<int>(lay.points.size());
            lay.points.push_back({i, PointKind::ring_coupler, rr.self_coupling,
                                  rr.cross_coupling, -1, pos[i]});
        }
    }
    return lay;
}

Layout build_layout(const SystemConfig& cfg) {
    Layout lay;
    int port = 1; // port 0 is the real waveguide
    lay.pr = build_ring_layout(cfg, Element::primary, port);
    lay.ar = build_ring_layout(cfg, Element::auxiliary, port);
    lay.pr.unk0 = 0;
    lay.ar.unk0 = static_cast<int>(lay.pr.points.size());
    lay.n_unknowns = lay.ar.unk0 + static_cast<int>(lay.ar.points.size());
    lay.n_ports = port;
    return lay;
}

// Propagation factor from point e-1 to point e (wrap for e = 0).
cd pre_factor(const RingLayout& r, int e, double k) {
    const auto& pts = r.points;
    const int n = static_cast<int>(pts.size());
    if (e == 0) {
        const double span = r.length - pts[n - 1].xi;
        return std::exp(im * (k * span + r.phase_offset));
    }
    if (pts[e].site == pts[e - 1].site) return 1.0;
    return std::exp(im * k * (pts[e].xi - pts[e - 1].xi));
}

int prev_index(const RingLayout& r, int e) {
    const int n = static_cast<int>(r.points.size());
    return r.unk0 + (e == 0 ? n - 1 : e - 1);
}

} // namespace

LinearSolve solve_network(const SystemConfig& cfg, const SegmentTable& table, double k,
                          double beta) {
    const Layout lay = build_layout(cfg);
    const int n = lay.n_unknowns;
    const int np = lay.n_ports;
    if (np != table.size())
        throw NetworkSolveError("segment table does not match coupler layout");

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n, np);

    auto assemble = [&](const RingLayout& r, const RingLayout& partner) {
        const int npts = static_cast<int>(r.points.size());
        for (int e = 0; e < npts; ++e) {
            const Point& p = r.points[e];
            const int g = r.unk0 + e;
            A(g, g) += 1.0;
            A(g, prev_index(r, e)) -= p.self * pre_factor(r, e, k);
            switch (p.kind) {
                case PointKind::phantom:
                    B(g, p.port) = im * p.cross;
                    break;
                case PointKind::wg_coupler:
                    B(g, 0) = im * p.cross;
                    break;
                case PointKind::ring_coupler: {
                    const int pe = partner.ring_coupler_point;
                    if (pe < 0) throw NetworkSolveError("ring coupler missing on partner ring");
                    A(g, prev_index(partner, pe)) -= im * p.cross * pre_factor(partner, pe, k);
                    break;
                }
            }
        }
    };
    assemble(lay.pr, lay.ar);
    assemble(lay.ar, lay.pr);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    const Eigen::MatrixXcd U = lu.solve(B);
    if (!U.allFinite()) throw NetworkSolveError("cascade solve produced non-finite amplitudes");

    // Amplitudes entering each point, per driven port.
    auto pre_row = [&](const RingLayout& r, int e) -> Eigen::RowVectorXcd {
        return pre_factor(r, e, k) * U.row(prev_index(r, e));
    };

    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(np, np);
    Eigen::MatrixXcd Hraw = Eigen::MatrixXcd::Zero(np, np); // segments x ports
    for (const RingLayout* rp : {&lay.pr, &lay.ar}) {
        const RingLayout& r = *rp;
        for (int e = 0; e < static_cast<int>(r.points.size()); ++e) {
            const Point& p = r.points[e];
            if (p.kind == PointKind::ring_coupler) continue;
            const int out_port = p.kind == PointKind::phantom ? p.port : 0;
            S.row(out_port) += im * p.cross * pre_row(r, e);
            S(out_port, out_port) += p.self;
        }
    }
    // Arc start amplitudes: field just after the last point of each site.
    int seg = 1;
    for (const RingLayout* rp : {&lay.pr, &lay.ar}) {
        const RingLayout& r = *rp;
        const int npts = static_cast<int>(r.points.size());
        for (int e = 0; e < npts; ++e) {
            const bool last_at_site = (e + 1 == npts) || (r.points[e + 1].site != r.points[e].site);
            if (!last_at_site) continue;
            Hraw.row(seg++) = U.row(r.unk0 + e);
        }
    }
    if (seg != np) throw NetworkSolveError("segment enumeration mismatch");
    Hraw.row(0) = S.row(0); // waveguide output segment, xi = 0

    LinearSolve out;
    out.S = S;
    out.H_in = Hraw;
    for (int s = 0; s < np; ++s)
        out.H_in.row(s) *= std::exp(-im * beta * table.segments[s].xi_start);
    out.H_out = out.H_in * S.adjoint();
    return out;
}

Eigen::MatrixXcd commutator_matrix(const Eigen::MatrixXcd& H) { return H * H.adjoint(); }

std::complex<double> aux_through_response(const SystemConfig& cfg, double k) {
    const CouplerSpec& rr = cfg.ring_coupler();
    const RingSpec& ar = cfg.auxiliary;
    const double g = floored_attenuation(ar);
    const cd ph = std::exp(im * (k * ar.length + ar.phase_offset));
    return (rr.self_coupling - g * ph) / (1.0 - rr.self_coupling * g * ph);
}

std::complex<double> waveguide_transmission(const SystemConfig& cfg, double k) {
    const cd t_ar = aux_through_response(cfg, k);
    const CouplerSpec& wg = cfg.waveguide_coupler();
    const RingSpec& pr = cfg.primary;
    const double g = floored_attenuation(pr);
    const cd loop = t_ar * g * std::exp(im * (k * pr.length + pr.phase_offset));
    return (wg.self_coupling - loop) / (1.0 - wg.self_coupling * loop);
}

ModeBasis build_mode_basis(const SystemConfig& cfg, const SegmentTable& table,
                           const ResonanceBin& bin) {
    ModeBasis mb;
    mb.label = bin.label;
    mb.k.resize(bin.n_k);
    mb.delta_omega.resize(bin.n_k);
    mb.H_in.reserve(bin.n_k);
    mb.H_out.reserve(bin.n_k);
    mb.S.reserve(bin.n_k);
    mb.C.reserve(bin.n_k);
    for (int i = 0; i < bin.n_k; ++i) {
        const double k = bin.k_at(i);
        mb.k[i] = k;
        mb.delta_omega[i] = dispersion_omega(cfg.dispersion, k) - bin.center_omega;
        LinearSolve ls = solve_network(cfg, table, k, bin.center_k);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ls.H_in);
        const double cmin = svd.singularValues().minCoeff();
        const double cond = cmin > 0.0 ? svd.singularValues().maxCoeff() / cmin
                                       : std::numeric_limits<double>::infinity();
        mb.cond_max = std::max(mb.cond_max, cond);
        mb.C.push_back(commutator_matrix(ls.H_in));
        mb.H_in.push_back(std::move(ls.H_in));
        mb.H_out.push_back(std::move(ls.H_out));
        mb.S.push_back(std::move(ls.S));
    }
    return mb;
}

// ------------------------------------------------------------ bin discovery

SystemConfig decouple_aux(const SystemConfig& cfg) {
    SystemConfig bare = cfg;
    for (auto& c : bare.couplers) {
        const bool rr = (c.a.element == Element::primary && c.b.element == Element::auxiliary) ||
                        (c.a.element == Element::auxiliary && c.b.element == Element::primary);
        if (rr) {
            c.self_coupling = 1.0;
            c.cross_coupling = 0.0;
        }
    }
    return bare;
}

namespace {

double power_transmission(const SystemConfig& cfg, double omega) {
    const double k = dispersion_k(cfg.dispersion, omega);
    return std::norm(waveguide_transmission(cfg, k));
}

double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

double bisect_crossing(const std::function<double(double)>& f, double lo, double hi,
                       double target) {
    // assumes f(lo) and f(hi) straddle target
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) - target) * (f(lo) - target) <= 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo < 1e-13 * std::abs(hi)) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::vector<ResonanceFeature> find_resonance_features(const SystemConfig& cfg, double omega_lo,
                                                      double omega_hi) {
    const int n = 4096;
    std::vector<double> w(n), m(n);
    double baseline = 0.0;
    for (int j = 0; j < n; ++j) {
        w[j] = omega_lo + (omega_hi - omega_lo) * j / (n - 1);
        m[j] = power_transmission(cfg, w[j]);
        baseline = std::max(baseline, m[j]);
    }
    double max_depth = 0.0;
    for (int j = 1; j + 1 < n; ++j)
        if (m[j] < m[j - 1] && m[j] <= m[j + 1]) max_depth = std::max(max_depth, baseline - m[j]);
    if (max_depth <= 0.0) return {};

    auto f = [&](double omega) { return power_transmission(cfg, omega); };
    std::vector<ResonanceFeature> dips;
    for (int j = 1; j + 1 < n; ++j) {
        if (!(m[j] < m[j - 1] && m[j] <= m[j + 1])) continue;
        if (baseline - m[j] < std::max(0.01 * max_depth, 1e-9)) continue;
        ResonanceFeature d;
        d.omega_min = golden_min(f, w[j - 1], w[j + 1], 1e-7 * (w[j + 1] - w[j - 1]));
        d.transmission_min = f(d.omega_min);
        const double half = 0.5 * (d.transmission_min + baseline);
        // march outward for half-depth brackets
        const double step = (omega_hi - omega_lo) / n;
        double lo = d.omega_min, hi = d.omega_min;
        while (lo > omega_lo && f(lo) < half) lo -= step;
        while (hi < omega_hi && f(hi) < half) hi += step;
        const double wl = (f(lo) >= half) ? bisect_crossing(f, lo, lo + step, half) : omega_lo;
        const double wh = (f(hi) >= half) ? bisect_crossing(f, hi - step, hi, half) : omega_hi;
        d.fwhm = wh - wl;
        dips.push_back(d);
    }
    std::sort(dips.begin(), dips.end(),
              [](const ResonanceFeature& a, const ResonanceFeature& b) {
                  return a.omega_min < b.omega_min;
              });
    return dips;
}

double primary_tooth_omega(const SystemConfig& cfg, int n) {
    const RingSpec& pr = cfg.primary;
    const DispersionModel& d = cfg.dispersion;
    const double theta_ref = dispersion_k(d, d.omega_ref) * pr.length + pr.phase_offset;
    const double target = units::two_pi * (std::round(theta_ref / units::two_pi) + n);
    double omega = d.omega_ref + n * units::two_pi * d.v_group / pr.length;
    for (int it = 0; it < 60; ++it) {
        const double theta = dispersion_k(d, omega) * pr.length + pr.phase_offset;
        const double slope = pr.length / group_velocity_at(d, omega);
        const double step = (theta - target) / slope;
        omega -= step;
        if (std::abs(step) < 1e-6) break; // rad/s; sub-uHz residual
    }
    return omega;
}

BinBuildResult build_bins(const SystemConfig& cfg, const BinPolicy& policy) {
    BinBuildResult res;
    res.omega_s_bare = primary_tooth_omega(cfg, policy.comb_offsets[static_cast<int>(Bin::S)]);
    res.fsr = units::two_pi * group_velocity_at(cfg.dispersion, res.omega_s_bare) /
              cfg.primary.length;

    for (Bin b : all_bins) {
        BinFeatures feat;
        feat.label = b;
        feat.omega_bare = primary_tooth_omega(cfg, policy.comb_offsets[static_cast<int>(b)]);
        const double fsr_local =
            units::two_pi * group_velocity_at(cfg.dispersion, feat.omega_bare) /
            cfg.primary.length;
        feat.dips = find_resonance_features(cfg, feat.omega_bare - 0.4 * fsr_local,
                                            feat.omega_bare + 0.4 * fsr_local);
        if (feat.dips.empty())
            throw NetworkSolveError(std::string("no resonance found near bin ") + bin_name(b));

        double max_depth = 0.0;
        for (const auto& d : feat.dips) max_depth = std::max(max_depth, 1.0 - d.transmission_min);
        std::vector<ResonanceFeature> strong;
        for (const auto& d : feat.dips)
            if (1.0 - d.transmission_min >= 0.25 * max_depth) strong.push_back(d);

        feat.split = false;
        if (strong.size() >= 2) {
            // the split pair flanks the bare tooth roughly symmetrically
            const ResonanceFeature& lo = strong.front();
            const ResonanceFeature& hi = strong.back();
            const double a = feat.omega_bare - lo.omega_min;
            const double bb = hi.omega_min - feat.omega_bare;
            if (a > 0.0 && bb > 0.0 && std::max(a, bb) <= 2.5 * std::min(a, bb)) {
                feat.split = true;
                feat.splitting = hi.omega_min - lo.omega_min;
            }
        }
        double fwhm_max = 0.0, depth_best = -1.0, center = feat.omega_bare;
        for (const auto& d : strong) {
            fwhm_max = std::max(fwhm_max, d.fwhm);
            if (1.0 - d.transmission_min > depth_best) {
                depth_best = 1.0 - d.transmission_min;
                center = d.omega_min;
            }
        }
        feat.center_chosen = feat.split ? feat.omega_bare : center;

        ResonanceBin rb;
        rb.label = b;
        rb.center_omega = feat.center_chosen;
        rb.center_k = dispersion_k(cfg.dispersion, rb.center_omega);
        const double vg = group_velocity_at(cfg.dispersion, rb.center_omega);
        if (is_pump_bin(b)) {
            const double fwhm_k = fwhm_max / vg;
            const double span_k = std::max(policy.pump_span_fwhm * fwhm_k, policy.min_pump_span_k);
            rb.n_k = policy.n_k_pump;
            rb.dk = span_k / rb.n_k;
            rb.span_omega = span_k * vg;
        } else {
            rb.span_omega = policy.quantum_span_fwhm * fwhm_max + feat.splitting;
            rb.n_k = policy.n_k_quantum;
            rb.dk = rb.span_omega / vg / rb.n_k;
        }
        res.bins.push_back(rb);
        res.features[b] = feat;
    }
    return res;
}

} // namespace ringsqueeze
