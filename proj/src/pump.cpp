#include "ringsqueeze/pump.hpp"
#include "ringsqueeze/units.hpp"

#include <cmath>

namespace ringsqueeze {

using cd = std::complex<double>;
static const cd im{0.0, 1.0};

PumpIntegrator::PumpIntegrator(const SystemConfig& cfg, const SegmentTable& table,
                               const std::array<ModeBasis, 2>& basis, const NonlinearTable& nl)
    : cfg_(cfg), table_(table), basis_(basis), nl_(nl) {
    for (int p = 0; p < 2; ++p) {
        const Bin label = pump_bins[p];
        if (basis_[p].label != label)
            throw Error("pump mode bases must be ordered P1, P2");
        const ResonanceBin& bin = cfg_.bin(label);
        if (static_cast<int>(basis_[p].k.size()) != bin.n_k)
            throw Error("pump basis grid does not match the bin");
        sqrt_dk_[p] = std::sqrt(bin.dk);
        cinv_[p].reserve(basis_[p].C.size());
        for (const auto& c : basis_[p].C) cinv_[p].push_back(c.inverse());

        bool found = false;
        for (const PumpPulse& pu : cfg_.pumps) {
            if (pu.target == label) {
                pulse_[p] = pu;
                found = true;
            }
        }
        if (!found) throw ConfigError("both pump pulses must be configured");
        if (pulse_[p].energy > 0.0 && pulse_[p].duration <= 0.0)
            throw ConfigError("pump pulse needs a positive duration");
    }
    ring_mask_ = Eigen::VectorXd::Zero(table_.size());
    for (int s = 0; s < table_.size(); ++s)
        if (table_.segments[s].element != Element::waveguide) ring_mask_[s] = 1.0;
}

Eigen::VectorXcd PumpIntegrator::input_envelope(int pump) const {
    const PumpPulse& pu = pulse_[pump];
    const ResonanceBin& bin = cfg_.bin(pump_bins[pump]);
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(bin.n_k);
    if (pu.energy <= 0.0) return f;
    const double wc = dispersion_omega(cfg_.dispersion, pu.center_k);
    const double vc = group_velocity_at(cfg_.dispersion, wc);
    const double norm = std::pow(2.0 / units::pi, 0.25) *
                        std::sqrt(pu.energy * pu.duration * vc / (units::hbar * wc));
    for (int i = 0; i < bin.n_k; ++i) {
        const double dk = bin.k_at(i) - pu.center_k;
        f[i] = norm * std::exp(-vc * vc * pu.duration * pu.duration * dk * dk) *
               std::exp(-im * dk * pu.delay_pos);
    }
    return f;
}

PumpState PumpIntegrator::initial_state() const {
    PumpState st;
    st.t = cfg_.time.t0;
    for (int p = 0; p < 2; ++p) {
        const ResonanceBin& bin = cfg_.bin(pump_bins[p]);
        const Eigen::VectorXcd f = input_envelope(p);
        st.alpha[p].resize(table_.size(), bin.n_k);
        // incoming light enters through the waveguide channel (port 0)
        for (int i = 0; i < bin.n_k; ++i)
            st.alpha[p].col(i) = basis_[p].H_in[i].col(0) * (f[i] * sqrt_dk_[p]);
    }
    return st;
}

std::array<Eigen::VectorXcd, 2> PumpIntegrator::field_sums(const PumpState& st) const {
    return {sqrt_dk_[0] * st.alpha[0].rowwise().sum(),
            sqrt_dk_[1] * st.alpha[1].rowwise().sum()};
}

Eigen::VectorXcd PumpIntegrator::nonlinear_drive(const std::array<Eigen::VectorXcd, 2>& sp,
                                                 int p) const {
    const int q = 1 - p;
    const auto s_p = sp[p].array();
    const auto s_q = sp[q].array();
    return (mult_pump_spm * nl_.spm[p].array() * s_p.abs2() * s_p +
            mult_pump_xpm * nl_.pump_xpm.array() * s_q.abs2() * s_p)
        .matrix();
}

void PumpIntegrator::rhs(const PumpState& st, std::array<Eigen::MatrixXcd, 2>& out) const {
    const auto sp = field_sums(st);
    for (int p = 0; p < 2; ++p) {
        const Eigen::MatrixXcd& a = st.alpha[p];
        out[p].resize(a.rows(), a.cols());
        const Eigen::VectorXcd drive = im * sqrt_dk_[p] * nonlinear_drive(sp, p);
        for (int i = 0; i < a.cols(); ++i)
            out[p].col(i) = cd(0.0, -basis_[p].delta_omega[i]) * a.col(i) +
                            basis_[p].C[i] * drive;
    }
}

void PumpIntegrator::step(PumpState& st, double dt) {
    if (!(dt > 0.0)) throw Error("pump step must be positive");
    if (dt != last_dt_) {
        history_.clear();
        last_dt_ = dt;
    }
    std::array<Eigen::MatrixXcd, 2> f0;
    rhs(st, f0);
    history_.push_back(f0);
    if (history_.size() > 4) history_.pop_front();

    if (history_.size() < 4) {
        // bootstrap steps carry the full one-step method
        PumpState tmp = st;
        std::array<Eigen::MatrixXcd, 2> k2, k3, k4;
        for (int p = 0; p < 2; ++p) tmp.alpha[p] = st.alpha[p] + (0.5 * dt) * f0[p];
        rhs(tmp, k2);
        for (int p = 0; p < 2; ++p) tmp.alpha[p] = st.alpha[p] + (0.5 * dt) * k2[p];
        rhs(tmp, k3);
        for (int p = 0; p < 2; ++p) tmp.alpha[p] = st.alpha[p] + dt * k3[p];
        rhs(tmp, k4);
        for (int p = 0; p < 2; ++p)
            st.alpha[p] += (dt / 6.0) * (f0[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
    } else {
        for (int p = 0; p < 2; ++p)
            st.alpha[p] += (dt / 24.0) * (55.0 * history_[3][p] - 59.0 * history_[2][p] +
                                          37.0 * history_[1][p] - 9.0 * history_[0][p]);
    }
    st.t += dt;
    for (int p = 0; p < 2; ++p)
        if (!st.alpha[p].allFinite()) throw StepUnstable("pump integration diverged");
}

void PumpIntegrator::reset_history() {
    history_.clear();
    last_dt_ = 0.0;
}

double PumpIntegrator::photon_number(const PumpState& st, int pump) const {
    double n = 0.0;
    for (int i = 0; i < st.alpha[pump].cols(); ++i) {
        const Eigen::VectorXcd a = st.alpha[pump].col(i);
        n += std::real(a.dot(cinv_[pump][i] * a));
    }
    return n;
}

double PumpIntegrator::injected_photons(int pump) const {
    const ResonanceBin& bin = cfg_.bin(pump_bins[pump]);
    return input_envelope(pump).squaredNorm() * bin.dk;
}

Eigen::VectorXd PumpIntegrator::segment_occupancy(const PumpState& st, int pump) const {
    // |Sp_s|^2 is 2 pi times the photon line density at the segment start;
    // extrapolating it across the segment estimates the photons stored there
    const Eigen::VectorXcd sp = sqrt_dk_[pump] * st.alpha[pump].rowwise().sum();
    Eigen::VectorXd occ(table_.size());
    for (int s = 0; s < table_.size(); ++s) {
        const Segment& seg = table_.segments[s];
        occ[s] = std::norm(sp[s]) * (seg.xi_end - seg.xi_start) / units::two_pi;
    }
    return occ;
}

double PumpIntegrator::ring_occupancy(const PumpState& st) const {
    return ring_mask_.dot(segment_occupancy(st, 0) + segment_occupancy(st, 1));
}

} // namespace ringsqueeze
