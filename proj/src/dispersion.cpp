#include "ringsqueeze/dispersion.hpp"

#include <cmath>

namespace ringsqueeze {

double dispersion_k(const DispersionModel& d, double omega) {
    const double dw = omega - d.omega_ref;
    return d.k_ref + dw / d.v_group + 0.5 * d.gvd * dw * dw;
}

double dispersion_omega(const DispersionModel& d, double k) {
    const double dk = k - d.k_ref;
    if (d.gvd == 0.0) return d.omega_ref + d.v_group * dk;
    // Solve 0.5*gvd*x^2 + x/v - dk = 0 for x = w - omega_ref, taking the
    // root that continuously deforms into v*dk as gvd -> 0.
    const double inv_v = 1.0 / d.v_group;
    const double disc = inv_v * inv_v + 2.0 * d.gvd * dk;
    if (disc < 0.0)
        throw BranchOverflow("wavenumber beyond the turning point of the dispersion branch");
    const double sq = std::sqrt(disc);
    // Stable quadratic formula: avoid cancellation between 1/v and sqrt(disc).
    double x;
    if (inv_v >= 0.0) {
        x = 2.0 * dk / (inv_v + sq);
    } else {
        x = (-inv_v + sq) / d.gvd;
    }
    return d.omega_ref + x;
}

double group_velocity_at(const DispersionModel& d, double omega) {
    const double slope = 1.0 / d.v_group + d.gvd * (omega - d.omega_ref);
    if (slope <= 0.0)
        throw BranchOverflow("group velocity undefined beyond branch turning point");
    return 1.0 / slope;
}

} // namespace ringsqueeze
