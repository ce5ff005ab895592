#pragma once

#include "ringsqueeze/errors.hpp"

namespace ringsqueeze {

// Quadratic dispersion branch around a reference frequency:
//   k(w) = k_ref + (w - omega_ref)/v_group + 0.5*gvd*(w - omega_ref)^2
// gvd is d^2k/dw^2 (s^2/m). The model must stay on the monotonic branch
// through (omega_ref, k_ref); leaving it raises BranchOverflow.
struct DispersionModel {
    double k_ref = 0.0;      // rad/m
    double omega_ref = 0.0;  // rad/s
    double v_group = 0.0;    // m/s
    double gvd = 0.0;        // s^2/m
};

double dispersion_k(const DispersionModel& d, double omega);

// Exact inverse of dispersion_k on the branch containing omega_ref.
double dispersion_omega(const DispersionModel& d, double k);

// dω/dk evaluated at omega: 1 / (dk/dω).
double group_velocity_at(const DispersionModel& d, double omega);

} // namespace ringsqueeze
