#pragma once

#include <cmath>

namespace ringsqueeze::units {

inline constexpr double hbar = 1.054571817e-34; // J s
inline constexpr double c0 = 2.99792458e8;      // m/s
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// Internal representation is SI throughout (rad/s, rad/m, m, s, J, W).
// The JSON boundary speaks GHz, um, ps, pJ; these helpers are the only
// place the conversion factors live.

inline double ghz_to_angular(double f_ghz) { return f_ghz * two_pi * 1e9; }
inline double angular_to_ghz(double w) { return w / (two_pi * 1e9); }

inline double um_to_m(double x_um) { return x_um * 1e-6; }
inline double m_to_um(double x_m) { return x_m * 1e6; }

inline double per_um_to_per_m(double k) { return k * 1e6; }
inline double per_m_to_per_um(double k) { return k * 1e-6; }

inline double ps_to_s(double t_ps) { return t_ps * 1e-12; }
inline double s_to_ps(double t_s) { return t_s * 1e12; }

inline double pj_to_j(double e_pj) { return e_pj * 1e-12; }
inline double j_to_pj(double e_j) { return e_j * 1e12; }

inline double um_per_ps_to_m_per_s(double v) { return v * 1e6; }
inline double m_per_s_to_um_per_ps(double v) { return v * 1e-6; }

// ps^2/m <-> s^2/m for group velocity dispersion
inline double ps2_per_m_to_si(double b) { return b * 1e-24; }
inline double si_to_ps2_per_m(double b) { return b * 1e24; }

} // namespace ringsqueeze::units
