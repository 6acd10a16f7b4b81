#pragma once

#include <cmath>
#include <utility>

namespace sgwave {

/// Value of the (unnormalized) Legendre polynomial P_p at x, by the
/// three-term recurrence.
inline double legendre(int p, double x) {
    if (p == 0) return 1.0;
    if (p == 1) return x;
    double pm1 = 1.0, pc = x;
    for (int n = 1; n < p; ++n) {
        double pn = ((2 * n + 1) * x * pc - n * pm1) / (n + 1);
        pm1 = pc;
        pc = pn;
    }
    return pc;
}

/// (P_p(x), P_p'(x)) in one pass.
inline std::pair<double, double> legendre_pair(int p, double x) {
    if (p == 0) return {1.0, 0.0};
    double pm1 = 1.0, pc = x, dm1 = 0.0, dc = 1.0;
    for (int n = 1; n < p; ++n) {
        double pn = ((2 * n + 1) * x * pc - n * pm1) / (n + 1);
        double dn = ((2 * n + 1) * (pc + x * dc) - n * dm1) / (n + 1);
        pm1 = pc;
        pc = pn;
        dm1 = dc;
        dc = dn;
    }
    return {pc, dc};
}

/// Normalization constant making P_p unit-norm in L2(-1,1).
inline double legendre_l2_scale(int p) { return std::sqrt((2.0 * p + 1.0) / 2.0); }

/// Normalization constant making P_p unit-norm against the uniform
/// density 1/2 on [-1,1].
inline double legendre_density_scale(int p) { return std::sqrt(2.0 * p + 1.0); }

}  // namespace sgwave
