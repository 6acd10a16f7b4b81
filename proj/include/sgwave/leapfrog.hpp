#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "sgwave/ldg.hpp"
#include "sgwave/presets.hpp"
#include "sgwave/projections.hpp"

namespace sgwave {

/// Thrown when the leap-frog iteration blows up; almost always a time
/// step violating the stability restriction.
class InstabilityError : public std::runtime_error {
public:
    explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Complete three-level leap-frog state: v at steps n-1 and n, S at n.
/// S_curr is always re-derived from v_curr, never integrated.
struct SolverState {
    DgScalarField v_prev, v_curr;
    DgVectorField S_curr;
    long n = 0;
    double t = 0.0;
    double dt = 0.0;
};

/// Projected initial data: v0 = P_h^+ of u(0), w0 = P_h of u_t(0).
struct InitialData {
    DgScalarField v0, w0;
};

inline InitialData project_initial(const ExactSolutionPreset& preset, const LdgOperator& op,
                                   int quad_pts = -1) {
    const auto& coeff = op.coeff();
    const double t0u = preset.tau(0.0);
    const double t0w = preset.dtau(0.0);
    auto u0_modes = mode_coeffs(
        [&preset, t0u](double x, double z, const double* y, int region) {
            return t0u * preset.u0(x, z, y, region);
        },
        coeff);
    InitialData init;
    init.v0 = project_plus(u0_modes, coeff, op.flux(), quad_pts);
    if (t0w == 0.0) {
        init.w0 = DgScalarField(init.v0.cells(), init.v0.modes(), init.v0.dofs());
    } else {
        auto w_modes = mode_coeffs(
            [&preset, t0w](double x, double z, const double* y, int region) {
                return t0w * preset.u0(x, z, y, region);
            },
            coeff);
        init.w0 = project_plain(w_modes, coeff, quad_pts);
    }
    return init;
}

/// Taylor first step: v^1 = v^0 + dt w^0 + dt^2/2 * a(v^0), keeping the
/// scheme second-order from the start.
inline SolverState bootstrap(InitialData init, const LdgOperator& op, double dt) {
    if (dt <= 0) throw std::invalid_argument("bootstrap: dt must be positive");
    SolverState st;
    st.dt = dt;
    DgVectorField S0 = op.compute_S(init.v0, 0.0);
    DgScalarField a0 = op.compute_acceleration(S0, 0.0);
    DgScalarField v1 = init.v0;
    {
        auto& v = v1.data();
        const auto& w = init.w0.data();
        const auto& a = a0.data();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += dt * w[i] + 0.5 * dt * dt * a[i];
    }
    st.S_curr = op.compute_S(v1, dt);
    st.v_prev = std::move(init.v0);
    st.v_curr = std::move(v1);
    st.n = 1;
    st.t = dt;
    return st;
}

inline SolverState initialize(const ExactSolutionPreset& preset, const LdgOperator& op, double dt,
                              int quad_pts = -1) {
    return bootstrap(project_initial(preset, op, quad_pts), op, dt);
}

/// One leap-frog step: v^{n+1} = 2 v^n - v^{n-1} + dt^2 a(S^n).
inline void step(SolverState& st, const LdgOperator& op) {
    DgScalarField accel = op.compute_acceleration(st.S_curr, st.t);
    const double dt2 = st.dt * st.dt;
    auto& prev = st.v_prev.data();
    const auto& curr = st.v_curr.data();
    const auto& a = accel.data();
    double amax = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
        prev[i] = 2.0 * curr[i] - prev[i] + dt2 * a[i];
        amax = std::max(amax, std::abs(prev[i]));
    }
    std::swap(st.v_prev, st.v_curr);
    st.n += 1;
    st.t = st.n * st.dt;
    if (!std::isfinite(amax) || amax > 1e12)
        throw InstabilityError(
            "leap-frog diverged at step " + std::to_string(st.n) +
            " (|v| reached " + std::to_string(amax) +
            "); dt likely violates the stability restriction, see suggest_dt");
    st.S_curr = op.compute_S(st.v_curr, st.t);
}

/// Energy of the fully discrete scheme between two consecutive states,
/// together with the algebraically equal cross-term form and the
/// centered-difference semi-discrete energy.
struct EnergyRecord {
    long n = 0;
    double fully = 0.0;  // ||dv/dt||^2 + ||(S'+S)/2||^2 - (dt^2/4)||(S'-S)/dt||^2
    double alt = 0.0;    // ||dv/dt||^2 + (S, S')
    double semi = 0.0;   // centered ||v_t||^2 + ||S^n||^2
};

inline EnergyRecord discrete_energy(const SolverState& before, const SolverState& after) {
    if (after.n != before.n + 1)
        throw std::invalid_argument("discrete_energy: states must be consecutive");
    const double dt = before.dt;
    EnergyRecord rec;
    rec.n = before.n;
    double dv2 = 0.0;
    {
        const auto& a = before.v_curr.data();
        const auto& b = after.v_curr.data();
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = b[i] - a[i];
            dv2 += d * d;
        }
    }
    double sum2 = 0.0, diff2 = 0.0, cross = 0.0;
    auto accumulate = [&](const DgScalarField& s0, const DgScalarField& s1) {
        const auto& a = s0.data();
        const auto& b = s1.data();
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double sm = 0.5 * (a[i] + b[i]);
            const double df = 0.5 * (b[i] - a[i]);
            sum2 += sm * sm;
            diff2 += df * df;
            cross += a[i] * b[i];
        }
    };
    accumulate(before.S_curr.x, after.S_curr.x);
    accumulate(before.S_curr.z, after.S_curr.z);
    rec.fully = dv2 / (dt * dt) + sum2 - diff2;
    rec.alt = dv2 / (dt * dt) + cross;

    double cv2 = 0.0;
    {
        const auto& a = before.v_prev.data();
        const auto& b = after.v_curr.data();
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = (b[i] - a[i]) / (2.0 * dt);
            cv2 += d * d;
        }
    }
    rec.semi = cv2 + before.S_curr.squared_norm();
    return rec;
}

/// Advisory stable time step: c * min(h) / ((2k+1) * a_max).
inline double suggest_dt(const CoefficientModel& model, const Mesh2D& mesh, int degree,
                         double safety = 0.1) {
    return safety * std::min(mesh.hx(), mesh.hz()) / ((2.0 * degree + 1.0) * model.a_max);
}

}  // namespace sgwave
