#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sgwave/coefficient.hpp"
#include "sgwave/mesh.hpp"

namespace sgwave {

/// Manufactured problem with known solution. Both shipped problems have
/// the separable form u(t,x,y) = tau(t) * u0(x,y) with u_t = tau'(t) u0
/// and q(t,x,y) = a grad u = tau(t) * q0(x,y); diagnostics exploit that.
struct ExactSolutionPreset {
    std::string name;
    double delta = 0.0;
    Rect domain;
    CoefficientModel model;

    std::function<double(double)> tau;   // time factor, tau(0) = 1
    std::function<double(double)> dtau;  // its derivative
    std::function<double(double, double, const double*, int)> u0;  // spatial factor, per region
    std::function<std::array<double, 2>(double, double, const double*, int)> q0;  // a grad u0

    double u(double t, double x, double z, const double* y, std::optional<Side> side_x = {},
             std::optional<Side> side_z = {}) const {
        return tau(t) * u0(x, z, y, model.region_of(x, z, side_x, side_z));
    }
    double u_t(double t, double x, double z, const double* y, std::optional<Side> side_x = {},
               std::optional<Side> side_z = {}) const {
        return dtau(t) * u0(x, z, y, model.region_of(x, z, side_x, side_z));
    }
    std::array<double, 2> q(double t, double x, double z, const double* y,
                            std::optional<Side> side_x = {},
                            std::optional<Side> side_z = {}) const {
        auto v = q0(x, z, y, model.region_of(x, z, side_x, side_z));
        return {tau(t) * v[0], tau(t) * v[1]};
    }
    /// Dirichlet data g_D = u on the domain boundary. Boundary quadrature
    /// points never sit on an interface line, so no side is needed.
    double boundary(double t, double x, double z, const double* y) const {
        return u(t, x, z, y);
    }
};

/// Test problem on [0,2]^2 with the smooth random speed
/// a^2 = 2 / ((1+d y1)^2 + (1+d y2)^2) and solution
/// u = cos(sqrt(2) pi t) sin(pi(1+d y1) x1) sin(pi(1+d y2) x2).
inline ExactSolutionPreset preset_test1(double delta) {
    ExactSolutionPreset p;
    p.name = "test1";
    p.delta = delta;
    p.domain = {0.0, 2.0, 0.0, 2.0};

    p.model.interfaces_x = {};
    p.model.interfaces_z = {};
    p.model.x_independent = true;
    p.model.a2 = [delta](double, double, const double* y, int) {
        const double a1 = 1.0 + delta * y[0];
        const double a2 = 1.0 + delta * y[1];
        return 2.0 / (a1 * a1 + a2 * a2);
    };
    p.model.a_min = 1.0 / (1.0 + delta);
    p.model.a_max = 1.0 / (1.0 - delta);

    const double omega = std::sqrt(2.0) * M_PI;
    p.tau = [omega](double t) { return std::cos(omega * t); };
    p.dtau = [omega](double t) { return -omega * std::sin(omega * t); };
    p.u0 = [delta](double x, double z, const double* y, int) {
        return std::sin(M_PI * (1.0 + delta * y[0]) * x) * std::sin(M_PI * (1.0 + delta * y[1]) * z);
    };
    auto a2f = p.model.a2;
    p.q0 = [delta, a2f](double x, double z, const double* y, int r) -> std::array<double, 2> {
        const double ax = M_PI * (1.0 + delta * y[0]);
        const double az = M_PI * (1.0 + delta * y[1]);
        const double a = std::sqrt(a2f(x, z, y, r));
        return {a * ax * std::cos(ax * x) * std::sin(az * z),
                a * az * std::sin(ax * x) * std::cos(az * z)};
    };
    return p;
}

/// Test problem on [-1,1]^2 with the speed discontinuous across x = 0:
/// a^2 = 1/((1+d y1)^2+(1+d y2)^2) left, 9/(25(1+d y1)^2+9(1+d y2)^2)
/// right, and the piecewise solution
/// u = cos(3 pi t) sin(3 pi(1+d y1) x1) sin(3 pi(1+d y2) x2)   (x1 < 0)
/// u = cos(3 pi t) sin(5 pi(1+d y1) x1) sin(3 pi(1+d y2) x2)   (x1 > 0).
inline ExactSolutionPreset preset_test2(double delta) {
    ExactSolutionPreset p;
    p.name = "test2";
    p.delta = delta;
    p.domain = {-1.0, 1.0, -1.0, 1.0};

    p.model.interfaces_x = {0.0};
    p.model.interfaces_z = {};
    p.model.x_independent = true;
    p.model.a2 = [delta](double, double, const double* y, int region) {
        const double a1 = 1.0 + delta * y[0];
        const double a2 = 1.0 + delta * y[1];
        if (region == 0) return 1.0 / (a1 * a1 + a2 * a2);
        return 9.0 / (25.0 * a1 * a1 + 9.0 * a2 * a2);
    };
    p.model.a_min = 3.0 / (std::sqrt(34.0) * (1.0 + delta));
    p.model.a_max = 1.0 / (std::sqrt(2.0) * (1.0 - delta));

    p.tau = [](double t) { return std::cos(3.0 * M_PI * t); };
    p.dtau = [](double t) { return -3.0 * M_PI * std::sin(3.0 * M_PI * t); };
    p.u0 = [delta](double x, double z, const double* y, int region) {
        const double kx = (region == 0 ? 3.0 : 5.0) * M_PI * (1.0 + delta * y[0]);
        const double kz = 3.0 * M_PI * (1.0 + delta * y[1]);
        return std::sin(kx * x) * std::sin(kz * z);
    };
    auto a2f = p.model.a2;
    p.q0 = [delta, a2f](double x, double z, const double* y, int r) -> std::array<double, 2> {
        const double kx = (r == 0 ? 3.0 : 5.0) * M_PI * (1.0 + delta * y[0]);
        const double kz = 3.0 * M_PI * (1.0 + delta * y[1]);
        const double a = std::sqrt(a2f(x, z, y, r));
        return {a * kx * std::cos(kx * x) * std::sin(kz * z),
                a * kz * std::sin(kx * x) * std::cos(kz * z)};
    };
    return p;
}

inline ExactSolutionPreset build_preset(std::string_view name, double delta) {
    if (delta < 0) throw std::invalid_argument("build_preset: delta must be >= 0");
    if (name == "test1") return preset_test1(delta);
    if (name == "test2") return preset_test2(delta);
    throw std::invalid_argument("build_preset: unknown preset '" + std::string(name) + "'");
}

}  // namespace sgwave
