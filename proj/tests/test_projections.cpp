#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "sgwave/presets.hpp"
#include "sgwave/projections.hpp"
#include "test_util.hpp"

using namespace sgwave;
using testutil::mode_value;
using testutil::random_field;

namespace {

CoefficientModel unit_speed() {
    CoefficientModel m;
    m.a2 = [](double, double, const double*, int) { return 1.0; };
    m.x_independent = true;
    m.a_min = m.a_max = 1.0;
    return m;
}

// synthetic x-dependent SPD coefficient with mode coupling; polynomial in
// every variable so each quadrature in play integrates it exactly
CoefficientModel coupled_speed() {
    CoefficientModel m;
    m.x_independent = false;
    m.a2 = [](double x, double z, const double* y, int) {
        const double a = 1.4 + 0.1 * x + 0.1 * z + 0.2 * y[0] + 0.1 * y[0] * y[1];
        return a * a;
    };
    m.grad_a = [](double, double, const double*, int) -> std::array<double, 2> {
        return {0.1, 0.1};
    };
    m.a_min = 0.8;
    m.a_max = 2.2;
    return m;
}

// turn an existing DG field into a ModeCoeffFn (its exact per-mode values)
ModeCoeffFn field_modes(const DgScalarField& f, const Mesh2D& mesh, const LocalBasis& basis) {
    return [&](double x, double z, int cell, std::span<double> out) {
        for (int m = 0; m < f.modes(); ++m) out[m] = mode_value(f, mesh, basis, cell, m, x, z);
    };
}

GalerkinCoeffField make_coeff(const CoefficientModel& model, Rect dom, int cells, int k,
                              int order) {
    GpcBasis gpc(2, order);
    Mesh2D mesh(dom, cells, cells, model.interfaces_x, model.interfaces_z);
    LocalBasis basis(k);
    return GalerkinCoeffField(model, gpc, mesh, basis);
}

double l2_error_vs(const DgScalarField& f, const GalerkinCoeffField& coeff,
                   const std::function<double(double, double)>& exact) {
    const auto& mesh = coeff.mesh();
    const auto& basis = coeff.basis();
    auto line = gauss_legendre(basis.degree() + 5);
    double acc = 0.0;
    const double jac = 0.25 * mesh.hx() * mesh.hz();
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const int ix = mesh.cell_ix(c), iz = mesh.cell_iz(c);
        for (int b = 0; b < line.size(); ++b)
            for (int a = 0; a < line.size(); ++a) {
                const double x = mesh.x_line(ix) + 0.5 * (line.nodes[a] + 1) * mesh.hx();
                const double z = mesh.z_line(iz) + 0.5 * (line.nodes[b] + 1) * mesh.hz();
                const double d = mode_value(f, mesh, basis, c, 0, x, z) - exact(x, z);
                acc += line.weights[a] * line.weights[b] * jac * d * d;
            }
    }
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("plain projection reduces to L2 moments for the identity weight") {
    auto coeff = make_coeff(unit_speed(), {0, 2, 0, 2}, 3, 2, 1);
    auto fn = mode_coeffs(
        [](double x, double z, const double* y, int) {
            return std::sin(x + 0.3 * z) * (1.0 + 0.4 * y[1]);
        },
        coeff);
    DgScalarField p = project_plain(fn, coeff);
    // direct per-mode L2 moments
    const auto& mesh = coeff.mesh();
    const auto& basis = coeff.basis();
    auto line = gauss_legendre(basis.degree() + 4);
    const double jac = 0.25 * mesh.hx() * mesh.hz();
    const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());
    std::vector<double> modes(coeff.gpc().size());
    for (int c = 0; c < mesh.cell_count(); ++c)
        for (int j = 0; j < basis.dofs(); ++j) {
            std::vector<double> want(coeff.gpc().size(), 0.0);
            for (int b = 0; b < line.size(); ++b)
                for (int a = 0; a < line.size(); ++a) {
                    const double x =
                        mesh.x_line(mesh.cell_ix(c)) + 0.5 * (line.nodes[a] + 1) * mesh.hx();
                    const double z =
                        mesh.z_line(mesh.cell_iz(c)) + 0.5 * (line.nodes[b] + 1) * mesh.hz();
                    fn(x, z, c, modes);
                    const double phi = LocalBasis::eval1(basis.dof_px(j), line.nodes[a]) *
                                       LocalBasis::eval1(basis.dof_pz(j), line.nodes[b]) * scale;
                    for (int m = 0; m < coeff.gpc().size(); ++m)
                        want[m] += line.weights[a] * line.weights[b] * jac * modes[m] * phi;
                }
            for (int m = 0; m < coeff.gpc().size(); ++m)
                CHECK(p.at(c, m, j) == Catch::Approx(want[m]).margin(1e-13));
        }
}

TEST_CASE("projections reproduce fields already in the space") {
    for (int k : {1, 2, 3}) {
        auto coeff = make_coeff(unit_speed(), {0, 2, 0, 2}, 2, k, 1);
        auto f = random_field(coeff.mesh().cell_count(), coeff.gpc().size(), coeff.basis().dofs(),
                              40 + k);
        auto fn = field_modes(f, coeff.mesh(), coeff.basis());
        DgScalarField pp = project_plain(fn, coeff);
        DgScalarField pl = project_plus(fn, coeff);
        for (std::size_t i = 0; i < f.data().size(); ++i) {
            CHECK(pp.data()[i] == Catch::Approx(f.data()[i]).margin(1e-12));
            CHECK(pl.data()[i] == Catch::Approx(f.data()[i]).margin(1e-12));
        }
    }
}

TEST_CASE("idempotence holds with a coupled x-dependent weight") {
    auto coeff = make_coeff(coupled_speed(), {0, 2, 0, 2}, 2, 2, 1);
    auto f = random_field(coeff.mesh().cell_count(), coeff.gpc().size(), coeff.basis().dofs(), 77);
    auto fn = field_modes(f, coeff.mesh(), coeff.basis());
    DgScalarField pp = project_plain(fn, coeff);
    DgScalarField pl = project_plus(fn, coeff);
    for (std::size_t i = 0; i < f.data().size(); ++i) {
        CHECK(pp.data()[i] == Catch::Approx(f.data()[i]).margin(1e-11));
        CHECK(pl.data()[i] == Catch::Approx(f.data()[i]).margin(1e-11));
    }
}

TEST_CASE("plain projection satisfies the A-weighted residual moments") {
    auto coeff = make_coeff(coupled_speed(), {0, 2, 0, 2}, 2, 1, 1);
    const auto& mesh = coeff.mesh();
    const auto& basis = coeff.basis();
    const int m_count = coeff.gpc().size();
    auto fn = mode_coeffs(
        [](double x, double z, const double* y, int) {
            return x * x * x - 0.4 * z * z * z + 0.7 * x * z * z + 0.5 * y[0] * x * x;
        },
        coeff);
    DgScalarField p = project_plain(fn, coeff);
    auto line = gauss_legendre(basis.degree() + 6);
    const double jac = 0.25 * mesh.hx() * mesh.hz();
    const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());
    std::vector<double> modes(m_count);
    for (int c = 0; c < mesh.cell_count(); ++c)
        for (int mp = 0; mp < m_count; ++mp)
            for (int j = 0; j < basis.dofs(); ++j) {
                double resid = 0.0;
                for (int b = 0; b < line.size(); ++b)
                    for (int a = 0; a < line.size(); ++a) {
                        const double x =
                            mesh.x_line(mesh.cell_ix(c)) + 0.5 * (line.nodes[a] + 1) * mesh.hx();
                        const double z =
                            mesh.z_line(mesh.cell_iz(c)) + 0.5 * (line.nodes[b] + 1) * mesh.hz();
                        fn(x, z, c, modes);
                        Eigen::MatrixXd A = coeff.A_in_cell(c, x, z);
                        const double phi = LocalBasis::eval1(basis.dof_px(j), line.nodes[a]) *
                                           LocalBasis::eval1(basis.dof_pz(j), line.nodes[b]) * scale;
                        double diff = 0.0;
                        for (int m = 0; m < m_count; ++m)
                            diff += A(mp, m) *
                                    (modes[m] - mode_value(p, mesh, basis, c, m, x, z));
                        resid += line.weights[a] * line.weights[b] * jac * diff * phi;
                    }
                CHECK(std::abs(resid) < 1e-12);
            }
}

TEST_CASE("plus projection matches trace moments and corner on the inflow edges") {
    auto coeff = make_coeff(coupled_speed(), {0, 2, 0, 2}, 2, 2, 1);
    const auto& mesh = coeff.mesh();
    const auto& basis = coeff.basis();
    const int k = basis.degree();
    const int m_count = coeff.gpc().size();
    auto fn = mode_coeffs(
        [](double x, double z, const double* y, int) {
            return (x * x * x * x - 0.6 * x * z * z + 0.3 * z) * (1.0 + 0.2 * y[0] + 0.1 * y[1]);
        },
        coeff);
    DgScalarField p = project_plus(fn, coeff);  // default convention: left/bottom edges
    auto line = gauss_legendre(k + 6);
    std::vector<double> modes(m_count);
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const double xl = mesh.x_line(mesh.cell_ix(c));
        const double zb = mesh.z_line(mesh.cell_iz(c));
        // A-weighted z-moments of the trace defect on the left edge vanish
        for (int mp = 0; mp < m_count; ++mp)
            for (int qz = 0; qz < k; ++qz) {
                double resid = 0.0;
                for (int e = 0; e < line.size(); ++e) {
                    const double z = zb + 0.5 * (line.nodes[e] + 1) * mesh.hz();
                    fn(xl, z, c, modes);
                    Eigen::MatrixXd A = coeff.A_in_cell(c, xl, z);
                    double diff = 0.0;
                    for (int m = 0; m < m_count; ++m)
                        diff += A(mp, m) * (modes[m] - mode_value(p, mesh, basis, c, m, xl, z));
                    resid += line.weights[e] * 0.5 * mesh.hz() * diff *
                             LocalBasis::eval1(qz, line.nodes[e]);
                }
                CHECK(std::abs(resid) < 1e-12);
            }
        // corner values match outright
        fn(xl, zb, c, modes);
        for (int m = 0; m < m_count; ++m)
            CHECK(mode_value(p, mesh, basis, c, m, xl, zb) ==
                  Catch::Approx(modes[m]).margin(1e-11));
    }
}

TEST_CASE("plus projection under the mirrored convention matches right/top traces") {
    auto coeff = make_coeff(unit_speed(), {0, 2, 0, 2}, 2, 1, 0);
    const auto& mesh = coeff.mesh();
    const auto& basis = coeff.basis();
    auto fn = mode_coeffs(
        [](double x, double z, const double*, int) { return std::sin(x) * std::cos(z); }, coeff);
    FluxConvention conv{FluxSide::plus_minus, FluxSide::plus_minus};
    DgScalarField p = project_plus(fn, coeff, conv);
    std::vector<double> modes(1);
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const double xr = mesh.x_line(mesh.cell_ix(c) + 1);
        const double zt = mesh.z_line(mesh.cell_iz(c) + 1);
        fn(xr, zt, c, modes);
        CHECK(mode_value(p, mesh, basis, c, 0, xr, zt) == Catch::Approx(modes[0]).margin(1e-11));
    }
}

TEST_CASE("pointwise edge traces are matched for data inside the space") {
    auto coeff = make_coeff(unit_speed(), {0, 2, 0, 2}, 2, 2, 1);
    auto f = random_field(coeff.mesh().cell_count(), coeff.gpc().size(), coeff.basis().dofs(), 55);
    auto fn = field_modes(f, coeff.mesh(), coeff.basis());
    DgScalarField p = project_plus(fn, coeff);
    const auto& mesh = coeff.mesh();
    auto line = gauss_legendre(4);
    for (int c = 0; c < mesh.cell_count(); ++c) {
        const double xl = mesh.x_line(mesh.cell_ix(c));
        for (int e = 0; e < line.size(); ++e) {
            const double z =
                mesh.z_line(mesh.cell_iz(c)) + 0.5 * (line.nodes[e] + 1) * mesh.hz();
            for (int m = 0; m < coeff.gpc().size(); ++m)
                CHECK(mode_value(p, mesh, coeff.basis(), c, m, xl, z) ==
                      Catch::Approx(mode_value(f, mesh, coeff.basis(), c, m, xl, z)).margin(1e-11));
        }
    }
}

TEST_CASE("plus projection decays at the optimal rate") {
    for (int k : {1, 2}) {
        double errs[2];
        int idx = 0;
        for (int cells : {16, 32}) {
            auto coeff = make_coeff(unit_speed(), {0, 2, 0, 2}, cells, k, 0);
            auto fn = mode_coeffs(
                [](double x, double z, const double*, int) {
                    return std::sin(M_PI * x) * std::sin(M_PI * z);
                },
                coeff);
            DgScalarField p = project_plus(fn, coeff);
            errs[idx++] = l2_error_vs(p, coeff, [](double x, double z) {
                return std::sin(M_PI * x) * std::sin(M_PI * z);
            });
        }
        const double ratio = errs[0] / errs[1];
        const double target = std::pow(2.0, k + 1);
        CHECK(ratio > target * 0.85);
        CHECK(ratio < target * 1.15);
    }
}
