#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "sgwave/coefficient.hpp"
#include "sgwave/legendre.hpp"
#include "sgwave/presets.hpp"

using namespace sgwave;

namespace {

// Brute-force quadrature of E[a Phi_k Phi_j] with its own Legendre
// evaluation and a 40-point rule per dimension; independent of the
// assembly path under test.
Eigen::MatrixXd oracle_A(const std::function<double(const double*)>& a, const GpcBasis& gpc,
                         int pts = 40) {
    auto line = gauss_legendre(pts);
    const int m_count = gpc.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m_count, m_count);
    std::vector<double> phi(m_count);
    for (int i = 0; i < pts; ++i)
        for (int j = 0; j < pts; ++j) {
            const double y[2] = {line.nodes[i], line.nodes[j]};
            const double w = 0.25 * line.weights[i] * line.weights[j];
            for (int m = 0; m < m_count; ++m) {
                const int* alpha = gpc.indices()[m];
                phi[m] = std::sqrt((2.0 * alpha[0] + 1.0) * (2.0 * alpha[1] + 1.0)) *
                         legendre(alpha[0], y[0]) * legendre(alpha[1], y[1]);
            }
            const double av = a(y);
            for (int k = 0; k < m_count; ++k)
                for (int l = 0; l < m_count; ++l) A(k, l) += w * av * phi[k] * phi[l];
        }
    return A;
}

CoefficientModel constant_speed(double c) {
    CoefficientModel m;
    m.a2 = [c](double, double, const double*, int) { return c * c; };
    m.x_independent = true;
    m.a_min = m.a_max = c;
    return m;
}

}  // namespace

TEST_CASE("constant coefficient gives a scaled identity") {
    GpcBasis gpc(2, 3);
    auto m = constant_speed(2.5);
    Eigen::MatrixXd A = assemble_A(m, gpc, 0.4, 0.7);
    CHECK((A - 2.5 * Eigen::MatrixXd::Identity(gpc.size(), gpc.size())).cwiseAbs().maxCoeff() <
          1e-13);
}

TEST_CASE("test1 with zero noise has unit speed") {
    auto preset = preset_test1(0.0);
    GpcBasis gpc(2, 4);
    Eigen::MatrixXd A = assemble_A(preset.model, gpc, 1.0, 1.0);
    CHECK((A - Eigen::MatrixXd::Identity(15, 15)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("test1 assembly matches the brute-force quadrature oracle") {
    auto preset = preset_test1(0.01);
    GpcBasis gpc(2, 4);
    Eigen::MatrixXd A = assemble_A(preset.model, gpc, 0.3, 1.2);
    auto a2 = preset.model.a2;
    Eigen::MatrixXd ref =
        oracle_A([&](const double* y) { return std::sqrt(a2(0.3, 1.2, y, 0)); }, gpc);
    CHECK((A - ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gradient matrices vanish for the x-independent presets") {
    GpcBasis gpc(2, 2);
    for (auto* name : {"test1", "test2"}) {
        auto preset = build_preset(name, 0.01);
        const double x = std::string(name) == "test2" ? -0.5 : 0.5;
        auto [ax, az] = assemble_grad_A(preset.model, gpc, x, 0.25);
        CHECK(ax.cwiseAbs().maxCoeff() == 0.0);
        CHECK(az.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("linear-in-x coefficient has identity-scaled gradient") {
    const double c = 1.7;
    CoefficientModel m;
    m.x_independent = false;
    m.a2 = [c](double x, double, const double*, int) {
        const double a = (1.0 + x) * c;
        return a * a;
    };
    m.grad_a = [c](double, double, const double*, int) -> std::array<double, 2> {
        return {c, 0.0};
    };
    m.a_min = c;
    m.a_max = 3 * c;
    GpcBasis gpc(2, 2);
    auto [ax, az] = assemble_grad_A(m, gpc, 0.5, 0.5);
    CHECK((ax - c * Eigen::MatrixXd::Identity(gpc.size(), gpc.size())).cwiseAbs().maxCoeff() <
          1e-13);
    CHECK(az.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("finite differences of A match the assembled gradient") {
    CoefficientModel m;
    m.x_independent = false;
    m.a2 = [](double x, double z, const double* y, int) {
        const double a = 1.5 + 0.3 * std::sin(x + 0.5 * z) + 0.1 * y[0];
        return a * a;
    };
    m.grad_a = [](double x, double z, const double*, int) -> std::array<double, 2> {
        return {0.3 * std::cos(x + 0.5 * z), 0.15 * std::cos(x + 0.5 * z)};
    };
    m.a_min = 1.0;
    m.a_max = 2.0;
    GpcBasis gpc(1, 3);
    const double x = 0.7, z = 0.4, h = 1e-5;
    auto [ax, az] = assemble_grad_A(m, gpc, x, z);
    Eigen::MatrixXd fdx = (assemble_A(m, gpc, x + h, z) - assemble_A(m, gpc, x - h, z)) / (2 * h);
    Eigen::MatrixXd fdz = (assemble_A(m, gpc, x, z + h) - assemble_A(m, gpc, x, z - h)) / (2 * h);
    CHECK((ax - fdx).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((az - fdz).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("A is symmetric positive definite at random points") {
    std::mt19937 rng(17);
    for (auto* name : {"test1", "test2"}) {
        auto preset = build_preset(name, 0.01);
        GpcBasis gpc(2, 4);
        std::uniform_real_distribution<double> dx(preset.domain.x_lo, preset.domain.x_hi);
        std::uniform_real_distribution<double> dz(preset.domain.z_lo, preset.domain.z_hi);
        for (int i = 0; i < 100; ++i) {
            double x = dx(rng);
            if (std::abs(x) < 1e-9 && std::string(name) == "test2") x += 0.1;
            Eigen::MatrixXd A = assemble_A(preset.model, gpc, x, dz(rng));
            CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            CHECK(llt.info() == Eigen::Success);
        }
    }
}

TEST_CASE("a nonpositive squared speed is rejected") {
    CoefficientModel m;
    m.a2 = [](double x, double, const double*, int) { return x - 1.0; };
    m.a_min = 0.1;
    m.a_max = 1.0;
    GpcBasis gpc(1, 1);
    double y = 0.0;
    CHECK_THROWS_AS(m.a(0.5, 0.5, &y), std::domain_error);
    CHECK_THROWS_AS(assemble_A(m, gpc, 0.5, 0.5), std::domain_error);
    CHECK_NOTHROW(assemble_A(m, gpc, 1.5, 0.5));
}

TEST_CASE("interface evaluation requires a side") {
    auto preset = preset_test2(0.01);
    GpcBasis gpc(2, 1);
    CHECK_THROWS_AS(assemble_A(preset.model, gpc, 0.0, 0.5), std::invalid_argument);
    Eigen::MatrixXd left = assemble_A(preset.model, gpc, 0.0, 0.5, Side::minus);
    Eigen::MatrixXd right = assemble_A(preset.model, gpc, 0.0, 0.5, Side::plus);
    CHECK((left - right).cwiseAbs().maxCoeff() > 1e-3);  // genuinely one-sided
}

TEST_CASE("A entries are converged in the y-quadrature resolution") {
    for (auto* name : {"test1", "test2"}) {
        auto preset = build_preset(name, 0.01);
        const int order = 4;
        GpcBasis g5(2, order, order + 5), g10(2, order, order + 10);
        const double x = std::string(name) == "test2" ? 0.5 : 1.0;
        Eigen::MatrixXd a5 = assemble_A(preset.model, g5, x, 0.5);
        Eigen::MatrixXd a10 = assemble_A(preset.model, g10, x, 0.5);
        CHECK((a5 - a10).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("preset exact solutions evaluate correctly") {
    auto t1 = build_preset("test1", 0.0);
    double y0[2] = {0.0, 0.0};
    CHECK(t1.u(0.0, 0.5, 0.5, y0) == Catch::Approx(1.0));

    auto t1n = build_preset("test1", 0.01);
    double y1[2] = {1.0, 1.0};
    CHECK(t1n.model.a2(0.3, 0.4, y1, 0) == Catch::Approx(2.0 / (2.0 * 1.01 * 1.01)));
    CHECK(t1n.model.a2(0.3, 0.4, y1, 0) == Catch::Approx(0.9802960494).epsilon(1e-9));

    auto t2 = build_preset("test2", 0.0);
    const double x = -0.37, z = 0.81, t = 0.13;
    CHECK(t2.u(t, x, z, y0) ==
          Catch::Approx(std::cos(3 * M_PI * t) * std::sin(3 * M_PI * x) * std::sin(3 * M_PI * z)));
    const double xr = 0.44;
    CHECK(t2.u(t, xr, z, y0) ==
          Catch::Approx(std::cos(3 * M_PI * t) * std::sin(5 * M_PI * xr) * std::sin(3 * M_PI * z)));

    CHECK_THROWS_AS(build_preset("test3", 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_preset("test1", -0.1), std::invalid_argument);
}

TEST_CASE("preset q equals a grad u by finite differences") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dy(-1.0, 1.0);
    for (auto* name : {"test1", "test2"}) {
        auto preset = build_preset(name, 0.01);
        std::uniform_real_distribution<double> dx(preset.domain.x_lo + 0.05,
                                                  preset.domain.x_hi - 0.05);
        for (int i = 0; i < 20; ++i) {
            double x = dx(rng), z = dx(rng), t = 0.2 * dy(rng);
            if (std::string(name) == "test2" && std::abs(x) < 0.02) x = 0.3;
            double y[2] = {dy(rng), dy(rng)};
            const int region = preset.model.region_of(x, z);
            const double a = preset.model.a(x, z, y);
            const double h = 1e-6 * std::max(1.0, std::abs(x));
            auto q = preset.q(t, x, z, y);
            const double dux = (preset.u(t, x + h, z, y) - preset.u(t, x - h, z, y)) / (2 * h);
            const double duz = (preset.u(t, x, z + h, y) - preset.u(t, x, z - h, y)) / (2 * h);
            CHECK(q[0] == Catch::Approx(a * dux).margin(1e-6 * (1 + std::abs(q[0]))));
            CHECK(q[1] == Catch::Approx(a * duz).margin(1e-6 * (1 + std::abs(q[1]))));
            (void)region;
        }
    }
}

TEST_CASE("per-region cache agrees with direct assembly") {
    auto preset = preset_test2(0.01);
    GpcBasis gpc(2, 2);
    const double iface[] = {0.0};
    Mesh2D mesh(preset.domain, 4, 4, iface);
    LocalBasis basis(1);
    GalerkinCoeffField field(preset.model, gpc, mesh, basis);
    REQUIRE(field.per_region());
    // cell 0 lies in the left region, cell 2 in the right one
    Eigen::MatrixXd left = assemble_A(preset.model, gpc, -0.5, 0.5);
    Eigen::MatrixXd right = assemble_A(preset.model, gpc, 0.5, 0.5);
    CHECK((field.volume_A(0, 0) - left).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((field.volume_A(2, 0) - right).cwiseAbs().maxCoeff() < 1e-14);
    // the interface edge sees both one-sided traces
    CHECK((field.edge_A(1, CellEdge::right, 0) - left).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((field.edge_A(2, CellEdge::left, 0) - right).cwiseAbs().maxCoeff() < 1e-14);
}
