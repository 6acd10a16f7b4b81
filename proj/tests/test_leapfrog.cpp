#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oracle.hpp"
#include "sgwave/diagnostics.hpp"
#include "sgwave/leapfrog.hpp"
#include "test_util.hpp"

using namespace sgwave;
using testutil::mode_value;

namespace {

struct Setup {
    ExactSolutionPreset preset;
    LdgOperator op;
};

Setup make_setup(const std::string& name, double delta, int cells, int k, int order,
                 bool homogeneous = false) {
    ExactSolutionPreset preset = build_preset(name, delta);
    GpcBasis gpc(2, order);
    Mesh2D mesh(preset.domain, cells, cells, preset.model.interfaces_x,
                preset.model.interfaces_z);
    LocalBasis basis(k);
    GalerkinCoeffField coeff(preset.model, gpc, mesh, basis);
    BoundaryData bc = homogeneous ? homogeneous_bc() : exact_bc(preset);
    LdgOperator op(std::move(coeff), {}, std::move(bc));
    return Setup{std::move(preset), std::move(op)};
}

ExactSolutionPreset zero_preset() {
    ExactSolutionPreset p = preset_test1(0.0);
    p.u0 = [](double, double, const double*, int) { return 0.0; };
    p.q0 = [](double, double, const double*, int) -> std::array<double, 2> { return {0, 0}; };
    return p;
}

}  // namespace

TEST_CASE("zero data produces the zero trajectory with zero energy") {
    auto s = make_setup("test1", 0.0, 4, 1, 1, true);
    ExactSolutionPreset zp = zero_preset();
    SolverState st = initialize(zp, s.op, 1e-3);
    CHECK(st.v_prev.max_abs() == 0.0);
    CHECK(st.v_curr.max_abs() == 0.0);
    for (int i = 0; i < 5; ++i) step(st, s.op);
    CHECK(st.v_curr.max_abs() == 0.0);
    CHECK(st.S_curr.x.max_abs() == 0.0);
    SolverState next = st;
    step(next, s.op);
    EnergyRecord rec = discrete_energy(st, next);
    CHECK(rec.fully == 0.0);
    CHECK(rec.alt == 0.0);
    CHECK(rec.semi == 0.0);
}

TEST_CASE("deterministic data excites only the mean mode") {
    auto s = make_setup("test1", 0.0, 4, 2, 4);
    InitialData init = project_initial(s.preset, s.op);
    REQUIRE(init.v0.modes() == 15);
    double dormant = 0.0, active = 0.0;
    for (int c = 0; c < init.v0.cells(); ++c)
        for (int m = 0; m < init.v0.modes(); ++m)
            for (int j = 0; j < init.v0.dofs(); ++j) {
                if (m == 0)
                    active = std::max(active, std::abs(init.v0.at(c, m, j)));
                else
                    dormant = std::max(dormant, std::abs(init.v0.at(c, m, j)));
            }
    CHECK(active > 0.1);
    CHECK(dormant < 1e-13);
}

TEST_CASE("initial projection error decays at second order for linear elements") {
    double errs[2];
    int idx = 0;
    for (int cells : {4, 8}) {
        auto s = make_setup("test1", 0.01, cells, 1, 4);
        InitialData init = project_initial(s.preset, s.op);
        ErrorEvaluator eval(s.preset, s.op.coeff());
        DgVectorField S0 = s.op.compute_S(init.v0, 0.0);
        errs[idx++] = eval.norms(init.v0, S0, 0.0).u;
    }
    CHECK(errs[0] / errs[1] == Catch::Approx(4.0).epsilon(0.15));
}

TEST_CASE("two steps agree with the dense leap-frog oracle") {
    auto s = make_setup("test1", 0.0, 2, 1, 0);
    const double dt = 1e-3;
    SolverState st = initialize(s.preset, s.op, dt);

    oracle::Context cx;
    cx.mesh = s.op.mesh();
    cx.k = 1;
    cx.modes = 1;
    cx.A = [&](double x, double z, int cell) { return s.op.coeff().A_in_cell(cell, x, z); };
    cx.g_modes = [&](double t, double x, double z) {
        Eigen::VectorXd m(1);
        std::vector<double> buf(1);
        s.op.gpc().project([&](const double* y) { return s.preset.u(t, x, z, y); },
                           std::span<double>(buf));
        m[0] = buf[0];
        return m;
    };

    // oracle trajectory from the same projected start
    Eigen::VectorXd v0 = oracle::from_field(cx, st.v_prev, s.op.basis());
    Eigen::VectorXd v1 = oracle::from_field(cx, st.v_curr, s.op.basis());
    for (int n = 1; n <= 2; ++n) {
        auto [s1, s2] = oracle::compute_S(cx, v1, n * dt);
        Eigen::VectorXd acc = oracle::compute_accel(cx, s1, s2);
        Eigen::VectorXd v2 = 2.0 * v1 - v0 + dt * dt * acc;
        v0.swap(v1);
        v1.swap(v2);
        step(st, s.op);
    }
    // compare at scattered points
    const auto& mesh = s.op.mesh();
    for (int c = 0; c < mesh.cell_count(); ++c)
        for (double fx : {0.3, 0.8})
            for (double fz : {0.25, 0.7}) {
                const double x = mesh.x_line(mesh.cell_ix(c)) + fx * mesh.hx();
                const double z = mesh.z_line(mesh.cell_iz(c)) + fz * mesh.hz();
                const double got = mode_value(st.v_curr, mesh, s.op.basis(), c, 0, x, z);
                const double ref = oracle::mode_values(cx, v1, c, x, z)[0];
                CHECK(got == Catch::Approx(ref).margin(1e-12));
            }
}

TEST_CASE("fully discrete energy equals its cross-term form") {
    auto s = make_setup("test1", 0.01, 4, 2, 2);
    const double dt = suggest_dt(s.preset.model, s.op.mesh(), 2);
    SolverState st = initialize(s.preset, s.op, dt);
    SolverState prev = st;
    for (int n = 0; n < 25; ++n) {
        step(st, s.op);
        EnergyRecord rec = discrete_energy(prev, st);
        CHECK(rec.fully == Catch::Approx(rec.alt).epsilon(1e-12));
        CHECK(rec.fully > 0.0);
        prev = st;
    }
}

TEST_CASE("discrete energy is conserved to round-off with homogeneous data") {
    for (auto conv : {FluxSide::minus_plus, FluxSide::plus_minus}) {
        ExactSolutionPreset preset = build_preset("test1", 0.0);
        GpcBasis gpc(2, 1);
        Mesh2D mesh(preset.domain, 6, 6);
        LocalBasis basis(2);
        GalerkinCoeffField coeff(preset.model, gpc, mesh, basis);
        LdgOperator op(std::move(coeff), {conv, conv}, homogeneous_bc());
        const double dt = suggest_dt(preset.model, mesh, 2);
        SolverState st = initialize(preset, op, dt);
        EnergyTrace trace;
        SolverState prev = st;
        for (int n = 0; n < 300; ++n) {
            step(st, op);
            trace.records.push_back(discrete_energy(prev, st));
            prev = st;
        }
        CHECK(trace.max_rel_drift() < 1e-11);
        CHECK(trace.max_identity_gap() < 1e-12);
    }
}

TEST_CASE("leap-frog is time reversible") {
    auto s = make_setup("test1", 0.0, 4, 1, 1, true);
    const double dt = suggest_dt(s.preset.model, s.op.mesh(), 1);
    SolverState st = initialize(s.preset, s.op, dt);
    DgScalarField v0 = st.v_prev;
    for (int n = 0; n < 100; ++n) step(st, s.op);
    // reverse time: the reflected sequence satisfies the same recurrence,
    // so 100 more steps walk back from (v^101, v^100) to v^0
    std::swap(st.v_prev, st.v_curr);
    st.S_curr = s.op.compute_S(st.v_curr, 0.0);
    for (int n = 0; n < 100; ++n) step(st, s.op);
    const double scale = std::sqrt(v0.squared_norm());
    double diff = 0.0;
    for (std::size_t i = 0; i < v0.data().size(); ++i)
        diff = std::max(diff, std::abs(st.v_curr.data()[i] - v0.data()[i]));
    CHECK(diff / scale < 1e-10);
}

TEST_CASE("mean-mode trajectory matches the single-mode run when noise is off") {
    const double dt = 2e-3;
    auto full = make_setup("test1", 0.0, 4, 1, 4);   // M = 15, A = I to round-off
    auto small = make_setup("test1", 0.0, 4, 1, 0);  // M = 1
    SolverState a = initialize(full.preset, full.op, dt);
    SolverState b = initialize(small.preset, small.op, dt);
    for (int n = 0; n < 50; ++n) {
        step(a, full.op);
        step(b, small.op);
    }
    double mean_gap = 0.0, dormant = 0.0;
    for (int c = 0; c < a.v_curr.cells(); ++c)
        for (int m = 0; m < a.v_curr.modes(); ++m)
            for (int j = 0; j < a.v_curr.dofs(); ++j) {
                if (m == 0)
                    mean_gap = std::max(mean_gap,
                                        std::abs(a.v_curr.at(c, 0, j) - b.v_curr.at(c, 0, j)));
                else
                    dormant = std::max(dormant, std::abs(a.v_curr.at(c, m, j)));
            }
    CHECK(mean_gap < 1e-13);
    CHECK(dormant < 1e-13);
}

TEST_CASE("halving dt quarters the time-integration error") {
    auto s = make_setup("test1", 0.0, 4, 1, 0);
    const double T = 0.2;
    auto solve_at = [&](double dt) {
        SolverState st = initialize(s.preset, s.op, dt);
        while (st.n * st.dt < T - 1e-12) step(st, s.op);
        return st.v_curr;
    };
    DgScalarField ref = solve_at(T / 2048);
    auto err = [&](const DgScalarField& v) {
        double e = 0.0;
        for (std::size_t i = 0; i < v.data().size(); ++i) {
            const double d = v.data()[i] - ref.data()[i];
            e += d * d;
        }
        return std::sqrt(e);
    };
    const double e1 = err(solve_at(T / 64));
    const double e2 = err(solve_at(T / 128));
    CHECK(e1 / e2 == Catch::Approx(4.0).epsilon(0.2));
}

TEST_CASE("suggested time step") {
    CoefficientModel unit;
    unit.a2 = [](double, double, const double*, int) { return 1.0; };
    unit.a_min = unit.a_max = 1.0;
    Mesh2D mesh({0, 2, 0, 2}, 4, 4);
    CHECK(suggest_dt(unit, mesh, 1) == Catch::Approx(0.1 * 0.5 / 3.0).epsilon(1e-12));
    CHECK(suggest_dt(unit, mesh, 1) / suggest_dt(unit, mesh, 3) == Catch::Approx(7.0 / 3.0));
    // the suggestion keeps the scheme stable and the energy nonnegative
    for (auto* name : {"test1", "test2"}) {
        auto s = make_setup(name, 0.01, 4, 1, 1);
        SolverState st = initialize(s.preset, s.op, suggest_dt(s.preset.model, s.op.mesh(), 1));
        SolverState prev = st;
        for (int n = 0; n < 1000; ++n) {
            step(st, s.op);
            REQUIRE(discrete_energy(prev, st).fully >= 0.0);
            prev = st;
        }
    }
}

TEST_CASE("a wildly unstable dt raises the instability error") {
    auto s = make_setup("test1", 0.0, 8, 2, 0, true);
    SolverState st = initialize(s.preset, s.op, 1.0);  // far beyond the restriction
    CHECK_THROWS_AS(
        [&] {
            for (int n = 0; n < 200; ++n) step(st, s.op);
        }(),
        InstabilityError);
    CHECK_THROWS_AS(bootstrap(project_initial(s.preset, s.op), s.op, -1.0), std::invalid_argument);
}
