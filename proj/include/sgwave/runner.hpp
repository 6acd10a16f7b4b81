#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "sgwave/config.hpp"
#include "sgwave/diagnostics.hpp"
#include "sgwave/leapfrog.hpp"

namespace sgwave {

inline constexpr const char* kVersion = "sgwave 1.0.0";

/// Everything needed to run one problem instance. The operator owns
/// value copies of mesh/basis/gpc/coefficients, so a Problem is freely
/// movable and thread-confined.
struct Problem {
    ExactSolutionPreset preset;
    LdgOperator op;
};

inline CoefficientModel perturb_model(const CoefficientModel& base, double eps) {
    CoefficientModel m = base;
    auto a2 = base.a2;
    m.a2 = [a2, eps](double x, double z, const double* y, int r) {
        return a2(x, z, y, r) + eps;
    };
    m.a_min = std::sqrt(base.a_min * base.a_min + eps);
    m.a_max = std::sqrt(base.a_max * base.a_max + eps);
    return m;
}

inline Problem make_problem(const RunConfig& cfg, int cells, int gpc_order = -1,
                            double coeff_shift = 0.0) {
    const int order = gpc_order < 0 ? cfg.gpc_order : gpc_order;
    ExactSolutionPreset preset = build_preset(cfg.preset, cfg.delta);
    GpcBasis gpc(cfg.gpc_dims, order, cfg.resolved_y_quad(order));
    Mesh2D mesh(preset.domain, cells, cells, preset.model.interfaces_x,
                preset.model.interfaces_z);
    LocalBasis basis(cfg.degree, cfg.resolved_volume_quad(), cfg.resolved_edge_quad());
    CoefficientModel model =
        coeff_shift == 0.0 ? preset.model : perturb_model(preset.model, coeff_shift);
    GalerkinCoeffField coeff(model, gpc, mesh, basis);
    BoundaryData bc = (cfg.boundary == "exact") ? exact_bc(preset) : homogeneous_bc();
    LdgOperator op(std::move(coeff), cfg.flux, std::move(bc));
    return Problem{std::move(preset), std::move(op)};
}

/// Resolved step size and count for one mesh level: a configured dt is
/// used as-is; otherwise suggest_dt shrunk so an integer step count lands
/// exactly on t_final.
struct TimeGrid {
    double dt;
    long steps;
    bool suggested;
};

inline TimeGrid resolve_time(const RunConfig& cfg, const CoefficientModel& model,
                             const Mesh2D& mesh) {
    if (cfg.dt > 0) {
        long steps = std::lround(cfg.t_final / cfg.dt);
        if (steps < 1) steps = 1;
        return {cfg.dt, steps, false};
    }
    const double dt0 = suggest_dt(model, mesh, cfg.degree, cfg.dt_safety);
    long steps = static_cast<long>(std::ceil(cfg.t_final / dt0));
    if (steps < 1) steps = 1;
    return {cfg.t_final / steps, steps, true};
}

/// Run the leap-frog over `steps` steps; the observer sees every state
/// including the initial one: obs(n, v, S, t).
template <class Obs>
void run_leapfrog(const Problem& prob, double dt, long steps, int init_quad, Obs&& obs) {
    InitialData init = project_initial(prob.preset, prob.op, init_quad);
    DgVectorField S0 = prob.op.compute_S(init.v0, 0.0);
    obs(0L, init.v0, S0, 0.0);
    SolverState st = bootstrap(std::move(init), prob.op, dt);
    obs(st.n, st.v_curr, st.S_curr, st.t);
    while (st.n < steps) {
        step(st, prob.op);
        obs(st.n, st.v_curr, st.S_curr, st.t);
    }
}

// ---------------------------------------------------------------------------
// experiment results

struct ConvergenceRow {
    int cells = 0;
    double h = 0.0;
    ErrorNorms err;
    TimeGrid time{};
};

struct SweepRow {
    int order = 0;
    int modes = 0;
    double e_u = 0.0;
};

struct LongTimeSample {
    double t = 0.0;
    ErrorNorms err;
};

struct PerturbationSeries {
    double eps = 0.0;
    std::vector<double> t;
    std::vector<double> D;
    double d0 = 0.0;
    double max_ratio = 0.0;  // max_t D/(1+t), including t = 0
};

struct RunArtifacts {
    std::vector<ConvergenceRow> convergence;
    EnergyTrace energy;
    TimeGrid energy_time{};
    std::vector<SweepRow> sweep;
    std::vector<LongTimeSample> long_time;
    double long_time_exponent = 0.0;
    std::vector<PerturbationSeries> perturbation;
    nlohmann::ordered_json summary;
};

// ---------------------------------------------------------------------------
// experiments

inline ConvergenceRow run_convergence_level(const RunConfig& cfg, int cells) {
    Problem prob = make_problem(cfg, cells);
    const TimeGrid tg = resolve_time(cfg, prob.op.coeff().model(), prob.op.mesh());
    ErrorEvaluator eval(prob.preset, prob.op.coeff(), cfg.resolved_error_quad());
    ConvergenceRow row;
    row.cells = cells;
    row.h = prob.op.mesh().hx();
    row.time = tg;
    run_leapfrog(prob, tg.dt, tg.steps, cfg.resolved_init_quad(),
                 [&](long, const DgScalarField& v, const DgVectorField& S, double t) {
                     ErrorNorms e = eval.norms(v, S, t);
                     row.err.u = std::max(row.err.u, e.u);
                     row.err.qx = std::max(row.err.qx, e.qx);
                     row.err.qy = std::max(row.err.qy, e.qy);
                 });
    return row;
}

inline std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg, int workers) {
    const int n = static_cast<int>(cfg.mesh_cells.size());
    std::vector<ConvergenceRow> rows(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                rows[i] = run_convergence_level(cfg, cfg.mesh_cells[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int pool = std::max(1, std::min(workers, n));
    if (pool == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < pool; ++i) threads.emplace_back(work);
        for (auto& th : threads) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

inline std::pair<EnergyTrace, TimeGrid> run_energy(const RunConfig& cfg) {
    Problem prob = make_problem(cfg, cfg.mesh_cells.front());
    const TimeGrid tg = resolve_time(cfg, prob.op.coeff().model(), prob.op.mesh());
    EnergyTrace trace;
    trace.records.reserve(tg.steps);

    InitialData init = project_initial(prob.preset, prob.op, cfg.resolved_init_quad());
    SolverState ghost;  // stand-in state at n = 0 so the first record covers v^0 -> v^1
    ghost.dt = tg.dt;
    ghost.v_prev = init.v0;
    ghost.v_curr = init.v0;
    ghost.S_curr = prob.op.compute_S(init.v0, 0.0);
    SolverState st = bootstrap(std::move(init), prob.op, tg.dt);
    trace.records.push_back(discrete_energy(ghost, st));
    SolverState prev = st;
    while (st.n < tg.steps) {
        step(st, prob.op);
        trace.records.push_back(discrete_energy(prev, st));
        prev = st;
    }
    return {std::move(trace), tg};
}

inline std::vector<SweepRow> run_gpc_sweep(const RunConfig& cfg) {
    std::vector<int> orders = cfg.sweep_orders;
    if (orders.empty()) orders = {0, 1, 2, 3, 4};
    std::vector<SweepRow> rows;
    for (int p : orders) {
        Problem prob = make_problem(cfg, cfg.mesh_cells.front(), p);
        const TimeGrid tg = resolve_time(cfg, prob.op.coeff().model(), prob.op.mesh());
        ErrorEvaluator eval(prob.preset, prob.op.coeff(), cfg.resolved_error_quad());
        SweepRow row;
        row.order = p;
        row.modes = prob.op.gpc().size();
        run_leapfrog(prob, tg.dt, tg.steps, cfg.resolved_init_quad(),
                     [&](long, const DgScalarField& v, const DgVectorField& S, double t) {
                         row.e_u = std::max(row.e_u, eval.norms(v, S, t).u);
                     });
        rows.push_back(row);
    }
    return rows;
}

inline std::pair<std::vector<LongTimeSample>, double> run_long_time(const RunConfig& cfg) {
    Problem prob = make_problem(cfg, cfg.mesh_cells.front());
    const TimeGrid tg = resolve_time(cfg, prob.op.coeff().model(), prob.op.mesh());
    ErrorEvaluator eval(prob.preset, prob.op.coeff(), cfg.resolved_error_quad());
    std::vector<LongTimeSample> samples;
    run_leapfrog(prob, tg.dt, tg.steps, cfg.resolved_init_quad(),
                 [&](long n, const DgScalarField& v, const DgVectorField& S, double t) {
                     if (n % cfg.stride != 0 && n != tg.steps) return;
                     samples.push_back({t, eval.norms(v, S, t)});
                 });
    std::vector<double> ts, es;
    for (const auto& s : samples) {
        ts.push_back(s.t);
        es.push_back(s.err.u);
    }
    const double slope = envelope_exponent(ts, es);
    return {std::move(samples), slope};
}

inline PerturbationSeries run_perturbation_level(const RunConfig& cfg, double eps) {
    Problem base = make_problem(cfg, cfg.mesh_cells.front());
    Problem pert = make_problem(cfg, cfg.mesh_cells.front(), -1, eps);
    const TimeGrid tg = resolve_time(cfg, base.op.coeff().model(), base.op.mesh());

    PerturbationSeries series;
    series.eps = eps;

    InitialData ia = project_initial(base.preset, base.op, cfg.resolved_init_quad());
    InitialData ib = project_initial(pert.preset, pert.op, cfg.resolved_init_quad());
    DgVectorField Sa = base.op.compute_S(ia.v0, 0.0);
    DgVectorField Sb = pert.op.compute_S(ib.v0, 0.0);
    series.d0 = initial_distance(ia, Sa, ib, Sb);
    series.t.push_back(0.0);
    series.D.push_back(series.d0);
    series.max_ratio = series.d0;

    SolverState sa = bootstrap(std::move(ia), base.op, tg.dt);
    SolverState sb = bootstrap(std::move(ib), pert.op, tg.dt);
    auto record = [&](const SolverState& x, const SolverState& y) {
        const double d = state_distance(x, y);
        series.t.push_back(x.t);
        series.D.push_back(d);
        series.max_ratio = std::max(series.max_ratio, d / (1.0 + x.t));
    };
    record(sa, sb);
    while (sa.n < tg.steps) {
        step(sa, base.op);
        step(sb, pert.op);
        if (sa.n % cfg.stride == 0 || sa.n == tg.steps) record(sa, sb);
    }
    return series;
}

// ---------------------------------------------------------------------------
// output

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6E", v);
    return buf;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10G", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

/// Run the configured experiment and collect results in memory.
inline RunArtifacts run_experiment(const RunConfig& cfg, int workers = 1) {
    cfg.validate();
    RunArtifacts art;
    if (cfg.experiment == "convergence") {
        art.convergence = run_convergence(cfg, workers);
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < art.convergence.size(); ++i) {
            const auto& r = art.convergence[i];
            nlohmann::ordered_json jr;
            jr["cells"] = r.cells;
            jr["h"] = r.h;
            jr["dt"] = r.time.dt;
            jr["steps"] = r.time.steps;
            jr["dt_from_suggestion"] = r.time.suggested;
            jr["e_u"] = r.err.u;
            jr["e_qx"] = r.err.qx;
            jr["e_qy"] = r.err.qy;
            if (i > 0) {
                jr["order_u"] = convergence_order(art.convergence[i - 1].err.u, r.err.u);
                jr["order_qx"] = convergence_order(art.convergence[i - 1].err.qx, r.err.qx);
                jr["order_qy"] = convergence_order(art.convergence[i - 1].err.qy, r.err.qy);
            }
            rows.push_back(jr);
        }
        art.summary["rows"] = rows;
    } else if (cfg.experiment == "energy") {
        auto [trace, tg] = run_energy(cfg);
        art.energy = std::move(trace);
        art.energy_time = tg;
        art.summary["steps"] = tg.steps;
        art.summary["dt"] = tg.dt;
        art.summary["dt_from_suggestion"] = tg.suggested;
        art.summary["max_rel_drift"] = art.energy.max_rel_drift();
        art.summary["max_identity_gap"] = art.energy.max_identity_gap();
    } else if (cfg.experiment == "gpc_sweep") {
        art.sweep = run_gpc_sweep(cfg);
        std::vector<double> es;
        for (const auto& r : art.sweep) es.push_back(r.e_u);
        art.summary["plateau_index"] = plateau_index(es);
    } else if (cfg.experiment == "long_time") {
        auto [samples, slope] = run_long_time(cfg);
        art.long_time = std::move(samples);
        art.long_time_exponent = slope;
        double bound = 0.0;
        for (const auto& s : art.long_time) bound = std::max(bound, s.err.u / (1.0 + s.t));
        art.summary["envelope_exponent"] = slope;
        art.summary["sup_e_over_1pt"] = bound;
    } else {
        for (double eps : cfg.epsilons) art.perturbation.push_back(run_perturbation_level(cfg, eps));
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& s : art.perturbation) {
            nlohmann::ordered_json jr;
            jr["eps"] = s.eps;
            jr["D0"] = s.d0;
            jr["max_D_over_1pt"] = s.max_ratio;
            rows.push_back(jr);
        }
        art.summary["levels"] = rows;
    }
    return art;
}

/// Write the experiment CSV and the JSON run manifest. The CSV bytes are
/// a pure function of the config; the manifest additionally carries
/// timing, which is allowed to differ between runs.
inline std::vector<std::string> write_outputs(const RunArtifacts& art, const RunConfig& cfg,
                                              const std::string& out_dir, double wall_seconds) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> files;
    auto open = [&](const std::string& name) {
        files.push_back((fs::path(out_dir) / name).string());
        std::ofstream out(files.back(), std::ios::binary);
        if (!out) throw std::runtime_error("cannot write output file " + files.back());
        return out;
    };

    using detail::num;
    using detail::sci;
    if (cfg.experiment == "convergence") {
        auto out = open("errors.csv");
        out << "h,e_u,order_u,e_qx,order_qx,e_qy,order_qy\r\n";
        for (std::size_t i = 0; i < art.convergence.size(); ++i) {
            const auto& r = art.convergence[i];
            std::string ou, oqx, oqy;
            if (i > 0) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f",
                              convergence_order(art.convergence[i - 1].err.u, r.err.u));
                ou = buf;
                std::snprintf(buf, sizeof(buf), "%.4f",
                              convergence_order(art.convergence[i - 1].err.qx, r.err.qx));
                oqx = buf;
                std::snprintf(buf, sizeof(buf), "%.4f",
                              convergence_order(art.convergence[i - 1].err.qy, r.err.qy));
                oqy = buf;
            }
            out << num(r.h) << ',' << sci(r.err.u) << ',' << ou << ',' << sci(r.err.qx) << ','
                << oqx << ',' << sci(r.err.qy) << ',' << oqy << "\r\n";
        }
    } else if (cfg.experiment == "energy") {
        auto out = open("energy.csv");
        out << "n,t,E_fully,E_alt,E_semi\r\n";
        for (const auto& r : art.energy.records)
            out << r.n << ',' << num(r.n * art.energy_time.dt) << ',' << sci(r.fully) << ','
                << sci(r.alt) << ',' << sci(r.semi) << "\r\n";
    } else if (cfg.experiment == "gpc_sweep") {
        auto out = open("sweep.csv");
        out << "P,M,e_u,ratio\r\n";
        for (std::size_t i = 0; i < art.sweep.size(); ++i) {
            const auto& r = art.sweep[i];
            std::string ratio;
            if (i > 0 && art.sweep[i - 1].e_u > 0) ratio = sci(r.e_u / art.sweep[i - 1].e_u);
            out << r.order << ',' << r.modes << ',' << sci(r.e_u) << ',' << ratio << "\r\n";
        }
    } else if (cfg.experiment == "long_time") {
        auto out = open("long_time.csv");
        out << "t,e_u,e_qx,e_qy,e_u_over_1pt\r\n";
        for (const auto& s : art.long_time)
            out << num(s.t) << ',' << sci(s.err.u) << ',' << sci(s.err.qx) << ',' << sci(s.err.qy)
                << ',' << sci(s.err.u / (1.0 + s.t)) << "\r\n";
    } else {
        auto out = open("perturbation.csv");
        out << "eps,t,D,D_over_1pt\r\n";
        for (const auto& s : art.perturbation)
            for (std::size_t i = 0; i < s.t.size(); ++i)
                out << sci(s.eps) << ',' << num(s.t[i]) << ',' << sci(s.D[i]) << ','
                    << sci(s.D[i] / (1.0 + s.t[i])) << "\r\n";
    }

    // manifest: fully resolved config, filled defaults, provenance, timing
    nlohmann::ordered_json man;
    man["tool"] = kVersion;
    RunConfig resolved = cfg;
    std::vector<std::string> filled;
    if (cfg.y_quad_pts <= 0) {
        resolved.y_quad_pts = cfg.resolved_y_quad(cfg.gpc_order);
        filled.push_back("gpc.quad_pts");
    }
    if (cfg.volume_quad_pts <= 0) {
        resolved.volume_quad_pts = cfg.resolved_volume_quad();
        filled.push_back("dg.volume_quad_pts");
    }
    if (cfg.edge_quad_pts <= 0) {
        resolved.edge_quad_pts = cfg.resolved_edge_quad();
        filled.push_back("dg.edge_quad_pts");
    }
    if (cfg.error_quad_pts <= 0) {
        resolved.error_quad_pts = cfg.resolved_error_quad();
        filled.push_back("dg.error_quad_pts");
    }
    if (cfg.init_quad_pts <= 0) {
        resolved.init_quad_pts = cfg.resolved_init_quad();
        filled.push_back("dg.init_quad_pts");
    }
    if (cfg.dt <= 0) filled.push_back("time.dt");
    man["config"] = resolved.to_json();
    man["filled_defaults"] = filled;
    man["provenance"] = {{"tool", kVersion},
                         {"config_hash",
                          [&] {
                              char buf[32];
                              std::snprintf(buf, sizeof(buf), "%016llx",
                                            static_cast<unsigned long long>(
                                                detail::fnv1a(cfg.to_json().dump())));
                              return std::string(buf);
                          }()}};
    man["summary"] = art.summary;
    man["timing"] = {{"wall_seconds", wall_seconds}};
    {
        auto out = open("manifest.json");
        out << man.dump(2) << '\n';
    }
    return files;
}

/// Load-and-go entry point used by the CLI: returns a process exit code.
inline int run(const RunConfig& cfg, const std::string& out_dir, int workers = 1,
               int verbosity = 0) {
    try {
        const auto start = std::chrono::steady_clock::now();
        RunArtifacts art = run_experiment(cfg, workers);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        auto files = write_outputs(art, cfg, out_dir, wall);
        if (verbosity > 0) {
            std::cout << cfg.experiment << " (" << cfg.preset << ") done in " << wall << " s\n";
            for (const auto& f : files) std::cout << "  wrote " << f << '\n';
            if (verbosity > 1) std::cout << art.summary.dump(2) << '\n';
        }
        return 0;
    } catch (const InstabilityError& e) {
        std::cerr << "instability: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace sgwave
