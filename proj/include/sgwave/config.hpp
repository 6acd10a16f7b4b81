#pragma once

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgwave/ldg.hpp"

namespace sgwave {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Fully resolved experiment description. Negative quadrature counts mean
/// "derive the documented default" (y: P+5, volume/edge: k+2, error and
/// initialization: k+4); dt <= 0 means "fill from suggest_dt".
struct RunConfig {
    std::string preset = "test1";
    std::string experiment = "convergence";
    double delta = 0.0;

    int gpc_dims = 2;
    int gpc_order = 4;
    int y_quad_pts = -1;

    int degree = 1;
    int volume_quad_pts = -1;
    int edge_quad_pts = -1;
    int error_quad_pts = -1;
    int init_quad_pts = -1;

    std::vector<int> mesh_cells = {4, 8, 16, 32};

    double dt = -1.0;
    double dt_safety = 0.1;
    double t_final = 0.0;

    FluxConvention flux;
    std::string boundary = "exact";

    std::vector<int> sweep_orders;    // gpc_sweep
    int stride = 1;                   // long_time / perturbation sampling
    std::vector<double> epsilons;     // perturbation

    std::vector<std::string> filled_defaults;

    int resolved_y_quad(int order) const { return y_quad_pts > 0 ? y_quad_pts : order + 5; }
    int resolved_volume_quad() const { return volume_quad_pts > 0 ? volume_quad_pts : degree + 2; }
    int resolved_edge_quad() const { return edge_quad_pts > 0 ? edge_quad_pts : degree + 2; }
    int resolved_error_quad() const { return error_quad_pts > 0 ? error_quad_pts : degree + 4; }
    int resolved_init_quad() const { return init_quad_pts > 0 ? init_quad_pts : degree + 4; }

    void validate() const {
        auto fail = [](const std::string& field, const std::string& why) {
            throw ConfigError("config." + field + ": " + why);
        };
        if (preset != "test1" && preset != "test2") fail("preset", "must be test1 or test2");
        if (experiment != "convergence" && experiment != "gpc_sweep" && experiment != "energy" &&
            experiment != "long_time" && experiment != "perturbation")
            fail("experiment", "unknown experiment kind '" + experiment + "'");
        if (delta < 0) fail("delta", "must be >= 0");
        if (gpc_dims < 1) fail("gpc.dims", "must be >= 1");
        if (gpc_order < 0) fail("gpc.order", "must be >= 0");
        if (degree < 1) fail("dg.degree", "must be >= 1");
        if (mesh_cells.empty()) fail("mesh.cells", "must list at least one cell count");
        for (int n : mesh_cells) {
            if (n < 1) fail("mesh.cells", "cell counts must be >= 1");
            if (preset == "test2" && n % 2 != 0)
                fail("mesh.cells", "test2 interface x=0 requires even cell counts");
        }
        if (t_final <= 0) fail("time.final", "must be > 0");
        if (dt > 0 && t_final < dt) fail("time.final", "must be >= time.dt");
        if (dt_safety <= 0 || dt_safety > 1) fail("time.dt_safety", "must be in (0, 1]");
        if (boundary != "exact" && boundary != "homogeneous")
            fail("boundary", "must be exact or homogeneous");
        if (experiment == "gpc_sweep")
            for (int p : sweep_orders)
                if (p < 0) fail("sweep.orders", "orders must be >= 0");
        if (experiment == "perturbation") {
            if (epsilons.empty()) fail("perturbation.epsilons", "must list at least one epsilon");
            for (double e : epsilons)
                if (e < 0) fail("perturbation.epsilons", "epsilons must be >= 0");
        }
        if (stride < 1) fail("sampling.stride", "must be >= 1");
        auto check_quad = [&](int v, const char* name) {
            if (v == 0 || v < -1)
                throw ConfigError(std::string("config.") + name + ": must be a positive count");
        };
        check_quad(y_quad_pts, "gpc.quad_pts");
        check_quad(volume_quad_pts, "dg.volume_quad_pts");
        check_quad(edge_quad_pts, "dg.edge_quad_pts");
        check_quad(error_quad_pts, "dg.error_quad_pts");
        check_quad(init_quad_pts, "dg.init_quad_pts");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["preset"] = preset;
        j["experiment"] = experiment;
        j["delta"] = delta;
        j["gpc"] = {{"dims", gpc_dims}, {"order", gpc_order}, {"quad_pts", y_quad_pts}};
        j["dg"] = {{"degree", degree},
                   {"volume_quad_pts", volume_quad_pts},
                   {"edge_quad_pts", edge_quad_pts},
                   {"error_quad_pts", error_quad_pts},
                   {"init_quad_pts", init_quad_pts}};
        j["mesh"] = {{"cells", mesh_cells}};
        j["time"] = {{"dt", dt}, {"final", t_final}, {"dt_safety", dt_safety}};
        j["flux"] = {{"x", flux.x == FluxSide::minus_plus ? "minus_plus" : "plus_minus"},
                     {"z", flux.z == FluxSide::minus_plus ? "minus_plus" : "plus_minus"}};
        j["boundary"] = boundary;
        if (!sweep_orders.empty()) j["sweep"] = {{"orders", sweep_orders}};
        j["sampling"] = {{"stride", stride}};
        if (!epsilons.empty()) j["perturbation"] = {{"epsilons", epsilons}};
        return j;
    }
};

namespace detail {

inline FluxSide parse_flux_side(const std::string& s, const char* field) {
    if (s == "minus_plus") return FluxSide::minus_plus;
    if (s == "plus_minus") return FluxSide::plus_minus;
    throw ConfigError(std::string("config.") + field + ": must be minus_plus or plus_minus");
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const char* field) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config.") + field + ": wrong type");
    }
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                       const std::string& scope) {
    if (!j.is_object()) throw ConfigError("config" + scope + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("config" + scope + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    using detail::get_or;
    detail::check_keys(j,
                       {"preset", "experiment", "delta", "gpc", "dg", "mesh", "time", "flux",
                        "boundary", "sweep", "sampling", "perturbation"},
                       "");
    RunConfig c;
    c.preset = get_or<std::string>(j, "preset", c.preset, "preset");
    c.experiment = get_or<std::string>(j, "experiment", c.experiment, "experiment");
    c.delta = get_or<double>(j, "delta", c.delta, "delta");
    if (j.contains("gpc")) {
        const auto& g = j.at("gpc");
        detail::check_keys(g, {"dims", "order", "quad_pts"}, ".gpc");
        c.gpc_dims = get_or<int>(g, "dims", c.gpc_dims, "gpc.dims");
        c.gpc_order = get_or<int>(g, "order", c.gpc_order, "gpc.order");
        c.y_quad_pts = get_or<int>(g, "quad_pts", c.y_quad_pts, "gpc.quad_pts");
    }
    if (j.contains("dg")) {
        const auto& d = j.at("dg");
        detail::check_keys(
            d, {"degree", "volume_quad_pts", "edge_quad_pts", "error_quad_pts", "init_quad_pts"},
            ".dg");
        c.degree = get_or<int>(d, "degree", c.degree, "dg.degree");
        c.volume_quad_pts = get_or<int>(d, "volume_quad_pts", c.volume_quad_pts, "dg.volume_quad_pts");
        c.edge_quad_pts = get_or<int>(d, "edge_quad_pts", c.edge_quad_pts, "dg.edge_quad_pts");
        c.error_quad_pts = get_or<int>(d, "error_quad_pts", c.error_quad_pts, "dg.error_quad_pts");
        c.init_quad_pts = get_or<int>(d, "init_quad_pts", c.init_quad_pts, "dg.init_quad_pts");
    }
    if (j.contains("mesh")) {
        const auto& m = j.at("mesh");
        detail::check_keys(m, {"cells"}, ".mesh");
        c.mesh_cells = get_or<std::vector<int>>(m, "cells", c.mesh_cells, "mesh.cells");
    }
    if (j.contains("time")) {
        const auto& t = j.at("time");
        detail::check_keys(t, {"dt", "final", "dt_safety"}, ".time");
        c.dt = get_or<double>(t, "dt", c.dt, "time.dt");
        c.t_final = get_or<double>(t, "final", c.t_final, "time.final");
        c.dt_safety = get_or<double>(t, "dt_safety", c.dt_safety, "time.dt_safety");
    }
    if (j.contains("flux")) {
        const auto& f = j.at("flux");
        detail::check_keys(f, {"x", "z"}, ".flux");
        c.flux.x = detail::parse_flux_side(get_or<std::string>(f, "x", "minus_plus", "flux.x"),
                                           "flux.x");
        c.flux.z = detail::parse_flux_side(get_or<std::string>(f, "z", "minus_plus", "flux.z"),
                                           "flux.z");
    }
    c.boundary = get_or<std::string>(j, "boundary", c.boundary, "boundary");
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::check_keys(s, {"orders"}, ".sweep");
        c.sweep_orders = get_or<std::vector<int>>(s, "orders", c.sweep_orders, "sweep.orders");
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        detail::check_keys(s, {"stride"}, ".sampling");
        c.stride = get_or<int>(s, "stride", c.stride, "sampling.stride");
    }
    if (j.contains("perturbation")) {
        const auto& p = j.at("perturbation");
        detail::check_keys(p, {"epsilons"}, ".perturbation");
        c.epsilons = get_or<std::vector<double>>(p, "epsilons", c.epsilons, "perturbation.epsilons");
    }
    return c;
}

/// Parse a config from a file path, or directly from inline JSON text
/// (anything whose first non-space character is '{').
inline RunConfig load_config(const std::string& path_or_text) {
    std::string text;
    const auto first = path_or_text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && path_or_text[first] == '{') {
        text = path_or_text;
    } else {
        std::ifstream in(path_or_text);
        if (!in) throw ConfigError("cannot open config file '" + path_or_text + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    RunConfig c = config_from_json(j);
    c.validate();
    return c;
}

/// Built-in experiment catalog; parameter sets follow the reference
/// problem definitions, with the long-time runs scaled to desk size.
inline RunConfig preset_config(const std::string& name) {
    RunConfig c;
    if (name == "test1-linear-table") {
        c.preset = "test1";
        c.experiment = "convergence";
        c.delta = 0.01;
        c.gpc_order = 4;
        c.degree = 1;
        c.mesh_cells = {4, 8, 16, 32};
        c.dt = 1.5625e-5;
        c.t_final = 1.5625e-3;
    } else if (name == "test1-cubic-table") {
        c = preset_config("test1-linear-table");
        c.delta = 0.001;
        c.degree = 3;
    } else if (name == "test2-linear-table") {
        c = preset_config("test1-linear-table");
        c.preset = "test2";
    } else if (name == "test2-cubic-table") {
        c = preset_config("test2-linear-table");
        c.delta = 0.001;
        c.degree = 3;
        c.dt = 2.5e-8;
        c.t_final = 2.5e-6;
    } else if (name == "energy-homogeneous") {
        c.preset = "test1";
        c.experiment = "energy";
        c.delta = 0.0;
        c.gpc_order = 4;
        c.degree = 1;
        c.mesh_cells = {8};
        c.dt = -1.0;  // filled from suggest_dt
        c.t_final = 10.0;
        c.boundary = "homogeneous";
    } else if (name == "gpc-sweep-test1") {
        c.preset = "test1";
        c.experiment = "gpc_sweep";
        c.delta = 0.01;
        c.degree = 3;
        c.mesh_cells = {8};
        c.dt = 1.5625e-5;
        c.t_final = 1.5625e-3;
        c.sweep_orders = {0, 1, 2, 3, 4};
    } else if (name == "gpc-sweep-test2") {
        c = preset_config("gpc-sweep-test1");
        c.preset = "test2";
        c.dt = 2.5e-8;
        c.t_final = 2.5e-6;
    } else if (name == "long-time-small-noise" || name == "long-time-large-noise") {
        c.preset = "test1";
        c.experiment = "long_time";
        c.delta = (name == "long-time-small-noise") ? 1e-6 : 1e-2;
        c.gpc_order = 1;  // M = 3
        c.degree = 1;
        c.mesh_cells = {8};
        c.dt = 4e-3;
        c.t_final = 5.0;
        c.stride = 25;
    } else if (name == "perturbation-test1") {
        c.preset = "test1";
        c.experiment = "perturbation";
        c.delta = 0.01;
        c.gpc_order = 1;
        c.degree = 1;
        c.mesh_cells = {8};
        c.dt = 4e-3;
        c.t_final = 2.0;
        c.stride = 10;
        c.epsilons = {1e-3, 5e-4, 2.5e-4};
    } else {
        throw ConfigError("unknown experiment preset '" + name + "'");
    }
    c.validate();
    return c;
}

inline std::vector<std::string> preset_names() {
    return {"test1-linear-table", "test1-cubic-table",  "test2-linear-table",
            "test2-cubic-table",  "energy-homogeneous", "gpc-sweep-test1",
            "gpc-sweep-test2",    "long-time-small-noise", "long-time-large-noise",
            "perturbation-test1"};
}

}  // namespace sgwave
