#include "config.hpp"

#include "driftrec/error.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>

namespace drift_cli {

using driftrec::ConfigError;

namespace {

// Rejects keys outside `allowed`, reporting the full dotted path.
void check_keys(const ordered_json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError("'" + path + "' must be an object");
    }
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!known.count(item.key())) {
            throw ConfigError("unknown key '" + (path.empty() ? "" : path + ".") + item.key() + "'");
        }
    }
}

std::string join(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
}

double get_number(const ordered_json& obj, const std::string& path, const char* key,
                  double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const ordered_json& v = obj.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw ConfigError("'" + join(path, key) + "' must be a finite number");
    }
    return v.get<double>();
}

std::size_t get_count(const ordered_json& obj, const std::string& path, const char* key,
                      std::size_t fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const ordered_json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        throw ConfigError("'" + join(path, key) + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

bool get_bool(const ordered_json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const ordered_json& v = obj.at(key);
    if (!v.is_boolean()) {
        throw ConfigError("'" + join(path, key) + "' must be true or false");
    }
    return v.get<bool>();
}

std::string get_string(const ordered_json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const ordered_json& v = obj.at(key);
    if (!v.is_string()) {
        throw ConfigError("'" + join(path, key) + "' must be a string");
    }
    return v.get<std::string>();
}

GridSize parse_grid(const ordered_json& obj, const std::string& path, GridSize fallback) {
    check_keys(obj, path, {"nx", "ny"});
    GridSize g{get_count(obj, path, "nx", fallback.nx), get_count(obj, path, "ny", fallback.ny)};
    if (g.nx < 3 || g.ny < 3) {
        throw ConfigError("'" + path + "' needs at least 3 nodes per direction");
    }
    return g;
}

DriftConfig parse_drift(const ordered_json& obj) {
    const std::string path = "drift";
    check_keys(obj, path, {"variant", "params", "mask_path"});
    DriftConfig d;
    d.variant = get_string(obj, path, "variant", d.variant);
    d.mask_path = get_string(obj, path, "mask_path", "");
    const ordered_json params = obj.contains("params") ? obj.at("params") : ordered_json::object();
    const std::string ppath = "drift.params";
    if (d.variant == "smooth") {
        check_keys(params, ppath, {});
    } else if (d.variant == "piecewise") {
        check_keys(params, ppath, {"cx", "cy", "wx", "wy", "inside", "outside"});
        d.box.cx = get_number(params, ppath, "cx", d.box.cx);
        d.box.cy = get_number(params, ppath, "cy", d.box.cy);
        d.box.wx = get_number(params, ppath, "wx", d.box.wx);
        d.box.wy = get_number(params, ppath, "wy", d.box.wy);
        d.box.inside = get_number(params, ppath, "inside", d.box.inside);
        d.box.outside = get_number(params, ppath, "outside", d.box.outside);
    } else if (d.variant == "character" || d.variant == "mask") {
        check_keys(params, ppath, {"background", "increment"});
        d.background = get_number(params, ppath, "background", d.background);
        d.increment = get_number(params, ppath, "increment", d.increment);
        if (d.variant == "mask" && d.mask_path.empty()) {
            throw ConfigError("'drift.mask_path' is required for the mask variant");
        }
    } else {
        throw ConfigError("'drift.variant' must be smooth, piecewise, character or mask (got '" +
                          d.variant + "')");
    }
    if (d.variant != "mask" && !d.mask_path.empty()) {
        throw ConfigError("'drift.mask_path' is only valid for the mask variant");
    }
    return d;
}

MmsConfig parse_mms(const ordered_json& obj) {
    const std::string path = "mms";
    check_keys(obj, path, {"study", "beta", "resolutions"});
    MmsConfig m;
    m.study = get_string(obj, path, "study", m.study);
    if (m.study != "space" && m.study != "time") {
        throw ConfigError("'mms.study' must be space or time");
    }
    if (obj.contains("beta")) {
        m.beta = get_number(obj, path, "beta", 0.0);
    }
    if (obj.contains("resolutions")) {
        const ordered_json& list = obj.at("resolutions");
        if (!list.is_array() || list.empty()) {
            throw ConfigError("'mms.resolutions' must be a non-empty array");
        }
        for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string rpath = "mms.resolutions[" + std::to_string(k) + "]";
            check_keys(list[k], rpath, {"n", "steps", "T"});
            driftrec::Resolution r;
            r.n = get_count(list[k], rpath, "n", 0);
            r.steps = get_count(list[k], rpath, "steps", 0);
            r.final_time = get_number(list[k], rpath, "T", 1.0);
            if (r.n < 3 || r.steps == 0 || !(r.final_time > 0.0)) {
                throw ConfigError("'" + rpath + "' needs n >= 3, steps >= 1 and T > 0");
            }
            m.resolutions.push_back(r);
        }
    }
    return m;
}

}  // namespace

RunConfig parse_config(const ordered_json& doc) {
    check_keys(doc, "", {"grid", "fine_grid", "inverse_crime", "time", "cp", "beta", "drift",
                         "noise", "denoise", "iteration", "mms"});
    RunConfig cfg;
    if (doc.contains("grid")) {
        cfg.grid = parse_grid(doc.at("grid"), "grid", cfg.grid);
    }
    if (doc.contains("fine_grid")) {
        cfg.fine_grid = parse_grid(doc.at("fine_grid"), "fine_grid", cfg.fine_grid);
    }
    cfg.inverse_crime = get_bool(doc, "", "inverse_crime", cfg.inverse_crime);
    if (doc.contains("time")) {
        const ordered_json& t = doc.at("time");
        check_keys(t, "time", {"T", "nt"});
        cfg.final_time = get_number(t, "time", "T", cfg.final_time);
        cfg.steps = get_count(t, "time", "nt", cfg.steps);
        if (!(cfg.final_time > 0.0) || cfg.steps == 0) {
            throw ConfigError("'time' needs T > 0 and nt >= 1");
        }
    }
    cfg.cp = get_number(doc, "", "cp", cfg.cp);
    cfg.beta = get_number(doc, "", "beta", cfg.beta);
    if (doc.contains("drift")) {
        cfg.drift = parse_drift(doc.at("drift"));
        cfg.drift_given = true;
    }
    if (doc.contains("noise")) {
        const ordered_json& n = doc.at("noise");
        check_keys(n, "noise", {"delta", "seed"});
        cfg.noise.delta = get_number(n, "noise", "delta", 0.0);
        if (cfg.noise.delta < 0.0) {
            throw ConfigError("'noise.delta' must be non-negative");
        }
        if (n.contains("seed") && !n.at("seed").is_number_unsigned()) {
            throw ConfigError("'noise.seed' must be a non-negative integer");
        }
        cfg.noise.seed = n.value("seed", std::uint64_t{0});
    }
    if (doc.contains("denoise")) {
        const ordered_json& d = doc.at("denoise");
        check_keys(d, "denoise", {"enabled", "method", "strength"});
        cfg.denoise.enabled = get_bool(d, "denoise", "enabled", true);
        cfg.denoise.method =
            driftrec::parse_denoise_method(get_string(d, "denoise", "method", "local-polynomial"));
        if (d.contains("strength") && !d.at("strength").is_null()) {
            cfg.denoise.strength = get_number(d, "denoise", "strength", 0.0);
            if (cfg.denoise.strength < 0.0) {
                throw ConfigError("'denoise.strength' must be non-negative");
            }
            cfg.denoise_auto = false;
        }
    }
    if (doc.contains("iteration")) {
        const ordered_json& it = doc.at("iteration");
        const std::string path = "iteration";
        check_keys(it, path, {"max_iters", "tol", "dx_floor_rel", "project", "boundary_closure"});
        cfg.iteration.max_iters = get_count(it, path, "max_iters", cfg.iteration.max_iters);
        cfg.iteration.tol = get_number(it, path, "tol", cfg.iteration.tol);
        cfg.iteration.dx_floor_rel = get_number(it, path, "dx_floor_rel", cfg.iteration.dx_floor_rel);
        cfg.iteration.project_to_domain = get_bool(it, path, "project", true);
        const std::string closure = get_string(it, path, "boundary_closure", "nearest-interior");
        if (closure == "nearest-interior") {
            cfg.iteration.closure = driftrec::BoundaryClosure::NearestInterior;
        } else if (closure == "formula") {
            cfg.iteration.closure = driftrec::BoundaryClosure::Formula;
        } else {
            throw ConfigError("'iteration.boundary_closure' must be nearest-interior or formula");
        }
        cfg.iteration.validate();
    }
    if (doc.contains("mms")) {
        cfg.mms = parse_mms(doc.at("mms"));
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    RunConfig cfg = parse_config(doc);
    if (!cfg.drift.mask_path.empty()) {
        const std::filesystem::path mask(cfg.drift.mask_path);
        if (mask.is_relative()) {
            const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
            cfg.drift.mask_path = (base / mask).lexically_normal().string();
        }
    }
    return cfg;
}

ordered_json to_json(const RunConfig& cfg) {
    ordered_json j;
    j["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}};
    j["fine_grid"] = {{"nx", cfg.fine_grid.nx}, {"ny", cfg.fine_grid.ny}};
    j["inverse_crime"] = cfg.inverse_crime;
    j["time"] = {{"T", cfg.final_time}, {"nt", cfg.steps}};
    j["cp"] = cfg.cp;
    j["beta"] = cfg.beta;
    if (cfg.drift_given) {
        ordered_json d;
        d["variant"] = cfg.drift.variant;
        if (cfg.drift.variant == "piecewise") {
            const auto& b = cfg.drift.box;
            d["params"] = {{"cx", b.cx}, {"cy", b.cy}, {"wx", b.wx},
                           {"wy", b.wy}, {"inside", b.inside}, {"outside", b.outside}};
        } else if (cfg.drift.variant == "character" || cfg.drift.variant == "mask") {
            d["params"] = {{"background", cfg.drift.background},
                           {"increment", cfg.drift.increment}};
        }
        if (!cfg.drift.mask_path.empty()) {
            d["mask_path"] = cfg.drift.mask_path;
        }
        j["drift"] = d;
    }
    j["noise"] = {{"delta", cfg.noise.delta}, {"seed", cfg.noise.seed}};
    ordered_json dn = {{"enabled", cfg.denoise.enabled},
                       {"method", driftrec::to_string(cfg.denoise.method)}};
    dn["strength"] = cfg.denoise_auto ? ordered_json(nullptr) : ordered_json(cfg.denoise.strength);
    j["denoise"] = dn;
    j["iteration"] = {
        {"max_iters", cfg.iteration.max_iters},
        {"tol", cfg.iteration.tol},
        {"dx_floor_rel", cfg.iteration.dx_floor_rel},
        {"project", cfg.iteration.project_to_domain},
        {"boundary_closure", cfg.iteration.closure == driftrec::BoundaryClosure::NearestInterior
                                 ? "nearest-interior"
                                 : "formula"}};
    ordered_json m = {{"study", cfg.mms.study}};
    if (cfg.mms.beta) {
        m["beta"] = *cfg.mms.beta;
    }
    if (!cfg.mms.resolutions.empty()) {
        ordered_json list = ordered_json::array();
        for (const auto& r : cfg.mms.resolutions) {
            list.push_back({{"n", r.n}, {"steps", r.steps}, {"T", r.final_time}});
        }
        m["resolutions"] = list;
    }
    j["mms"] = m;
    return j;
}

driftrec::Grid2D inversion_grid(const RunConfig& cfg) {
    return driftrec::Grid2D(cfg.grid.nx, cfg.grid.ny);
}

driftrec::Grid2D data_grid(const RunConfig& cfg) {
    if (cfg.inverse_crime) {
        return inversion_grid(cfg);
    }
    if (cfg.fine_grid.nx < cfg.grid.nx || cfg.fine_grid.ny < cfg.grid.ny) {
        throw ConfigError("'fine_grid' must not be coarser than 'grid'");
    }
    return driftrec::Grid2D(cfg.fine_grid.nx, cfg.fine_grid.ny);
}

driftrec::DriftSpec make_drift(const DriftConfig& cfg, const driftrec::Grid2D& grid) {
    if (cfg.variant == "smooth") {
        return driftrec::SmoothDrift{};
    }
    if (cfg.variant == "piecewise") {
        return cfg.box;
    }
    if (cfg.variant == "character") {
        return driftrec::make_mask_drift(driftrec::sample_character_mask(grid), cfg.background,
                                         cfg.increment);
    }
    if (cfg.variant == "mask") {
        driftrec::ScalarField mask = [&] {
            try {
                return driftrec::read_matrix(cfg.mask_path);
            } catch (const driftrec::Error& e) {
                throw ConfigError("'drift.mask_path': " + std::string(e.what()));
            }
        }();
        return driftrec::make_mask_drift(std::move(mask), cfg.background, cfg.increment);
    }
    throw ConfigError("'drift.variant' is not recognised: " + cfg.variant);
}

driftrec::ProblemSpec make_problem(const RunConfig& cfg, const driftrec::Grid2D& grid,
                                   const driftrec::DriftSpec& drift) {
    driftrec::ProblemSpec spec = driftrec::reference_problem(grid, drift, cfg.steps, cfg.beta);
    spec.time = driftrec::TimeGrid(cfg.final_time, cfg.steps);
    spec.cp = cfg.cp;
    spec.validate();
    return spec;
}

driftrec::DenoiseConfig denoise_for(const RunConfig& cfg, double delta) {
    driftrec::DenoiseConfig d = cfg.denoise;
    d.auto_strength = cfg.denoise_auto;
    d.noise_delta = delta;
    return d;
}

}  // namespace drift_cli
