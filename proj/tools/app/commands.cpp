#include "commands.hpp"

#include "driftrec/error.hpp"
#include "driftrec/forward.hpp"
#include "driftrec/inverse.hpp"
#include "driftrec/noise.hpp"
#include "driftrec/validation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#ifndef DRIFT_RECOVER_VERSION
#define DRIFT_RECOVER_VERSION "0.0.0"
#endif

namespace drift_cli {

using namespace driftrec;

namespace {

std::mutex log_mutex;

void log(bool quiet, const std::string& line) {
    if (quiet) {
        return;
    }
    const std::lock_guard lock(log_mutex);
    std::cerr << line << '\n';
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ordered_json solver_json(const SolverStats& s) {
    return {{"factorizations", s.factorizations},
            {"steps", s.steps},
            {"factorization_seconds", s.factorization_seconds},
            {"solve_seconds", s.solve_seconds}};
}

/// Collects outputs of one run directory and writes manifest.json last.
class Manifest {
public:
    Manifest(fs::path dir, std::string command) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
        doc_["tool"] = "drift-recover";
        doc_["version"] = DRIFT_RECOVER_VERSION;
        doc_["command"] = std::move(command);
        doc_["started_at"] = utc_timestamp();
    }

    ordered_json& operator[](const char* key) { return doc_[key]; }
    const fs::path& dir() const { return dir_; }

    void add_output(const std::string& relative) { outputs_.push_back(relative); }

    void write_field(const std::string& name, const ScalarField& field) {
        write_csv((dir_ / name).string(), field);
        add_output(name);
    }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) {
            throw Error("cannot open " + (dir_ / name).string() + " for writing");
        }
        out << text;
        add_output(name);
    }

    void finish(int exit_code, const std::string& message) {
        doc_["finished_at"] = utc_timestamp();
        doc_["exit_code"] = exit_code;
        if (!message.empty()) {
            doc_["message"] = message;
        }
        doc_["outputs"] = outputs_;
        const fs::path tmp = dir_ / "manifest.json.tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) {
                throw Error("cannot open " + tmp.string() + " for writing");
            }
            out << doc_.dump(2) << '\n';
        }
        fs::rename(tmp, dir_ / "manifest.json");
    }

private:
    fs::path dir_;
    ordered_json doc_;
    std::vector<std::string> outputs_;
};

std::string iterate_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "q_%03zu.csv", k);
    return buf;
}

std::string convergence_csv(const IterationReport& report) {
    std::ostringstream out;
    out << "k,increment,rel_err\n";
    for (std::size_t k = 0; k < report.iterates.size(); ++k) {
        out << k << ',';
        if (k > 0) {
            out << format_double(report.increments[k - 1]);
        }
        out << ',';
        if (k < report.rel_errors.size()) {
            out << format_double(report.rel_errors[k]);
        }
        out << '\n';
    }
    return out.str();
}

/// Noise-free terminal data on the inversion grid, plus diagnostics of the
/// data-generating solve.
struct CleanData {
    ScalarField g;
    ordered_json diagnostics;
    SolverStats stats;
};

CleanData generate_clean(const RunConfig& cfg, const DriftSpec& drift) {
    const Grid2D fine = data_grid(cfg);
    const ProblemSpec spec = make_problem(cfg, fine, drift);
    const ScalarField q = evaluate_drift(drift, fine);
    const ForwardSolution sol = solve_forward(spec, q);
    DiagnosticsReport diag = positivity_diagnostics(sol, spec);
    const double drift_bound = norm_linf(q);
    if (!(spec.cp > drift_bound)) {
        diag.notes.push_back("C_p does not exceed the drift bound max|q| = " + format_double(drift_bound));
    }
    ordered_json d = {{"data_grid", {{"nx", fine.nx()}, {"ny", fine.ny()}}},
                      {"min_dx_uT_interior", diag.min_dx_uT},
                      {"min_dudt_T", diag.min_dudt},
                      {"drift_bound", drift_bound},
                      {"notes", diag.notes}};
    return {restrict_to(sol.u_T, inversion_grid(cfg)), std::move(d), sol.stats};
}

/// Inverts g into `manifest`'s directory. Returns kExitOk or kExitDivergence.
int run_inversion(const RunConfig& cfg, const ScalarField& g, const std::optional<ScalarField>& q_true,
                  double delta, Manifest& manifest) {
    const Grid2D grid = inversion_grid(cfg);
    const DriftSpec placeholder = SmoothDrift{};
    const ProblemSpec spec = make_problem(cfg, grid, placeholder);
    const DenoiseConfig dn = denoise_for(cfg, delta);
    const ObservationData obs =
        build_observation(g, spec, dn, cfg.iteration.dx_floor_rel, cfg.iteration.closure);

    const auto start = std::chrono::steady_clock::now();
    const IterationReport report = iterate(obs, spec, cfg.iteration, q_true);
    const double seconds = seconds_since(start);

    for (std::size_t k = 0; k < report.iterates.size(); ++k) {
        manifest.write_field(iterate_name(k), report.iterates[k]);
    }
    manifest.write_text("convergence.csv", convergence_csv(report));

    ordered_json denoise = {{"enabled", dn.enabled}, {"method", to_string(dn.method)}};
    if (dn.enabled) {
        denoise["strength"] = resolve_strength(dn, g);
        if (dn.method == DenoiseMethod::LocalPolynomial) {
            denoise["half_width_nodes"] =
                LocalPolynomialSmoother::half_width_for(resolve_strength(dn, g), grid);
        }
    }
    manifest["denoise"] = denoise;
    manifest["stop_reason"] = to_string(report.stop_reason);
    manifest["iterations_run"] = report.iterations_run;
    manifest["floored_dx_nodes"] = obs.floored_nodes;
    manifest["monotone_violation"] =
        report.iterates.size() >= 2 ? ordered_json(monotone_violation(report.iterates))
                                    : ordered_json(nullptr);
    if (!report.rel_errors.empty()) {
        manifest["final_rel_err"] = report.rel_errors.back();
    }
    manifest["solver"] = solver_json(report.solver);
    manifest["inversion_seconds"] = seconds;
    return report.stop_reason == StopReason::Divergence ? kExitDivergence : kExitOk;
}

ordered_json noise_json(const NoiseConfig& n) {
    return {{"delta", n.delta}, {"seed", n.seed}, {"generator", kNoiseGenerator}};
}

}  // namespace

int exit_code_for_current_exception(std::string* message) {
    auto keep = [&](const std::exception& e) {
        if (message) {
            *message = e.what();
        }
    };
    try {
        throw;
    } catch (const ConfigError& e) {
        keep(e);
        return kExitConfig;
    } catch (const DimensionError& e) {
        keep(e);
        return kExitConfig;
    } catch (const SolverError& e) {
        keep(e);
        return kExitSolver;
    } catch (const DegenerateDataError& e) {
        keep(e);
        return kExitDegenerate;
    } catch (const std::exception& e) {
        keep(e);
        return kExitFailure;
    }
}

const std::vector<NoiseLevel>& experiment_levels() {
    static const std::vector<NoiseLevel> levels{{0.0, "noise_free"},
                                                {2e-2, "noise_1pct"},
                                                {2e-3, "noise_0p1pct"},
                                                {2e-4, "noise_0p01pct"},
                                                {6e-2, "noise_3pct"}};
    return levels;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError("--seeds expects a comma-separated list of non-negative integers");
        }
        try {
            seeds.push_back(std::stoull(item));
        } catch (const std::out_of_range&) {
            throw ConfigError("--seeds value out of range: " + item);
        }
    }
    if (seeds.empty()) {
        throw ConfigError("--seeds needs at least one seed");
    }
    return seeds;
}

unsigned thread_budget() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DRIFT_RECOVER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw ConfigError("DRIFT_RECOVER_THREADS must be a positive integer");
        }
        n = static_cast<unsigned>(v);
    }
    return n;
}

int cmd_generate_data(const RunConfig& cfg, const CommonOptions& common) {
    Manifest manifest(common.out, "generate-data");
    manifest["arguments"] = ordered_json::object();
    manifest["config"] = to_json(cfg);
    manifest["noise"] = noise_json(cfg.noise);

    const DriftSpec drift = make_drift(cfg.drift, data_grid(cfg));
    log(common.quiet, "generate-data: forward solve on the data grid");
    CleanData clean = generate_clean(cfg, drift);
    const ScalarField g = add_noise(clean.g, cfg.noise);

    manifest.write_field("g.csv", g);
    manifest.write_field("q_true.csv", evaluate_drift(drift, inversion_grid(cfg)));
    manifest["diagnostics"] = clean.diagnostics;
    manifest["solver"] = solver_json(clean.stats);
    manifest.finish(kExitOk, "");
    log(common.quiet, "generate-data: wrote " + (common.out / "g.csv").string());
    return kExitOk;
}

int cmd_invert(const RunConfig& cfg, const InvertOptions& opts, const CommonOptions& common) {
    const ScalarField g = read_csv(opts.data.string());
    Manifest manifest(common.out, "invert");
    manifest["arguments"] = {{"data", fs::absolute(opts.data).string()}};
    manifest["config"] = to_json(cfg);

    std::optional<ScalarField> q_true;
    if (cfg.drift_given) {
        q_true = evaluate_drift(make_drift(cfg.drift, data_grid(cfg)), inversion_grid(cfg));
        manifest.write_field("q_true.csv", *q_true);
    }
    log(common.quiet, "invert: iterating on " + opts.data.string());
    int code = kExitOk;
    std::string message;
    try {
        code = run_inversion(cfg, g, q_true, cfg.noise.delta, manifest);
    } catch (const SolverError&) {
        code = exit_code_for_current_exception(&message);
    }
    if (code == kExitDivergence) {
        message = "iteration diverged";
    }
    manifest.finish(code, message);
    if (code == kExitSolver) {
        throw SolverError(message);
    }
    if (code != kExitOk) {
        log(common.quiet, "invert: " + message);
    }
    return code;
}

int cmd_mms(const RunConfig& cfg, const CommonOptions& common) {
    const bool space = cfg.mms.study == "space";
    const double beta = cfg.mms.beta.value_or(space ? 0.25 : 1.0);
    std::vector<Resolution> res = cfg.mms.resolutions;
    if (res.empty()) {
        res = space ? std::vector<Resolution>{{21, 10000, 1.0}, {41, 10000, 1.0}, {81, 10000, 1.0}}
                    : std::vector<Resolution>{{161, 25, 1.0}, {161, 50, 1.0}, {161, 100, 1.0}};
    }
    std::size_t finest = 0;
    for (const Resolution& r : res) {
        finest = std::max(finest, r.n);
    }
    Manifest manifest(common.out, "mms");
    manifest["arguments"] = ordered_json::object();
    manifest["config"] = to_json(cfg);
    manifest["beta"] = beta;

    const DriftSpec drift = make_drift(cfg.drift, Grid2D(finest, finest));
    log(common.quiet, "mms: " + cfg.mms.study + " study, " + std::to_string(res.size()) +
                          " resolutions");
    const auto start = std::chrono::steady_clock::now();
    const ConvergenceStudy study = mms_study(drift, res, beta, cfg.cp);
    std::ostringstream csv;
    write_study_csv(csv, study);
    const std::string name = "mms_" + cfg.mms.study + ".csv";
    manifest.write_text(name, csv.str());
    manifest["non_monotone"] = study.non_monotone;
    manifest["seconds"] = seconds_since(start);
    manifest.finish(kExitOk, "");
    return kExitOk;
}

namespace {

struct RunResult {
    int code = kExitOk;
    std::string message;
    std::string dir;
};

}  // namespace

int cmd_experiment(RunConfig cfg, const ExperimentOptions& opts, const CommonOptions& common) {
    if (opts.name != "smooth" && opts.name != "piecewise" && opts.name != "character") {
        throw ConfigError("unknown experiment '" + opts.name +
                          "' (expected smooth, piecewise or character)");
    }
    if (cfg.drift_given && cfg.drift.variant != opts.name) {
        throw ConfigError("'drift.variant' is " + cfg.drift.variant + " but the experiment is " +
                          opts.name);
    }
    cfg.drift.variant = opts.name;
    cfg.drift_given = true;

    const fs::path root = common.out;
    Manifest top(root, "experiment");
    top["arguments"] = {{"name", opts.name}, {"seeds", opts.seeds}, {"noise_only", opts.noise_only}};
    top["config"] = to_json(cfg);

    const DriftSpec drift = make_drift(cfg.drift, data_grid(cfg));
    const ScalarField q_true = evaluate_drift(drift, inversion_grid(cfg));
    top.write_field("q_true.csv", q_true);

    log(common.quiet, "experiment " + opts.name + ": generating terminal data");
    const CleanData clean = generate_clean(cfg, drift);
    top["diagnostics"] = clean.diagnostics;
    top["data_solver"] = solver_json(clean.stats);

    struct Job {
        NoiseLevel level;
        std::uint64_t seed;
        fs::path rel;
    };
    std::vector<Job> jobs;
    for (const NoiseLevel& level : experiment_levels()) {
        if (level.delta == 0.0) {
            if (!opts.noise_only) {
                jobs.push_back({level, 0, level.label});
            }
            continue;
        }
        for (std::uint64_t seed : opts.seeds) {
            jobs.push_back({level, seed, fs::path(level.label) / ("seed_" + std::to_string(seed))});
        }
    }

    std::vector<RunResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            const Job& job = jobs[k];
            RunResult& r = results[k];
            r.dir = job.rel.generic_string();
            RunConfig run = cfg;
            run.noise = {job.level.delta, job.seed};
            try {
                Manifest m(root / job.rel, "experiment-run");
                m["arguments"] = {{"experiment", opts.name}, {"level", job.level.label}};
                m["config"] = to_json(run);
                m["noise"] = noise_json(run.noise);
                const ScalarField g = add_noise(clean.g, run.noise);
                m.write_field("g.csv", g);
                try {
                    r.code = run_inversion(run, g, q_true, job.level.delta, m);
                } catch (const SolverError&) {
                    r.code = exit_code_for_current_exception(&r.message);
                }
                if (r.code == kExitDivergence) {
                    r.message = "iteration diverged";
                }
                m.finish(r.code, r.message);
            } catch (...) {
                r.code = exit_code_for_current_exception(&r.message);
            }
            log(common.quiet, "  " + r.dir + ": " + (r.code == kExitOk ? "done" : r.message));
        }
    };
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_budget(), std::max<std::size_t>(jobs.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back(worker);
        }
    }

    int code = kExitOk;
    std::string message;
    ordered_json runs = ordered_json::array();
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const RunResult& r = results[k];
        runs.push_back({{"dir", r.dir},
                        {"delta", jobs[k].level.delta},
                        {"seed", jobs[k].seed},
                        {"exit_code", r.code}});
        if (r.code == kExitOk) {
            top.add_output(r.dir + "/manifest.json");
        } else if (code == kExitOk) {
            code = r.code;
            message = r.dir + ": " + r.message;
        }
    }
    top["runs"] = runs;

    ordered_json figures;
    if (!opts.noise_only) {
        figures["noise_free"] = {{"exact", "q_true.csv"},
                                 {"iterates_dir", "noise_free"},
                                 {"convergence", "noise_free/convergence.csv"}};
    }
    const std::string first_seed = "seed_" + std::to_string(opts.seeds.front());
    ordered_json noisy = ordered_json::object();
    for (const NoiseLevel& level : experiment_levels()) {
        if (level.delta > 0.0) {
            noisy[level.label] = std::string(level.label) + "/" + first_seed;
        }
    }
    figures["noisy_reconstructions"] = noisy;
    figures["noisy_iterates"] = ordered_json::array();
    for (std::size_t k = 0; k <= std::min<std::size_t>(2, cfg.iteration.max_iters); ++k) {
        figures["noisy_iterates"].push_back("noise_3pct/" + first_seed + "/" + iterate_name(k));
    }
    top["figures"] = figures;
    top.finish(code, message);
    return code;
}

int cmd_replay(const fs::path& manifest_path, const CommonOptions& common) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw ConfigError("cannot open manifest '" + manifest_path.string() + "'");
    }
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("manifest is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.contains("command") || !doc.contains("config") || !doc.contains("arguments")) {
        throw ConfigError("manifest lacks command, config or arguments");
    }
    const RunConfig cfg = parse_config(doc.at("config"));
    const std::string command = doc.at("command").get<std::string>();
    const ordered_json& args = doc.at("arguments");
    if (command == "generate-data") {
        return cmd_generate_data(cfg, common);
    }
    if (command == "invert") {
        return cmd_invert(cfg, InvertOptions{args.at("data").get<std::string>()}, common);
    }
    if (command == "mms") {
        return cmd_mms(cfg, common);
    }
    if (command == "experiment") {
        ExperimentOptions opts;
        opts.name = args.at("name").get<std::string>();
        opts.seeds = args.at("seeds").get<std::vector<std::uint64_t>>();
        opts.noise_only = args.at("noise_only").get<bool>();
        return cmd_experiment(cfg, opts, common);
    }
    throw ConfigError("manifest command '" + command + "' cannot be replayed");
}

}  // namespace drift_cli
