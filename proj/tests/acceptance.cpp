#include "driftrec/inverse.hpp"
#include "driftrec/noise.hpp"
#include "driftrec/validation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace driftrec;
namespace fs = std::filesystem;

namespace {

// Tolerances, pinned.
constexpr double kSpaceOrderLo = 1.8;
constexpr double kSpaceOrderHi = 2.3;
constexpr double kTimeOrderLo = 0.8;
constexpr double kTimeOrderHi = 1.2;
constexpr double kMmsBudgetSeconds = 120.0;
constexpr double kSpaceBeta = 0.25;
constexpr double kTimeBeta = 1.0;
constexpr double kSteadyTol = 1e-12;
constexpr double kEpsDisc = 0.03;  // calibrated: 0.0266 at 60x60
constexpr double kEpsDiscCeiling = 0.05;
constexpr double kMonotoneTol = 1e-8;
constexpr double kOrderTol = 1e-8;
constexpr std::size_t kOrderPairs = 20;
constexpr double kRelErrSlack = 1e-10;
constexpr double kPipelineBudgetSeconds = 60.0;
constexpr std::size_t kNoiseSeeds = 5;

struct Outcome {
    bool pass;
    std::string detail;
};

std::map<int, Outcome> outcomes;

void report(int id, bool pass, const std::string& detail) {
    outcomes[id] = {pass, detail};
}

std::string fmt(const char* pattern, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const Grid2D kFine(100, 100);
const Grid2D kCoarse(60, 60);

std::vector<std::pair<std::string, DriftSpec>> targets() {
    return {{"smooth", SmoothDrift{}},
            {"piecewise", PiecewiseConstantDrift{}},
            {"character", make_mask_drift(sample_character_mask(kFine))}};
}

ScalarField fine_data(const DriftSpec& drift) {
    return restrict_to(solve_forward(reference_problem(kFine, drift), evaluate_drift(drift, kFine)).u_T,
                       kCoarse);
}

ScalarField crime_data(const DriftSpec& drift) {
    return solve_forward(reference_problem(kCoarse, drift), evaluate_drift(drift, kCoarse)).u_T;
}

void criterion_mms() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Resolution> space{{21, 10000, 1.0}, {41, 10000, 1.0}, {81, 10000, 1.0}};
    const std::vector<Resolution> time{{161, 25, 1.0}, {161, 50, 1.0}, {161, 100, 1.0}};
    const ConvergenceStudy s = mms_study(SmoothDrift{}, space, kSpaceBeta);
    const ConvergenceStudy t = mms_study(SmoothDrift{}, time, kTimeBeta);
    const double elapsed = seconds_since(t0);

    bool pass = elapsed <= kMmsBudgetSeconds;
    std::string detail = "space orders (beta 0.25)";
    for (std::size_t k = 1; k < s.entries.size(); ++k) {
        const double p = s.entries[k].order_inf.value_or(NAN);
        pass = pass && p >= kSpaceOrderLo && p <= kSpaceOrderHi;
        detail += fmt(" %.3f", p);
    }
    detail += ", time orders (beta 1)";
    for (std::size_t k = 1; k < t.entries.size(); ++k) {
        const double p = t.entries[k].order_inf.value_or(NAN);
        pass = pass && p >= kTimeOrderLo && p <= kTimeOrderHi;
        detail += fmt(" %.3f", p);
    }
    detail += fmt(", %.1f s", elapsed);
    report(1, pass, detail);
}

void criterion_steady_state() {
    const Grid2D g(60, 60);
    double worst = 0.0;
    for (double c : {0.0, 1.0, -3.0}) {
        ProblemSpec spec{g, TimeGrid(1.0, 100), 5.0, SmoothDrift{}, {}, {}, {}};
        spec.source.fn = [c](double, double, double) { return 5.0 * c; };
        spec.initial = [c](double, double) { return c; };
        spec.boundary = constant_boundary(c);
        const ForwardSolution sol =
            solve_forward(spec, evaluate_drift(SmoothDrift{}, g), ForwardOptions{true});
        for (const ScalarField& u : sol.trajectory) {
            worst = std::max(worst, norm_linf(u - ScalarField(g, c)));
        }
    }
    report(2, worst <= kSteadyTol, fmt("max |u - c| over 100 steps = %.2e", worst));
}

void criterion_fixed_point() {
    const ScalarField q = evaluate_drift(SmoothDrift{}, kCoarse);
    const ProblemSpec spec = reference_problem(kCoarse, SmoothDrift{});
    const ObservationData obs = build_observation(crime_data(SmoothDrift{}), spec);
    const double r = norm_linf(apply_K(q, obs, spec, false) - q) / norm_linf(q);
    report(3, r <= kEpsDisc && kEpsDisc <= kEpsDiscCeiling,
           fmt("||Kq - q||/||q|| = %.4f", r) + fmt(" (eps_disc %.2f)", kEpsDisc));
}

void criteria_crime_iterations() {
    std::string mono = "max increase";
    std::string stops = "stop reasons";
    bool mono_pass = true;
    bool stop_pass = true;
    for (const auto& [name, drift] : targets()) {
        const ProblemSpec spec = reference_problem(kCoarse, drift);
        const IterationReport r = iterate(build_observation(crime_data(drift), spec), spec, InverseConfig{});
        const double v = monotone_violation(r.iterates);
        mono_pass = mono_pass && v <= kMonotoneTol;
        mono += " " + name + fmt(" %.1e", v);
        stop_pass = stop_pass && r.stop_reason != StopReason::Divergence;
        stops += " " + name + "=" + to_string(r.stop_reason);
    }
    report(4, mono_pass, mono);
    report(9, stop_pass, stops + " (tol 1e-13)");
}

void criterion_monotone_operator() {
    const ProblemSpec spec = reference_problem(kCoarse, SmoothDrift{});
    const ObservationData obs = build_observation(crime_data(SmoothDrift{}), spec);
    const ScalarField q0 = initial_guess(obs);
    const double scale = norm_linf(q0);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_gap = [&](double amplitude) {
        ScalarField f(kCoarse);
        for (double& v : f.values()) {
            v = amplitude * unit(rng);
        }
        return f;
    };
    double worst = -INFINITY;
    for (std::size_t k = 0; k < kOrderPairs; ++k) {
        const ScalarField psi2 = q0 - random_gap(0.5 * scale * unit(rng));
        const ScalarField psi1 = psi2 - random_gap(0.5 * scale * unit(rng));
        const ScalarField k1 = apply_K(psi1, obs, spec, false);
        const ScalarField k2 = apply_K(psi2, obs, spec, false);
        worst = std::max(worst, (k1 - k2).max());
    }
    report(5, worst <= kOrderTol, fmt("max(K psi1 - K psi2) over 20 pairs = %.2e", worst));
}

void criterion_pipeline() {
    const auto t0 = std::chrono::steady_clock::now();
    const ProblemSpec spec = reference_problem(kCoarse, SmoothDrift{});
    DenoiseConfig dn;
    dn.enabled = true;
    dn.auto_strength = true;
    const IterationReport r = iterate(build_observation(fine_data(SmoothDrift{}), spec, dn), spec,
                                      InverseConfig{}, evaluate_drift(SmoothDrift{}, kCoarse));
    const double elapsed = seconds_since(t0);
    bool pass = r.rel_errors.size() == 11 && elapsed <= kPipelineBudgetSeconds;
    for (std::size_t k = 0; k < 5 && k + 1 < r.rel_errors.size(); ++k) {
        pass = pass && r.rel_errors[k + 1] <= r.rel_errors[k] + kRelErrSlack;
    }
    pass = pass && r.rel_errors.back() < r.rel_errors.front();
    std::string detail = "RelErr";
    for (double e : r.rel_errors) {
        detail += fmt(" %.4f", e);
    }

    // Same data without the observation smoother, reported only.
    const IterationReport raw = iterate(build_observation(fine_data(SmoothDrift{}), spec), spec,
                                        InverseConfig{}, evaluate_drift(SmoothDrift{}, kCoarse));
    double raw_rise = -INFINITY;
    for (std::size_t k = 0; k < 5; ++k) {
        raw_rise = std::max(raw_rise, raw.rel_errors[k + 1] - raw.rel_errors[k]);
    }
    detail += fmt(", %.1f s; unsmoothed data: max RelErr rise over k<=5 ", elapsed) +
              fmt("%.1e", raw_rise);
    report(6, pass, detail);
}

void criteria_noise() {
    const ScalarField g = fine_data(SmoothDrift{});
    const double ginf = norm_linf(g);
    const ScalarField q_true = evaluate_drift(SmoothDrift{}, kCoarse);
    const ProblemSpec spec = reference_problem(kCoarse, SmoothDrift{});
    const std::vector<double> deltas{2e-2, 2e-3, 2e-4};
    const std::vector<double> bound_deltas{2e-2, 2e-3, 2e-4, 6e-2};

    double bound_ratio = 0.0;
    for (double delta : bound_deltas) {
        for (std::uint64_t seed = 1; seed <= kNoiseSeeds; ++seed) {
            const double dev = norm_linf(add_noise(g, {delta, seed}) - g);
            bound_ratio = std::max(bound_ratio, dev / (0.5 * delta * ginf));
        }
    }
    report(8, bound_ratio <= 1.0, fmt("max ||g_delta - g|| / (delta/2 ||g||) = %.6f", bound_ratio));

    std::vector<std::function<void()>> jobs;
    std::map<double, std::vector<double>> errors;
    for (double delta : deltas) {
        errors[delta].assign(kNoiseSeeds, NAN);
        for (std::uint64_t seed = 1; seed <= kNoiseSeeds; ++seed) {
            double* slot = &errors[delta][seed - 1];
            jobs.push_back([&, delta, seed, slot] {
                DenoiseConfig dn;
                dn.enabled = true;
                dn.auto_strength = true;
                dn.noise_delta = delta;
                const IterationReport r = iterate(build_observation(add_noise(g, {delta, seed}), spec, dn),
                                                  spec, InverseConfig{}, q_true);
                *slot = r.rel_errors.back();
            });
        }
    }
    {
        const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                                 static_cast<unsigned>(jobs.size())));
        std::vector<std::jthread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) {
                    jobs[i]();
                }
            });
        }
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double e1 = median(errors[2e-2]);
    const double e01 = median(errors[2e-3]);
    const double e001 = median(errors[2e-4]);
    report(7, e1 >= e01 && e01 >= e001,
           fmt("median RelErr(10): 1%% %.4f", e1) + fmt(", 0.1%% %.4f", e01) + fmt(", 0.01%% %.4f", e001));
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            std::ifstream in(entry.path(), std::ios::binary);
            out[fs::relative(entry.path(), root).string()] =
                std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        }
    }
    return out;
}

void criterion_reproducible() {
    std::random_device rd;
    const fs::path base = fs::temp_directory_path() / ("drift_acceptance_" + std::to_string(rd()));
    const fs::path a = base / "a";
    const fs::path b = base / "b";
    auto run = [](const fs::path& out) {
        const std::string cmd = std::string(DRIFT_RECOVER_BIN) + " experiment smooth --seeds 7 --quiet --out " +
                                out.string() + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const int sa = run(a);
    const int sb = run(b);
    bool pass = sa == 0 && sb == 0;
    std::size_t files = 0;
    if (pass) {
        const auto fa = csv_files(a);
        const auto fb = csv_files(b);
        files = fa.size();
        pass = !fa.empty() && fa == fb;
    }
    std::error_code ec;
    fs::remove_all(base, ec);
    report(10, pass, "byte-identical CSVs: " + std::to_string(files) + " files");
}

}  // namespace

int main() {
    criterion_mms();
    criterion_steady_state();
    criterion_fixed_point();
    criteria_crime_iterations();
    criterion_monotone_operator();
    criterion_pipeline();
    criteria_noise();
    criterion_reproducible();
    int failures = 0;
    for (const auto& [id, o] : outcomes) {
        std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        failures += o.pass ? 0 : 1;
    }
    std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
