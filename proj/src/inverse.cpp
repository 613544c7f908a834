#include "driftrec/inverse.hpp"

#include "driftrec/error.hpp"
#include "driftrec/validation.hpp"

#include <algorithm>
#include <cmath>

namespace driftrec {

void InverseConfig::validate() const {
    if (!(tol > 0.0)) {
        throw ConfigError("iteration.tol must be positive");
    }
    if (!(dx_floor_rel > 0.0 && dx_floor_rel < 1.0)) {
        throw ConfigError("iteration.dx_floor_rel must lie in (0, 1)");
    }
}

std::string to_string(StopReason reason) {
    switch (reason) {
    case StopReason::Tolerance:
        return "tolerance";
    case StopReason::MaxIters:
        return "max_iters";
    case StopReason::Divergence:
        return "divergence";
    }
    return "unknown";
}

SmoothingBoundary terminal_boundary(const ProblemSpec& spec) {
    const Grid2D& grid = spec.grid;
    const double t = spec.time.final_time();
    SmoothingBoundary b;
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        b.bottom.push_back(spec.boundary.bottom(grid.x(i), t));
        b.top.push_back(spec.boundary.top(grid.x(i), t));
    }
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        b.left_dx.push_back(-spec.boundary.left(grid.y(j), t));
        b.right_dx.push_back(spec.boundary.right(grid.y(j), t));
    }
    return b;
}

ObservationData build_observation(const ScalarField& g, const ProblemSpec& spec,
                                  const DenoiseConfig& denoise_cfg, double dx_floor_rel,
                                  BoundaryClosure closure) {
    const Grid2D& grid = spec.grid;
    if (!(g.grid() == grid)) {
        throw DimensionError("observation is on a " + std::to_string(g.grid().nx()) + "x" +
                             std::to_string(g.grid().ny()) + " grid, inversion grid is " +
                             std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
    }
    if (!g.all_finite()) {
        throw DegenerateDataError("observation contains non-finite values");
    }

    SmoothedData smoothed = smooth_with_derivatives(
        g, denoise_cfg,
        denoise_cfg.enabled ? std::optional<SmoothingBoundary>(terminal_boundary(spec))
                            : std::nullopt);
    ScalarField data = std::move(smoothed.g);
    ScalarField dx = std::move(smoothed.dx);
    const double dx_max = dx.max();
    if (!(dx_max > 0.0)) {
        throw DegenerateDataError("observation has no positive x-derivative anywhere");
    }
    const double floor = dx_floor_rel * dx_max;
    std::size_t floored = 0;
    for (double& v : dx.values()) {
        if (v < floor) {
            v = floor;
            ++floored;
        }
    }

    ScalarField lap = std::move(smoothed.lap);
    return ObservationData{std::move(data), std::move(lap), std::move(dx),
                           evaluate_source(spec, spec.time.final_time()), spec.cp, floored,
                           closure};
}

void close_boundary(ScalarField& field) {
    const Grid2D& g = field.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    auto inner = [](std::size_t k, std::size_t n) { return std::clamp<std::size_t>(k, 1, n - 2); };
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            if (boundary_tag(g, i, j) != BoundaryTag::Interior) {
                field(i, j) = field(inner(i, nx), inner(j, ny));
            }
        }
    }
}

ScalarField initial_guess(const ObservationData& obs) {
    ScalarField q(obs.g.grid());
    for (std::size_t k = 0; k < q.size(); ++k) {
        q[k] = (obs.f[k] + obs.lap_g[k] - obs.cp * obs.g[k]) / obs.dx_g[k];
    }
    if (obs.closure == BoundaryClosure::NearestInterior) {
        close_boundary(q);
    }
    return q;
}

ScalarField K_from_time_derivative(const ScalarField& du_dt_T, const ObservationData& obs) {
    ScalarField q(obs.g.grid());
    for (std::size_t k = 0; k < q.size(); ++k) {
        q[k] = (obs.f[k] - du_dt_T[k] + obs.lap_g[k] - obs.cp * obs.g[k]) / obs.dx_g[k];
    }
    if (obs.closure == BoundaryClosure::NearestInterior) {
        close_boundary(q);
    }
    return q;
}

ScalarField apply_K(const ScalarField& psi, const ObservationData& obs, const ProblemSpec& spec,
                    bool project_to_domain, SolverStats* stats) {
    const ForwardSolution sol = solve_forward(spec, psi);
    if (stats) {
        stats->factorizations += sol.stats.factorizations;
        stats->steps += sol.stats.steps;
        stats->factorization_seconds += sol.stats.factorization_seconds;
        stats->solve_seconds += sol.stats.solve_seconds;
    }
    ScalarField next = K_from_time_derivative(sol.du_dt_T, obs);
    if (project_to_domain) {
        const ScalarField upper = initial_guess(obs);
        for (std::size_t k = 0; k < next.size(); ++k) {
            next[k] = std::min(next[k], upper[k]);
        }
    }
    return next;
}

IterationReport iterate(const ObservationData& obs, const ProblemSpec& spec,
                        const InverseConfig& cfg, const std::optional<ScalarField>& q_true) {
    cfg.validate();
    IterationReport report;
    report.iterates.push_back(initial_guess(obs));
    if (q_true) {
        report.rel_errors.push_back(rel_err(report.iterates.back(), *q_true));
    }
    if (!report.iterates.back().all_finite()) {
        report.stop_reason = StopReason::Divergence;
        return report;
    }

    report.stop_reason = StopReason::MaxIters;
    std::size_t growth_streak = 0;
    for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
        ScalarField next(spec.grid);
        try {
            next = apply_K(report.iterates.back(), obs, spec, cfg.project_to_domain, &report.solver);
        } catch (const SolverError& e) {
            throw SolverError("iteration " + std::to_string(k) + ": " + e.what());
        }
        const double increment = norm_l2(next - report.iterates.back());
        report.iterates.push_back(std::move(next));
        report.increments.push_back(increment);
        report.iterations_run = k;
        if (q_true) {
            report.rel_errors.push_back(rel_err(report.iterates.back(), *q_true));
        }

        if (!report.iterates.back().all_finite() || !std::isfinite(increment)) {
            report.stop_reason = StopReason::Divergence;
            break;
        }
        if (k >= 2 && increment > 10.0 * report.increments[k - 2]) {
            if (++growth_streak >= 3) {
                report.stop_reason = StopReason::Divergence;
                break;
            }
        } else {
            growth_streak = 0;
        }
        if (increment <= cfg.tol) {
            report.stop_reason = StopReason::Tolerance;
            break;
        }
    }
    return report;
}

}  // namespace driftrec
