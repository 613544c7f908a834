#include "driftrec/validation.hpp"

#include "driftrec/error.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace driftrec {

double rel_err(const ScalarField& q_est, const ScalarField& q_true) {
    const double denom = norm_l2(q_true);
    if (denom == 0.0) {
        throw DegenerateDataError("relative error against an identically zero field");
    }
    return norm_l2(q_est - q_true) / denom;
}

double manufactured_solution(double x, double t, double beta) {
    return std::exp(beta * t + x);
}

ProblemSpec manufactured_problem(const Grid2D& grid, const TimeGrid& time, const DriftSpec& drift,
                                 double beta, double cp) {
    ProblemSpec spec{grid, time, cp, drift, {}, {}, {}};
    spec.source.fn = [drift, beta, cp](double x, double y, double t) {
        return (beta - 1.0 + drift_at(drift, x, y) + cp) * manufactured_solution(x, t, beta);
    };
    spec.source.time_dependent = beta != 0.0;
    spec.initial = [](double x, double) { return std::exp(x); };
    spec.boundary = exponential_boundary(beta);
    return spec;
}

ConvergenceStudy mms_study(const DriftSpec& drift, std::span<const Resolution> resolutions,
                           double beta, double cp) {
    ConvergenceStudy study;
    for (const Resolution& r : resolutions) {
        const Grid2D grid(r.n, r.n);
        const TimeGrid time(r.final_time, r.steps);
        const ProblemSpec spec = manufactured_problem(grid, time, drift, beta, cp);
        const ForwardSolution sol = solve_forward(spec, evaluate_drift(drift, grid));

        const ScalarField exact = ScalarField::from_function(grid, [&](double x, double) {
            return manufactured_solution(x, time.final_time(), beta);
        });
        const ScalarField err = sol.u_T - exact;

        StudyEntry entry{r, grid.hx(), time.tau(), norm_linf(err), norm_l2(err), {}, {}};
        if (!study.entries.empty()) {
            const StudyEntry& prev = study.entries.back();
            if (entry.error_inf >= prev.error_inf) {
                study.non_monotone = true;
            }
            const bool same_time = prev.resolution.steps == r.steps &&
                                   prev.resolution.final_time == r.final_time;
            const bool same_space = prev.resolution.n == r.n;
            double ratio = 0.0;
            if (same_time && !same_space) {
                ratio = prev.h / entry.h;
            } else if (same_space && !same_time) {
                ratio = prev.tau / entry.tau;
            }
            if (ratio > 1.0 && entry.error_inf > 0.0 && entry.error_l2 > 0.0) {
                entry.order_inf = std::log(prev.error_inf / entry.error_inf) / std::log(ratio);
                entry.order_l2 = std::log(prev.error_l2 / entry.error_l2) / std::log(ratio);
            }
        }
        study.entries.push_back(entry);
    }
    return study;
}

void write_study_csv(std::ostream& out, const ConvergenceStudy& study) {
    out << "resolution,n,steps,h,tau,error_inf,error_l2,order_inf,order_l2\n";
    std::size_t k = 0;
    for (const StudyEntry& e : study.entries) {
        out << k++ << ',' << e.resolution.n << ',' << e.resolution.steps << ','
            << format_double(e.h) << ',' << format_double(e.tau) << ','
            << format_double(e.error_inf) << ',' << format_double(e.error_l2) << ','
            << (e.order_inf ? format_double(*e.order_inf) : "") << ','
            << (e.order_l2 ? format_double(*e.order_l2) : "") << '\n';
    }
}

DiagnosticsReport positivity_diagnostics(const ForwardSolution& sol, const ProblemSpec& spec) {
    const Grid2D& g = spec.grid;
    DiagnosticsReport report;

    const ScalarField dx = apply_dx(sol.u_T);
    double min_dx = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
        for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
            min_dx = std::min(min_dx, dx(i, j));
        }
    }
    report.min_dx_uT = min_dx;

    double min_dudt = sol.du_dt_T.min();
    if (sol.trajectory.size() >= 2) {
        for (std::size_t n = 1; n < sol.trajectory.size(); ++n) {
            const ScalarField d = (sol.trajectory[n] - sol.trajectory[n - 1]) * (1.0 / sol.tau);
            min_dudt = std::min(min_dudt, d.min());
        }
    }
    report.min_dudt = min_dudt;

    if (report.min_dx_uT < kNegativityThreshold) {
        report.notes.push_back("x-derivative of u(T) is negative at some interior node (min " +
                               format_double(report.min_dx_uT) + ")");
    } else if (report.min_dx_uT <= 0.0) {
        report.notes.push_back("x-derivative of u(T) is not strictly positive");
    }
    if (report.min_dudt < kNegativityThreshold) {
        report.notes.push_back("time derivative is negative somewhere (min " +
                               format_double(report.min_dudt) + ")");
    }
    return report;
}

double monotone_violation(std::span<const ScalarField> iterates) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < iterates.size(); ++k) {
        worst = std::max(worst, (iterates[k] - iterates[k - 1]).max());
    }
    return worst;
}

}  // namespace driftrec
