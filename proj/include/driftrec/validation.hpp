#pragma once

#include "driftrec/forward.hpp"
#include "driftrec/grid.hpp"
#include "driftrec/scenario.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftrec {

/// ||q_est - q_true||_L2 / ||q_true||_L2
double rel_err(const ScalarField& q_est, const ScalarField& q_true);

/// Problem whose exact solution is u* = exp(beta t + x): source
/// (beta - 1 + q + C_p) u*, initial data e^x and the exponential boundary family.
ProblemSpec manufactured_problem(const Grid2D& grid, const TimeGrid& time, const DriftSpec& drift,
                                 double beta = 1.0, double cp = 5.0);
double manufactured_solution(double x, double t, double beta);

struct Resolution {
    std::size_t n = 0;  // nodes per direction
    std::size_t steps = 0;
    double final_time = 1.0;
};

struct StudyEntry {
    Resolution resolution;
    double h = 0.0;
    double tau = 0.0;
    double error_inf = 0.0;
    double error_l2 = 0.0;
    std::optional<double> order_inf;  // against the previous entry
    std::optional<double> order_l2;
};

struct ConvergenceStudy {
    std::vector<StudyEntry> entries;
    bool non_monotone = false;  // some refinement did not reduce the error
};

ConvergenceStudy mms_study(const DriftSpec& drift, std::span<const Resolution> resolutions,
                           double beta = 1.0, double cp = 5.0);

// resolution,n,steps,h,tau,error_inf,error_l2,order_inf,order_l2
void write_study_csv(std::ostream& out, const ConvergenceStudy& study);

struct DiagnosticsReport {
    double min_dx_uT = 0.0;   // interior nodes
    double min_dudt = 0.0;    // du/dt at T, or over the whole trajectory when kept
    std::optional<double> monotone_violation;
    std::vector<std::string> notes;
};

inline constexpr double kNegativityThreshold = -1e-8;

DiagnosticsReport positivity_diagnostics(const ForwardSolution& sol, const ProblemSpec& spec);

/// max over nodes and k of q_{k+1} - q_k; -inf for fewer than two iterates.
double monotone_violation(std::span<const ScalarField> iterates);

}  // namespace driftrec
