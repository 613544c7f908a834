#pragma once

#include "driftrec/grid.hpp"

#include <functional>
#include <string>
#include <variant>

namespace driftrec {

/// q = 1 + sin(pi x) sin(pi y)
struct SmoothDrift {};

/// Box inclusion: `inside` on |x - cx| <= wx and |y - cy| <= wy (closed),
/// `outside` elsewhere. Defaults reproduce the square-inclusion target.
struct PiecewiseConstantDrift {
    double cx = 0.6;
    double cy = 0.4;
    double wx = 0.18;
    double wy = 0.18;
    double inside = 1.4;
    double outside = 1.0;
};

/// background + increment * mask, with a 0/1 mask sampled by nearest node.
struct MaskDrift {
    double background = 1.0;
    double increment = 0.4;
    ScalarField mask;
};

/// Arbitrary tabulated drift. Off-grid evaluation requires `allow_resample`.
struct TabulatedDrift {
    ScalarField field;
    bool allow_resample = false;
};

using DriftSpec = std::variant<SmoothDrift, PiecewiseConstantDrift, MaskDrift, TabulatedDrift>;

std::string drift_name(const DriftSpec& spec);

/// Validates a mask (entries 0 or 1) and wraps it.
MaskDrift make_mask_drift(ScalarField mask, double background = 1.0, double increment = 0.4);

/// Pointwise value; Tabulated specs interpolate bilinearly.
double drift_at(const DriftSpec& spec, double x, double y);
ScalarField evaluate_drift(const DriftSpec& spec, const Grid2D& grid);

/// Built-in binary region for the character-shaped target: a rectangular
/// frame across the middle band with a vertical bar running through it.
ScalarField sample_character_mask(const Grid2D& grid);

using SpaceTimeFn = std::function<double(double, double)>;  // (s, t)

/// Boundary data. Dirichlet values on y = 0 and y = 1 are functions of (x, t);
/// Neumann data on x = 1 and x = 0 are outward normal derivatives as
/// functions of (y, t). On x = 0 the outward normal is -x, so du/dx = -left.
struct BoundarySpec {
    SpaceTimeFn bottom;  // b1
    SpaceTimeFn right;   // b2
    SpaceTimeFn top;     // b3
    SpaceTimeFn left;    // b4
};

/// a(t) = exp(beta t); b1 = b3 = a(t) e^x, b2 = a(t) e, b4 = -a(t).
BoundarySpec exponential_boundary(double beta = 1.0);
/// Dirichlet data c, zero flux.
BoundarySpec constant_boundary(double c);

struct SourceSpec {
    std::function<double(double, double, double)> fn;  // (x, y, t)
    bool time_dependent = false;
};

struct ProblemSpec {
    Grid2D grid;
    TimeGrid time;
    double cp = 5.0;
    DriftSpec drift = SmoothDrift{};
    SourceSpec source;
    std::function<double(double, double)> initial;
    BoundarySpec boundary;

    void validate() const;
};

/// The reference forward problem: C_p = 5, T = 1, f = 5 sin(pi x) sin(pi y),
/// u0 = e^x and the exponential boundary family.
ProblemSpec reference_problem(const Grid2D& grid, const DriftSpec& drift, std::size_t steps = 100,
                              double beta = 1.0);

/// Source evaluated on the grid at time t.
ScalarField evaluate_source(const ProblemSpec& spec, double t);

/// Overwrites Dirichlet nodes with the t = 0 data and solves the one-sided
/// Neumann stencil for the boundary column so that the discrete flux matches.
ScalarField correct_initial_data(const ScalarField& u0, const BoundarySpec& boundary);

/// Corrected initial state for a problem.
ScalarField initial_state(const ProblemSpec& spec);

}  // namespace driftrec
