#include "driftrec/scenario.hpp"

#include "driftrec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace driftrec {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double nearest_node_value(const ScalarField& field, double x, double y) {
    const Grid2D& g = field.grid();
    auto idx = [](double s, std::size_t n) {
        const double pos = std::clamp(s, 0.0, 1.0) * static_cast<double>(n - 1);
        return static_cast<std::size_t>(std::lround(pos));
    };
    return field(idx(x, g.nx()), idx(y, g.ny()));
}

}  // namespace

std::string drift_name(const DriftSpec& spec) {
    return std::visit(overloaded{
                          [](const SmoothDrift&) { return std::string("smooth"); },
                          [](const PiecewiseConstantDrift&) { return std::string("piecewise"); },
                          [](const MaskDrift&) { return std::string("mask"); },
                          [](const TabulatedDrift&) { return std::string("tabulated"); },
                      },
                      spec);
}

MaskDrift make_mask_drift(ScalarField mask, double background, double increment) {
    for (double v : mask.values()) {
        if (v != 0.0 && v != 1.0) {
            throw ConfigError("mask entries must be 0 or 1");
        }
    }
    if (!std::isfinite(background) || !std::isfinite(increment)) {
        throw ConfigError("mask drift parameters must be finite");
    }
    return MaskDrift{background, increment, std::move(mask)};
}

double drift_at(const DriftSpec& spec, double x, double y) {
    return std::visit(
        overloaded{
            [&](const SmoothDrift&) {
                return 1.0 + std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
            },
            [&](const PiecewiseConstantDrift& p) {
                // closed box; the slack absorbs rounding in x - cx
                const double slack = 1e-12;
                const bool in = std::abs(x - p.cx) <= p.wx + slack &&
                                std::abs(y - p.cy) <= p.wy + slack;
                return in ? p.inside : p.outside;
            },
            [&](const MaskDrift& m) {
                return m.background + m.increment * nearest_node_value(m.mask, x, y);
            },
            [&](const TabulatedDrift& t) { return sample_bilinear(t.field, x, y); },
        },
        spec);
}

ScalarField evaluate_drift(const DriftSpec& spec, const Grid2D& grid) {
    if (const auto* tab = std::get_if<TabulatedDrift>(&spec)) {
        if (tab->field.grid() == grid) {
            return tab->field;
        }
        if (!tab->allow_resample) {
            throw DimensionError("tabulated drift is on a " + std::to_string(tab->field.grid().nx()) +
                                 "x" + std::to_string(tab->field.grid().ny()) +
                                 " grid; resampling not allowed");
        }
        return interpolate(tab->field, grid);
    }
    ScalarField out = ScalarField::from_function(grid, [&](double x, double y) {
        return drift_at(spec, x, y);
    });
    if (!out.all_finite()) {
        throw ConfigError("drift evaluates to non-finite values");
    }
    return out;
}

ScalarField sample_character_mask(const Grid2D& grid) {
    // Frame around the middle band plus a bar crossing it top to bottom.
    auto in_box = [](double x, double y, double x0, double x1, double y0, double y1) {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    };
    return ScalarField::from_function(grid, [&](double x, double y) {
        const double t = 0.08;
        const bool outer = in_box(x, y, 0.2, 0.8, 0.32, 0.68);
        const bool inner = in_box(x, y, 0.2 + t, 0.8 - t, 0.32 + t, 0.68 - t);
        const bool bar = in_box(x, y, 0.46, 0.54, 0.1, 0.9);
        return ((outer && !inner) || bar) ? 1.0 : 0.0;
    });
}

BoundarySpec exponential_boundary(double beta) {
    BoundarySpec b;
    b.bottom = [beta](double x, double t) { return std::exp(beta * t) * std::exp(x); };
    b.top = b.bottom;
    b.right = [beta](double, double t) { return std::exp(beta * t) * std::numbers::e; };
    b.left = [beta](double, double t) { return -std::exp(beta * t); };
    return b;
}

BoundarySpec constant_boundary(double c) {
    BoundarySpec b;
    b.bottom = [c](double, double) { return c; };
    b.top = b.bottom;
    b.right = [](double, double) { return 0.0; };
    b.left = b.right;
    return b;
}

void ProblemSpec::validate() const {
    if (!(cp > 0.0) || !std::isfinite(cp)) {
        throw ConfigError("cp must be positive");
    }
    if (!source.fn || !initial || !boundary.bottom || !boundary.top || !boundary.left ||
        !boundary.right) {
        throw ConfigError("problem definition is incomplete");
    }
}

ProblemSpec reference_problem(const Grid2D& grid, const DriftSpec& drift, std::size_t steps,
                              double beta) {
    ProblemSpec spec{grid, TimeGrid(1.0, steps), 5.0, drift, {}, {}, {}};
    spec.cp = 5.0;
    spec.drift = drift;
    spec.source.fn = [](double x, double y, double) {
        return 5.0 * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    };
    spec.initial = [](double x, double) { return std::exp(x); };
    spec.boundary = exponential_boundary(beta);
    return spec;
}

ScalarField evaluate_source(const ProblemSpec& spec, double t) {
    return ScalarField::from_function(spec.grid,
                                      [&](double x, double y) { return spec.source.fn(x, y, t); });
}

ScalarField correct_initial_data(const ScalarField& u0, const BoundarySpec& boundary) {
    const Grid2D& g = u0.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double h = g.hx();
    ScalarField u = u0;
    for (std::size_t i = 0; i < nx; ++i) {
        u(i, 0) = boundary.bottom(g.x(i), 0.0);
        u(i, ny - 1) = boundary.top(g.x(i), 0.0);
    }
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        const double y = g.y(j);
        // (-3u0 + 4u1 - u2) / 2h = du/dx = -b4
        const double left_dx = -boundary.left(y, 0.0);
        u(0, j) = (4.0 * u(1, j) - u(2, j) - 2.0 * h * left_dx) / 3.0;
        // (3u_n - 4u_{n-1} + u_{n-2}) / 2h = du/dx = b2
        const double right_dx = boundary.right(y, 0.0);
        u(nx - 1, j) = (2.0 * h * right_dx + 4.0 * u(nx - 2, j) - u(nx - 3, j)) / 3.0;
    }
    return u;
}

ScalarField initial_state(const ProblemSpec& spec) {
    return correct_initial_data(ScalarField::from_function(spec.grid, spec.initial), spec.boundary);
}

}  // namespace driftrec
