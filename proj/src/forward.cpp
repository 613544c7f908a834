#include "driftrec/forward.hpp"

#include "driftrec/error.hpp"

#include <chrono>
#include <cmath>

namespace driftrec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SystemMatrix assemble(const ProblemSpec& spec, const ScalarField& q) {
    if (!std::isfinite(spec.cp)) {
        throw ConfigError("cp must be finite");
    }
    const Grid2D& g = spec.grid;
    if (!(q.grid() == g)) {
        throw DimensionError("drift field grid does not match the problem grid");
    }
    if (!q.all_finite()) {
        throw SolverError("drift field contains non-finite values");
    }

    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double tau = spec.time.tau();
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    const double i2hx = 1.0 / (2.0 * g.hx());
    const double diag = 1.0 / tau + 2.0 * ihx2 + 2.0 * ihy2 + spec.cp;

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(5 * g.size());
    auto add = [&](std::size_t row, std::size_t col, double v) {
        entries.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
    };

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t row = g.index(i, j);
            switch (boundary_tag(g, i, j)) {
            case BoundaryTag::DirichletBottom:
            case BoundaryTag::DirichletTop:
                add(row, row, 1.0);
                break;
            case BoundaryTag::NeumannLeft:
                add(row, g.index(0, j), -3.0 * i2hx);
                add(row, g.index(1, j), 4.0 * i2hx);
                add(row, g.index(2, j), -1.0 * i2hx);
                break;
            case BoundaryTag::NeumannRight:
                add(row, g.index(nx - 1, j), 3.0 * i2hx);
                add(row, g.index(nx - 2, j), -4.0 * i2hx);
                add(row, g.index(nx - 3, j), 1.0 * i2hx);
                break;
            case BoundaryTag::Interior: {
                const double qv = q[row];
                add(row, row, diag);
                add(row, g.index(i - 1, j), -ihx2 - qv * i2hx);
                add(row, g.index(i + 1, j), -ihx2 + qv * i2hx);
                add(row, g.index(i, j - 1), -ihy2);
                add(row, g.index(i, j + 1), -ihy2);
                break;
            }
            }
        }
    }

    auto matrix = std::make_shared<SystemMatrix::Sparse>(static_cast<int>(g.size()),
                                                         static_cast<int>(g.size()));
    matrix->setFromTriplets(entries.begin(), entries.end());
    matrix->makeCompressed();

    const auto start = Clock::now();
    auto lu = std::make_shared<Eigen::SparseLU<SystemMatrix::Sparse, Eigen::COLAMDOrdering<int>>>();
    lu->analyzePattern(*matrix);
    lu->factorize(*matrix);
    if (lu->info() != Eigen::Success) {
        throw SolverError("factorization of the " + std::to_string(nx) + "x" + std::to_string(ny) +
                          " step operator failed: " + lu->lastErrorMessage());
    }

    SystemMatrix out(g, tau);
    out.factor_seconds_ = seconds_since(start);
    out.matrix_ = std::move(matrix);
    out.lu_ = std::move(lu);
    return out;
}

Eigen::VectorXd SystemMatrix::solve(const Eigen::VectorXd& rhs) const {
    return lu_->solve(rhs);
}

Eigen::VectorXd step_rhs(const ProblemSpec& spec, const ScalarField& u_n, const ScalarField& f,
                         double t_next) {
    const Grid2D& g = spec.grid;
    const double inv_tau = 1.0 / spec.time.tau();
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(g.size()));
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            double v = 0.0;
            switch (boundary_tag(g, i, j)) {
            case BoundaryTag::DirichletBottom:
                v = spec.boundary.bottom(g.x(i), t_next);
                break;
            case BoundaryTag::DirichletTop:
                v = spec.boundary.top(g.x(i), t_next);
                break;
            case BoundaryTag::NeumannLeft:
                v = -spec.boundary.left(g.y(j), t_next);
                break;
            case BoundaryTag::NeumannRight:
                v = spec.boundary.right(g.y(j), t_next);
                break;
            case BoundaryTag::Interior:
                v = u_n[k] * inv_tau + f[k];
                break;
            }
            rhs[static_cast<Eigen::Index>(k)] = v;
        }
    }
    return rhs;
}

ForwardSolution solve_forward(const ProblemSpec& spec, const ScalarField& q,
                              const ForwardOptions& options) {
    const SystemMatrix system = assemble(spec, q);
    ForwardSolution sol = solve_forward(spec, system, options);
    sol.stats.factorizations = 1;
    sol.stats.factorization_seconds = system.factorization_seconds();
    return sol;
}

ForwardSolution solve_forward(const ProblemSpec& spec, const SystemMatrix& system,
                              const ForwardOptions& options) {
    spec.validate();
    const Grid2D& g = spec.grid;
    if (!(system.grid() == g) || system.tau() != spec.time.tau()) {
        throw DimensionError("step operator was assembled for a different grid or time step");
    }
    const std::size_t steps = spec.time.steps();
    const auto start = Clock::now();

    ScalarField u = initial_state(spec);
    ScalarField u_prev = u;
    std::vector<ScalarField> trajectory;
    if (options.keep_trajectory) {
        trajectory.reserve(steps + 1);
        trajectory.push_back(u);
    }

    std::optional<ScalarField> f_static;
    if (!spec.source.time_dependent) {
        f_static = evaluate_source(spec, 0.0);
    }

    for (std::size_t n = 0; n < steps; ++n) {
        const double t_next = spec.time.time(n + 1);
        const ScalarField f = f_static ? *f_static : evaluate_source(spec, t_next);
        // increment form: round-off scales with the step residual, not the state
        const Eigen::Map<const Eigen::VectorXd> un(u.values().data(),
                                                   static_cast<Eigen::Index>(u.size()));
        const Eigen::VectorXd residual = step_rhs(spec, u, f, t_next) - system.matrix() * un;
        const Eigen::VectorXd x = un + system.solve(residual);

        u_prev = std::move(u);
        u = ScalarField(g, std::vector<double>(x.data(), x.data() + x.size()));
        // exact Dirichlet values, independent of solver round-off
        for (std::size_t i = 0; i < g.nx(); ++i) {
            u(i, 0) = spec.boundary.bottom(g.x(i), t_next);
            u(i, g.ny() - 1) = spec.boundary.top(g.x(i), t_next);
        }
        if (!u.all_finite()) {
            throw SolverError("non-finite state after time step " + std::to_string(n + 1));
        }
        if (options.keep_trajectory) {
            trajectory.push_back(u);
        }
    }

    ForwardSolution sol{u, u_prev, ScalarField(g), spec.time.tau(), std::move(trajectory), {}};
    sol.du_dt_T = terminal_derivative(sol);
    sol.stats.steps = steps;
    sol.stats.solve_seconds = seconds_since(start);
    return sol;
}

ScalarField terminal_derivative(const ForwardSolution& sol) {
    if (!sol.u_prev) {
        throw SolverError("terminal derivative needs the state before the final step");
    }
    ScalarField d = sol.u_T - *sol.u_prev;
    d *= 1.0 / sol.tau;
    return d;
}

}  // namespace driftrec
