#pragma once

#include "driftrec/grid.hpp"
#include "driftrec/scenario.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <optional>
#include <vector>

namespace driftrec {

/// Backward Euler step operator (1/tau) I - Lap_h + diag(q) D_x + C_p I with
/// Dirichlet rows replaced by identity and Neumann rows by the one-sided
/// first-derivative stencil. Factorized once at construction; immutable and
/// shareable afterwards.
class SystemMatrix {
public:
    using Sparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

    const Sparse& matrix() const { return *matrix_; }
    const Grid2D& grid() const { return grid_; }
    double tau() const { return tau_; }
    double factorization_seconds() const { return factor_seconds_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    friend SystemMatrix assemble(const ProblemSpec& spec, const ScalarField& q);

private:
    SystemMatrix(Grid2D grid, double tau) : grid_(grid), tau_(tau) {}

    Grid2D grid_;
    double tau_;
    double factor_seconds_ = 0.0;
    std::shared_ptr<const Sparse> matrix_;
    std::shared_ptr<const Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>>> lu_;
};

SystemMatrix assemble(const ProblemSpec& spec, const ScalarField& q);

struct SolverStats {
    std::size_t factorizations = 0;
    std::size_t steps = 0;
    double factorization_seconds = 0.0;
    double solve_seconds = 0.0;
};

struct ForwardOptions {
    bool keep_trajectory = false;
};

struct ForwardSolution {
    ScalarField u_T;
    std::optional<ScalarField> u_prev;  // u^{N-1}
    ScalarField du_dt_T;
    double tau = 0.0;
    std::vector<ScalarField> trajectory;  // u^0..u^N when requested
    SolverStats stats;
};

/// Marches u^0 = corrected initial data through nt backward Euler steps.
ForwardSolution solve_forward(const ProblemSpec& spec, const ScalarField& q,
                              const ForwardOptions& options = {});
/// Same, reusing an already factorized operator built for (spec, q).
ForwardSolution solve_forward(const ProblemSpec& spec, const SystemMatrix& system,
                              const ForwardOptions& options = {});

/// (u^N - u^{N-1}) / tau
ScalarField terminal_derivative(const ForwardSolution& sol);

/// Right-hand side of step n -> n+1 (boundary slots carry data at t^{n+1}).
Eigen::VectorXd step_rhs(const ProblemSpec& spec, const ScalarField& u_n, const ScalarField& f,
                         double t_next);

}  // namespace driftrec
