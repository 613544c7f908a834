#pragma once

#include "driftrec/forward.hpp"
#include "driftrec/grid.hpp"
#include "driftrec/noise.hpp"
#include "driftrec/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace driftrec {

/// How drift values on boundary nodes are produced. Boundary rows of the
/// step operator never read the drift, so only interior nodes are determined
/// by the data.
enum class BoundaryClosure {
    NearestInterior,  // copy the nearest interior node
    Formula,          // evaluate the update formula with one-sided stencils
};

/// Terminal data and its derivatives on the inversion grid.
struct ObservationData {
    ScalarField g;
    ScalarField lap_g;
    ScalarField dx_g;  // floored, strictly positive
    ScalarField f;
    double cp = 0.0;
    std::size_t floored_nodes = 0;
    BoundaryClosure closure = BoundaryClosure::NearestInterior;
};

struct InverseConfig {
    std::size_t max_iters = 10;
    double tol = 1e-13;
    double dx_floor_rel = 1e-3;
    bool project_to_domain = true;
    BoundaryClosure closure = BoundaryClosure::NearestInterior;

    void validate() const;
};

enum class StopReason { Tolerance, MaxIters, Divergence };

std::string to_string(StopReason reason);

struct IterationReport {
    std::vector<ScalarField> iterates;   // q_0 .. q_N
    std::vector<double> increments;      // ||q_k - q_{k-1}||_L2, k = 1..N
    std::vector<double> rel_errors;      // RelErr(k), k = 0..N, when q_true is known
    StopReason stop_reason = StopReason::MaxIters;
    std::size_t iterations_run = 0;
    SolverStats solver;                  // accumulated over all forward solves
};

/// Boundary values and x-derivatives of the exact solution at the final time.
SmoothingBoundary terminal_boundary(const ProblemSpec& spec);

/// Optionally denoises g, then precomputes Lap g and the floored D_x g.
/// Screened diffusion is closed with the problem's boundary data at T.
ObservationData build_observation(const ScalarField& g, const ProblemSpec& spec,
                                  const DenoiseConfig& denoise_cfg = {},
                                  double dx_floor_rel = 1e-3,
                                  BoundaryClosure closure = BoundaryClosure::NearestInterior);

/// Overwrites boundary nodes with their nearest interior node.
void close_boundary(ScalarField& field);

/// q_0 = (f + Lap g - C_p g) / D_x g, the upper bound of the admissible set.
ScalarField initial_guess(const ObservationData& obs);

/// K psi = (f - du/dt(T; psi) + Lap g - C_p g) / D_x g, optionally clipped
/// from above by q_0.
ScalarField apply_K(const ScalarField& psi, const ObservationData& obs, const ProblemSpec& spec,
                    bool project_to_domain = true, SolverStats* stats = nullptr);

/// Same as apply_K with a known terminal time derivative; no forward solve
/// and no projection.
ScalarField K_from_time_derivative(const ScalarField& du_dt_T, const ObservationData& obs);

/// q_{k} = K q_{k-1} from q_0 until the L2 increment drops to tol, max_iters
/// is reached, or the sequence diverges.
IterationReport iterate(const ObservationData& obs, const ProblemSpec& spec,
                        const InverseConfig& cfg,
                        const std::optional<ScalarField>& q_true = std::nullopt);

}  // namespace driftrec
