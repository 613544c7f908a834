#pragma once

#include "driftrec/grid.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace driftrec {

struct NoiseConfig {
    double delta = 0.0;
    std::uint64_t seed = 0;
};

inline constexpr const char* kNoiseGenerator = "std::mt19937_64";

/// g + delta * ||g||_inf * xi with xi uniform on [-1/2, 1/2), one draw per
/// node in storage order. The generator is seeded per call.
ScalarField add_noise(const ScalarField& g, const NoiseConfig& cfg);

enum class DenoiseMethod {
    LocalPolynomial,    // strength = window radius in domain units
    ScreenedDiffusion,  // strength = lambda
};

std::string to_string(DenoiseMethod method);
DenoiseMethod parse_denoise_method(const std::string& name);

struct DenoiseConfig {
    bool enabled = false;
    DenoiseMethod method = DenoiseMethod::LocalPolynomial;
    double strength = 0.0;
    bool auto_strength = false;
    double noise_delta = 0.0;  // used by auto_strength
};

// Automatic strength for noise level delta:
//   screened diffusion  lambda = c * sqrt(delta * ||g||_inf)
//   local polynomial    radius = c * (delta * ||g||_inf)^(1/5), and at least
//                       kMinAutoHalfWidth nodes when applied to a grid
inline constexpr double kAutoStrengthConstant = 0.04;
inline constexpr double kAutoRadiusConstant = 0.25;
inline constexpr std::size_t kMinAutoHalfWidth = 3;

double auto_strength(double delta, double g_inf,
                     DenoiseMethod method = DenoiseMethod::ScreenedDiffusion);

/// Smoothing strategy used on terminal data before differentiation.
class Smoother {
public:
    virtual ~Smoother() = default;
    virtual std::string name() const = 0;
    virtual ScalarField smooth(const ScalarField& g) const = 0;
};

/// Known boundary behaviour of the data: values on y = 0 / y = 1 (nx each)
/// and x-derivatives on x = 0 / x = 1 (ny each).
struct SmoothingBoundary {
    std::vector<double> bottom;
    std::vector<double> top;
    std::vector<double> left_dx;
    std::vector<double> right_dx;
};

/// Solves (I - lambda * Lap) g_s = g. Without boundary data Lap is the
/// five-point Laplacian with homogeneous Neumann closure on all four sides.
/// With boundary data the y-edges are fixed to the given values and the
/// x-edges carry the one-sided derivative rows of the forward solver.
class ScreenedDiffusionSmoother : public Smoother {
public:
    explicit ScreenedDiffusionSmoother(double lambda,
                                       std::optional<SmoothingBoundary> boundary = std::nullopt);

    std::string name() const override { return "screened-diffusion"; }
    ScalarField smooth(const ScalarField& g) const override;

private:
    double lambda_;
    std::optional<SmoothingBoundary> boundary_;
};

/// Smoothed data together with derivative estimates at every node.
struct SmoothedData {
    ScalarField g;
    ScalarField lap;
    ScalarField dx;
};

/// Least-squares fit of a full cubic in (x, y) over a square window of
/// (2w+1)^2 nodes around each node. The window is shifted inward near the
/// edges so it always lies inside the grid. Values and derivatives are read
/// from the fitted coefficients. w = 0 is the identity.
class LocalPolynomialSmoother : public Smoother {
public:
    explicit LocalPolynomialSmoother(std::size_t half_width);

    /// Half-width in nodes for a radius in domain units on `grid`, clamped to
    /// what the grid can hold. Returns 0 for radius 0.
    static std::size_t half_width_for(double radius, const Grid2D& grid);

    std::string name() const override { return "local-polynomial"; }
    ScalarField smooth(const ScalarField& g) const override;
    SmoothedData fit(const ScalarField& g) const;

    std::size_t half_width() const { return w_; }

private:
    std::size_t w_;
};

/// Smooths g_noisy and re-pins the Dirichlet edges (y = 0 and y = 1) to the
/// observed values. When boundary data are supplied the smoother uses them
/// and the edges take the supplied values instead.
ScalarField denoise(const ScalarField& g_noisy, const DenoiseConfig& cfg,
                    const std::optional<SmoothingBoundary>& boundary = std::nullopt);

/// Smoothed data with derivatives for the inversion. Local polynomial fits
/// supply their own derivatives; screened diffusion is followed by the
/// finite-difference operators.
SmoothedData smooth_with_derivatives(const ScalarField& g_noisy, const DenoiseConfig& cfg,
                                     const std::optional<SmoothingBoundary>& boundary = std::nullopt);

/// Effective strength for a config applied to a given field.
double resolve_strength(const DenoiseConfig& cfg, const ScalarField& g);

}  // namespace driftrec
