#include "driftrec/noise.hpp"

#include "driftrec/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace driftrec {

ScalarField add_noise(const ScalarField& g, const NoiseConfig& cfg) {
    if (!(cfg.delta >= 0.0) || !std::isfinite(cfg.delta)) {
        throw ConfigError("noise delta must be a finite non-negative number");
    }
    ScalarField out = g;
    if (cfg.delta == 0.0) {
        return out;
    }
    const double amplitude = cfg.delta * norm_linf(g);
    std::mt19937_64 rng(cfg.seed);
    for (double& v : out.values()) {
        // 53 random bits -> [0, 1), shifted to [-1/2, 1/2)
        const double xi = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
        v += amplitude * xi;
    }
    return out;
}

std::string to_string(DenoiseMethod method) {
    switch (method) {
    case DenoiseMethod::LocalPolynomial:
        return "local-polynomial";
    case DenoiseMethod::ScreenedDiffusion:
        return "screened-diffusion";
    }
    return "unknown";
}

DenoiseMethod parse_denoise_method(const std::string& name) {
    if (name == "local-polynomial") {
        return DenoiseMethod::LocalPolynomial;
    }
    if (name == "screened-diffusion") {
        return DenoiseMethod::ScreenedDiffusion;
    }
    throw ConfigError("unknown denoise method '" + name +
                      "' (expected local-polynomial or screened-diffusion)");
}

double auto_strength(double delta, double g_inf, DenoiseMethod method) {
    const double sigma = delta * g_inf;
    if (method == DenoiseMethod::LocalPolynomial) {
        return kAutoRadiusConstant * std::pow(sigma, 0.2);
    }
    return kAutoStrengthConstant * std::sqrt(sigma);
}

double resolve_strength(const DenoiseConfig& cfg, const ScalarField& g) {
    double lambda = cfg.strength;
    if (cfg.auto_strength) {
        lambda = auto_strength(cfg.noise_delta, norm_linf(g), cfg.method);
        if (cfg.method == DenoiseMethod::LocalPolynomial) {
            const double h = std::max(g.grid().hx(), g.grid().hy());
            lambda = std::max(lambda, static_cast<double>(kMinAutoHalfWidth) * h);
        }
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("denoise strength must be a finite non-negative number");
    }
    return lambda;
}

ScreenedDiffusionSmoother::ScreenedDiffusionSmoother(double lambda,
                                                     std::optional<SmoothingBoundary> boundary)
    : lambda_(lambda), boundary_(std::move(boundary)) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("denoise strength must be a finite non-negative number");
    }
}

ScalarField ScreenedDiffusionSmoother::smooth(const ScalarField& g) const {
    const Grid2D& grid = g.grid();
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    if (boundary_ && (boundary_->bottom.size() != nx || boundary_->top.size() != nx ||
                      boundary_->left_dx.size() != ny || boundary_->right_dx.size() != ny)) {
        throw DimensionError("smoothing boundary data does not match the grid");
    }
    if (lambda_ == 0.0 && !boundary_) {
        return g;
    }
    const double cx = lambda_ / (grid.hx() * grid.hx());
    const double cy = lambda_ / (grid.hy() * grid.hy());
    const double i2hx = 1.0 / (2.0 * grid.hx());

    using Sparse = Eigen::SparseMatrix<double>;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(5 * grid.size());
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(grid.size()));
    auto add = [&](std::size_t row, std::size_t col, double v) {
        entries.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
    };

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t row = grid.index(i, j);
            auto& b = rhs[static_cast<Eigen::Index>(row)];
            b = g[row];
            if (boundary_) {
                const BoundaryTag tag = boundary_tag(grid, i, j);
                if (tag == BoundaryTag::DirichletBottom || tag == BoundaryTag::DirichletTop) {
                    add(row, row, 1.0);
                    b = tag == BoundaryTag::DirichletBottom ? boundary_->bottom[i] : boundary_->top[i];
                    continue;
                }
                if (tag == BoundaryTag::NeumannLeft) {
                    add(row, grid.index(0, j), -3.0 * i2hx);
                    add(row, grid.index(1, j), 4.0 * i2hx);
                    add(row, grid.index(2, j), -1.0 * i2hx);
                    b = boundary_->left_dx[j];
                    continue;
                }
                if (tag == BoundaryTag::NeumannRight) {
                    add(row, grid.index(nx - 1, j), 3.0 * i2hx);
                    add(row, grid.index(nx - 2, j), -4.0 * i2hx);
                    add(row, grid.index(nx - 3, j), 1.0 * i2hx);
                    b = boundary_->right_dx[j];
                    continue;
                }
            }
            // mirrored ghosts may hit the same neighbour twice; triplets sum
            const std::size_t jm = j == 0 ? 1 : j - 1;
            const std::size_t jp = j == ny - 1 ? ny - 2 : j + 1;
            const std::size_t im = i == 0 ? 1 : i - 1;
            const std::size_t ip = i == nx - 1 ? nx - 2 : i + 1;
            add(row, row, 1.0 + 2.0 * cx + 2.0 * cy);
            add(row, grid.index(im, j), -cx);
            add(row, grid.index(ip, j), -cx);
            add(row, grid.index(i, jm), -cy);
            add(row, grid.index(i, jp), -cy);
        }
    }
    Sparse a(static_cast<int>(grid.size()), static_cast<int>(grid.size()));
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();

    Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw SolverError("smoothing system factorization failed: " + lu.lastErrorMessage());
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    return ScalarField(grid, std::vector<double>(x.data(), x.data() + x.size()));
}

namespace {

constexpr int kCubicTerms = 10;

// Cubic monomials in scaled offsets (X, Y).
void cubic_row(double X, double Y, double* row) {
    row[0] = 1.0;
    row[1] = X;
    row[2] = Y;
    row[3] = X * X;
    row[4] = X * Y;
    row[5] = Y * Y;
    row[6] = X * X * X;
    row[7] = X * X * Y;
    row[8] = X * Y * Y;
    row[9] = Y * Y * Y;
}

}  // namespace

LocalPolynomialSmoother::LocalPolynomialSmoother(std::size_t half_width) : w_(half_width) {
    if (w_ == 1) {
        throw ConfigError("local polynomial window needs a half-width of 0 or at least 2 nodes");
    }
}

std::size_t LocalPolynomialSmoother::half_width_for(double radius, const Grid2D& grid) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw ConfigError("denoise strength must be a finite non-negative number");
    }
    if (radius == 0.0) {
        return 0;
    }
    const double h = std::max(grid.hx(), grid.hy());
    const std::size_t cap = (std::min(grid.nx(), grid.ny()) - 1) / 2;
    const auto w = static_cast<std::size_t>(std::lround(radius / h));
    return std::clamp<std::size_t>(w, 2, std::max<std::size_t>(cap, 2));
}

SmoothedData LocalPolynomialSmoother::fit(const ScalarField& g) const {
    const Grid2D& grid = g.grid();
    if (w_ == 0) {
        return {g, apply_laplacian(g), apply_dx(g)};
    }
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    const std::size_t span = 2 * w_ + 1;
    if (span > nx || span > ny) {
        throw DimensionError("local polynomial window of " + std::to_string(span) +
                             " nodes does not fit a " + std::to_string(nx) + "x" +
                             std::to_string(ny) + " grid");
    }
    const double sx = static_cast<double>(w_) * grid.hx();
    const double sy = static_cast<double>(w_) * grid.hy();
    const Eigen::Index points = static_cast<Eigen::Index>(span * span);

    // The weights depend only on where the node sits inside its window.
    // Rows: value, d/dx, Laplacian.
    std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> weights(span * span);
    for (std::size_t py = 0; py < span; ++py) {
        for (std::size_t px = 0; px < span; ++px) {
            Eigen::MatrixXd a(points, kCubicTerms);
            for (std::size_t b = 0; b < span; ++b) {
                for (std::size_t c = 0; c < span; ++c) {
                    const double X = (static_cast<double>(c) - static_cast<double>(px)) / w_;
                    const double Y = (static_cast<double>(b) - static_cast<double>(py)) / w_;
                    Eigen::Matrix<double, 1, kCubicTerms> row;
                    cubic_row(X, Y, row.data());
                    a.row(static_cast<Eigen::Index>(b * span + c)) = row;
                }
            }
            const Eigen::MatrixXd pinv =
                a.completeOrthogonalDecomposition().pseudoInverse();
            Eigen::Matrix<double, 3, Eigen::Dynamic> w(3, points);
            w.row(0) = pinv.row(0);
            w.row(1) = pinv.row(1) / sx;
            w.row(2) = 2.0 * pinv.row(3) / (sx * sx) + 2.0 * pinv.row(5) / (sy * sy);
            weights[py * span + px] = std::move(w);
        }
    }

    SmoothedData out{ScalarField(grid), ScalarField(grid), ScalarField(grid)};
    Eigen::VectorXd window(points);
    for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t j0 = std::clamp<std::size_t>(j, w_, ny - 1 - w_) - w_;
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t i0 = std::clamp<std::size_t>(i, w_, nx - 1 - w_) - w_;
            for (std::size_t b = 0; b < span; ++b) {
                for (std::size_t c = 0; c < span; ++c) {
                    window[static_cast<Eigen::Index>(b * span + c)] = g(i0 + c, j0 + b);
                }
            }
            const Eigen::Vector3d r = weights[(j - j0) * span + (i - i0)] * window;
            out.g(i, j) = r[0];
            out.dx(i, j) = r[1];
            out.lap(i, j) = r[2];
        }
    }
    return out;
}

ScalarField LocalPolynomialSmoother::smooth(const ScalarField& g) const {
    return fit(g).g;
}

namespace {

void pin_dirichlet_edges(ScalarField& out, const ScalarField& observed,
                         const std::optional<SmoothingBoundary>& boundary) {
    const Grid2D& grid = out.grid();
    const std::size_t top = grid.ny() - 1;
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        out(i, 0) = boundary ? boundary->bottom[i] : observed(i, 0);
        out(i, top) = boundary ? boundary->top[i] : observed(i, top);
    }
}

}  // namespace

SmoothedData smooth_with_derivatives(const ScalarField& g_noisy, const DenoiseConfig& cfg,
                                     const std::optional<SmoothingBoundary>& boundary) {
    if (!cfg.enabled) {
        return {g_noisy, apply_laplacian(g_noisy), apply_dx(g_noisy)};
    }
    if (cfg.method == DenoiseMethod::LocalPolynomial) {
        const double radius = resolve_strength(cfg, g_noisy);
        return LocalPolynomialSmoother(LocalPolynomialSmoother::half_width_for(radius, g_noisy.grid()))
            .fit(g_noisy);
    }
    ScalarField s = denoise(g_noisy, cfg, boundary);
    ScalarField lap = apply_laplacian(s);
    ScalarField dx = apply_dx(s);
    return {std::move(s), std::move(lap), std::move(dx)};
}

ScalarField denoise(const ScalarField& g_noisy, const DenoiseConfig& cfg,
                    const std::optional<SmoothingBoundary>& boundary) {
    if (!cfg.enabled) {
        return g_noisy;
    }
    const double lambda = resolve_strength(cfg, g_noisy);
    if (cfg.method == DenoiseMethod::LocalPolynomial) {
        const std::size_t w = LocalPolynomialSmoother::half_width_for(lambda, g_noisy.grid());
        ScalarField out = LocalPolynomialSmoother(w).smooth(g_noisy);
        if (w > 0) {
            pin_dirichlet_edges(out, g_noisy, boundary);
        }
        return out;
    }
    if (boundary) {
        return ScreenedDiffusionSmoother(lambda, boundary).smooth(g_noisy);
    }
    ScalarField out = ScreenedDiffusionSmoother(lambda).smooth(g_noisy);
    pin_dirichlet_edges(out, g_noisy, std::nullopt);
    return out;
}

}  // namespace driftrec
