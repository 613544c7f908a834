#include "driftrec/error.hpp"
#include "driftrec/forward.hpp"
#include "driftrec/noise.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace driftrec;

namespace {

ScalarField reference_terminal_data() {
    const Grid2D fine(100, 100);
    const ForwardSolution sol =
        solve_forward(reference_problem(fine, SmoothDrift{}), evaluate_drift(SmoothDrift{}, fine));
    return restrict_to(sol.u_T, Grid2D(60, 60));
}

ScalarField random_field(const Grid2D& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g);
    for (double& v : f.values()) {
        v = u(rng);
    }
    return f;
}

DenoiseConfig screened(double lambda) {
    DenoiseConfig c;
    c.enabled = true;
    c.method = DenoiseMethod::ScreenedDiffusion;
    c.strength = lambda;
    return c;
}

}  // namespace

TEST_CASE("zero noise returns the input") {
    const ScalarField g = random_field(Grid2D(9, 9), 1);
    CHECK(add_noise(g, {0.0, 17}) == g);
}

TEST_CASE("noise obeys the half-width bound") {
    const ScalarField g = reference_terminal_data();
    const double ginf = norm_linf(g);
    for (double delta : {2e-2, 2e-3, 2e-4, 6e-2}) {
        for (std::uint64_t seed : {0ull, 1ull, 42ull, 123456789ull}) {
            const ScalarField n = add_noise(g, {delta, seed});
            CHECK(norm_linf(n - g) <= 0.5 * delta * ginf);
        }
    }
}

TEST_CASE("noise is reproducible per seed") {
    const ScalarField g = random_field(Grid2D(20, 20), 2);
    CHECK(add_noise(g, {2e-2, 42}) == add_noise(g, {2e-2, 42}));
    CHECK_FALSE(add_noise(g, {2e-2, 42}) == add_noise(g, {2e-2, 43}));
}

TEST_CASE("noise statistics at 3 percent") {
    // 317^2 > 1e5 samples of the perturbation of a constant field
    const Grid2D g(317, 317);
    const double value = 2.0;
    const double delta = 6e-2;
    const ScalarField n = add_noise(ScalarField(g, value), {delta, 7}) - ScalarField(g, value);
    const double amplitude = delta * value;
    double mean = 0.0;
    for (double v : n.values()) {
        mean += v;
    }
    mean /= static_cast<double>(n.size());
    const double sigma_mean = amplitude / std::sqrt(12.0 * static_cast<double>(n.size()));
    CHECK(std::abs(mean) <= 3.0 * sigma_mean);
    CHECK(norm_linf(n) <= 0.03 * value);
    CHECK(norm_linf(n) > 0.029 * value);
}

TEST_CASE("negative noise level is rejected") {
    CHECK_THROWS_AS(add_noise(ScalarField(Grid2D(3, 3)), {-1e-3, 0}), ConfigError);
}

TEST_CASE("screened diffusion denoise") {
    const Grid2D g(40, 30);
    SUBCASE("zero strength is the identity") {
        const ScalarField f = random_field(g, 3);
        CHECK(denoise(f, screened(0.0)) == f);
    }
    SUBCASE("constants are preserved") {
        const ScalarField out = denoise(ScalarField(g, 1.75), screened(0.3));
        CHECK(norm_linf(out - ScalarField(g, 1.75)) <= 1e-12);
    }
    SUBCASE("linear in the input") {
        const ScalarField a = random_field(g, 4);
        const ScalarField b = random_field(g, 5);
        const ScalarField lhs = denoise(2.0 * a - 0.5 * b, screened(1e-3));
        const ScalarField rhs = 2.0 * denoise(a, screened(1e-3)) - 0.5 * denoise(b, screened(1e-3));
        CHECK(norm_linf(lhs - rhs) <= 1e-12);
    }
    SUBCASE("never amplifies") {
        for (unsigned seed = 10; seed < 15; ++seed) {
            const ScalarField f = random_field(g, seed);
            CHECK(norm_linf(denoise(f, screened(5e-3))) <= norm_linf(f) + 1e-10);
        }
    }
    SUBCASE("Dirichlet edges are re-pinned") {
        const ScalarField f = random_field(g, 6);
        const ScalarField out = denoise(f, screened(1e-2));
        for (std::size_t i = 0; i < g.nx(); ++i) {
            CHECK(out(i, 0) == f(i, 0));
            CHECK(out(i, g.ny() - 1) == f(i, g.ny() - 1));
        }
    }
    SUBCASE("disabled config is the identity") {
        const ScalarField f = random_field(g, 7);
        DenoiseConfig off = screened(1.0);
        off.enabled = false;
        CHECK(denoise(f, off) == f);
    }
    SUBCASE("negative strength is rejected") {
        CHECK_THROWS_AS(ScreenedDiffusionSmoother(-1.0), ConfigError);
    }
}

TEST_CASE("smoothing improves the Laplacian of noisy data") {
    const ScalarField g = reference_terminal_data();
    const ScalarField noisy = add_noise(g, {6e-2, 1});
    const ScalarField lap_true = apply_laplacian(g);
    const double raw = norm_l2(apply_laplacian(noisy) - lap_true);

    DenoiseConfig sd = screened(0.0);
    sd.auto_strength = true;
    sd.noise_delta = 6e-2;
    CHECK(norm_l2(apply_laplacian(denoise(noisy, sd)) - lap_true) < raw);

    DenoiseConfig lp;
    lp.enabled = true;
    lp.auto_strength = true;
    lp.noise_delta = 6e-2;
    CHECK(norm_l2(smooth_with_derivatives(noisy, lp).lap - lap_true) < 0.05 * raw);
}

TEST_CASE("local polynomial fit") {
    const Grid2D g(23, 19);
    auto cubic = [](double x, double y) {
        return 0.5 - x + 2.0 * y + 3.0 * x * x - x * y + 0.7 * y * y + x * x * x - 2.0 * x * x * y +
               0.4 * x * y * y - 1.5 * y * y * y;
    };
    auto cubic_dx = [](double x, double y) {
        return -1.0 + 6.0 * x - y + 3.0 * x * x - 4.0 * x * y + 0.4 * y * y;
    };
    auto cubic_lap = [](double x, double y) {
        return 6.0 + 1.4 + 6.0 * x - 4.0 * y + 0.8 * x - 9.0 * y;
    };
    const ScalarField f = ScalarField::from_function(g, cubic);

    SUBCASE("cubics are reproduced with their derivatives, edges included") {
        for (std::size_t w : {2u, 3u, 5u}) {
            const SmoothedData s = LocalPolynomialSmoother(w).fit(f);
            CHECK(norm_linf(s.g - f) <= 1e-11);
            CHECK(norm_linf(s.dx - ScalarField::from_function(g, cubic_dx)) <= 1e-9);
            CHECK(norm_linf(s.lap - ScalarField::from_function(g, cubic_lap)) <= 1e-7);
        }
    }
    SUBCASE("zero half-width is the identity") {
        const SmoothedData s = LocalPolynomialSmoother(0).fit(f);
        CHECK(s.g == f);
        CHECK(s.lap == apply_laplacian(f));
    }
    SUBCASE("linear in the input") {
        const ScalarField a = random_field(g, 8);
        const ScalarField b = random_field(g, 9);
        const LocalPolynomialSmoother sm(3);
        CHECK(norm_linf(sm.smooth(a + 3.0 * b) - (sm.smooth(a) + 3.0 * sm.smooth(b))) <= 1e-12);
    }
    SUBCASE("window sizing") {
        CHECK_THROWS_AS(LocalPolynomialSmoother(1), ConfigError);
        CHECK(LocalPolynomialSmoother::half_width_for(0.0, g) == 0);
        CHECK(LocalPolynomialSmoother::half_width_for(1e-6, g) == 2);
        CHECK(LocalPolynomialSmoother::half_width_for(10.0, g) == 9);
        CHECK(LocalPolynomialSmoother::half_width_for(4.0 / 18.0, g) == 4);
        CHECK_THROWS_AS(LocalPolynomialSmoother(12).fit(f), DimensionError);
    }
    SUBCASE("denoise with the local fit pins the Dirichlet edges") {
        DenoiseConfig c;
        c.enabled = true;
        c.strength = 0.2;
        const ScalarField noisy = random_field(g, 12);
        const ScalarField out = denoise(noisy, c);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            CHECK(out(i, 0) == noisy(i, 0));
        }
    }
}

TEST_CASE("automatic strength grows with the noise level") {
    for (DenoiseMethod m : {DenoiseMethod::ScreenedDiffusion, DenoiseMethod::LocalPolynomial}) {
        CHECK(auto_strength(2e-4, 7.4, m) < auto_strength(2e-3, 7.4, m));
        CHECK(auto_strength(2e-3, 7.4, m) < auto_strength(2e-2, 7.4, m));
    }
    DenoiseConfig c;
    c.enabled = true;
    c.auto_strength = true;
    c.noise_delta = 0.0;
    const ScalarField f(Grid2D(60, 60), 1.0);
    CHECK(resolve_strength(c, f) == doctest::Approx(kMinAutoHalfWidth / 59.0));
}

TEST_CASE("denoise method names") {
    CHECK(parse_denoise_method("local-polynomial") == DenoiseMethod::LocalPolynomial);
    CHECK(parse_denoise_method("screened-diffusion") == DenoiseMethod::ScreenedDiffusion);
    CHECK(to_string(DenoiseMethod::LocalPolynomial) == "local-polynomial");
    CHECK_THROWS_AS(parse_denoise_method("median"), ConfigError);
}
