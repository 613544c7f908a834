#include "driftrec/error.hpp"
#include "driftrec/validation.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

using namespace driftrec;

TEST_CASE("relative error closed forms") {
    const Grid2D g(12, 9);
    const ScalarField ones(g, 1.0);
    CHECK(rel_err(ones, ones) == 0.0);
    CHECK(rel_err(ScalarField(g, 1.1), ones) == doctest::Approx(0.1));
    CHECK(rel_err(ScalarField(g), ones) == doctest::Approx(1.0));
    CHECK(rel_err(ScalarField(g, -1.0), ones) == doctest::Approx(2.0));
    CHECK_THROWS_AS(rel_err(ones, ScalarField(g)), DegenerateDataError);
}

TEST_CASE("relative error is scale invariant") {
    const Grid2D g(20, 20);
    const ScalarField q = evaluate_drift(SmoothDrift{}, g);
    const ScalarField e = evaluate_drift(PiecewiseConstantDrift{}, g);
    CHECK(rel_err(3.0 * e, 3.0 * q) == doctest::Approx(rel_err(e, q)).epsilon(1e-14));
}

TEST_CASE("manufactured solution with beta = 0 is held steady") {
    const Grid2D g(21, 21);
    const ProblemSpec spec = manufactured_problem(g, TimeGrid(1.0, 20), SmoothDrift{}, 0.0);
    const ForwardSolution sol = solve_forward(spec, evaluate_drift(SmoothDrift{}, g));
    // The discrete steady state differs from e^x by the spatial truncation error,
    // which the time march must not grow.
    const ScalarField exact = ScalarField::from_function(g, [](double x, double) { return std::exp(x); });
    CHECK(norm_linf(sol.u_T - exact) <= 1e-3);
    CHECK(norm_linf(sol.du_dt_T) <= 1e-3);
}

TEST_CASE("manufactured source") {
    const ProblemSpec spec = manufactured_problem(Grid2D(5, 5), TimeGrid(1.0, 4), SmoothDrift{}, 1.0);
    const double x = 0.3;
    const double y = 0.6;
    const double t = 0.5;
    const double expected = (1.0 - 1.0 + drift_at(SmoothDrift{}, x, y) + 5.0) * std::exp(t + x);
    CHECK(spec.source.fn(x, y, t) == doctest::Approx(expected));
    CHECK(spec.source.time_dependent);
    CHECK(spec.boundary.top(x, t) == doctest::Approx(std::exp(t + x)));
}

TEST_CASE("single resolution gives no orders") {
    const std::vector<Resolution> r{{11, 10, 1.0}};
    const ConvergenceStudy s = mms_study(SmoothDrift{}, r);
    REQUIRE(s.entries.size() == 1);
    CHECK_FALSE(s.entries[0].order_inf);
    CHECK(s.entries[0].error_inf > 0.0);
    CHECK_FALSE(s.non_monotone);
}

TEST_CASE("mixed refinements report no order") {
    const std::vector<Resolution> r{{11, 10, 1.0}, {21, 20, 1.0}};
    const ConvergenceStudy s = mms_study(SmoothDrift{}, r);
    CHECK_FALSE(s.entries[1].order_inf);
}

TEST_CASE("temporal study on a small grid is first order") {
    const std::vector<Resolution> r{{41, 10, 1.0}, {41, 20, 1.0}};
    const ConvergenceStudy s = mms_study(SmoothDrift{}, r);
    REQUIRE(s.entries[1].order_inf);
    CHECK(*s.entries[1].order_inf > 0.8);
    CHECK(*s.entries[1].order_inf < 1.2);
    CHECK(s.entries[1].tau == doctest::Approx(0.05));
}

TEST_CASE("study csv") {
    const std::vector<Resolution> r{{11, 5, 1.0}, {11, 10, 1.0}};
    std::stringstream out;
    write_study_csv(out, mms_study(SmoothDrift{}, r));
    std::string line;
    std::getline(out, line);
    CHECK(line == "resolution,n,steps,h,tau,error_inf,error_l2,order_inf,order_l2");
    std::getline(out, line);
    CHECK(line.rfind("0,11,5,", 0) == 0);
    CHECK(line.substr(line.size() - 2) == ",,");
    std::getline(out, line);
    CHECK(line.rfind("1,11,10,", 0) == 0);
    CHECK(line.back() != ',');
}

TEST_CASE("positivity diagnostics") {
    const Grid2D g(30, 30);
    const ScalarField q = evaluate_drift(SmoothDrift{}, g);
    const ProblemSpec spec = reference_problem(g, SmoothDrift{}, 40);
    SUBCASE("terminal data of the reference problem is positive") {
        const DiagnosticsReport r = positivity_diagnostics(solve_forward(spec, q), spec);
        CHECK(r.min_dx_uT > 0.0);
        CHECK(r.min_dudt >= kNegativityThreshold);
        CHECK(r.notes.empty());
    }
    SUBCASE("early negative time derivative is reported over the trajectory") {
        // at t = 0, u_t = e^x (1 - q - C_p) + f, about -8.2 near x = 1
        const DiagnosticsReport r =
            positivity_diagnostics(solve_forward(spec, q, ForwardOptions{true}), spec);
        CHECK(r.min_dudt < -1.0);
        CHECK(r.min_dudt > -8.5);
        REQUIRE(r.notes.size() == 1);
        CHECK(r.notes[0].rfind("time derivative", 0) == 0);
    }
    SUBCASE("zero source does not break the report") {
        ProblemSpec zero = spec;
        zero.source.fn = [](double, double, double) { return 0.0; };
        const DiagnosticsReport r = positivity_diagnostics(solve_forward(zero, q), zero);
        CHECK(std::isfinite(r.min_dudt));
        CHECK(std::isfinite(r.min_dx_uT));
    }
}

TEST_CASE("monotone violation") {
    const Grid2D g(4, 4);
    std::vector<ScalarField> it{ScalarField(g, 3.0), ScalarField(g, 2.0), ScalarField(g, 2.0)};
    CHECK(monotone_violation(it) == 0.0);
    it[2](1, 2) = 2.5;
    CHECK(monotone_violation(it) == doctest::Approx(0.5));
    CHECK(monotone_violation(std::span<const ScalarField>(it.data(), 1)) ==
          -std::numeric_limits<double>::infinity());
}
