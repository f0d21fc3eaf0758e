#include <doctest.h>

#include "mfpg/exact_pg.hpp"
#include "mfpg/model.hpp"
#include "mfpg/oracles.hpp"

using namespace mfpg;

namespace {

bool has_violation(const std::vector<Violation>& v, const std::string& check) {
    for (const auto& item : v)
        if (item.check == check) return true;
    return false;
}

}  // namespace

TEST_CASE("Table-1 parameters satisfy the standing assumptions") {
    CHECK(validate(table1_params()).empty());
}

TEST_CASE("validate reports non-SPD weights and degenerate Mhat") {
    ModelParams p = table1_params();
    p.Q(0, 0) = -0.1;
    auto v = validate(p);
    CHECK(has_violation(v, "Q not SPD"));
    CHECK(has_violation(v, "Qhat not SPD"));

    p = table1_params();
    p.x0_mean.setZero();
    p.gamma0.setZero();
    CHECK(has_violation(validate(p), "Mhat not SPD"));

    p = table1_params();
    p.beta = 0.0;
    CHECK(has_violation(validate(p), "beta not positive"));

    p = table1_params();
    p.D = Matrix::Zero(2, 1);
    CHECK(has_violation(validate(p), "dimension mismatch"));
}

TEST_CASE("upsilon closed form") {
    ModelParams p = table1_params();
    CHECK(upsilon(p) == doctest::Approx(1.03839687017466e-4).epsilon(1e-12));

    p.beta = 10.0;
    CHECK(upsilon(p) == doctest::Approx(2.07679374034932e-4).epsilon(1e-12));

    // lambda = 1/pi, R = 1, beta = 1: both log terms vanish.
    p = table1_params();
    p.lambda = 1.0 / M_PI;
    p.R(0, 0) = 1.0;
    p.beta = 1.0;
    CHECK(std::abs(upsilon(p)) < 1e-15);

    // upsilon -> 0 as lambda -> 0+.
    p = table1_params();
    p.lambda = 1e-8;
    CHECK(std::abs(upsilon(p)) < 1e-6);
}

TEST_CASE("solve_optimal reproduces the paper's gains and costs") {
    const ModelParams p = table1_params();
    const AnalyticSolution sol = solve_optimal(p);

    CHECK(sol.theta_star(0, 0) == doctest::Approx(-0.00126262).epsilon(8e-3));
    CHECK(std::abs(sol.theta_star(0, 0) - (-0.0012626)) <= 1e-5);
    CHECK(std::abs(sol.zeta_star(0, 0) - (-0.0025510)) <= 1e-5);
    CHECK(std::abs(sol.J1_opt - 0.005051) <= 5e-6);
    CHECK(std::abs(sol.J2_opt - 0.010205) <= 5e-6);
    CHECK(std::abs(sol.J_opt - 0.015360) <= 1e-5);
    CHECK(sol.J_opt ==
          doctest::Approx(sol.J1_opt + sol.J2_opt + sol.upsilon).epsilon(1e-15));
}

TEST_CASE("solve_optimal matches the scalar quadratic-root oracle to 1e-12") {
    const ModelParams p = table1_params();
    const AnalyticSolution sol = solve_optimal(p);
    const oracles::ScalarClosedForms cf = oracles::scalar_closed_forms(p);
    CHECK(std::abs(sol.K(0, 0) - cf.K) <= 1e-12);
    CHECK(std::abs(sol.Lambda(0, 0) - cf.Lambda) <= 1e-12);
    CHECK(std::abs(sol.theta_star(0, 0) - cf.theta_star) <= 1e-12);
    CHECK(std::abs(sol.zeta_star(0, 0) - cf.zeta_star) <= 1e-12);
}

TEST_CASE("Riccati consistency: K_{theta*} = K and first-order optimality") {
    const ModelParams p = table1_params();
    const AnalyticSolution sol = solve_optimal(p);
    const PolicyParams at_opt{sol.theta_star, sol.zeta_star};
    const exact_pg::CostDecomposition c = exact_pg::cost(at_opt, p);
    CHECK((c.K_theta - sol.K).norm() <= 1e-8);
    CHECK((c.Lambda_zeta - sol.Lambda).norm() <= 1e-8);

    auto [g1, g2] = exact_pg::gradient(c, at_opt, p);
    CHECK(g1.norm() <= 1e-8);
    CHECK(g2.norm() <= 1e-8);
}
