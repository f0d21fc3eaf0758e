#include <doctest.h>

#include "mfpg/exact_pg.hpp"
#include "mfpg/oracles.hpp"

#include <cmath>

using namespace mfpg;

namespace {

Matrix scalar(double v) { return (Matrix(1, 1) << v).finished(); }

PolicyParams both(double theta, double zeta) {
    return {scalar(theta), scalar(zeta)};
}

}  // namespace

TEST_CASE("fd_gradient at the Table-1 probes") {
    const ModelParams p = table1_params();
    auto [f1, f2] = oracles::fd_gradient(both(-2.0, -2.0), p, 1e-6);
    CHECK(std::abs(f1(0, 0) - (-0.03978)) <= 1e-7 + 2.2e-7);
    CHECK(f1(0, 0) == doctest::Approx(-0.039779971875).epsilon(1e-7));

    const AnalyticSolution sol = solve_optimal(p);
    auto [o1, o2] = oracles::fd_gradient({sol.theta_star, sol.zeta_star}, p, 1e-6);
    CHECK(o1.norm() <= 1e-7);
    CHECK(o2.norm() <= 1e-7);
}

TEST_CASE("fd_gradient error shrinks at the central-difference O(h^2) rate") {
    const ModelParams p = table1_params();
    const PolicyParams th = both(-1.3, -0.7);
    auto [g1, g2] = exact_pg::gradient(th, p);
    auto err = [&](double h) {
        auto [f1, f2] = oracles::fd_gradient(th, p, h);
        return std::abs(f1(0, 0) - g1(0, 0));
    };
    const double ratio = err(1e-2) / err(1e-3);
    CHECK(ratio > 50.0);
    CHECK(ratio < 200.0);
}

TEST_CASE("fd_gradient refuses probes that leave the stable set") {
    const ModelParams p = table1_params();
    // theta = 197.99: theta + h is unstable for h = 0.05.
    CHECK_THROWS_AS(oracles::fd_gradient(both(197.99, -2.0), p, 0.05),
                    StabilityError);
}

TEST_CASE("scalar closed forms match the spec probes and the solvers") {
    const ModelParams p = table1_params();
    const oracles::ScalarClosedForms cf = oracles::scalar_closed_forms(p);
    CHECK(cf.K == doctest::Approx(0.0050505).epsilon(1e-4));
    CHECK(cf.theta_star == doctest::Approx(-0.0012626).epsilon(1e-4));
    CHECK(cf.Lambda == doctest::Approx(0.0102040).epsilon(1e-4));
    CHECK(cf.zeta_star == doctest::Approx(-0.0025510).epsilon(1e-4));
    CHECK(cf.K_theta(-2.0) == doctest::Approx(0.045).epsilon(1e-14));
    CHECK(cf.Sigma_theta(-2.0) == doctest::Approx(0.05000625).epsilon(1e-14));

    const AnalyticSolution sol = solve_optimal(p);
    CHECK(std::abs(cf.K - sol.K(0, 0)) <= 1e-12);
    CHECK(std::abs(cf.Lambda - sol.Lambda(0, 0)) <= 1e-12);

    CHECK_THROWS_AS(cf.Sigma_theta(400.0), DomainError);
    ModelParams wide = p;
    wide.B = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(oracles::scalar_closed_forms(wide), DimensionError);
}

TEST_CASE("mc_cost: single episode has no standard error") {
    const ModelParams p = table1_params();
    popsim::SimConfig c;
    c.T = 0.5;
    c.n = 20;
    c.N = 20;
    c.lambda = p.lambda;
    c.seed = 3;
    const oracles::McCostResult one = oracles::mc_cost(both(-2, -2), p, c, 1, 3);
    CHECK_FALSE(one.std_error.has_value());
    const rng::NoiseStream stream(3, 0);
    CHECK(one.mean == popsim::run_episode(both(-2, -2), p, c, stream).j_pop);
}

TEST_CASE("mc_cost converges to the analytic cost at desk scale") {
    const ModelParams p = table1_params();
    popsim::SimConfig c;
    c.T = 1.0;
    c.n = 100;
    c.N = 100;
    c.lambda = p.lambda;
    c.seed = 5;
    c.entropy_mode = popsim::EntropyMode::analytic;
    const oracles::McCostResult mc = oracles::mc_cost(both(-2, -2), p, c, 60, 5);
    const double analytic = exact_pg::cost(both(-2, -2), p).J;
    CHECK(std::abs(mc.mean - analytic) <= 4.0 * *mc.std_error + 0.01);
}

TEST_CASE("the full oracle suite passes on the Table-1 model") {
    const oracles::CheckReport report =
        oracles::run_check_suite(table1_params(), 2);
    for (const auto& line : report.lines) {
        INFO(line.name, ": ", line.detail);
        CHECK(line.pass);
    }
    CHECK(report.all_pass);
}
