#include "mfpg/oracles.hpp"

#include "mfpg/exact_pg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace mfpg::oracles {

std::pair<Matrix, Matrix> fd_gradient(const PolicyParams& th,
                                      const ModelParams& p, double h) {
    if (!(h > 0.0)) throw DomainError("oracles.fd_gradient: h must be positive");
    const Index m = p.m();
    const Index d = p.d();
    Matrix g1(m, d), g2(m, d);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < d; ++j) {
            PolicyParams plus = th, minus = th;
            plus.theta(i, j) += h;
            minus.theta(i, j) -= h;
            g1(i, j) = (exact_pg::cost(plus, p).J1 -
                        exact_pg::cost(minus, p).J1) /
                       (2.0 * h);
            plus = th;
            minus = th;
            plus.zeta(i, j) += h;
            minus.zeta(i, j) -= h;
            g2(i, j) = (exact_pg::cost(plus, p).J2 -
                        exact_pg::cost(minus, p).J2) /
                       (2.0 * h);
        }
    return {g1, g2};
}

namespace {

double positive_root(double a, double b, double c) {
    // a x^2 + b x + c = 0 with a > 0, c < 0: one positive root.
    const double disc = b * b - 4.0 * a * c;
    return (-b + std::sqrt(disc)) / (2.0 * a);
}

}  // namespace

double ScalarClosedForms::K_theta(double theta) const {
    const double den = beta - 2.0 * (b + d * theta);
    if (den <= 0.0)
        throw DomainError("oracles.scalar_closed_forms: theta not stabilizing");
    return (q + r * theta * theta) / den;
}

double ScalarClosedForms::Sigma_theta(double theta) const {
    const double den = beta - 2.0 * (b + d * theta);
    if (den <= 0.0)
        throw DomainError("oracles.scalar_closed_forms: theta not stabilizing");
    return m / den;
}

double ScalarClosedForms::Lambda_zeta(double zeta) const {
    const double den = beta - 2.0 * (bhat + d * zeta);
    if (den <= 0.0)
        throw DomainError("oracles.scalar_closed_forms: zeta not stabilizing");
    return (qhat + r * zeta * zeta) / den;
}

double ScalarClosedForms::SigmaHat_zeta(double zeta) const {
    const double den = beta - 2.0 * (bhat + d * zeta);
    if (den <= 0.0)
        throw DomainError("oracles.scalar_closed_forms: zeta not stabilizing");
    return mhat / den;
}

double ScalarClosedForms::J1(double theta) const { return K_theta(theta) * m; }
double ScalarClosedForms::J2(double zeta) const { return Lambda_zeta(zeta) * mhat; }

double ScalarClosedForms::dJ1(double theta) const {
    return 2.0 * (r * theta + d * K_theta(theta)) * Sigma_theta(theta);
}

double ScalarClosedForms::dJ2(double zeta) const {
    return 2.0 * (r * zeta + d * Lambda_zeta(zeta)) * SigmaHat_zeta(zeta);
}

ScalarClosedForms scalar_closed_forms(const ModelParams& p) {
    if (p.d() != 1 || p.m() != 1)
        throw DimensionError("oracles.scalar_closed_forms: requires d = m = 1");
    ScalarClosedForms f;
    f.b = p.B(0, 0);
    f.bhat = p.Bhat()(0, 0);
    f.d = p.D(0, 0);
    f.r = p.R(0, 0);
    f.q = p.Q(0, 0);
    f.qhat = p.Qhat()(0, 0);
    f.beta = p.beta;
    f.m = p.M()(0, 0);
    f.mhat = p.Mhat()(0, 0);

    if (f.d == 0.0) {
        const double den = f.beta - 2.0 * f.b;
        const double den_hat = f.beta - 2.0 * f.bhat;
        if (den <= 0.0 || den_hat <= 0.0)
            throw DomainError(
                "oracles.scalar_closed_forms: uncontrolled model not stable");
        f.K = f.q / den;
        f.Lambda = f.qhat / den_hat;
    } else {
        const double a = f.d * f.d / f.r;
        f.K = positive_root(a, f.beta - 2.0 * f.b, -f.q);
        f.Lambda = positive_root(a, f.beta - 2.0 * f.bhat, -f.qhat);
    }
    f.theta_star = -f.d * f.K / f.r;
    f.zeta_star = -f.d * f.Lambda / f.r;
    return f;
}

McCostResult mc_cost(const PolicyParams& th, const ModelParams& p,
                     const popsim::SimConfig& c, int episodes, uint64_t seed) {
    if (episodes < 1) throw DomainError("oracles.mc_cost: episodes must be >= 1");
    McCostResult result;
    result.per_episode.resize(episodes);
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
    for (int e = 0; e < episodes; ++e) {
        rng::NoiseStream stream(seed, static_cast<uint64_t>(e));
        result.per_episode[static_cast<size_t>(e)] =
            popsim::run_episode(th, p, c, stream).j_pop;
    }
    double sum = 0.0;
    for (double v : result.per_episode) sum += v;
    result.mean = sum / episodes;
    if (episodes > 1) {
        double var = 0.0;
        for (double v : result.per_episode)
            var += (v - result.mean) * (v - result.mean);
        result.std_error = std::sqrt(var / (episodes - 1) / episodes);
    }
    return result;
}

Matrix lyapunov_quadrature(const Matrix& a, const Matrix& c, double tol) {
    const Index d = a.rows();
    if (a.cols() != d || c.rows() != d || c.cols() != d)
        throw DimensionError("oracles.lyapunov_quadrature: dimension mismatch");
    if (!linalg::is_stable(a))
        throw StabilityError("oracles.lyapunov_quadrature: A is not stable");

    // Truncation horizon: |e^{AT}|_F^2 < 1e-14 makes the discarded tail
    // negligible against C.
    double horizon = 1.0;
    Matrix e_t = a.exp();
    int doublings = 0;
    while (e_t.squaredNorm() >= 1e-14 && doublings < 60) {
        e_t = e_t * e_t;
        horizon *= 2.0;
        ++doublings;
    }

    auto simpson = [&](int nodes) -> Matrix {
        const double h = horizon / nodes;
        const Matrix scaled = a * h;
        const Matrix step = scaled.exp();
        Matrix power = Matrix::Identity(d, d);
        Matrix acc = Matrix::Zero(d, d);
        for (int k = 0; k <= nodes; ++k) {
            const double weight =
                (k == 0 || k == nodes) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            acc += weight * (power * c * power.transpose());
            power = power * step;
        }
        return (h / 3.0) * acc;
    };

    Matrix prev = simpson(64);
    for (int nodes = 128; nodes <= (1 << 17); nodes *= 2) {
        Matrix cur = simpson(nodes);
        if ((cur - prev).norm() <= tol * (1.0 + cur.norm()))
            return 0.5 * (cur + cur.transpose());
        prev = cur;
    }
    throw ConvergenceError(
        "oracles.lyapunov_quadrature: Simpson refinement did not settle");
}

void CheckReport::add(const std::string& name, bool pass,
                      const std::string& detail) {
    lines.push_back({name, pass, detail});
    all_pass = all_pass && pass;
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

CheckReport run_check_suite(const ModelParams& p, uint64_t seed) {
    CheckReport report;
    const AnalyticSolution opt = solve_optimal(p);

    if (p.d() == 1 && p.m() == 1) {
        const ScalarClosedForms cf = scalar_closed_forms(p);
        const double dk = std::abs(cf.K - opt.K(0, 0));
        const double dl = std::abs(cf.Lambda - opt.Lambda(0, 0));
        report.add("scalar closed forms vs Riccati solver",
                   dk <= 1e-12 && dl <= 1e-12,
                   "|dK| = " + num(dk) + ", |dLambda| = " + num(dl));
    }

    {
        PolicyParams at_opt{opt.theta_star, opt.zeta_star};
        auto [g1, g2] = exact_pg::gradient(at_opt, p);
        report.add("gradient vanishes at the optimum",
                   g1.norm() <= 1e-8 && g2.norm() <= 1e-8,
                   "|g1| = " + num(g1.norm()) + ", |g2| = " + num(g2.norm()));
    }

    {
        // A stable probe away from the optimum.
        PolicyParams th{opt.theta_star - Matrix::Constant(p.m(), p.d(), 0.5),
                        opt.zeta_star - Matrix::Constant(p.m(), p.d(), 0.5)};
        auto [s1, s2] = exact_pg::stability_check(th, p);
        if (s1 && s2) {
            auto [g1, g2] = exact_pg::gradient(th, p);
            auto [f1, f2] = fd_gradient(th, p, 1e-6);
            const double rel =
                std::max((g1 - f1).norm() / std::max(1e-12, f1.norm()),
                         (g2 - f2).norm() / std::max(1e-12, f2.norm()));
            report.add("analytic vs finite-difference gradient", rel <= 1e-5,
                       "rel err = " + num(rel));
        }
    }

    {
        const Matrix xi = exact_pg::closed_loop(opt.theta_star, p);
        const Matrix direct = linalg::solve_lyapunov(xi, p.M());
        const Matrix quad = lyapunov_quadrature(xi, p.M());
        const double diff = (direct - quad).norm();
        report.add("Lyapunov solver vs quadrature", diff <= 1e-6,
                   "|diff| = " + num(diff));
    }

    {
        PolicyParams at_opt{opt.theta_star, opt.zeta_star};
        popsim::SimConfig c;
        c.T = 1.0;
        c.n = 100;
        c.N = 100;
        c.lambda = p.lambda;
        c.seed = seed;
        c.entropy_mode = popsim::EntropyMode::analytic;
        const McCostResult mc = mc_cost(at_opt, p, c, 200, seed);
        const double dev = std::abs(mc.mean - opt.J_opt);
        const double budget = 3.0 * mc.std_error.value() + 0.01;
        report.add("Monte-Carlo cost at the optimum",
                   dev <= budget,
                   "dev = " + num(dev) + ", budget = " + num(budget));

        // Horizon doubling under common random numbers: the mean moves by
        // the e^{-beta T} tail only.
        popsim::SimConfig c2 = c;
        c2.T = 2.0;
        c2.n = 200;
        const McCostResult mc2 = mc_cost(at_opt, p, c2, 200, seed);
        const double shift = std::abs(mc2.mean - mc.mean);
        report.add("horizon truncation (T -> 2T)",
                   shift <= mc.std_error.value(),
                   "shift = " + num(shift) + ", SE = " +
                       num(mc.std_error.value()));
    }

    {
        popsim::SimConfig c;
        c.T = 1.0;
        c.n = 50;
        c.N = 50;
        c.lambda = p.lambda;
        c.seed = seed;
        c.keep_trajectory = true;
        PolicyParams at_opt{opt.theta_star, opt.zeta_star};
        rng::NoiseStream stream(seed, 7);
        const popsim::EpisodeResult ep =
            popsim::run_episode(at_opt, p, c, stream);
        const double residual =
            popsim::aggregate_mean_identity(*ep.trajectory, at_opt, p, c);
        report.add("mean-aggregation identity", residual <= 1e-12,
                   "residual = " + num(residual));
    }

    return report;
}

}  // namespace mfpg::oracles
