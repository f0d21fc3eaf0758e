#include "mfpg/exact_pg.hpp"

#include <cmath>
#include <sstream>

namespace mfpg::exact_pg {

Matrix closed_loop(const Matrix& theta, const ModelParams& p) {
    return p.B - 0.5 * p.beta * Matrix::Identity(p.d(), p.d()) + p.D * theta;
}

Matrix closed_loop_hat(const Matrix& zeta, const ModelParams& p) {
    return p.Bhat() - 0.5 * p.beta * Matrix::Identity(p.d(), p.d()) + p.D * zeta;
}

std::pair<bool, bool> stability_check(const PolicyParams& th,
                                      const ModelParams& p) {
    return {linalg::is_stable(closed_loop(th.theta, p)),
            linalg::is_stable(closed_loop_hat(th.zeta, p))};
}

CostDecomposition cost(const PolicyParams& th, const ModelParams& p) {
    auto [in_s, in_shat] = stability_check(th, p);
    if (!in_s) throw StabilityError("exact_pg.cost: theta not in S");
    if (!in_shat) throw StabilityError("exact_pg.cost: zeta not in Shat");

    const Matrix xi = closed_loop(th.theta, p);
    const Matrix xi_hat = closed_loop_hat(th.zeta, p);

    CostDecomposition c;
    c.K_theta = linalg::solve_lyapunov(
        xi.transpose(), p.Q + th.theta.transpose() * p.R * th.theta);
    c.Lambda_zeta = linalg::solve_lyapunov(
        xi_hat.transpose(), p.Qhat() + th.zeta.transpose() * p.R * th.zeta);
    c.Sigma_theta = linalg::solve_lyapunov(xi, p.M());
    c.SigmaHat_zeta = linalg::solve_lyapunov(xi_hat, p.Mhat());
    c.J1 = (c.K_theta.transpose() * p.M()).trace();
    c.J2 = (c.Lambda_zeta.transpose() * p.Mhat()).trace();
    c.upsilon = upsilon(p);
    c.J = c.J1 + c.J2 + c.upsilon;
    return c;
}

std::pair<Matrix, Matrix> gradient(const CostDecomposition& c,
                                   const PolicyParams& th,
                                   const ModelParams& p) {
    Matrix g1 =
        2.0 * (p.R * th.theta + p.D.transpose() * c.K_theta) * c.Sigma_theta;
    Matrix g2 = 2.0 * (p.R * th.zeta + p.D.transpose() * c.Lambda_zeta) *
                c.SigmaHat_zeta;
    return {std::move(g1), std::move(g2)};
}

std::pair<Matrix, Matrix> gradient(const PolicyParams& th, const ModelParams& p) {
    return gradient(cost(th, p), th, p);
}

LevelSetConstants constants(double level, double level_hat,
                            const ModelParams& p) {
    const AnalyticSolution opt = solve_optimal(p);
    if (level <= opt.J1_opt)
        throw DomainError("exact_pg.constants: level must exceed J1(theta*)");
    if (level_hat <= opt.J2_opt)
        throw DomainError("exact_pg.constants: level_hat must exceed J2(zeta*)");

    const double sig_M = linalg::smallest_eigenvalue(opt.M);
    const double sig_Mhat = linalg::smallest_eigenvalue(opt.Mhat);
    const double sig_Q = linalg::smallest_eigenvalue(p.Q);
    const double sig_Qhat = linalg::smallest_eigenvalue(p.Qhat());
    const double sig_R = linalg::smallest_eigenvalue(p.R);
    const double nR = p.R.norm();
    const double nD = p.D.norm();
    const double nB2 = p.B.operatorNorm();
    const double nBhat2 = p.Bhat().operatorNorm();
    const double nD2 = p.D.operatorNorm();

    LevelSetConstants k;
    k.level = level;
    k.level_hat = level_hat;

    k.bd_K = level / sig_M;
    k.bd_Sigma = level / sig_Q;
    k.bd_E = std::sqrt(nR * (level - opt.J1_opt) / sig_M);
    k.bd_theta = (k.bd_E + nD * k.bd_K) / sig_R;

    k.bd_K_hat = level_hat / sig_Mhat;
    k.bd_Sigma_hat = level_hat / sig_Qhat;
    k.bd_E_hat = std::sqrt(nR * (level_hat - opt.J2_opt) / sig_Mhat);
    k.bd_zeta = (k.bd_E_hat + nD * k.bd_K_hat) / sig_R;

    // sigma_min(Sigma_theta') at the Newton point theta' = -R^-1 D^T K_theta,
    // whose norm is bounded by |D|_2 Bd_K / sigma_min(R).
    const double sig_E =
        sig_M / (2.0 * (nB2 + 0.5 * p.beta + nD2 * nD2 * k.bd_K / sig_R));
    const double sig_E_hat =
        sig_Mhat /
        (2.0 * (nBhat2 + 0.5 * p.beta + nD2 * nD2 * k.bd_K_hat / sig_R));
    k.bd_E_corrected = std::sqrt(nR * (level - opt.J1_opt) / sig_E);
    k.bd_E_hat_corrected = std::sqrt(nR * (level_hat - opt.J2_opt) / sig_E_hat);
    k.bd_theta_corrected = (k.bd_E_corrected + nD * k.bd_K) / sig_R;
    k.bd_zeta_corrected = (k.bd_E_hat_corrected + nD * k.bd_K_hat) / sig_R;

    k.lip_Sigma = 2.0 * nD * k.bd_Sigma * k.bd_Sigma / sig_M;
    k.lip_K = 2.0 * (k.bd_E + nR * k.bd_theta) * k.bd_Sigma / sig_M;
    k.lip_Sigma_hat = 2.0 * nD * k.bd_Sigma_hat * k.bd_Sigma_hat / sig_Mhat;
    k.lip_K_hat =
        2.0 * (k.bd_E_hat + nR * k.bd_zeta) * k.bd_Sigma_hat / sig_Mhat;

    k.L = 2.0 * ((nR + nD * k.lip_K) * k.bd_Sigma + k.bd_E * k.lip_Sigma);
    k.L_hat = 2.0 * ((nR + nD * k.lip_K_hat) * k.bd_Sigma_hat +
                     k.bd_E_hat * k.lip_Sigma_hat);
    k.L_check = std::max(k.L, k.L_hat);
    k.rho_max = 2.0 / k.L_check;

    const PolicyParams opt_policy{opt.theta_star, opt.zeta_star};
    const CostDecomposition at_opt = cost(opt_policy, p);
    k.kappa1_paper = at_opt.Sigma_theta.norm() / (4.0 * sig_R * sig_M * sig_M);
    k.kappa2_paper =
        at_opt.SigmaHat_zeta.norm() / (4.0 * sig_R * sig_Mhat * sig_Mhat);

    k.sigma_Sigma_min =
        sig_M / (2.0 * (nB2 + 0.5 * p.beta + nD2 * k.bd_theta));
    k.sigma_Sigma_min_hat =
        sig_Mhat / (2.0 * (nBhat2 + 0.5 * p.beta + nD2 * k.bd_zeta));
    k.kappa1_corrected = at_opt.Sigma_theta.norm() /
                         (4.0 * sig_R * k.sigma_Sigma_min * k.sigma_Sigma_min);
    k.kappa2_corrected =
        at_opt.SigmaHat_zeta.norm() /
        (4.0 * sig_R * k.sigma_Sigma_min_hat * k.sigma_Sigma_min_hat);
    return k;
}

GDTrace exact_gd(const PolicyParams& theta0, const GDOptions& opts,
                 const ModelParams& p) {
    auto [in_s, in_shat] = stability_check(theta0, p);
    if (!in_s) throw StabilityError("exact_pg.exact_gd: theta0 not in S");
    if (!in_shat) throw StabilityError("exact_pg.exact_gd: zeta0 not in Shat");

    GDTrace trace;
    trace.J_opt = solve_optimal(p).J_opt;

    PolicyParams th = theta0;
    CostDecomposition c = cost(th, p);
    double rho = opts.rho;
    if (opts.auto_rho) {
        const LevelSetConstants lc = constants(c.J1, c.J2, p);
        rho = 0.9 * lc.rho_max;
    }
    if (!(rho > 0.0))
        throw DomainError("exact_pg.exact_gd: step size must be positive");
    trace.rho_used = rho;

    for (int k = 0;; ++k) {
        auto [g1, g2] = gradient(c, th, p);
        IterateRecord row;
        row.k = k;
        row.theta = th.theta;
        row.zeta = th.zeta;
        row.J1 = c.J1;
        row.J2 = c.J2;
        row.J = c.J;
        row.grad1_norm = g1.norm();
        row.grad2_norm = g2.norm();
        row.stable = true;
        trace.rows.push_back(row);

        const double rel = (c.J - trace.J_opt) / trace.J_opt;
        if (rel <= opts.eps_rel) {
            trace.converged = true;
            break;
        }
        if (k >= opts.k_max) break;

        th.theta -= rho * g1;
        th.zeta -= rho * g2;
        auto [s1, s2] = stability_check(th, p);
        if (!s1 || !s2) {
            std::ostringstream os;
            os << "exact_pg.exact_gd: iterate " << k + 1 << " left "
               << (!s1 ? "S" : "Shat") << " (step size too large)";
            throw StabilityError(os.str());
        }
        c = cost(th, p);
    }
    return trace;
}

}  // namespace mfpg::exact_pg
