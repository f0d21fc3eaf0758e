#pragma once

#include "mfpg/model.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mfpg::exact_pg {

/// Shifted closed-loop matrices Xi_theta = B - (beta/2)I + D theta and the
/// hatted analogue for zeta.
Matrix closed_loop(const Matrix& theta, const ModelParams& p);
Matrix closed_loop_hat(const Matrix& zeta, const ModelParams& p);

/// (theta in S, zeta in Shat).
std::pair<bool, bool> stability_check(const PolicyParams& th,
                                      const ModelParams& p);

struct CostDecomposition {
    double J1 = 0.0, J2 = 0.0, upsilon = 0.0, J = 0.0;
    Matrix K_theta, Lambda_zeta;      // d x d SPD
    Matrix Sigma_theta, SigmaHat_zeta;  // d x d SPD
};

/// Solves the four algebraic Lyapunov equations at Theta; J1 = K_theta : M,
/// J2 = Lambda_zeta : Mhat.
CostDecomposition cost(const PolicyParams& th, const ModelParams& p);

/// grad J1 = 2 (R theta + D^T K_theta) Sigma_theta and the zeta analogue.
std::pair<Matrix, Matrix> gradient(const PolicyParams& th, const ModelParams& p);
std::pair<Matrix, Matrix> gradient(const CostDecomposition& c,
                                   const PolicyParams& th, const ModelParams& p);

/// Level-set bounds, Lipschitz constants and PL constants on S(l) x Shat(lhat).
/// kappa*_paper are the paper's constants (reported only); kappa*_corrected
/// replace sigma_min(M) by the uniform lower bound
/// sigma_min(M) / (2(|B|_2 + beta/2 + |D|_2 Bd_theta)) on sigma_min(Sigma),
/// which is what the property tests assert. bd_E_corrected applies the same
/// correction to the E-bound's denominator.
struct LevelSetConstants {
    double level = 0.0, level_hat = 0.0;
    double bd_K = 0.0, bd_Sigma = 0.0, bd_E = 0.0, bd_theta = 0.0;
    double bd_K_hat = 0.0, bd_Sigma_hat = 0.0, bd_E_hat = 0.0, bd_zeta = 0.0;
    double bd_E_corrected = 0.0, bd_E_hat_corrected = 0.0;
    // bd_theta with the corrected E-bound inside (the paper's bd_theta
    // inherits the Sigma >= M step and can undershoot).
    double bd_theta_corrected = 0.0, bd_zeta_corrected = 0.0;
    double lip_Sigma = 0.0, lip_K = 0.0;
    double lip_Sigma_hat = 0.0, lip_K_hat = 0.0;
    double L = 0.0, L_hat = 0.0, L_check = 0.0;
    double kappa1_paper = 0.0, kappa2_paper = 0.0;
    double kappa1_corrected = 0.0, kappa2_corrected = 0.0;
    double sigma_Sigma_min = 0.0, sigma_Sigma_min_hat = 0.0;
    double rho_max = 0.0;  // 2 / L_check
};

LevelSetConstants constants(double level, double level_hat, const ModelParams& p);

struct IterateRecord {
    int k = 0;
    Matrix theta, zeta;
    double J1 = 0.0, J2 = 0.0, J = 0.0;
    double grad1_norm = 0.0, grad2_norm = 0.0;
    bool stable = true;
};

struct GDTrace {
    std::vector<IterateRecord> rows;
    bool converged = false;
    double rho_used = 0.0;
    double J_opt = 0.0;
};

struct GDOptions {
    double rho = 0.0;       // ignored when auto_rho
    bool auto_rho = false;  // rho = 0.9 * 2 / L_check(J1(theta0), J2(zeta0))
    int k_max = 1000;
    double eps_rel = 1e-6;  // stop when (J - J_opt)/J_opt <= eps_rel
};

/// Constant-step gradient descent theta <- theta - rho grad J1, zeta likewise.
/// Every iterate is asserted to stay in S x Shat; leaving it raises
/// StabilityError tagged with the iterate index.
GDTrace exact_gd(const PolicyParams& theta0, const GDOptions& opts,
                 const ModelParams& p);

}  // namespace mfpg::exact_pg
