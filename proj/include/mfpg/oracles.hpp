#pragma once

#include "mfpg/popsim.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfpg::oracles {

/// Central finite differences of the exact cost, entrywise in theta and zeta.
/// Every probe point must stay in S x Shat.
std::pair<Matrix, Matrix> fd_gradient(const PolicyParams& th,
                                      const ModelParams& p, double h);

/// Closed-form quantities for the d = m = 1 case via the quadratic formula;
/// independent of the matrix solvers.
struct ScalarClosedForms {
    double K = 0.0, Lambda = 0.0;
    double theta_star = 0.0, zeta_star = 0.0;

    double K_theta(double theta) const;
    double Sigma_theta(double theta) const;
    double Lambda_zeta(double zeta) const;
    double SigmaHat_zeta(double zeta) const;
    double J1(double theta) const;
    double J2(double zeta) const;
    double dJ1(double theta) const;
    double dJ2(double zeta) const;

    double b = 0.0, bhat = 0.0, d = 0.0, r = 0.0, q = 0.0, qhat = 0.0;
    double beta = 0.0, m = 0.0, mhat = 0.0;
};

ScalarClosedForms scalar_closed_forms(const ModelParams& p);

struct McCostResult {
    double mean = 0.0;
    std::optional<double> std_error;  // absent when episodes == 1
    std::vector<double> per_episode;
};

/// Mean and standard error of j_pop over independent episodes (ids 0..E-1
/// under `seed`).
McCostResult mc_cost(const PolicyParams& th, const ModelParams& p,
                     const popsim::SimConfig& c, int episodes, uint64_t seed);

/// Quadrature oracle for the Lyapunov solution: integral of e^{At} C e^{A^T t}
/// on [0, T*] by composite Simpson with node doubling, T* chosen so the tail
/// where |e^{At}|^2 < 1e-14 is discarded.
Matrix lyapunov_quadrature(const Matrix& a, const Matrix& c, double tol = 1e-8);

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckLine> lines;
    bool all_pass = true;
    void add(const std::string& name, bool pass, const std::string& detail);
};

/// Oracle suite behind the `check` CLI verb: scalar closed forms vs solvers,
/// fd vs analytic gradients, quadrature vs Kronecker Lyapunov, Monte-Carlo
/// cost consistency.
CheckReport run_check_suite(const ModelParams& p, uint64_t seed);

}  // namespace mfpg::oracles
