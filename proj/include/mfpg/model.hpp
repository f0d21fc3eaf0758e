#pragma once

#include "mfpg/linalg.hpp"

#include <string>
#include <vector>

namespace mfpg {

/// Full problem data of the entropy-regularized LQ mean-field control problem.
/// Bhat = B + Bbar and Qhat = Q + Qbar are always derived, never stored.
struct ModelParams {
    Matrix B;       // d x d
    Matrix Bbar;    // d x d
    Matrix D;       // d x m
    Matrix gamma;   // d x dw, idiosyncratic noise loading
    Matrix gamma0;  // d x d0, common noise loading
    Matrix Q;       // d x d symmetric
    Matrix Qbar;    // d x d symmetric
    Matrix R;       // m x m symmetric
    double beta = 0.0;    // discount rate, > 0
    double lambda = 0.0;  // entropy temperature, > 0
    Vector x0_mean;       // d
    Matrix x0_cov;        // d x d symmetric PSD; initial law N(x0_mean, x0_cov)

    Index d() const { return B.rows(); }
    Index m() const { return D.cols(); }
    Index dw() const { return gamma.cols(); }
    Index d0() const { return gamma0.cols(); }

    Matrix Bhat() const { return B + Bbar; }
    Matrix Qhat() const { return Q + Qbar; }
    Matrix M() const { return x0_cov + gamma * gamma.transpose() / beta; }
    Matrix Mhat() const {
        return x0_mean * x0_mean.transpose() + gamma0 * gamma0.transpose() / beta;
    }
};

/// The optimization variable Theta = (theta, zeta), two m x d gain matrices.
struct PolicyParams {
    Matrix theta;
    Matrix zeta;
};

struct Violation {
    std::string check;
    double smallest_eigenvalue;  // NaN when not an eigenvalue check
    std::string detail;
};

/// Report-style validation of the standing assumptions; empty means valid.
std::vector<Violation> validate(const ModelParams& p);

/// (1/beta)(-(lambda m / 2) log(pi lambda) + (lambda/2) log|det R|).
double upsilon(const ModelParams& p);

struct AnalyticSolution {
    Matrix K, Lambda;            // d x d SPD Riccati solutions
    Matrix theta_star, zeta_star;  // m x d optimal gains
    Matrix M, Mhat;
    double upsilon = 0.0;
    double J1_opt = 0.0, J2_opt = 0.0, J_opt = 0.0;
};

/// Riccati-based optimal gains and cost decomposition. Asserts that the
/// optimal gains are beta-stabilizing.
AnalyticSolution solve_optimal(const ModelParams& p);

/// Table-1 instance of the paper's numerical example (scalar model).
ModelParams table1_params();

}  // namespace mfpg
