#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a closed-loop matrix fails the beta-shifted stability test.
struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Carries the Newton iteration residuals for postmortem diagnostics.
struct RiccatiError : std::runtime_error {
    std::vector<double> residual_history;
    RiccatiError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
};

namespace linalg {

bool has_finite_entries(const Matrix& a);

/// Largest real part over the (possibly complex) spectrum of a square matrix.
double spectral_abscissa(const Matrix& a);

/// True iff every eigenvalue of `a` has real part < -margin.
bool is_stable(const Matrix& a, double margin = 0.0);

struct StabilityReport {
    bool stable = false;
    double abscissa = 0.0;
    bool near_marginal = false;  // abscissa in [-1e-12, 0)
};
StabilityReport check_stability(const Matrix& a, double margin = 0.0);

/// Smallest eigenvalue of a symmetric matrix.
double smallest_eigenvalue(const Matrix& s);

bool is_spd(const Matrix& s);

/// Symmetric PSD square root via eigendecomposition; negative ripple below
/// -tol rejects the input.
Matrix psd_sqrt(const Matrix& s, double tol = 1e-12);

struct LyapunovOptions {
    double rtol = 1e-10;        // residual <= rtol * (1 + ||C||_F)
    double symmetry_tol = 1e-12;
};

/// Solves A X + X A^T + C = 0 for stable A and symmetric C by the Kronecker
/// identity (I (x) A + A (x) I) vec(X) = -vec(C) as a dense d^2 x d^2 system.
Matrix solve_lyapunov(const Matrix& a, const Matrix& c,
                      const LyapunovOptions& opts = {});

struct RiccatiOptions {
    double rtol = 1e-10;  // residual <= rtol * (1 + ||Q||_F)
    int max_iterations = 200;
};

/// Solves -beta K + K A + A^T K + Q - K D R^-1 D^T K = 0 for the stabilizing
/// SPD solution by Newton-Kleinman on the beta/2-shifted equation. The initial
/// gain is theta0 = -c D^T with c in {0, 1, 2, 4, ...} up to 2^30 until
/// A - (beta/2)I + D theta0 is stable.
Matrix solve_riccati(const Matrix& a, const Matrix& d_mat, const Matrix& r,
                     const Matrix& q, double beta,
                     const RiccatiOptions& opts = {});

}  // namespace linalg
}  // namespace mfpg
