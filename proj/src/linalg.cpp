#include "mfpg/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace mfpg::linalg {

bool has_finite_entries(const Matrix& a) {
    return a.allFinite();
}

double spectral_abscissa(const Matrix& a) {
    if (a.rows() != a.cols())
        throw DimensionError("linalg.spectral_abscissa: matrix must be square");
    if (a.size() == 0)
        throw DimensionError("linalg.spectral_abscissa: empty matrix");
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

bool is_stable(const Matrix& a, double margin) {
    return spectral_abscissa(a) < -margin;
}

StabilityReport check_stability(const Matrix& a, double margin) {
    StabilityReport rep;
    rep.abscissa = spectral_abscissa(a);
    rep.stable = rep.abscissa < -margin;
    rep.near_marginal = rep.abscissa >= -1e-12 && rep.abscissa < 0.0;
    return rep;
}

double smallest_eigenvalue(const Matrix& s) {
    if (s.rows() != s.cols())
        throw DimensionError("linalg.smallest_eigenvalue: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_spd(const Matrix& s) {
    return s.rows() == s.cols() && s.isApprox(s.transpose(), 1e-12) &&
           smallest_eigenvalue(0.5 * (s + s.transpose())) > 0.0;
}

Matrix psd_sqrt(const Matrix& s, double tol) {
    if (s.rows() != s.cols())
        throw DimensionError("linalg.psd_sqrt: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
    Vector ev = es.eigenvalues();
    if (ev.minCoeff() < -tol * std::max(1.0, ev.cwiseAbs().maxCoeff()))
        throw DomainError("linalg.psd_sqrt: matrix is not positive semidefinite");
    Vector root = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& c,
                      const LyapunovOptions& opts) {
    const Index d = a.rows();
    if (a.cols() != d) throw DimensionError("linalg.solve_lyapunov: A must be square");
    if (c.rows() != d || c.cols() != d)
        throw DimensionError("linalg.solve_lyapunov: C must match A");
    if (!c.isApprox(c.transpose(), 1e-9))
        throw DomainError("linalg.solve_lyapunov: C must be symmetric");
    if (!is_stable(a)) {
        std::ostringstream os;
        os << "linalg.solve_lyapunov: A is not stable (abscissa "
           << spectral_abscissa(a) << ")";
        throw StabilityError(os.str());
    }

    // (I (x) A + A (x) I) vec(X) = -vec(C), column-major vec.
    Matrix lhs = Matrix::Zero(d * d, d * d);
    const Matrix id = Matrix::Identity(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            lhs.block(i * d, j * d, d, d) += id(i, j) * a;  // I (x) A
            lhs.block(i * d, j * d, d, d) += a(i, j) * id;  // A (x) I
        }
    Vector rhs(d * d);
    for (Index j = 0; j < d; ++j) rhs.segment(j * d, d) = -c.col(j);

    Vector vx = lhs.partialPivLu().solve(rhs);
    Matrix x(d, d);
    for (Index j = 0; j < d; ++j) x.col(j) = vx.segment(j * d, d);
    x = 0.5 * (x + x.transpose());

    const double residual = (a * x + x * a.transpose() + c).norm();
    if (residual > opts.rtol * (1.0 + c.norm())) {
        std::ostringstream os;
        os << "linalg.solve_lyapunov: residual " << residual
           << " exceeds tolerance " << opts.rtol * (1.0 + c.norm());
        throw ConvergenceError(os.str());
    }
    return x;
}

namespace {

double riccati_residual(const Matrix& a, const Matrix& d_mat, const Matrix& r_inv,
                        const Matrix& q, double beta, const Matrix& k) {
    return (-beta * k + k * a + a.transpose() * k + q -
            k * d_mat * r_inv * d_mat.transpose() * k)
        .norm();
}

}  // namespace

Matrix solve_riccati(const Matrix& a, const Matrix& d_mat, const Matrix& r,
                     const Matrix& q, double beta, const RiccatiOptions& opts) {
    const Index d = a.rows();
    const Index m = d_mat.cols();
    if (a.cols() != d) throw DimensionError("linalg.solve_riccati: A must be square");
    if (d_mat.rows() != d)
        throw DimensionError("linalg.solve_riccati: D must be d x m");
    if (r.rows() != m || r.cols() != m)
        throw DimensionError("linalg.solve_riccati: R must be m x m");
    if (q.rows() != d || q.cols() != d)
        throw DimensionError("linalg.solve_riccati: Q must be d x d");
    if (beta <= 0.0) throw DomainError("linalg.solve_riccati: beta must be positive");
    if (smallest_eigenvalue(0.5 * (q + q.transpose())) <= 0.0)
        throw DomainError("linalg.solve_riccati: Q must be SPD");
    if (smallest_eigenvalue(0.5 * (r + r.transpose())) <= 0.0)
        throw DomainError("linalg.solve_riccati: R must be SPD");

    const Matrix a_shift = a - 0.5 * beta * Matrix::Identity(d, d);
    const Matrix r_inv = r.inverse();

    // Stabilizing start: theta0 = -c D^T, c in {0, 1, 2, ...}.
    Matrix gain;
    bool found = false;
    double c = 0.0;
    while (true) {
        Matrix candidate = -c * d_mat.transpose();
        if (is_stable(a_shift + d_mat * candidate)) {
            gain = candidate;
            found = true;
            break;
        }
        c = (c == 0.0) ? 1.0 : 2.0 * c;
        if (c > static_cast<double>(1u << 30)) break;
    }
    std::vector<double> history;
    if (!found)
        throw RiccatiError(
            "linalg.solve_riccati: no stabilizing initial gain -c*D^T found",
            history);

    const double tol = opts.rtol * (1.0 + q.norm());
    Matrix k = Matrix::Zero(d, d);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Matrix closed = a_shift + d_mat * gain;
        // closed^T K + K closed + Q + gain^T R gain = 0
        k = solve_lyapunov(closed.transpose(),
                           q + gain.transpose() * r * gain);
        gain = -r_inv * d_mat.transpose() * k;
        const double res = riccati_residual(a, d_mat, r_inv, q, beta, k);
        history.push_back(res);
        if (res <= tol) {
            if (smallest_eigenvalue(k) <= 0.0)
                throw RiccatiError(
                    "linalg.solve_riccati: converged solution is not SPD",
                    history);
            if (!is_stable(a_shift - d_mat * r_inv * d_mat.transpose() * k))
                throw RiccatiError(
                    "linalg.solve_riccati: closed loop of converged solution "
                    "is not stable",
                    history);
            return k;
        }
    }
    std::ostringstream os;
    os << "linalg.solve_riccati: residual " << history.back()
       << " after " << opts.max_iterations << " iterations (tolerance " << tol
       << ")";
    throw RiccatiError(os.str(), history);
}

}  // namespace mfpg::linalg
