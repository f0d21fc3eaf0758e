#include "mfpg/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mfpg {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_spd(std::vector<Violation>& out, const Matrix& s, const char* name) {
    if (s.rows() != s.cols()) {
        out.push_back({std::string(name) + " not square", kNan, ""});
        return;
    }
    if (!s.isApprox(s.transpose(), 1e-10)) {
        out.push_back({std::string(name) + " not symmetric", kNan, ""});
        return;
    }
    const double sig = linalg::smallest_eigenvalue(0.5 * (s + s.transpose()));
    if (sig <= 0.0) {
        std::ostringstream os;
        os << "smallest eigenvalue " << sig;
        out.push_back({std::string(name) + " not SPD", sig, os.str()});
    }
}

}  // namespace

std::vector<Violation> validate(const ModelParams& p) {
    std::vector<Violation> out;
    const Index d = p.d();
    const Index m = p.m();

    auto dims_ok = [&](const Matrix& a, Index r, Index c, const char* name) {
        if (a.rows() != r || a.cols() != c) {
            std::ostringstream os;
            os << name << " is " << a.rows() << "x" << a.cols() << ", expected "
               << r << "x" << c;
            out.push_back({"dimension mismatch", kNan, os.str()});
            return false;
        }
        return true;
    };

    if (d == 0) {
        out.push_back({"empty model (B has no rows)", kNan, ""});
        return out;
    }
    dims_ok(p.B, d, d, "B");
    dims_ok(p.Bbar, d, d, "Bbar");
    dims_ok(p.D, d, m, "D");
    dims_ok(p.Q, d, d, "Q");
    dims_ok(p.Qbar, d, d, "Qbar");
    dims_ok(p.R, m, m, "R");
    if (p.gamma.rows() != d) dims_ok(p.gamma, d, p.gamma.cols(), "gamma");
    if (p.gamma0.rows() != d) dims_ok(p.gamma0, d, p.gamma0.cols(), "gamma0");
    if (p.x0_mean.size() != d)
        out.push_back({"dimension mismatch", kNan, "x0_mean length != d"});
    dims_ok(p.x0_cov, d, d, "x0_cov");
    if (!out.empty()) return out;  // eigen checks need consistent dims

    for (const Matrix* mat :
         {&p.B, &p.Bbar, &p.D, &p.gamma, &p.gamma0, &p.Q, &p.Qbar, &p.R, &p.x0_cov})
        if (!linalg::has_finite_entries(*mat)) {
            out.push_back({"non-finite entries", kNan, ""});
            return out;
        }

    if (!(p.beta > 0.0)) out.push_back({"beta not positive", kNan, ""});
    if (!(p.lambda > 0.0)) out.push_back({"lambda not positive", kNan, ""});

    check_spd(out, p.Q, "Q");
    check_spd(out, p.Qhat(), "Qhat");
    check_spd(out, p.R, "R");
    const double sig_cov = linalg::smallest_eigenvalue(p.x0_cov);
    if (sig_cov < -1e-12)
        out.push_back({"x0_cov not PSD", sig_cov, ""});
    if (p.beta > 0.0) {
        check_spd(out, p.M(), "M");
        check_spd(out, p.Mhat(), "Mhat");
    }
    return out;
}

double upsilon(const ModelParams& p) {
    const double m = static_cast<double>(p.m());
    const double det_r = p.R.determinant();
    return (1.0 / p.beta) *
           (-(p.lambda * m / 2.0) * std::log(M_PI * p.lambda) +
            (p.lambda / 2.0) * std::log(std::abs(det_r)));
}

AnalyticSolution solve_optimal(const ModelParams& p) {
    AnalyticSolution sol;
    sol.K = linalg::solve_riccati(p.B, p.D, p.R, p.Q, p.beta);
    sol.Lambda = linalg::solve_riccati(p.Bhat(), p.D, p.R, p.Qhat(), p.beta);
    const Matrix r_inv_dt = p.R.inverse() * p.D.transpose();
    sol.theta_star = -r_inv_dt * sol.K;
    sol.zeta_star = -r_inv_dt * sol.Lambda;
    sol.M = p.M();
    sol.Mhat = p.Mhat();
    sol.upsilon = upsilon(p);
    sol.J1_opt = (sol.K.transpose() * sol.M).trace();
    sol.J2_opt = (sol.Lambda.transpose() * sol.Mhat).trace();
    sol.J_opt = sol.J1_opt + sol.J2_opt + sol.upsilon;

    const Matrix shift = 0.5 * p.beta * Matrix::Identity(p.d(), p.d());
    if (!linalg::is_stable(p.B - shift + p.D * sol.theta_star))
        throw StabilityError("model.solve_optimal: theta* not in S");
    if (!linalg::is_stable(p.Bhat() - shift + p.D * sol.zeta_star))
        throw StabilityError("model.solve_optimal: zeta* not in Shat");
    return sol;
}

ModelParams table1_params() {
    ModelParams p;
    auto scalar = [](double v) { return (Matrix(1, 1) << v).finished(); };
    p.B = scalar(0.1);
    p.Bbar = scalar(0.1);  // Bhat = 0.2
    p.D = scalar(0.05);
    p.gamma = scalar(0.05);
    p.gamma0 = scalar(0.05);
    p.Q = scalar(0.1);
    p.Qbar = scalar(0.1);  // Qhat = 0.2
    p.R = scalar(0.2);
    p.beta = 20.0;
    p.lambda = 0.001;
    p.x0_mean = Vector::Constant(1, 1.0);
    p.x0_cov = scalar(1.0);
    return p;
}

}  // namespace mfpg
