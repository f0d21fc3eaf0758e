#include "mfpg/popsim.hpp"

#include <atomic>
#include <cmath>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mfpg::popsim {

namespace {

// sqrt((lambda/2) R^-1) via the symmetric eigendecomposition of R.
Matrix action_noise_sqrt(double lambda, const Matrix& R) {
    const Index m = R.rows();
    if (lambda <= 0.0) return Matrix::Zero(m, m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(R);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw DomainError("popsim: R must be SPD");
    Vector scaled = (0.5 * lambda * es.eigenvalues().cwiseInverse()).cwiseSqrt();
    return es.eigenvectors() * scaled.asDiagonal() * es.eigenvectors().transpose();
}

struct EpisodeWorkspace {
    Matrix X;             // d x N particle states
    Vector acc;           // per-particle discounted cost accumulator
    std::vector<double> disc;  // e^{-beta t_l}
    Matrix sqrt_cov;      // PSD sqrt of x0_cov
    Matrix S;             // action noise sqrt
    double log_const;     // (lambda/2)(log|det R| - m log(pi lambda))
    double ent_analytic;  // entropy_constant(lambda, R)
};

}  // namespace

double entropy_constant(double lambda, const Matrix& R) {
    if (lambda <= 0.0) return 0.0;
    const double m = static_cast<double>(R.rows());
    const double beta_upsilon =
        -(lambda * m / 2.0) * std::log(M_PI * lambda) +
        (lambda / 2.0) * std::log(std::abs(R.determinant()));
    return beta_upsilon - lambda * m / 2.0;
}

// Shared by the parallel kernel and the serial reference so both perform the
// identical per-particle arithmetic.
namespace detail {

struct StepContext {
    const PolicyParams& th;
    const ModelParams& p;
    const SimConfig& c;
    const rng::NoiseStream& stream;
    const EpisodeWorkspace& ws;
    Vector mu;            // current empirical mean
    Vector common_shift;  // h Bbar mu + sqrt(h) gamma0 w0
    double cost_common;   // mu^T Qhat mu (+ analytic entropy constant)
    uint32_t l;
};

struct ParticleScratch {
    Vector y, xi, w, mean_a, alpha, dev, tmp_d, tmp_m, xnew;
    ParticleScratch(Index d, Index m, Index dw)
        : y(d), xi(m), w(dw), mean_a(m), alpha(m), dev(m), tmp_d(d), tmp_m(m),
          xnew(d) {}
};

// Advances particle j through step l and returns its discounted running-cost
// contribution. `sj` is the noise sub-stream index assigned to particle j.
// Allocation-free: all temporaries live in the scratch.
inline double particle_step(const StepContext& ctx, Index j, uint32_t sj,
                            ParticleScratch& s, Matrix& X) {
    const auto& p = ctx.p;
    const auto& c = ctx.c;
    const double h = c.h();

    s.y = X.col(j) - ctx.mu;
    ctx.stream.fill_gaussian(sj, ctx.l, rng::Channel::action, s.xi.data(),
                             s.xi.size());
    s.mean_a.noalias() = ctx.th.theta * s.y;
    s.mean_a.noalias() += ctx.th.zeta * ctx.mu;
    s.alpha = s.mean_a;
    s.alpha.noalias() += ctx.ws.S * s.xi;

    s.tmp_d.noalias() = p.Q * s.y;
    s.tmp_m.noalias() = p.R * s.alpha;
    double run = s.y.dot(s.tmp_d) + s.alpha.dot(s.tmp_m) + ctx.cost_common;
    if (c.entropy_mode == EntropyMode::sampled && c.lambda > 0.0) {
        s.dev = s.alpha - s.mean_a;
        s.tmp_m.noalias() = p.R * s.dev;
        run += ctx.ws.log_const - s.dev.dot(s.tmp_m);
    }
    const double contribution = ctx.ws.disc[ctx.l] * run;

    ctx.stream.fill_gaussian(sj, ctx.l, rng::Channel::idiosyncratic,
                             s.w.data(), s.w.size());
    s.xnew = X.col(j);
    s.tmp_d.noalias() = p.B * X.col(j);
    s.xnew.noalias() += h * s.tmp_d;
    s.tmp_d.noalias() = p.D * s.alpha;
    s.xnew.noalias() += h * s.tmp_d;
    s.xnew += ctx.common_shift;
    s.tmp_d.noalias() = p.gamma * s.w;
    s.xnew.noalias() += std::sqrt(h) * s.tmp_d;
    X.col(j) = s.xnew;
    return contribution;
}

}  // namespace detail

namespace {

EpisodeWorkspace make_workspace(const PolicyParams& th, const ModelParams& p,
                                const SimConfig& c) {
    if (th.theta.rows() != p.m() || th.theta.cols() != p.d() ||
        th.zeta.rows() != p.m() || th.zeta.cols() != p.d())
        throw DimensionError("popsim.run_episode: Theta must be m x d");
    if (c.n < 1 || c.N < 1 || !(c.T > 0.0))
        throw DomainError("popsim.run_episode: need T > 0, n >= 1, N >= 1");

    EpisodeWorkspace ws;
    ws.X.resize(p.d(), c.N);
    ws.acc = Vector::Zero(c.N);
    ws.disc.resize(c.n);
    const double h = c.h();
    for (int l = 0; l < c.n; ++l) ws.disc[l] = std::exp(-p.beta * h * l);
    ws.sqrt_cov = linalg::psd_sqrt(p.x0_cov);
    ws.S = action_noise_sqrt(c.lambda, p.R);
    const double m = static_cast<double>(p.m());
    ws.log_const =
        c.lambda > 0.0
            ? (c.lambda / 2.0) * (std::log(std::abs(p.R.determinant())) -
                                  m * std::log(M_PI * c.lambda))
            : 0.0;
    ws.ent_analytic = entropy_constant(c.lambda, p.R);
    return ws;
}

template <bool Parallel>
EpisodeResult run_episode_impl(const PolicyParams& th, const ModelParams& p,
                               const SimConfig& c,
                               const rng::NoiseStream& stream,
                               const std::vector<uint32_t>* perm) {
    EpisodeWorkspace ws = make_workspace(th, p, c);
    const Index d = p.d();
    const Index m = p.m();
    const double h = c.h();
    const Matrix qhat = p.Qhat();
    const Matrix bbar = p.Bbar;

    auto sub_stream = [&](Index j) {
        return perm ? (*perm)[static_cast<size_t>(j)]
                    : static_cast<uint32_t>(j);
    };

    for (Index j = 0; j < c.N; ++j) {
        Vector z = stream.gaussian_vector(sub_stream(j), 0,
                                          rng::Channel::initial, d);
        ws.X.col(j) = p.x0_mean;
        ws.X.col(j).noalias() += ws.sqrt_cov * z;
    }

    TrajectorySummary traj;
    if (c.keep_trajectory) {
        traj.mu.reserve(c.n + 1);
        traj.xi_bar.reserve(c.n);
        traj.w_bar.reserve(c.n);
        traj.w0.reserve(c.n);
        traj.second_moment.reserve(c.n);
    }

    std::atomic<int> overflow_step{-1};
    detail::StepContext ctx{th, p, c, stream, ws, Vector(d), Vector(d), 0.0, 0};

    for (int l = 0; l < c.n; ++l) {
        ctx.l = static_cast<uint32_t>(l);
        // Fixed-order mean over particles.
        Vector mu = Vector::Zero(d);
        for (Index j = 0; j < c.N; ++j) mu += ws.X.col(j);
        mu /= static_cast<double>(c.N);
        ctx.mu = mu;

        Vector w0 = stream.gaussian_vector(0, ctx.l, rng::Channel::common,
                                           p.d0());
        ctx.common_shift = h * (bbar * mu);
        ctx.common_shift.noalias() += std::sqrt(h) * (p.gamma0 * w0);
        ctx.cost_common = mu.dot(qhat * mu);
        if (c.entropy_mode == EntropyMode::analytic)
            ctx.cost_common += ws.ent_analytic;

        if (c.keep_trajectory) {
            traj.mu.push_back(mu);
            traj.w0.push_back(w0);
            traj.second_moment.push_back(ws.X * ws.X.transpose() /
                                         static_cast<double>(c.N));
            // Averaged noises replayed from the per-particle streams.
            Vector xi_bar = Vector::Zero(m);
            Vector w_bar = Vector::Zero(p.dw());
            Vector xi(m), w(p.dw());
            for (Index j = 0; j < c.N; ++j) {
                stream.fill_gaussian(sub_stream(j), ctx.l,
                                     rng::Channel::action, xi.data(), m);
                stream.fill_gaussian(sub_stream(j), ctx.l,
                                     rng::Channel::idiosyncratic, w.data(),
                                     p.dw());
                xi_bar += xi;
                w_bar += w;
            }
            traj.xi_bar.push_back(xi_bar / static_cast<double>(c.N));
            traj.w_bar.push_back(w_bar / static_cast<double>(c.N));
        }

        if constexpr (Parallel) {
#if defined(_OPENMP)
#pragma omp parallel
            {
                detail::ParticleScratch scratch(d, m, p.dw());
#pragma omp for schedule(static)
                for (Index j = 0; j < c.N; ++j) {
                    ws.acc[j] += detail::particle_step(ctx, j, sub_stream(j),
                                                       scratch, ws.X);
                    if (ws.X.col(j).cwiseAbs().maxCoeff() > c.overflow_limit) {
                        int expected = -1;
                        overflow_step.compare_exchange_strong(expected, l);
                    }
                }
            }
#else
            detail::ParticleScratch scratch(d, m, p.dw());
            for (Index j = 0; j < c.N; ++j) {
                ws.acc[j] += detail::particle_step(ctx, j, sub_stream(j),
                                                   scratch, ws.X);
                if (ws.X.col(j).cwiseAbs().maxCoeff() > c.overflow_limit) {
                    int expected = -1;
                    overflow_step.compare_exchange_strong(expected, l);
                }
            }
#endif
        } else {
            detail::ParticleScratch scratch(d, m, p.dw());
            for (Index j = 0; j < c.N; ++j) {
                ws.acc[j] += detail::particle_step(ctx, j, sub_stream(j),
                                                   scratch, ws.X);
                if (ws.X.col(j).cwiseAbs().maxCoeff() > c.overflow_limit) {
                    int expected = -1;
                    overflow_step.compare_exchange_strong(expected, l);
                }
            }
        }
        if (overflow_step.load() >= 0)
            throw OverflowError(overflow_step.load(), stream.episode());
    }

    if (c.keep_trajectory) {
        Vector mu = Vector::Zero(d);
        for (Index j = 0; j < c.N; ++j) mu += ws.X.col(j);
        traj.mu.push_back(mu / static_cast<double>(c.N));
    }

    double total = 0.0;
    for (Index j = 0; j < c.N; ++j) total += ws.acc[j];

    EpisodeResult result;
    result.j_pop = h * total / static_cast<double>(c.N);
    if (c.keep_trajectory) result.trajectory = std::move(traj);
    return result;
}

}  // namespace

EpisodeResult run_episode(const PolicyParams& th, const ModelParams& p,
                          const SimConfig& c, const rng::NoiseStream& stream) {
    return run_episode_impl<true>(th, p, c, stream, nullptr);
}

EpisodeResult run_episode_serial(const PolicyParams& th, const ModelParams& p,
                                 const SimConfig& c,
                                 const rng::NoiseStream& stream,
                                 const std::vector<uint32_t>* perm) {
    return run_episode_impl<false>(th, p, c, stream, perm);
}

double aggregate_mean_identity(const TrajectorySummary& traj,
                               const PolicyParams& th, const ModelParams& p,
                               const SimConfig& c) {
    if (traj.mu.empty()) throw DomainError("popsim.aggregate_mean_identity: no trajectory");
    const double h = c.h();
    const Matrix drift = p.Bhat() + p.D * th.zeta;
    const Matrix S = action_noise_sqrt(c.lambda, p.R);
    const size_t n = traj.xi_bar.size();

    double worst = 0.0;
    Vector mu = traj.mu[0];
    for (size_t l = 0; l < n; ++l) {
        Vector next = mu + (drift * mu + p.D * (S * traj.xi_bar[l])) * h +
                      std::sqrt(h) * (p.gamma * traj.w_bar[l]) +
                      std::sqrt(h) * (p.gamma0 * traj.w0[l]);
        worst = std::max(worst, (next - traj.mu[l + 1]).norm());
        mu = traj.mu[l + 1];
    }
    return worst;
}

}  // namespace mfpg::popsim
