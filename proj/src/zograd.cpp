#include "mfpg/zograd.hpp"

#include "mfpg/exact_pg.hpp"

#include <cmath>
#include <exception>
#include <mutex>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mfpg::zograd {

Matrix sample_sphere(double r, Index m, Index d, const rng::NoiseStream& stream,
                     rng::Channel channel) {
    if (!(r > 0.0)) throw DomainError("zograd.sample_sphere: r must be positive");
    Matrix u(m, d);
    for (uint32_t attempt = 0;; ++attempt) {
        // Column-major fill; the entry index rides the step slot so any
        // m*d fits the per-tuple draw limit.
        for (Index k = 0; k < m * d; ++k)
            u.data()[k] =
                stream.gaussian(attempt, static_cast<uint32_t>(k), channel, 0);
        const double norm = u.norm();
        if (norm > 0.0) return (r / norm) * u;
    }
}

GradientEstimate estimate_gradient(const PolicyParams& th, const ModelParams& p,
                                   const GradConfig& gc,
                                   uint64_t episode_base) {
    if (gc.Ntilde < 1)
        throw DomainError("zograd.estimate_gradient: Ntilde must be >= 1");
    const Index m = p.m();
    const Index d = p.d();
    const int reps = std::max(1, gc.episodes_per_perturbation);

    std::vector<Matrix> us(gc.Ntilde), vs(gc.Ntilde);
    std::vector<double> costs(gc.Ntilde, 0.0);
    std::exception_ptr failure;
    std::mutex failure_mutex;

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < gc.Ntilde; ++i) {
        try {
            const uint64_t base = episode_base + static_cast<uint64_t>(i) * reps;
            rng::NoiseStream sphere(gc.sim.seed, base);
            Matrix u = sample_sphere(gc.r, m, d, sphere,
                                     rng::Channel::sphere_theta);
            Matrix v = sample_sphere(gc.r, m, d, sphere,
                                     rng::Channel::sphere_zeta);
            PolicyParams perturbed{th.theta + u, th.zeta + v};
            if (gc.check_perturbed_stability) {
                auto [s1, s2] = exact_pg::stability_check(perturbed, p);
                if (!s1 || !s2)
                    throw StabilityError(
                        "zograd.estimate_gradient: perturbed Theta_" +
                        std::to_string(i) + " left S x Shat");
            }
            double mean_cost = 0.0;
            for (int e = 0; e < reps; ++e) {
                rng::NoiseStream episode(gc.sim.seed, base + e);
                mean_cost +=
                    popsim::run_episode(perturbed, p, gc.sim, episode).j_pop;
            }
            costs[i] = mean_cost / reps;
            us[i] = std::move(u);
            vs[i] = std::move(v);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const double dim = gc.smoothing_dim == SmoothingDim::state
                           ? static_cast<double>(d)
                           : static_cast<double>(m * d);
    const double scale = dim / (gc.r * gc.r);

    GradientEstimate est;
    est.g_theta = Matrix::Zero(m, d);
    est.g_zeta = Matrix::Zero(m, d);
    est.per_episode_costs = costs;
    est.u_norms.resize(gc.Ntilde);
    for (int i = 0; i < gc.Ntilde; ++i) {  // fixed-order reduction
        est.g_theta += costs[i] * us[i];
        est.g_zeta += costs[i] * vs[i];
        est.u_norms[i] = us[i].norm();
    }
    est.g_theta *= scale / gc.Ntilde;
    est.g_zeta *= scale / gc.Ntilde;
    return est;
}

DiagnosticsReport estimator_diagnostics(const PolicyParams& th,
                                        const ModelParams& p,
                                        const GradConfig& gc, int repeats) {
    if (repeats < 2)
        throw DomainError("zograd.estimator_diagnostics: repeats must be >= 2");
    const Index m = p.m();
    const Index d = p.d();

    auto mean_estimate = [&](const GradConfig& config, uint64_t base_offset,
                             Matrix& mean_t, Matrix& mean_z, double& se_t,
                             double& se_z) {
        std::vector<Matrix> gts, gzs;
        gts.reserve(repeats);
        gzs.reserve(repeats);
        for (int rep = 0; rep < repeats; ++rep) {
            const uint64_t base =
                base_offset +
                static_cast<uint64_t>(rep) * config.Ntilde *
                    std::max(1, config.episodes_per_perturbation);
            GradientEstimate e = estimate_gradient(th, p, config, base);
            gts.push_back(e.g_theta);
            gzs.push_back(e.g_zeta);
        }
        mean_t = Matrix::Zero(m, d);
        mean_z = Matrix::Zero(m, d);
        for (const auto& g : gts) mean_t += g;
        for (const auto& g : gzs) mean_z += g;
        mean_t /= repeats;
        mean_z /= repeats;
        double var_t = 0.0, var_z = 0.0;
        for (const auto& g : gts) var_t += (g - mean_t).squaredNorm();
        for (const auto& g : gzs) var_z += (g - mean_z).squaredNorm();
        se_t = std::sqrt(var_t / (repeats - 1) / repeats);
        se_z = std::sqrt(var_z / (repeats - 1) / repeats);
    };

    DiagnosticsReport rep;
    mean_estimate(gc, 0, rep.mean_g_theta, rep.mean_g_zeta, rep.se_theta,
                  rep.se_zeta);
    auto [g1, g2] = exact_pg::gradient(th, p);
    rep.exact_g_theta = g1;
    rep.exact_g_zeta = g2;
    rep.bias_norm_theta = (rep.mean_g_theta - g1).norm();
    rep.bias_norm_zeta = (rep.mean_g_zeta - g2).norm();

    // Knob-doubling sensitivities of the mean estimate, computed on fresh
    // episode id ranges so the runs stay independent.
    const uint64_t block = static_cast<uint64_t>(repeats) * gc.Ntilde *
                           std::max(1, gc.episodes_per_perturbation) * 4;
    Matrix mt, mz;
    double st, sz;
    GradConfig longer = gc;
    longer.sim.T *= 2.0;
    longer.sim.n *= 2;  // keep h fixed while doubling the horizon
    mean_estimate(longer, block, mt, mz, st, sz);
    rep.shift_T = (mt - rep.mean_g_theta).norm() + (mz - rep.mean_g_zeta).norm();

    GradConfig finer = gc;
    finer.sim.n *= 2;
    mean_estimate(finer, 2 * block, mt, mz, st, sz);
    rep.shift_n = (mt - rep.mean_g_theta).norm() + (mz - rep.mean_g_zeta).norm();

    GradConfig crowded = gc;
    crowded.sim.N *= 2;
    mean_estimate(crowded, 3 * block, mt, mz, st, sz);
    rep.shift_N = (mt - rep.mean_g_theta).norm() + (mz - rep.mean_g_zeta).norm();
    return rep;
}

}  // namespace mfpg::zograd
