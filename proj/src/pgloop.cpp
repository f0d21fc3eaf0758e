#include "mfpg/pgloop.hpp"

#include "mfpg/exact_pg.hpp"

#include <cmath>
#include <limits>

namespace mfpg::pgloop {

double StepSchedule::rho_at(int k) const {
    if (entries.empty()) throw DomainError("pgloop.StepSchedule: empty schedule");
    for (const Entry& e : entries)
        if (k <= e.threshold) return e.rho;
    return entries.back().rho;
}

StepSchedule StepSchedule::constant(double rho) {
    StepSchedule s;
    s.entries.push_back({std::numeric_limits<int>::max(), rho});
    return s;
}

void StepSchedule::validate() const {
    if (entries.empty()) throw DomainError("pgloop.StepSchedule: empty schedule");
    int prev = std::numeric_limits<int>::min();
    for (const Entry& e : entries) {
        if (e.threshold <= prev)
            throw DomainError(
                "pgloop.StepSchedule: thresholds must be strictly increasing");
        if (!(e.rho >= 0.0))
            throw DomainError("pgloop.StepSchedule: steps must be nonnegative");
        prev = e.threshold;
    }
}

MFTrace model_free_pg(const MFRunConfig& cfg, const ModelParams& p,
                      uint64_t seed) {
    cfg.schedule.validate();
    if (cfg.k_max < 0)
        throw DomainError("pgloop.model_free_pg: k_max must be >= 0");

    MFTrace trace;
    std::optional<AnalyticSolution> opt;
    if (cfg.eval_mode == EvalMode::analytic) {
        opt = solve_optimal(p);
        trace.J_opt = opt->J_opt;
        auto [s1, s2] = exact_pg::stability_check(cfg.theta0, p);
        if (!s1) throw StabilityError("pgloop.model_free_pg: theta0 not in S");
        if (!s2) throw StabilityError("pgloop.model_free_pg: zeta0 not in Shat");
    }

    zograd::GradConfig gc = cfg.gc;
    gc.sim.seed = seed;
    const uint64_t episodes_per_iter =
        static_cast<uint64_t>(gc.Ntilde) *
            std::max(1, gc.episodes_per_perturbation) +
        1;

    PolicyParams th = cfg.theta0;
    for (int k = 0; k <= cfg.k_max; ++k) {
        const uint64_t base = static_cast<uint64_t>(k) * episodes_per_iter;
        MFIterateRecord row;
        row.k = k;
        row.theta = th.theta;
        row.zeta = th.zeta;
        row.rho = cfg.schedule.rho_at(k + 1);

        zograd::GradientEstimate ghat;
        try {
            ghat = zograd::estimate_gradient(th, p, gc, base);
            rng::NoiseStream eval_stream(gc.sim.seed,
                                         base + episodes_per_iter - 1);
            row.jpop = popsim::run_episode(th, p, gc.sim, eval_stream).j_pop;
        } catch (const popsim::OverflowError&) {
            trace.aborted = true;
            trace.abort_iteration = k;
            return trace;
        }
        row.ghat_norm_theta = ghat.g_theta.norm();
        row.ghat_norm_zeta = ghat.g_zeta.norm();

        if (cfg.eval_mode == EvalMode::analytic) {
            auto [s1, s2] = exact_pg::stability_check(th, p);
            if (s1 && s2) {
                const exact_pg::CostDecomposition c = exact_pg::cost(th, p);
                row.J = c.J;
                row.J_err_rel = (c.J - trace.J_opt) / trace.J_opt;
                auto [g1, g2] = exact_pg::gradient(c, th, p);
                const double inner = (ghat.g_theta.transpose() * g1).trace() +
                                     (ghat.g_zeta.transpose() * g2).trace();
                const double grad_sq = g1.squaredNorm() + g2.squaredNorm();
                row.descent_event = inner >= 0.5 * grad_sq;
            }
        }

        // Moving average of jpop over the trailing window.
        const int window = std::max(1, cfg.jpop_window);
        double sum = row.jpop;
        int count = 1;
        for (int back = static_cast<int>(trace.rows.size()) - 1;
             back >= 0 && count < window; --back, ++count)
            sum += trace.rows[static_cast<size_t>(back)].jpop;
        row.jpop_moving_avg = sum / count;

        trace.rows.push_back(row);
        if (k == cfg.k_max) break;

        th.theta -= row.rho * ghat.g_theta;
        th.zeta -= row.rho * ghat.g_zeta;
    }
    return trace;
}

MultiSeedSummary multi_seed_study(const MFRunConfig& cfg, const ModelParams& p,
                                  const std::vector<uint64_t>& seeds,
                                  double epsilon) {
    if (cfg.eval_mode != EvalMode::analytic)
        throw DomainError("pgloop.multi_seed_study: eval_mode must be analytic");
    MultiSeedSummary summary;
    summary.epsilon = epsilon;
    if (seeds.empty()) return summary;

    const AnalyticSolution opt = solve_optimal(p);
    const exact_pg::CostDecomposition c0 = exact_pg::cost(cfg.theta0, p);
    const double initial_err = c0.J - opt.J_opt;

    for (uint64_t seed : seeds) {
        SeedSummary row;
        row.seed = seed;
        MFTrace trace = model_free_pg(cfg, p, seed);
        row.aborted = trace.aborted;
        if (!trace.aborted && !trace.rows.empty() && trace.rows.back().J) {
            row.final_J = *trace.rows.back().J;
            row.final_err = row.final_J - opt.J_opt;
            row.err_ratio = row.final_err / initial_err;
            row.success = row.final_err <= epsilon * initial_err;
        }
        summary.successes += row.success ? 1 : 0;
        summary.rows.push_back(row);
    }
    return summary;
}

}  // namespace mfpg::pgloop
