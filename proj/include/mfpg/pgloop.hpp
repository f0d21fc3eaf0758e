#pragma once

#include "mfpg/zograd.hpp"

#include <optional>

namespace mfpg::pgloop {

/// Piecewise-constant step sizes: entry (threshold, rho) applies to the
/// 1-based update indices k <= threshold; past the last threshold the last
/// rho stays in force. A constant schedule is a single entry.
struct StepSchedule {
    struct Entry {
        int threshold;
        double rho;
    };
    std::vector<Entry> entries;

    double rho_at(int k) const;
    static StepSchedule constant(double rho);
    void validate() const;  // thresholds strictly increasing, rho > 0
};

enum class EvalMode { analytic, none };

struct MFRunConfig {
    PolicyParams theta0;
    StepSchedule schedule;
    int k_max = 350;
    zograd::GradConfig gc;
    EvalMode eval_mode = EvalMode::none;
    int jpop_window = 10;  // moving-average window for model-free monitoring
};

struct MFIterateRecord {
    int k = 0;
    Matrix theta, zeta;
    double jpop = 0.0;
    double jpop_moving_avg = 0.0;
    double ghat_norm_theta = 0.0, ghat_norm_zeta = 0.0;
    double rho = 0.0;  // step used to leave this iterate
    std::optional<double> J, J_err_rel;      // eval_mode == analytic
    std::optional<bool> descent_event;       // <ghat, grad J>_H >= 0.5 |grad J|_H^2
};

struct MFTrace {
    std::vector<MFIterateRecord> rows;
    bool aborted = false;
    int abort_iteration = -1;
    double J_opt = 0.0;  // set when eval_mode == analytic
};

/// Stochastic PG iteration Theta <- Theta - rho_k ghat(Theta) with fresh
/// estimator streams every iteration. Simulator overflow aborts with the
/// partial trace.
MFTrace model_free_pg(const MFRunConfig& cfg, const ModelParams& p,
                      uint64_t seed);

struct SeedSummary {
    uint64_t seed = 0;
    double final_J = 0.0;
    double final_err = 0.0;    // J - J_opt at the last iterate
    double err_ratio = 0.0;    // final_err / (J(Theta_0) - J_opt)
    bool success = false;
    bool aborted = false;
};

struct MultiSeedSummary {
    std::vector<SeedSummary> rows;
    int successes = 0;
    double epsilon = 0.0;
};

/// Runs model_free_pg once per seed (eval_mode must be analytic) and counts
/// seeds with J(Theta_final) - J* <= epsilon (J(Theta_0) - J*).
MultiSeedSummary multi_seed_study(const MFRunConfig& cfg, const ModelParams& p,
                                  const std::vector<uint64_t>& seeds,
                                  double epsilon);

}  // namespace mfpg::pgloop
