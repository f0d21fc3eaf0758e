#pragma once

#include "mfpg/model.hpp"
#include "mfpg/pgloop.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mfpg::cfg {

struct ConfigError : std::runtime_error {
    std::vector<std::string> problems;
    explicit ConfigError(std::vector<std::string> problems_);
};

/// Parsed experiment file: the model plus the model-free knobs that appear in
/// the file. Exactly one of {Qhat, Qbar} and one of {Bhat, Bbar} is accepted;
/// bars are stored.
struct RunConfig {
    ModelParams model;
    std::optional<double> T;
    std::optional<int> n, N, Ntilde;
    std::optional<double> r;
    std::optional<uint64_t> seed;
    std::optional<pgloop::StepSchedule> rho_schedule;
    std::optional<int> k_max;
    std::optional<Matrix> theta0, zeta0;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Canonical emission (bars, full precision) such that
/// parse_config_text(emit_config(c)) reproduces c exactly.
std::string emit_config(const RunConfig& c);
void write_config(const RunConfig& c, const std::string& path);

bool equal(const RunConfig& a, const RunConfig& b);

}  // namespace mfpg::cfg
