#pragma once

namespace mfpg::cli {

/// Exit codes: 0 success, 2 config error, 3 numerical error, 4 divergence.
int run(int argc, const char* const* argv);

}  // namespace mfpg::cli
