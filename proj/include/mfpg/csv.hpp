#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace mfpg::csv {

/// Numbers are written with 12 significant digits so identical doubles give
/// identical bytes.
std::string format(double v);
std::string format(int v);
std::string format(uint64_t v);

class Writer {
public:
    explicit Writer(const std::string& path);

    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
};

}  // namespace mfpg::csv
