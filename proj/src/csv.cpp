#include "mfpg/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace mfpg::csv {

std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format(int v) { return std::to_string(v); }
std::string format(uint64_t v) { return std::to_string(v); }

Writer::Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path);
}

void Writer::header(const std::vector<std::string>& columns) {
    row(columns);
}

void Writer::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';  // LF endings on every platform
}

}  // namespace mfpg::csv
