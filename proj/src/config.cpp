#include "mfpg/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mfpg::cfg {

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

// A parsed value: a number or a (possibly nested) list of numbers.
struct Value {
    bool is_number = false;
    double number = 0.0;
    std::vector<Value> list;
};

class ValueParser {
public:
    explicit ValueParser(const std::string& text) : text_(text) {}

    Value parse() {
        Value v = parse_value();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
        return v;
    }

private:
    const std::string& text_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) {
        throw std::runtime_error(why);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    Value parse_value() {
        skip_ws();
        if (pos_ >= text_.size()) fail("empty value");
        if (text_[pos_] == '[') return parse_list();
        return parse_number();
    }

    Value parse_list() {
        Value v;
        ++pos_;  // '['
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
        }
        while (true) {
            v.list.push_back(parse_value());
            skip_ws();
            if (pos_ >= text_.size()) fail("unterminated list");
            if (text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return v;
            }
            fail("expected ',' or ']'");
        }
    }

    Value parse_number() {
        const size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        const std::string tok = text_.substr(start, pos_ - start);
        size_t used = 0;
        double parsed;
        try {
            parsed = std::stod(tok, &used);
        } catch (const std::exception&) {
            fail("not a number: '" + tok + "'");
        }
        if (used != tok.size()) fail("not a number: '" + tok + "'");
        Value v;
        v.is_number = true;
        v.number = parsed;
        return v;
    }
};

class Builder {
public:
    explicit Builder(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const size_t nonspace = line.find_first_not_of(" \t\r");
            if (nonspace == std::string::npos) continue;
            const size_t eq = line.find('=');
            if (eq == std::string::npos) {
                problems_.push_back("line " + std::to_string(lineno) +
                                    ": expected 'key = value'");
                continue;
            }
            std::string key = trim(line.substr(0, eq));
            std::string raw = trim(line.substr(eq + 1));
            if (entries_.count(key)) {
                problems_.push_back("duplicate key '" + key + "'");
                continue;
            }
            try {
                entries_[key] = ValueParser(raw).parse();
            } catch (const std::exception& ex) {
                problems_.push_back("key '" + key + "': " + ex.what());
            }
        }
    }

    RunConfig build() {
        RunConfig c;
        c.model.B = matrix("B", true);
        const Index d = c.model.B.rows();

        c.model.D = matrix("D", true);
        c.model.gamma = matrix("gamma", true);
        c.model.gamma0 = matrix("gamma0", true);
        c.model.Q = matrix("Q", true);
        c.model.R = matrix("R", true);
        c.model.beta = number("beta", true);
        c.model.lambda = number("lambda", true);
        c.model.x0_mean = vector("x0_mean", true);
        c.model.x0_cov = matrix("x0_cov", true);

        resolve_pair("Bhat", "Bbar", c.model.B, c.model.Bbar);
        resolve_pair("Qhat", "Qbar", c.model.Q, c.model.Qbar);

        if (has("T")) c.T = number("T", false);
        if (has("n")) c.n = integer("n");
        if (has("N")) c.N = integer("N");
        if (has("Ntilde")) c.Ntilde = integer("Ntilde");
        if (has("r")) c.r = number("r", false);
        if (has("seed")) c.seed = static_cast<uint64_t>(integer("seed"));
        if (has("k_max")) c.k_max = integer("k_max");
        if (has("theta0")) c.theta0 = matrix("theta0", false);
        if (has("zeta0")) c.zeta0 = matrix("zeta0", false);
        if (has("rho_schedule")) c.rho_schedule = schedule("rho_schedule");

        for (const auto& [key, value] : entries_)
            if (!consumed_.count(key))
                problems_.push_back("unknown key '" + key + "'");

        if (problems_.empty()) {
            for (const Violation& v : validate(c.model)) {
                std::string msg = v.check;
                if (!v.detail.empty()) msg += " (" + v.detail + ")";
                problems_.push_back(msg);
            }
            if (c.theta0 && (c.theta0->rows() != c.model.m() ||
                             c.theta0->cols() != d))
                problems_.push_back("theta0 must be m x d");
            if (c.zeta0 && (c.zeta0->rows() != c.model.m() ||
                            c.zeta0->cols() != d))
                problems_.push_back("zeta0 must be m x d");
        }
        if (!problems_.empty()) throw ConfigError(problems_);
        return c;
    }

private:
    std::map<std::string, Value> entries_;
    std::map<std::string, bool> consumed_;
    std::vector<std::string> problems_;

    static std::string trim(const std::string& s) {
        const size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const Value* lookup(const std::string& key, bool required) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (required) problems_.push_back("missing key '" + key + "'");
            return nullptr;
        }
        consumed_[key] = true;
        return &it->second;
    }

    double number(const std::string& key, bool required) {
        const Value* v = lookup(key, required);
        if (!v) return 0.0;
        if (!v->is_number) {
            problems_.push_back("key '" + key + "' must be a number");
            return 0.0;
        }
        return v->number;
    }

    long long integer(const std::string& key) {
        const double x = number(key, false);
        if (x != std::floor(x))
            problems_.push_back("key '" + key + "' must be an integer");
        return static_cast<long long>(x);
    }

    Matrix matrix(const std::string& key, bool required) {
        const Value* v = lookup(key, required);
        if (!v) return Matrix::Zero(1, 1);
        if (v->is_number) {
            Matrix m(1, 1);
            m(0, 0) = v->number;
            return m;
        }
        // Nested row lists.
        const size_t rows = v->list.size();
        if (rows == 0) {
            problems_.push_back("key '" + key + "' has an empty matrix");
            return Matrix::Zero(1, 1);
        }
        size_t cols = 0;
        for (const Value& row : v->list) {
            if (row.is_number) {
                problems_.push_back("key '" + key +
                                    "' must be a number or nested row lists");
                return Matrix::Zero(1, 1);
            }
            if (cols == 0) cols = row.list.size();
            if (row.list.size() != cols || cols == 0) {
                problems_.push_back("key '" + key + "' has ragged rows");
                return Matrix::Zero(1, 1);
            }
        }
        Matrix m(rows, cols);
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < cols; ++j) {
                const Value& cell = v->list[i].list[j];
                if (!cell.is_number) {
                    problems_.push_back("key '" + key +
                                        "' nests deeper than rows of numbers");
                    return Matrix::Zero(1, 1);
                }
                m(i, j) = cell.number;
            }
        return m;
    }

    Vector vector(const std::string& key, bool required) {
        const Value* v = lookup(key, required);
        if (!v) return Vector::Zero(1);
        if (v->is_number) return Vector::Constant(1, v->number);
        Vector out(v->list.size());
        for (size_t i = 0; i < v->list.size(); ++i) {
            if (!v->list[i].is_number) {
                problems_.push_back("key '" + key + "' must be a flat list");
                return Vector::Zero(1);
            }
            out[static_cast<Index>(i)] = v->list[i].number;
        }
        return out;
    }

    pgloop::StepSchedule schedule(const std::string& key) {
        pgloop::StepSchedule s;
        const Value* v = lookup(key, false);
        if (!v || v->is_number) {
            problems_.push_back("key '" + key +
                                "' must be a list of [threshold, rho] pairs");
            return s;
        }
        for (const Value& entry : v->list) {
            if (entry.is_number || entry.list.size() != 2 ||
                !entry.list[0].is_number || !entry.list[1].is_number) {
                problems_.push_back("key '" + key +
                                    "' must be a list of [threshold, rho] pairs");
                return s;
            }
            s.entries.push_back({static_cast<int>(entry.list[0].number),
                                 entry.list[1].number});
        }
        try {
            s.validate();
        } catch (const std::exception& ex) {
            problems_.push_back(std::string("rho_schedule: ") + ex.what());
        }
        return s;
    }

    void resolve_pair(const std::string& hat, const std::string& bar,
                      const Matrix& base, Matrix& out_bar) {
        const bool has_hat = has(hat);
        const bool has_bar = has(bar);
        if (has_hat == has_bar) {
            problems_.push_back("exactly one of {" + hat + ", " + bar +
                                "} must appear");
            out_bar = Matrix::Zero(base.rows(), base.cols());
            return;
        }
        if (has_bar) {
            out_bar = matrix(bar, true);
        } else {
            Matrix h = matrix(hat, true);
            if (h.rows() == base.rows() && h.cols() == base.cols())
                out_bar = h - base;
            else {
                problems_.push_back("key '" + hat + "' must match " +
                                    std::to_string(base.rows()) + "x" +
                                    std::to_string(base.cols()));
                out_bar = Matrix::Zero(base.rows(), base.cols());
            }
        }
    }
};

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string emit_matrix(const Matrix& m) {
    std::string out = "[";
    for (Index i = 0; i < m.rows(); ++i) {
        if (i) out += ", ";
        out += "[";
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out += ", ";
            out += full(m(i, j));
        }
        out += "]";
    }
    return out + "]";
}

std::string emit_vector(const Vector& v) {
    std::string out = "[";
    for (Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += full(v[i]);
    }
    return out + "]";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems_)
    : std::runtime_error("config: " + join(problems_, "; ")),
      problems(std::move(problems_)) {}

RunConfig parse_config_text(const std::string& text) {
    return Builder(text).build();
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream out;
    out << "B = " << emit_matrix(c.model.B) << "\n";
    out << "Bbar = " << emit_matrix(c.model.Bbar) << "\n";
    out << "D = " << emit_matrix(c.model.D) << "\n";
    out << "gamma = " << emit_matrix(c.model.gamma) << "\n";
    out << "gamma0 = " << emit_matrix(c.model.gamma0) << "\n";
    out << "Q = " << emit_matrix(c.model.Q) << "\n";
    out << "Qbar = " << emit_matrix(c.model.Qbar) << "\n";
    out << "R = " << emit_matrix(c.model.R) << "\n";
    out << "beta = " << full(c.model.beta) << "\n";
    out << "lambda = " << full(c.model.lambda) << "\n";
    out << "x0_mean = " << emit_vector(c.model.x0_mean) << "\n";
    out << "x0_cov = " << emit_matrix(c.model.x0_cov) << "\n";
    if (c.T) out << "T = " << full(*c.T) << "\n";
    if (c.n) out << "n = " << *c.n << "\n";
    if (c.N) out << "N = " << *c.N << "\n";
    if (c.Ntilde) out << "Ntilde = " << *c.Ntilde << "\n";
    if (c.r) out << "r = " << full(*c.r) << "\n";
    if (c.seed) out << "seed = " << *c.seed << "\n";
    if (c.k_max) out << "k_max = " << *c.k_max << "\n";
    if (c.theta0) out << "theta0 = " << emit_matrix(*c.theta0) << "\n";
    if (c.zeta0) out << "zeta0 = " << emit_matrix(*c.zeta0) << "\n";
    if (c.rho_schedule) {
        out << "rho_schedule = [";
        for (size_t i = 0; i < c.rho_schedule->entries.size(); ++i) {
            if (i) out << ", ";
            out << "[" << c.rho_schedule->entries[i].threshold << ", "
                << full(c.rho_schedule->entries[i].rho) << "]";
        }
        out << "]\n";
    }
    return out.str();
}

void write_config(const RunConfig& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError({"cannot write config file '" + path + "'"});
    out << emit_config(c);
}

bool equal(const RunConfig& a, const RunConfig& b) {
    auto mat_eq = [](const Matrix& x, const Matrix& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    if (!mat_eq(a.model.B, b.model.B) || !mat_eq(a.model.Bbar, b.model.Bbar) ||
        !mat_eq(a.model.D, b.model.D) || !mat_eq(a.model.gamma, b.model.gamma) ||
        !mat_eq(a.model.gamma0, b.model.gamma0) ||
        !mat_eq(a.model.Q, b.model.Q) || !mat_eq(a.model.Qbar, b.model.Qbar) ||
        !mat_eq(a.model.R, b.model.R) || !mat_eq(a.model.x0_cov, b.model.x0_cov))
        return false;
    if (a.model.beta != b.model.beta || a.model.lambda != b.model.lambda)
        return false;
    if (a.model.x0_mean.size() != b.model.x0_mean.size() ||
        a.model.x0_mean != b.model.x0_mean)
        return false;
    if (a.T != b.T || a.n != b.n || a.N != b.N || a.Ntilde != b.Ntilde ||
        a.r != b.r || a.seed != b.seed || a.k_max != b.k_max)
        return false;
    auto opt_mat_eq = [&](const std::optional<Matrix>& x,
                          const std::optional<Matrix>& y) {
        if (x.has_value() != y.has_value()) return false;
        return !x || mat_eq(*x, *y);
    };
    if (!opt_mat_eq(a.theta0, b.theta0) || !opt_mat_eq(a.zeta0, b.zeta0))
        return false;
    if (a.rho_schedule.has_value() != b.rho_schedule.has_value()) return false;
    if (a.rho_schedule) {
        if (a.rho_schedule->entries.size() != b.rho_schedule->entries.size())
            return false;
        for (size_t i = 0; i < a.rho_schedule->entries.size(); ++i)
            if (a.rho_schedule->entries[i].threshold !=
                    b.rho_schedule->entries[i].threshold ||
                a.rho_schedule->entries[i].rho != b.rho_schedule->entries[i].rho)
                return false;
    }
    return true;
}

}  // namespace mfpg::cfg
