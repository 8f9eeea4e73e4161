#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rwre/errors.hpp"

// Deterministic text output. Probabilities and other reals are printed with
// 17 significant digits so every CSV/JSON number round-trips to the exact
// double that produced it.

namespace rwre::io {

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_i64(std::int64_t x) { return std::to_string(x); }

// One CSV table: a versioned schema comment, a header row, then data rows.
class CsvWriter {
public:
    CsvWriter(std::string schema_name, const std::vector<std::string>& columns) {
        body_ << "# rwre-lab csv schema: " << schema_name << " v1\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            body_ << (i ? "," : "") << columns[i];
        body_ << "\n";
        n_cols_ = columns.size();
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != n_cols_) throw InternalError("csv row arity mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) body_ << (i ? "," : "") << cells[i];
        body_ << "\n";
    }

    std::string str() const { return body_.str(); }

private:
    std::ostringstream body_;
    std::size_t n_cols_ = 0;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << content;
    if (!out) throw InternalError("short write to " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace rwre::io
