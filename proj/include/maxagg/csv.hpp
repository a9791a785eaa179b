#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace maxagg::csv {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_value(std::size_t v) { return std::to_string(v); }
inline std::string format_value(int v) { return std::to_string(v); }
inline std::string format_value(bool v) { return v ? "1" : "0"; }
inline std::string format_value(const char* v) { return v; }
inline std::string format_value(const std::string& v) { return v; }
inline std::string format_value(std::string_view v) { return std::string(v); }

// Comma-separated UTF-8 with LF line endings, written in binary mode so the
// bytes are identical on every platform.
class Writer {
public:
    explicit Writer(const std::filesystem::path& path)
        : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_)
            throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
    }

    template <typename... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, out_ << format_value(cells)), ...);
        out_ << '\n';
    }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return static_cast<int>(i);
        return -1;
    }
};

inline Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("csv: cannot open " + path.string());
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

} // namespace maxagg::csv
