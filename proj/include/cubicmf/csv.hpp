#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cubicmf {

/// 17 significant digits: enough for parse(serialize(x)) == x on doubles.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

/// Header row, data rows, and a trailing block of '#'-prefixed metadata
/// comment lines. Serialized with LF line endings.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> metadata;

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns.size())
            throw std::logic_error("CsvTable: cell count does not match the header");
        rows.push_back(std::move(cells));
    }

    std::string to_string() const {
        std::string out;
        append_joined(out, columns);
        for (const auto& row : rows) append_joined(out, row);
        for (const auto& line : metadata) {
            out += "# ";
            out += line;
            out += '\n';
        }
        return out;
    }

private:
    static void append_joined(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    }
};

/// Writes through a temporary sibling and renames into place; a failed run
/// never leaves a partial file at the destination.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace cubicmf
