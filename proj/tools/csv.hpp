// Minimal strict CSV support for the CLI: comma separator, required header
// row, '.' decimal point, no quoting, NA/empty cells rejected.
#ifndef WLCB_TOOLS_CSV_HPP
#define WLCB_TOOLS_CSV_HPP

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlcb_cli {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == name) return static_cast<int>(j);
        }
        throw std::runtime_error("missing column: " + name);
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    CsvTable table;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            table.header = split_csv_line(line);
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.header.size()) {
            throw std::runtime_error("ragged row at line " + std::to_string(line_no) + ": got " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty())) {
        throw std::runtime_error("empty file: " + path);
    }
    if (table.rows.empty()) throw std::runtime_error("empty file (no data rows): " + path);
    return table;
}

inline double parse_cell(const std::string& cell, long row, const std::string& col) {
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
        throw std::runtime_error("missing value (NA) at data row " + std::to_string(row) +
                                 ", column " + col);
    }
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + cell.size()) {
        throw std::runtime_error("not a number at data row " + std::to_string(row) + ", column " +
                                 col + ": '" + cell + "'");
    }
    return v;
}

}  // namespace wlcb_cli

#endif
