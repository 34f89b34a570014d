#pragma once

#include <string>
#include <vector>

namespace qcl {

// In-memory form of the CSV files the tools exchange. Leading '#' lines
// are collected into `comments` (they carry the producing configuration),
// the first non-comment line is the header, everything after is data.
// Cells are kept as raw strings; empty string means an empty cell.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column, or -1.
    int column(const std::string& name) const;
};

std::vector<std::string> split_csv_line(const std::string& line);

CsvTable read_csv(const std::string& path);

// strtod with full-token validation; empty cells are rejected here, the
// caller decides where they are legal.
double parse_double_cell(const std::string& cell, const std::string& context);

long long parse_int_cell(const std::string& cell, const std::string& context);

} // namespace qcl
