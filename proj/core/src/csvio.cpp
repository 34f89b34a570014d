#include "qcl/csvio.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>

#include "qcl/errors.hpp"

namespace qcl {

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name)
            return static_cast<int>(i);
    return -1;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw schema_error("cannot open CSV file: " + path);

    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!have_header) {
            if (!line.empty() && line[0] == '#') {
                table.comments.push_back(line);
                continue;
            }
            if (line.empty())
                continue;
            table.columns = split_csv_line(line);
            have_header = true;
            continue;
        }
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        if (cells.size() > table.columns.size())
            throw schema_error(path + ": row has more cells than the header");
        table.rows.push_back(std::move(cells));
    }
    if (!have_header)
        throw schema_error(path + ": no header line found");
    return table;
}

double parse_double_cell(const std::string& cell, const std::string& context) {
    if (cell.empty())
        throw schema_error(context + ": empty cell where a number is required");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE)
        throw schema_error(context + ": not a valid number: '" + cell + "'");
    return v;
}

long long parse_int_cell(const std::string& cell, const std::string& context) {
    if (cell.empty())
        throw schema_error(context + ": empty cell where an integer is required");
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(cell.c_str(), &end, 10);
    if (end != cell.c_str() + cell.size() || errno == ERANGE)
        throw schema_error(context + ": not a valid integer: '" + cell + "'");
    return v;
}

} // namespace qcl
