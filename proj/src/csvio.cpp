#include "lgc/csvio.hpp"

#include "lgc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lgc {

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw data_error("csv: no column named '" + name + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const std::size_t idx = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
}

std::vector<std::int64_t> CsvTable::int_column(const std::string& name) const {
    const std::size_t idx = column_index(name);
    std::vector<std::int64_t> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double v = rows[r][idx];
        const double rounded = std::nearbyint(v);
        if (std::fabs(v - rounded) > 1e-9) {
            throw data_error("csv: column '" + name + "' row " + std::to_string(r + 1) +
                             " is not an integer count");
        }
        out.push_back(static_cast<std::int64_t>(rounded));
    }
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("csv: cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw data_error("csv: '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(t.columns.size());
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw data_error("csv: '" + path + "' line " + std::to_string(lineno) +
                                 ": cannot parse '" + cell + "'");
            }
        }
        if (row.size() != t.columns.size()) {
            throw data_error("csv: '" + path + "' line " + std::to_string(lineno) +
                             ": expected " + std::to_string(t.columns.size()) + " fields");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string format_double(double v) {
    if (v == std::nearbyint(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : width_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += columns[i];
    }
    buf_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& row) {
    if (row.size() != width_) throw data_error("csv writer: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += format_double(row[i]);
    }
    buf_ += '\n';
}

void CsvWriter::add_row_raw(const std::vector<std::string>& row) {
    if (row.size() != width_) throw data_error("csv writer: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += row[i];
    }
    buf_ += '\n';
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("csv: cannot write '" + path + "'");
    out << buf_;
}

} // namespace lgc
