#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Minimal CSV reading/writing: comma separator, one header row, '.' decimal,
// UTF-8.  All numeric output goes through %.17g so a (config, seed) pair
// reproduces files byte for byte.

namespace lgc {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(const std::string& name) const;  // throws data_error
    std::vector<double> column(const std::string& name) const;
    std::vector<std::int64_t> int_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);
    void add_row(const std::vector<double>& row);
    void add_row_raw(const std::vector<std::string>& row);
    void write(const std::string& path) const;
    const std::string& text() const { return buf_; }

private:
    std::size_t width_;
    std::string buf_;
};

} // namespace lgc
