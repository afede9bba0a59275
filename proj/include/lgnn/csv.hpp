#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lgnn {

/// Shortest round-trip-safe form: 17 significant digits ("%.17g").
std::string format_double(double v);

/// Minimal CSV table. Cells containing a comma, quote or newline are quoted.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row);
    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Splits one CSV line on commas (no quoting support) and trims whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lgnn
