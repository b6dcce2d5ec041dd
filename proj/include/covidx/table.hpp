#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "covidx/date.hpp"

namespace covidx {

/// `%.<digits>g` formatting; the CLI writes every number with 12 significant digits.
std::string format_number(double value, int significant_digits = 12);

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(const std::string& name);  // throws ConfigError

/// Column-oriented output table: a date column followed by numeric columns.
/// NaN cells are written as empty CSV cells / JSON null.
struct OutputTable {
    std::vector<Date> dates;
    std::vector<std::string> names;            // numeric column headers
    std::vector<std::vector<double>> columns;  // one vector per name, dates.size() long

    void add_column(std::string name, std::vector<double> values);

    void write_csv(std::ostream& out) const;
    void write_json(std::ostream& out) const;
    void write(const std::filesystem::path& path, OutputFormat format) const;
};

/// Reads a table written by OutputTable::write (either format).
OutputTable read_output_table(const std::filesystem::path& path);

} // namespace covidx
