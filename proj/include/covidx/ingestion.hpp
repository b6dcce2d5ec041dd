#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "covidx/panel.hpp"

namespace covidx {

/// Header plus rows of raw string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header, or -1.
    int column(const std::string& name) const;
};

/// RFC-4180-style reader: comma separated, double-quoted fields, CRLF tolerated.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

/// Loads a generic panel. Rows are sorted by date; duplicate dates are an error.
/// Empty and non-numeric cells become missing. An empty `value_columns` selects
/// every column except the date column, in header order.
Panel parse_panel_csv(const std::filesystem::path& path, const std::string& date_column,
                      const std::vector<std::string>& value_columns = {});
Panel parse_panel_csv(std::istream& in, const std::string& date_column,
                      const std::vector<std::string>& value_columns = {});

/// Writes `date,<variables...>` with round-trip precision; missing cells are empty.
void write_panel_csv(const Panel& panel, std::ostream& out, const std::string& date_column = "date");
void write_panel_csv(const Panel& panel, const std::filesystem::path& path,
                     const std::string& date_column = "date");

/// Variable order produced by parse_dpc_national, independent of file column order.
const std::vector<std::string>& dpc_national_variables();

/// Italian Civil Protection national series (dpc-covid19-ita-andamento-nazionale).
Panel parse_dpc_national(const std::filesystem::path& path);
Panel parse_dpc_national(std::istream& in);

/// Italian Civil Protection regional series pivoted to dates x regions.
/// Absent (date, region) pairs are 0; duplicate pairs are summed.
RegionalCases parse_dpc_regional(const std::filesystem::path& path);
RegionalCases parse_dpc_regional(std::istream& in);

} // namespace covidx
