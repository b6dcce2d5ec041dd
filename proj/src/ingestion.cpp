#include "covidx/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "covidx/error.hpp"

namespace covidx {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file: " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path.string());
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

/// Non-numeric and empty cells map to missing.
double parse_cell(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) return kMissing;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return kMissing;
    return v;
}

Date parse_date_cell(const std::string& cell, std::size_t line) {
    auto d = Date::parse(cell);
    if (!d) {
        throw DataError("unparseable date '" + cell + "' on data row " + std::to_string(line));
    }
    return *d;
}

int require_column(const CsvTable& table, const std::string& name) {
    int c = table.column(name);
    if (c < 0) throw SchemaError(name);
    return c;
}

const std::string& cell_at(const std::vector<std::string>& row, int c) {
    static const std::string empty;
    return c < static_cast<int>(row.size()) ? row[static_cast<std::size_t>(c)] : empty;
}

/// Builds a Panel from (date, row-of-values) records; sorts, then rejects duplicates.
Panel assemble(std::vector<std::pair<Date, std::vector<double>>> records,
               std::vector<std::string> variables) {
    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].first == records[i - 1].first) {
            throw DataError("duplicate date: " + records[i].first.iso());
        }
    }
    Panel panel;
    panel.variables = std::move(variables);
    panel.values.resize(static_cast<Eigen::Index>(records.size()),
                        static_cast<Eigen::Index>(panel.variables.size()));
    panel.dates.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        panel.dates.push_back(records[i].first);
        for (std::size_t j = 0; j < panel.variables.size(); ++j) {
            panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                records[i].second[j];
        }
    }
    panel.validate();
    return panel;
}

Panel panel_from_table(const CsvTable& table, const std::string& date_column,
                       const std::vector<std::string>& value_columns) {
    const int date_col = require_column(table, date_column);

    std::vector<std::string> names = value_columns;
    if (names.empty()) {
        for (const auto& h : table.header) {
            if (h != date_column) names.push_back(h);
        }
    }
    std::vector<int> cols;
    cols.reserve(names.size());
    for (const auto& name : names) cols.push_back(require_column(table, name));

    std::vector<std::pair<Date, std::vector<double>>> records;
    records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        std::vector<double> vals;
        vals.reserve(cols.size());
        for (int c : cols) vals.push_back(parse_cell(cell_at(row, c)));
        records.emplace_back(parse_date_cell(cell_at(row, date_col), r + 1), std::move(vals));
    }
    return assemble(std::move(records), std::move(names));
}

} // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;  // current record has content
    bool header_done = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        bool blank = row.size() == 1 && row[0].empty();
        if (!blank) {
            if (!header_done) {
                for (auto& h : row) h = std::string(trim(h));
                // UTF-8 byte order mark
                if (!row.empty() && row[0].rfind("\xEF\xBB\xBF", 0) == 0) row[0].erase(0, 3);
                table.header = std::move(row);
                header_done = true;
            } else {
                table.rows.push_back(std::move(row));
            }
        }
        row.clear();
        any = false;
    };

    char ch;
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"': in_quotes = true; any = true; break;
        case ',': end_field(); any = true; break;
        case '\r': break;
        case '\n': end_record(); break;
        default: field.push_back(ch); any = true; break;
        }
    }
    if (any || !field.empty() || !row.empty()) end_record();
    if (!header_done) throw DataError("CSV input has no header row");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_csv(in);
}

Panel parse_panel_csv(std::istream& in, const std::string& date_column,
                      const std::vector<std::string>& value_columns) {
    return panel_from_table(read_csv(in), date_column, value_columns);
}

Panel parse_panel_csv(const std::filesystem::path& path, const std::string& date_column,
                      const std::vector<std::string>& value_columns) {
    auto in = open_input(path);
    return parse_panel_csv(in, date_column, value_columns);
}

void write_panel_csv(const Panel& panel, std::ostream& out, const std::string& date_column) {
    out << date_column;
    for (const auto& v : panel.variables) out << ',' << v;
    out << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < panel.rows(); ++i) {
        out << panel.dates[static_cast<std::size_t>(i)].iso();
        for (Eigen::Index j = 0; j < panel.cols(); ++j) {
            out << ',';
            const double v = panel.values(i, j);
            if (!is_missing(v)) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << buf;
            }
        }
        out << '\n';
    }
}

void write_panel_csv(const Panel& panel, const std::filesystem::path& path,
                     const std::string& date_column) {
    auto out = open_output(path);
    write_panel_csv(panel, out, date_column);
}

const std::vector<std::string>& dpc_national_variables() {
    static const std::vector<std::string> vars = {
        "totale_positivi", "ricoverati_con_sintomi", "terapia_intensiva",
        "isolamento_domiciliare", "deceduti", "tamponi"};
    return vars;
}

Panel parse_dpc_national(std::istream& in) {
    const CsvTable table = read_csv(in);
    require_column(table, "data");
    for (const char* name : {"ricoverati_con_sintomi", "terapia_intensiva", "isolamento_domiciliare",
                             "totale_positivi", "deceduti", "tamponi"}) {
        require_column(table, name);
    }
    return panel_from_table(table, "data", dpc_national_variables());
}

Panel parse_dpc_national(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_dpc_national(in);
}

RegionalCases parse_dpc_regional(std::istream& in) {
    const CsvTable table = read_csv(in);
    const int date_col = require_column(table, "data");
    const int region_col = require_column(table, "denominazione_regione");
    const int cases_col = require_column(table, "nuovi_positivi");

    std::map<Date, std::size_t> date_slot;
    std::map<std::string, std::size_t> region_slot;
    std::vector<std::string> regions;  // first-appearance order
    struct Entry {
        Date date;
        std::size_t region;
        double cases;
    };
    std::vector<Entry> entries;
    entries.reserve(table.rows.size());

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const Date d = parse_date_cell(cell_at(row, date_col), r + 1);
        const std::string region(trim(cell_at(row, region_col)));
        if (region.empty()) {
            throw DataError("empty region name on data row " + std::to_string(r + 1));
        }
        auto [it, inserted] = region_slot.emplace(region, regions.size());
        if (inserted) regions.push_back(region);
        date_slot.emplace(d, 0);
        const double v = parse_cell(cell_at(row, cases_col));
        entries.push_back({d, it->second, is_missing(v) ? 0.0 : v});
    }

    RegionalCases out;
    out.regions = std::move(regions);
    out.dates.reserve(date_slot.size());
    for (auto& [d, slot] : date_slot) {
        slot = out.dates.size();
        out.dates.push_back(d);
    }
    out.new_cases = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.dates.size()),
                                          static_cast<Eigen::Index>(out.regions.size()));
    for (const auto& e : entries) {
        out.new_cases(static_cast<Eigen::Index>(date_slot.at(e.date)),
                      static_cast<Eigen::Index>(e.region)) += e.cases;
    }
    return out;
}

RegionalCases parse_dpc_regional(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_dpc_regional(in);
}

} // namespace covidx
