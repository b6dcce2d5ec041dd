#include "covidx/table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "covidx/error.hpp"
#include "covidx/ingestion.hpp"

namespace covidx {

std::string format_number(double value, int significant_digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
    return buf;
}

OutputFormat parse_output_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("output format must be 'csv' or 'json', got '" + name + "'");
}

void OutputTable::add_column(std::string name, std::vector<double> values) {
    if (values.size() != dates.size()) {
        throw Error("output column '" + name + "' has " + std::to_string(values.size()) +
                    " values for " + std::to_string(dates.size()) + " dates");
    }
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

void OutputTable::write_csv(std::ostream& out) const {
    out << "date";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < dates.size(); ++i) {
        out << dates[i].iso();
        for (const auto& col : columns) {
            out << ',';
            if (!std::isnan(col[i])) out << format_number(col[i]);
        }
        out << '\n';
    }
}

void OutputTable::write_json(std::ostream& out) const {
    // Numbers pass through the 12-digit text form so CSV and JSON carry the same values.
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    auto& date_arr = doc["date"] = nlohmann::ordered_json::array();
    for (const auto& d : dates) date_arr.push_back(d.iso());
    for (std::size_t c = 0; c < names.size(); ++c) {
        auto arr = nlohmann::ordered_json::array();
        for (double v : columns[c]) {
            if (std::isnan(v)) {
                arr.push_back(nullptr);
            } else {
                arr.push_back(std::stod(format_number(v)));
            }
        }
        doc[names[c]] = std::move(arr);
    }
    out << doc.dump(1) << '\n';
}

void OutputTable::write(const std::filesystem::path& path, OutputFormat format) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path.string());
    if (format == OutputFormat::csv) {
        write_csv(out);
    } else {
        write_json(out);
    }
    if (!out) throw DataError("failed writing output file: " + path.string());
}

OutputTable read_output_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open table: " + path.string());
    OutputTable table;
    if (in.peek() == '{') {
        nlohmann::ordered_json ordered;
        try {
            in >> ordered;
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("malformed JSON table: ") + e.what());
        }
        if (!ordered.contains("date")) throw SchemaError("date");
        for (const auto& d : ordered["date"]) {
            auto parsed = Date::parse(d.get<std::string>());
            if (!parsed) throw DataError("bad date in JSON table");
            table.dates.push_back(*parsed);
        }
        for (const auto& [key, arr] : ordered.items()) {
            if (key == "date") continue;
            std::vector<double> col;
            for (const auto& v : arr) col.push_back(v.is_null() ? kMissing : v.get<double>());
            table.add_column(key, std::move(col));
        }
        return table;
    }
    const Panel p = parse_panel_csv(in, "date");
    table.dates = p.dates;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        std::vector<double> col(p.values.col(j).data(), p.values.col(j).data() + p.rows());
        table.add_column(p.variables[static_cast<std::size_t>(j)], std::move(col));
    }
    return table;
}

} // namespace covidx
