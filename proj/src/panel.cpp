#include "covidx/panel.hpp"

#include <set>

#include "covidx/error.hpp"

namespace covidx {

namespace {

Eigen::Index find_name(const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<Eigen::Index>(i);
    }
    return -1;
}

} // namespace

Eigen::Index Panel::column_index(const std::string& name) const { return find_name(variables, name); }

Eigen::Index CleanPanel::column_index(const std::string& name) const {
    return find_name(variables, name);
}

std::size_t Panel::missing_count() const {
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) n += is_missing(values.data()[i]) ? 1 : 0;
    return n;
}

void Panel::validate() const {
    if (static_cast<Eigen::Index>(dates.size()) != values.rows()) {
        throw DataError("panel has " + std::to_string(dates.size()) + " dates but " +
                        std::to_string(values.rows()) + " value rows");
    }
    if (static_cast<Eigen::Index>(variables.size()) != values.cols()) {
        throw DataError("panel has " + std::to_string(variables.size()) + " variables but " +
                        std::to_string(values.cols()) + " value columns");
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw DataError("panel dates not strictly increasing at " + dates[i].iso());
        }
    }
    std::set<std::string> seen;
    for (const auto& v : variables) {
        if (v.empty()) throw DataError("panel has an empty variable name");
        if (!seen.insert(v).second) throw DataError("duplicate variable name: " + v);
    }
}

} // namespace covidx
