#include "covidx/date.hpp"

#include <charconv>
#include <cstdio>

namespace covidx {

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

Date::Date(int year, unsigned month, unsigned day)
    : days_(std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}}) {}

std::optional<Date> Date::parse(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    if (text.size() < 10) return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ' && text[10] != '"') return std::nullopt;
    if (text[4] != '-' || text[7] != '-') return std::nullopt;

    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
        !parse_uint(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

int Date::year() const { return int(std::chrono::year_month_day{days_}.year()); }
unsigned Date::month() const { return unsigned(std::chrono::year_month_day{days_}.month()); }
unsigned Date::day() const { return unsigned(std::chrono::year_month_day{days_}.day()); }

} // namespace covidx
