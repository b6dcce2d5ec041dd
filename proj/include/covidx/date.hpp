#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace covidx {

/// Calendar date at daily granularity.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`, ignoring any trailing time-of-day (`T18:00:00`, ` 17:00`).
    static std::optional<Date> parse(std::string_view text);

    std::string iso() const;

    int year() const;
    unsigned month() const;
    unsigned day() const;

    constexpr std::chrono::sys_days sys_days() const { return days_; }
    Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

} // namespace covidx
