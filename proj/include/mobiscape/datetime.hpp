#ifndef MOBISCAPE_DATETIME_HPP
#define MOBISCAPE_DATETIME_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mobiscape {

// Local civil time. Input files carry local wall-clock timestamps and every
// event window is a wall-clock window, so no timezone handling is needed.
struct DateTime {
    std::int32_t day_number = 0;   // days since 1970-01-01
    std::int32_t sec_of_day = 0;   // [0, 86400)

    auto operator<=>(const DateTime&) const = default;

    int hour() const { return sec_of_day / 3600; }
    // ISO: 1 = Monday ... 7 = Sunday
    int iso_weekday() const;
    bool is_weekday() const { return iso_weekday() <= 5; }
};

// Strict `YYYY-MM-DDTHH:MM:SS` (a space is accepted in place of 'T').
std::optional<DateTime> parse_datetime(std::string_view s);
std::string format_datetime(const DateTime& dt);

DateTime make_datetime(int year, int month, int day, int hour = 0, int minute = 0,
                       int second = 0);

}  // namespace mobiscape

#endif
