#include "mobiscape/datetime.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace mobiscape {

namespace {

bool parse_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    const char* first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc() && ptr == first + len;
}

}  // namespace

int DateTime::iso_weekday() const {
    using namespace std::chrono;
    weekday wd{sys_days{days{day_number}}};
    return static_cast<int>(wd.iso_encoding());
}

std::optional<DateTime> parse_datetime(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS
    if (s.size() != 19) return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        return std::nullopt;
    int y, mo, d, h, mi, sec;
    if (!parse_int(s, 0, 4, y) || !parse_int(s, 5, 2, mo) || !parse_int(s, 8, 2, d) ||
        !parse_int(s, 11, 2, h) || !parse_int(s, 14, 2, mi) || !parse_int(s, 17, 2, sec))
        return std::nullopt;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 59) return std::nullopt;
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                       day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    DateTime dt;
    dt.day_number = static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count());
    dt.sec_of_day = h * 3600 + mi * 60 + sec;
    return dt;
}

std::string format_datetime(const DateTime& dt) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{dt.day_number}}};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), dt.sec_of_day / 3600,
                  (dt.sec_of_day / 60) % 60, dt.sec_of_day % 60);
    return buf;
}

DateTime make_datetime(int year, int month, int day, int hour, int minute, int second) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                       std::chrono::day{static_cast<unsigned>(day)}};
    DateTime dt;
    dt.day_number = static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count());
    dt.sec_of_day = hour * 3600 + minute * 60 + second;
    return dt;
}

}  // namespace mobiscape
