#include "probesense/core/time.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace probesense {

namespace {

// Days since 1970-01-01 -> civil date (proleptic Gregorian).
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400 + (m <= 2 ? 1 : 0);
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2 ? 1 : 0;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

Clock system_clock() {
    return [] {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    };
}

EpochMs seconds_to_ms(double s) { return static_cast<EpochMs>(std::llround(s * 1000.0)); }

std::string utc_date(EpochMs ts) {
    int y;
    unsigned m, d;
    civil_from_days(floor_div(ts, 86'400'000), y, m, d);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
}

EpochMs utc_day_start(const std::string& date) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (date.size() != 10 || std::sscanf(date.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3 || m < 1 ||
        m > 12 || d < 1 || d > 31) {
        throw std::invalid_argument("not a YYYY-MM-DD date: " + date);
    }
    return days_from_civil(y, m, d) * 86'400'000;
}

EpochMs align_up(EpochMs ts, EpochMs step) { return -floor_div(-ts, step) * step; }

EpochMs align_down(EpochMs ts, EpochMs step) { return floor_div(ts, step) * step; }

}  // namespace probesense
