#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>

namespace probesense {

/// UTC wall time in epoch milliseconds.
using EpochMs = std::int64_t;

/// Service time source. Simulations inject a virtual clock, services in
/// production use system_clock().
using Clock = std::function<EpochMs()>;

Clock system_clock();

constexpr EpochMs seconds_to_ms(std::int64_t s) { return s * 1000; }
EpochMs seconds_to_ms(double s);

/// "YYYY-MM-DD" of the UTC day containing ts.
std::string utc_date(EpochMs ts);

/// Epoch ms of 00:00:00 UTC on the given "YYYY-MM-DD" day. Throws on bad input.
EpochMs utc_day_start(const std::string& date);

/// Smallest multiple of step that is >= ts.
EpochMs align_up(EpochMs ts, EpochMs step);
/// Largest multiple of step that is <= ts.
EpochMs align_down(EpochMs ts, EpochMs step);

/// Settable clock for simulations and tests.
class ManualClock {
public:
    explicit ManualClock(EpochMs start = 0) : now_(start) {}

    EpochMs now() const { return now_.load(); }
    void set(EpochMs t) { now_.store(t); }
    void advance(EpochMs dt) { now_.fetch_add(dt); }

    Clock as_clock() const {
        return [this] { return now(); };
    }

private:
    std::atomic<EpochMs> now_;
};

}  // namespace probesense
