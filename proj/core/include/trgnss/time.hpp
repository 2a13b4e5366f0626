#pragma once

#include <compare>
#include <cstdint>
#include <optional>

namespace trgnss {

/// Continuous GPS time as (week, seconds of week). No leap seconds anywhere.
class GpsTime {
 public:
  GpsTime() = default;
  /// Normalizes tow into [0, 604800) by carrying whole weeks.
  GpsTime(int week, double tow);

  int week() const noexcept { return week_; }
  double tow() const noexcept { return tow_; }

  /// Seconds since the GPS epoch; loses sub-nanosecond precision, use for keys only.
  double total_seconds() const noexcept;
  /// Integer microseconds since the GPS epoch, for exact-match lookups of 1 Hz style data.
  std::int64_t microseconds() const noexcept;

  GpsTime operator+(double seconds) const { return GpsTime(week_, tow_ + seconds); }
  GpsTime operator-(double seconds) const { return GpsTime(week_, tow_ - seconds); }

  friend double operator-(const GpsTime& a, const GpsTime& b) noexcept {
    return static_cast<double>(a.week_ - b.week_) * 604800.0 + (a.tow_ - b.tow_);
  }
  friend bool operator==(const GpsTime& a, const GpsTime& b) noexcept = default;
  friend std::partial_ordering operator<=>(const GpsTime& a, const GpsTime& b) noexcept {
    if (a.week_ != b.week_) return a.week_ <=> b.week_;
    return a.tow_ <=> b.tow_;
  }

 private:
  int week_ = 0;
  double tow_ = 0.0;
};

/// GPS-timescale calendar date (no leap-second offset applied).
struct CalendarTime {
  int year = 1980;
  int month = 1;
  int day = 6;
  int hour = 0;
  int minute = 0;
  double second = 0.0;
};

CalendarTime to_calendar(const GpsTime& t);
/// Returns nullopt for fields outside their calendar ranges or dates before the GPS epoch.
std::optional<GpsTime> from_calendar(const CalendarTime& c);

}  // namespace trgnss
