#include "trgnss/time.hpp"

#include <chrono>

#include <cmath>

#include "trgnss/constants.hpp"

namespace trgnss {

GpsTime::GpsTime(int week, double tow) : week_(week), tow_(tow) {
  if (tow_ < 0.0 || tow_ >= kSecondsPerWeek) {
    const double weeks = std::floor(tow_ / kSecondsPerWeek);
    week_ += static_cast<int>(weeks);
    tow_ -= weeks * kSecondsPerWeek;
    if (tow_ >= kSecondsPerWeek) {  // rounding at the upper edge
      tow_ -= kSecondsPerWeek;
      ++week_;
    }
  }
}

double GpsTime::total_seconds() const noexcept {
  return static_cast<double>(week_) * kSecondsPerWeek + tow_;
}

std::int64_t GpsTime::microseconds() const noexcept {
  return static_cast<std::int64_t>(week_) * 604800000000LL +
         static_cast<std::int64_t>(std::llround(tow_ * 1e6));
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2));
}

const std::int64_t kGpsEpochDays = days_from_civil(1980, 1, 6);

}  // namespace

CalendarTime to_calendar(const GpsTime& t) {
  // Work in 100 ns units so the seconds field never prints as 60.
  std::int64_t units = std::llround(t.tow() * 1e7);
  constexpr std::int64_t kDay = 864000000000LL;
  std::int64_t days = kGpsEpochDays + static_cast<std::int64_t>(t.week()) * 7 + units / kDay;
  units %= kDay;
  CalendarTime c;
  civil_from_days(days, c.year, c.month, c.day);
  c.hour = static_cast<int>(units / 36000000000LL);
  units %= 36000000000LL;
  c.minute = static_cast<int>(units / 600000000LL);
  units %= 600000000LL;
  c.second = static_cast<double>(units) * 1e-7;
  return c;
}

std::optional<GpsTime> from_calendar(const CalendarTime& c) {
  if (c.year < 1980 || c.year > 2200 || c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31 || c.hour < 0 ||
      c.hour > 23 || c.minute < 0 || c.minute > 59 || !(c.second >= 0.0 && c.second < 61.0)) {
    return std::nullopt;
  }
  if (!std::chrono::year_month_day{std::chrono::year{c.year}, std::chrono::month{static_cast<unsigned>(c.month)},
                                    std::chrono::day{static_cast<unsigned>(c.day)}}
           .ok()) {
    return std::nullopt;
  }
  const std::int64_t days = days_from_civil(c.year, static_cast<unsigned>(c.month), static_cast<unsigned>(c.day)) -
                            kGpsEpochDays;
  if (days < 0) return std::nullopt;
  const int week = static_cast<int>(days / 7);
  const double tow = static_cast<double>(days % 7) * kSecondsPerDay + c.hour * 3600.0 + c.minute * 60.0 + c.second;
  return GpsTime(week, tow);
}

}  // namespace trgnss
