#pragma once

namespace trgnss {

inline constexpr double kSpeedOfLight = 299792458.0;          // m/s
inline constexpr double kEarthRotationRate = 7.2921151467e-5;  // rad/s
inline constexpr double kEarthGm = 3.986004418e14;             // m^3/s^2
inline constexpr double kWgs84SemiMajorAxis = 6378137.0;       // m
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;
inline constexpr double kSecondsPerWeek = 604800.0;
inline constexpr double kSecondsPerDay = 86400.0;

inline constexpr double kFreqGpsL1 = 1575.42e6;
inline constexpr double kFreqGalE1 = 1575.42e6;
inline constexpr double kFreqBdsB1I = 1561.098e6;
inline constexpr double kFreqGloG1Base = 1602.0e6;
inline constexpr double kFreqGloG1Step = 0.5625e6;

}  // namespace trgnss
