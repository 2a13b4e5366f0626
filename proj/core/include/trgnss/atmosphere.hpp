#pragma once

#include <array>

#include "trgnss/time.hpp"
#include "trgnss/types.hpp"

namespace trgnss {

/// Broadcast ionosphere coefficients (ICD-GPS-200 units: s, s/semicircle, ...).
struct KlobucharParams {
  std::array<double, 4> alpha{};
  std::array<double, 4> beta{};

  bool is_zero() const noexcept;
};

/// Published broadcast coefficients, used as the default everywhere a model is needed.
KlobucharParams default_klobuchar();

/// Sea-level meteorology for the Saastamoinen model; scaled to the user height internally.
struct TropoModel {
  double pressure = 1013.25;    // hPa
  double temperature = 288.15;  // K
  double humidity = 0.5;        // fraction

  /// Throws InvalidConfig when outside the supported meteorological ranges.
  void validate() const;
};

/// Slant ionospheric group delay in meters. Requires elevation >= 0.
double klobuchar_delay(const KlobucharParams& params, const GpsTime& time,
                       const GeodeticPosition& user, double elevation, double azimuth);

/// Slant tropospheric delay in meters with 1/sin(el) mapping.
/// Throws ElevationTooLow below 1 degree. Zero above 10 km user height.
double saastamoinen_delay(const TropoModel& model, const GeodeticPosition& user, double elevation);

}  // namespace trgnss
