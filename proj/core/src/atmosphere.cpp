#include "trgnss/atmosphere.hpp"

#include <algorithm>
#include <cmath>

#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"

namespace trgnss {

bool KlobucharParams::is_zero() const noexcept {
  return std::all_of(alpha.begin(), alpha.end(), [](double v) { return v == 0.0; }) &&
         std::all_of(beta.begin(), beta.end(), [](double v) { return v == 0.0; });
}

void TropoModel::validate() const {
  if (!(pressure >= 500.0 && pressure <= 1200.0)) {
    throw Error(ErrorCode::InvalidConfig, "tropo pressure must be within [500, 1200] hPa");
  }
  if (!(temperature >= 180.0 && temperature <= 340.0)) {
    throw Error(ErrorCode::InvalidConfig, "tropo temperature must be within [180, 340] K");
  }
  if (!(humidity >= 0.0 && humidity <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "tropo humidity must be within [0, 1]");
  }
}

double klobuchar_delay(const KlobucharParams& params, const GpsTime& time,
                       const GeodeticPosition& user, double elevation, double azimuth) {
  if (elevation < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "klobuchar_delay requires a non-negative elevation");
  }
  // Everything below is in semicircles.
  const double el = elevation / kPi;
  const double psi = 0.0137 / (el + 0.11) - 0.022;

  double phi_i = user.latitude / kPi + psi * std::cos(azimuth);
  phi_i = std::clamp(phi_i, -0.416, 0.416);
  const double lambda_i = user.longitude / kPi + psi * std::sin(azimuth) / std::cos(phi_i * kPi);
  const double phi_m = phi_i + 0.064 * std::cos((lambda_i - 1.617) * kPi);

  double t = 43200.0 * lambda_i + time.tow();
  t -= std::floor(t / kSecondsPerDay) * kSecondsPerDay;

  const double obliquity = 1.0 + 16.0 * std::pow(0.53 - el, 3);

  double amplitude = 0.0, period = 0.0, power = 1.0;
  for (int n = 0; n < 4; ++n) {
    amplitude += params.alpha[n] * power;
    period += params.beta[n] * power;
    power *= phi_m;
  }
  amplitude = std::max(amplitude, 0.0);
  period = std::max(period, 72000.0);

  const double x = 2.0 * kPi * (t - 50400.0) / period;
  double delay_s = 5e-9;
  if (std::abs(x) < 1.57) {
    delay_s += amplitude * (1.0 - x * x / 2.0 + x * x * x * x / 24.0);
  }
  return kSpeedOfLight * obliquity * delay_s;
}

double saastamoinen_delay(const TropoModel& model, const GeodeticPosition& user, double elevation) {
  if (elevation < 1.0 * kDegToRad) {
    throw Error(ErrorCode::ElevationTooLow, "saastamoinen_delay requires elevation >= 1 deg");
  }
  // Outside the standard-atmosphere range (e.g. an SPP iterate far from the surface).
  if (user.height > 1e4 || !std::isfinite(user.height)) return 0.0;
  const double h = std::max(user.height, 0.0);
  const double pressure = model.pressure * std::pow(1.0 - 2.2557e-5 * h, 5.2568);
  const double temperature = model.temperature - 6.5e-3 * h;
  const double vapour = 6.108 * model.humidity *
                        std::exp((17.15 * temperature - 4684.0) / (temperature - 38.45));
  const double mapping = 1.0 / std::sin(elevation);
  const double hydrostatic =
      0.0022768 * pressure / (1.0 - 0.00266 * std::cos(2.0 * user.latitude) - 0.00028 * h / 1e3);
  const double wet = 0.002277 * (1255.0 / temperature + 0.05) * vapour;
  return (hydrostatic + wet) * mapping;
}

KlobucharParams default_klobuchar() {
  KlobucharParams p;
  p.alpha = {0.1118e-7, -0.7451e-8, -0.5961e-7, 0.1192e-6};
  p.beta = {0.1167e6, -0.2294e6, -0.1311e6, 0.1049e7};
  return p;
}

}  // namespace trgnss
