#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace linetherm {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Normalize an azimuth to [0, 360).
inline double wrap_azimuth(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0.0) a += 360.0;
    return a;
}

/// Fold an azimuth onto the undirected line axis [0, 180).
inline double fold_axis(double deg) {
    double a = wrap_azimuth(deg);
    return a >= 180.0 ? a - 180.0 : a;
}

/// Smallest angular separation between two azimuths, in [0, 180].
inline double angular_distance(double a_deg, double b_deg) {
    double d = std::fabs(wrap_azimuth(a_deg) - wrap_azimuth(b_deg));
    return d > 180.0 ? 360.0 - d : d;
}

/// Acute angle in [0, 90] between a wind azimuth and an undirected line axis.
inline double acute_axis_angle(double wind_deg, double line_azimuth_deg) {
    double d = angular_distance(wind_deg, line_azimuth_deg);
    return d > 90.0 ? 180.0 - d : d;
}

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : InputError {
    using InputError::InputError;
};

struct SchemaError : InputError {
    using InputError::InputError;
};

/// Number of worker threads to use; 0 means "all available".
unsigned resolve_threads(unsigned requested);

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
/// worker; each index is processed exactly once, so results are deterministic
/// as long as fn(i) only writes to slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

/// Formats a double with 6 significant digits (stable CSV output).
std::string format_sig6(double v);

/// Seconds since the Unix epoch for an ISO-8601 UTC timestamp
/// ("YYYY-MM-DDThh:mm:ss" with optional trailing 'Z').
std::int64_t parse_iso8601_utc(const std::string& text);

/// Inverse of parse_iso8601_utc, always with trailing 'Z'.
std::string format_iso8601_utc(std::int64_t epoch_s);

/// Day of year [1, 366] for a Unix timestamp.
int day_of_year_utc(std::int64_t epoch_s);

/// Hours since UTC midnight, [0, 24).
double utc_hour(std::int64_t epoch_s);

}  // namespace linetherm
