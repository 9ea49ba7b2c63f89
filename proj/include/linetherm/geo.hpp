#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linetherm/physics.hpp"

namespace linetherm {

struct LatLon {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

/// Great-circle distance in km (spherical earth).
double great_circle_km(const LatLon& a, const LatLon& b);

/// Initial bearing from a to b, degrees clockwise from north.
double bearing_deg(const LatLon& a, const LatLon& b);

struct LineRoute {
    std::string line_id;
    std::vector<LatLon> waypoints;
    std::string conductor_name;
    double base_current_a = 0.0;
};

struct Segment {
    std::string segment_id;
    std::string line_id;
    LatLon midpoint;
    double azimuth_deg = 0.0;  // undirected axis, [0, 180)
    double length_km = 0.0;
    std::string conductor_name;
    double base_current_a = 0.0;
    std::optional<int> cluster_id;
};

/// Splits each polyline leg into ceil(len/max) equal pieces.
/// Throws InputError on a zero-length route.
std::vector<Segment> segment_line(const LineRoute& route,
                                  double max_segment_length_km);

struct GridSpec {
    double lat0 = 0.0;  // first row center
    double lon0 = 0.0;  // first column center
    double dlat = 0.0;
    double dlon = 0.0;
    int nlat = 0;
    int nlon = 0;

    std::size_t index(int ilat, int ilon) const {
        return static_cast<std::size_t>(ilat) * nlon + ilon;
    }
};

/// One gridded weather field set at one timestamp. Cell vectors are row-major
/// by latitude index.
struct WeatherSnapshot {
    std::int64_t timestamp_s = 0;
    std::string timestamp_iso;
    GridSpec grid;
    std::vector<double> temp_c;
    std::vector<double> wind_u_ms;   // eastward
    std::vector<double> wind_v_ms;   // northward
    std::vector<double> solar_wm2;
    std::vector<double> sun_alt_deg;
    std::vector<double> sun_az_deg;
};

struct WeatherSeries {
    std::vector<WeatherSnapshot> snapshots;
    std::vector<std::string> warnings;

    double span_s() const {
        return snapshots.size() < 2
                       ? 0.0
                       : static_cast<double>(snapshots.back().timestamp_s -
                                             snapshots.front().timestamp_s);
    }
};

enum class InterpolationMode { Nearest, Bilinear };

/// Environment at a point. Nearest clamps to the grid edge; bilinear throws
/// InputError for points outside the cell-center hull. Wind speed/direction
/// are derived from the interpolated u/v components (meteorological "from"
/// convention).
EnvironmentSample sample_environment(const WeatherSnapshot& snap,
                                     const LatLon& point,
                                     InterpolationMode mode);

/// Loads the weather CSV (header: timestamp_iso8601, lat, lon, temp_c,
/// wind_u_ms, wind_v_ms, solar_wm2, sun_alt_deg, sun_az_deg). The sun columns
/// may be omitted, in which case positions are computed from latitude,
/// longitude and timestamp. Snapshots are returned time-sorted; out-of-order
/// input is accepted with a warning, duplicate timestamps are an error.
WeatherSeries load_weather_series(const std::string& path);

void save_weather_series(const WeatherSeries& series, const std::string& path);

struct Network {
    std::vector<LineRoute> lines;
};

/// JSON network file: {schema_version, lines: [{id, waypoints: [[lat, lon]...],
/// conductor_name, base_current_amps}]}.
Network load_network(const std::string& path);
void save_network(const Network& network, const std::string& path);

/// Segments every line of the network.
std::vector<Segment> segment_network(const Network& network,
                                     double max_segment_length_km);

}  // namespace linetherm
