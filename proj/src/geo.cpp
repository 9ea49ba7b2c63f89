#include "linetherm/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "linetherm/util.hpp"

namespace linetherm {

namespace {
constexpr double kEarthRadiusKm = 6371.0088;
}

double great_circle_km(const LatLon& a, const LatLon& b) {
    double lat1 = deg_to_rad(a.lat_deg), lat2 = deg_to_rad(b.lat_deg);
    double dlat = lat2 - lat1;
    double dlon = deg_to_rad(b.lon_deg - a.lon_deg);
    double s = std::sin(dlat / 2.0), t = std::sin(dlon / 2.0);
    double h = s * s + std::cos(lat1) * std::cos(lat2) * t * t;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double bearing_deg(const LatLon& a, const LatLon& b) {
    double lat1 = deg_to_rad(a.lat_deg), lat2 = deg_to_rad(b.lat_deg);
    double dlon = deg_to_rad(b.lon_deg - a.lon_deg);
    double y = std::sin(dlon) * std::cos(lat2);
    double x = std::cos(lat1) * std::sin(lat2) -
               std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
    return wrap_azimuth(rad_to_deg(std::atan2(y, x)));
}

std::vector<Segment> segment_line(const LineRoute& route,
                                  double max_segment_length_km) {
    if (!(max_segment_length_km > 0.0))
        throw InputError("max segment length must be > 0");
    if (route.waypoints.size() < 2)
        throw InputError("route '" + route.line_id + "' needs >= 2 waypoints");

    std::vector<Segment> out;
    int counter = 0;
    double total_km = 0.0;
    for (std::size_t leg = 0; leg + 1 < route.waypoints.size(); ++leg) {
        const LatLon& a = route.waypoints[leg];
        const LatLon& b = route.waypoints[leg + 1];
        double len = great_circle_km(a, b);
        total_km += len;
        if (len <= 0.0) continue;
        int pieces = static_cast<int>(std::ceil(len / max_segment_length_km));
        double axis = fold_axis(bearing_deg(a, b));
        for (int i = 0; i < pieces; ++i) {
            // Midpoint by linear interpolation along the leg; adequate for
            // legs far shorter than the earth radius.
            double f = (i + 0.5) / pieces;
            Segment s;
            s.segment_id = route.line_id + "#" + std::to_string(counter++);
            s.line_id = route.line_id;
            s.midpoint = {a.lat_deg + f * (b.lat_deg - a.lat_deg),
                          a.lon_deg + f * (b.lon_deg - a.lon_deg)};
            s.azimuth_deg = axis;
            s.length_km = len / pieces;
            s.conductor_name = route.conductor_name;
            s.base_current_a = route.base_current_a;
            out.push_back(std::move(s));
        }
    }
    if (total_km <= 0.0)
        throw InputError("route '" + route.line_id + "' has zero length");
    return out;
}

namespace {

double bilerp(const std::vector<double>& field, const GridSpec& g, int i0,
              int j0, double fi, double fj) {
    double v00 = field[g.index(i0, j0)];
    double v01 = field[g.index(i0, j0 + 1)];
    double v10 = field[g.index(i0 + 1, j0)];
    double v11 = field[g.index(i0 + 1, j0 + 1)];
    return v00 * (1 - fi) * (1 - fj) + v01 * (1 - fi) * fj +
           v10 * fi * (1 - fj) + v11 * fi * fj;
}

}  // namespace

EnvironmentSample sample_environment(const WeatherSnapshot& snap,
                                     const LatLon& point,
                                     InterpolationMode mode) {
    const GridSpec& g = snap.grid;
    double fi = (point.lat_deg - g.lat0) / g.dlat;
    double fj = (point.lon_deg - g.lon0) / g.dlon;

    double temp, u, v, solar, alt, az;
    if (mode == InterpolationMode::Nearest) {
        int i = std::clamp(static_cast<int>(std::lround(fi)), 0, g.nlat - 1);
        int j = std::clamp(static_cast<int>(std::lround(fj)), 0, g.nlon - 1);
        std::size_t idx = g.index(i, j);
        temp = snap.temp_c[idx];
        u = snap.wind_u_ms[idx];
        v = snap.wind_v_ms[idx];
        solar = snap.solar_wm2[idx];
        alt = snap.sun_alt_deg[idx];
        az = snap.sun_az_deg[idx];
    } else {
        if (fi < 0.0 || fj < 0.0 || fi > g.nlat - 1 || fj > g.nlon - 1)
            throw InputError("bilinear sample outside weather grid");
        int i0 = std::min(static_cast<int>(fi), g.nlat - 2);
        int j0 = std::min(static_cast<int>(fj), g.nlon - 2);
        if (g.nlat == 1) i0 = 0;
        if (g.nlon == 1) j0 = 0;
        double wi = std::clamp(fi - i0, 0.0, 1.0);
        double wj = std::clamp(fj - j0, 0.0, 1.0);
        temp = bilerp(snap.temp_c, g, i0, j0, wi, wj);
        u = bilerp(snap.wind_u_ms, g, i0, j0, wi, wj);
        v = bilerp(snap.wind_v_ms, g, i0, j0, wi, wj);
        solar = bilerp(snap.solar_wm2, g, i0, j0, wi, wj);
        alt = bilerp(snap.sun_alt_deg, g, i0, j0, wi, wj);
        az = bilerp(snap.sun_az_deg, g, i0, j0, wi, wj);
    }

    EnvironmentSample env;
    env.ambient_c = temp;
    env.wind_speed_ms = std::hypot(u, v);
    // Direction the wind blows from: the (-u, -v) vector's azimuth.
    env.wind_from_deg =
            env.wind_speed_ms > 0.0
                    ? wrap_azimuth(rad_to_deg(std::atan2(-u, -v)))
                    : 0.0;
    env.solar_wm2 = solar;
    env.sun_altitude_deg = alt;
    env.sun_azimuth_deg = az;
    env.elevation_m = 0.0;
    return env;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        // trim
        std::size_t b = cur.find_first_not_of(" \t\r");
        std::size_t e = cur.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, int line_no, const char* field) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("weather CSV line " + std::to_string(line_no) +
                         ": bad value '" + s + "' for " + field);
    }
}

struct RawRow {
    std::int64_t t;
    double lat, lon, temp, u, v, solar;
    double alt, az;
    bool has_sun;
};

// Reconstructs a regular axis from the distinct coordinate values.
void infer_axis(const std::set<double>& values, const char* what, double& origin,
                double& spacing, int& count) {
    std::vector<double> v(values.begin(), values.end());
    count = static_cast<int>(v.size());
    origin = v.front();
    spacing = count > 1 ? (v.back() - v.front()) / (count - 1) : 1.0;
    // Tolerance covers coordinates rounded to 6 significant digits on disk.
    double tol = std::max(1e-3 * std::fabs(spacing), 1e-7);
    for (int i = 1; i < count; ++i) {
        double expected = origin + i * spacing;
        if (std::fabs(v[i] - expected) > tol)
            throw SchemaError(std::string("weather grid is not regular in ") +
                              what);
    }
}

}  // namespace

WeatherSeries load_weather_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open weather file: " + path);

    std::string line;
    int line_no = 0;
    // Skip comment/blank lines before the header.
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] != '#') break;
        line.clear();
    }
    if (line.empty()) throw ParseError("weather CSV " + path + ": no header row");

    std::vector<std::string> header = split_csv_line(line);
    auto col = [&](const char* name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1
                                  : static_cast<int>(it - header.begin());
    };
    int c_time = col("timestamp_iso8601");
    int c_lat = col("lat");
    int c_lon = col("lon");
    int c_temp = col("temp_c");
    int c_u = col("wind_u_ms");
    int c_v = col("wind_v_ms");
    int c_solar = col("solar_wm2");
    int c_alt = col("sun_alt_deg");
    int c_az = col("sun_az_deg");
    for (auto [idx, name] : {std::pair{c_time, "timestamp_iso8601"},
                             {c_lat, "lat"},
                             {c_lon, "lon"},
                             {c_temp, "temp_c"},
                             {c_u, "wind_u_ms"},
                             {c_v, "wind_v_ms"},
                             {c_solar, "solar_wm2"}}) {
        if (idx < 0)
            throw SchemaError("weather CSV " + path + ": missing column '" +
                              name + "'");
    }
    bool has_sun = c_alt >= 0 && c_az >= 0;

    std::map<std::int64_t, std::vector<RawRow>> by_time;
    std::vector<std::int64_t> arrival_order;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f = split_csv_line(line);
        if (static_cast<int>(f.size()) < static_cast<int>(header.size()))
            throw ParseError("weather CSV line " + std::to_string(line_no) +
                             ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(f.size()));
        RawRow r;
        r.t = parse_iso8601_utc(f[c_time]);
        r.lat = parse_double(f[c_lat], line_no, "lat");
        r.lon = parse_double(f[c_lon], line_no, "lon");
        r.temp = parse_double(f[c_temp], line_no, "temp_c");
        r.u = parse_double(f[c_u], line_no, "wind_u_ms");
        r.v = parse_double(f[c_v], line_no, "wind_v_ms");
        r.solar = parse_double(f[c_solar], line_no, "solar_wm2");
        r.has_sun = has_sun;
        if (has_sun) {
            r.alt = parse_double(f[c_alt], line_no, "sun_alt_deg");
            r.az = parse_double(f[c_az], line_no, "sun_az_deg");
        } else {
            SolarPosition sp = solar_geometry(
                    r.lat, day_of_year_utc(r.t),
                    std::fmod(utc_hour(r.t) + r.lon / 15.0 + 24.0, 24.0));
            r.alt = sp.altitude_deg;
            r.az = sp.azimuth_deg;
        }
        if (r.u * 0.0 != 0.0 || r.v * 0.0 != 0.0)
            throw ParseError("weather CSV line " + std::to_string(line_no) +
                             ": non-finite wind");
        if (by_time.find(r.t) == by_time.end()) arrival_order.push_back(r.t);
        by_time[r.t].push_back(r);
    }
    if (by_time.empty())
        throw ParseError("weather CSV " + path + ": no data rows");

    WeatherSeries series;
    if (!std::is_sorted(arrival_order.begin(), arrival_order.end()))
        series.warnings.push_back(
                "snapshots arrived out of timestamp order; sorted on load");

    for (auto& [t, rows] : by_time) {
        std::set<double> lats, lons;
        for (const auto& r : rows) {
            lats.insert(r.lat);
            lons.insert(r.lon);
        }
        WeatherSnapshot snap;
        snap.timestamp_s = t;
        snap.timestamp_iso = format_iso8601_utc(t);
        infer_axis(lats, "latitude", snap.grid.lat0, snap.grid.dlat,
                   snap.grid.nlat);
        infer_axis(lons, "longitude", snap.grid.lon0, snap.grid.dlon,
                   snap.grid.nlon);
        std::size_t n = static_cast<std::size_t>(snap.grid.nlat) * snap.grid.nlon;
        if (rows.size() != n)
            throw SchemaError("weather snapshot " + snap.timestamp_iso + ": " +
                              std::to_string(rows.size()) + " cells for a " +
                              std::to_string(snap.grid.nlat) + "x" +
                              std::to_string(snap.grid.nlon) + " grid");
        auto init = [n](std::vector<double>& v) { v.assign(n, 0.0); };
        init(snap.temp_c);
        init(snap.wind_u_ms);
        init(snap.wind_v_ms);
        init(snap.solar_wm2);
        init(snap.sun_alt_deg);
        init(snap.sun_az_deg);
        std::vector<bool> seen(n, false);
        for (const auto& r : rows) {
            int i = static_cast<int>(
                    std::lround((r.lat - snap.grid.lat0) / snap.grid.dlat));
            int j = static_cast<int>(
                    std::lround((r.lon - snap.grid.lon0) / snap.grid.dlon));
            std::size_t idx = snap.grid.index(i, j);
            if (seen[idx])
                throw SchemaError("weather snapshot " + snap.timestamp_iso +
                                  ": duplicate cell at lat " +
                                  std::to_string(r.lat) + ", lon " +
                                  std::to_string(r.lon));
            seen[idx] = true;
            snap.temp_c[idx] = r.temp;
            snap.wind_u_ms[idx] = r.u;
            snap.wind_v_ms[idx] = r.v;
            snap.solar_wm2[idx] = r.solar;
            snap.sun_alt_deg[idx] = r.alt;
            snap.sun_az_deg[idx] = r.az;
        }
        series.snapshots.push_back(std::move(snap));
    }
    return series;
}

void save_weather_series(const WeatherSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write weather file: " + path);
    out << "# schema_version=1\n";
    out << "timestamp_iso8601,lat,lon,temp_c,wind_u_ms,wind_v_ms,solar_wm2,"
           "sun_alt_deg,sun_az_deg\n";
    for (const auto& snap : series.snapshots) {
        for (int i = 0; i < snap.grid.nlat; ++i) {
            for (int j = 0; j < snap.grid.nlon; ++j) {
                std::size_t idx = snap.grid.index(i, j);
                out << snap.timestamp_iso << ','
                    << format_sig6(snap.grid.lat0 + i * snap.grid.dlat) << ','
                    << format_sig6(snap.grid.lon0 + j * snap.grid.dlon) << ','
                    << format_sig6(snap.temp_c[idx]) << ','
                    << format_sig6(snap.wind_u_ms[idx]) << ','
                    << format_sig6(snap.wind_v_ms[idx]) << ','
                    << format_sig6(snap.solar_wm2[idx]) << ','
                    << format_sig6(snap.sun_alt_deg[idx]) << ','
                    << format_sig6(snap.sun_az_deg[idx]) << '\n';
            }
        }
    }
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open network file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("network " + path + ": " + e.what());
    }
    if (!doc.contains("lines") || !doc["lines"].is_array())
        throw SchemaError("network " + path + ": missing 'lines' array");

    Network net;
    for (const auto& rec : doc["lines"]) {
        LineRoute r;
        if (!rec.contains("id"))
            throw SchemaError("network " + path + ": line record missing 'id'");
        r.line_id = rec.at("id").get<std::string>();
        if (!rec.contains("waypoints") || !rec["waypoints"].is_array() ||
            rec["waypoints"].size() < 2)
            throw SchemaError("network line '" + r.line_id +
                              "': need >= 2 waypoints");
        for (const auto& wp : rec["waypoints"]) {
            if (!wp.is_array() || wp.size() != 2)
                throw SchemaError("network line '" + r.line_id +
                                  "': waypoint must be [lat, lon]");
            r.waypoints.push_back({wp[0].get<double>(), wp[1].get<double>()});
        }
        for (std::size_t i = 1; i < r.waypoints.size(); ++i) {
            if (r.waypoints[i].lat_deg == r.waypoints[i - 1].lat_deg &&
                r.waypoints[i].lon_deg == r.waypoints[i - 1].lon_deg)
                throw SchemaError("network line '" + r.line_id +
                                  "': consecutive duplicate waypoints");
        }
        if (!rec.contains("conductor_name"))
            throw SchemaError("network line '" + r.line_id +
                              "': missing 'conductor_name'");
        r.conductor_name = rec.at("conductor_name").get<std::string>();
        if (!rec.contains("base_current_amps"))
            throw SchemaError("network line '" + r.line_id +
                              "': missing 'base_current_amps'");
        r.base_current_a = rec.at("base_current_amps").get<double>();
        net.lines.push_back(std::move(r));
    }
    return net;
}

void save_network(const Network& network, const std::string& path) {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& r : network.lines) {
        nlohmann::json wps = nlohmann::json::array();
        for (const auto& wp : r.waypoints)
            wps.push_back({wp.lat_deg, wp.lon_deg});
        lines.push_back({{"id", r.line_id},
                         {"waypoints", wps},
                         {"conductor_name", r.conductor_name},
                         {"base_current_amps", r.base_current_a}});
    }
    nlohmann::json doc = {{"schema_version", 1}, {"lines", lines}};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write network file: " + path);
    out << doc.dump(2) << "\n";
}

std::vector<Segment> segment_network(const Network& network,
                                     double max_segment_length_km) {
    std::vector<Segment> out;
    for (const auto& line : network.lines) {
        std::vector<Segment> segs = segment_line(line, max_segment_length_km);
        out.insert(out.end(), segs.begin(), segs.end());
    }
    return out;
}

}  // namespace linetherm
