#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "linetherm/batch.hpp"
#include "linetherm/conductor.hpp"
#include "linetherm/geo.hpp"
#include "linetherm/physics.hpp"

namespace linetherm::testing {

/// Drake as a single (unbundled) conductor, the standard single-conductor
/// test subject.
inline Conductor drake_single() {
    Conductor c = find_conductor(default_catalog(), "Drake");
    c.bundle_count = 1;
    return c;
}

/// The reference scenario: 0.8 m/s wind from the east along a west-east line,
/// 40 degC ambient, July 1 solar noon at 30 N, initial temperature 50 degC.
struct ReferenceScenario {
    Conductor conductor = drake_single();
    EnvironmentSample env;
    double line_azimuth_deg = 90.0;
    double current_a = 800.0;
    double initial_c = 50.0;

    ReferenceScenario() {
        SolarPosition sun = solar_geometry(30.0, 182, 12.0);
        env.ambient_c = 40.0;
        env.wind_speed_ms = 0.8;
        env.wind_from_deg = 90.0;
        env.solar_wm2 = 1000.0;
        env.sun_altitude_deg = sun.altitude_deg;
        env.sun_azimuth_deg = sun.azimuth_deg;
    }
};

/// Random conductor drawn from the verification ranges (diameter 0.5-4.75 cm,
/// other parameters scaled from Drake with area).
inline Conductor random_conductor(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double d = 0.005 + u01(rng) * (0.0475 - 0.005);
    double scale = d / 0.02814;
    Conductor c;
    c.name = "synthetic";
    c.diameter_m = d;
    c.projected_area_m2_per_m = d;
    c.heat_capacity_j_per_m_c = 1310.0 * scale * scale;
    c.resistance_ohm_per_m = 7.283e-5 / (scale * scale);
    c.resistance_ref_temp_c = 25.0;
    c.resistance_slope_ohm_per_m_c = 2.81e-7 / (scale * scale);
    c.emissivity = 0.8;
    c.absorptivity = 0.8;
    c.bundle_count = 1;
    c.rated_current_a = 1000.0 * std::pow(scale, 1.5);
    return c;
}

struct RandomDraw {
    Conductor conductor;
    EnvironmentSample env;
    double line_azimuth_deg;
    double initial_c;
    double current_a;
};

/// One draw over the verification ranges: T_c0 20-100, T_a 0-40, I 0-200%
/// rated, V_w 0-10 m/s.
inline RandomDraw random_draw(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    RandomDraw d;
    d.conductor = random_conductor(rng);
    d.env.ambient_c = u01(rng) * 40.0;
    d.env.wind_speed_ms = u01(rng) * 10.0;
    d.env.wind_from_deg = u01(rng) * 360.0;
    d.env.solar_wm2 = u01(rng) * 1000.0;
    d.env.sun_altitude_deg = u01(rng) * 90.0;
    d.env.sun_azimuth_deg = u01(rng) * 360.0;
    d.line_azimuth_deg = u01(rng) * 180.0;
    d.initial_c = 20.0 + u01(rng) * 80.0;
    d.current_a = u01(rng) * 2.0 * d.conductor.rated_current_a;
    return d;
}

/// Bisection root of the full heat balance over [ambient, hi], the
/// steady-state oracle.
inline double bisect_steady_state(const Conductor& c,
                                  const EnvironmentSample& env, double line_az,
                                  double current_a, double hi_c = 1500.0) {
    double lo = env.ambient_c;
    double hi = hi_c;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (heat_balance_rhs(c, env, line_az, current_a, mid) > 0.0 ? lo : hi) =
                mid;
    }
    return 0.5 * (lo + hi);
}

/// Synthetic network: n_lines straight-ish lines across a lat/lon box, cycled
/// through the catalog conductors, deterministic from the seed.
inline Network synthetic_network(int n_lines, std::uint64_t seed,
                                 double lat0 = 42.0, double lat1 = 45.0,
                                 double lon0 = -80.0, double lon1 = -76.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto& catalog = default_catalog();
    Network net;
    for (int i = 0; i < n_lines; ++i) {
        LineRoute r;
        r.line_id = "L" + std::to_string(i);
        const Conductor& c = catalog[i % catalog.size()];
        r.conductor_name = c.name;
        r.base_current_a =
                (0.5 + 0.4 * u01(rng)) * c.rated_current_a * c.bundle_count;
        double la = lat0 + u01(rng) * (lat1 - lat0);
        double lo = lon0 + u01(rng) * (lon1 - lon0);
        double dla = (u01(rng) - 0.5) * 1.2;
        double dlo = (u01(rng) - 0.5) * 1.2;
        r.waypoints.push_back({la, lo});
        r.waypoints.push_back({la + 0.5 * dla, lo + 0.5 * dlo});
        r.waypoints.push_back({la + dla, lo + dlo});
        net.lines.push_back(std::move(r));
    }
    return net;
}

/// Synthetic weather series: a smooth diurnal field over a regular grid,
/// n_snapshots at a fixed interval starting 2018-07-01T06:00Z.
inline WeatherSeries synthetic_weather(int n_snapshots, int nlat = 10,
                                       int nlon = 10, double interval_s = 900.0,
                                       double lat0 = 42.0, double lat1 = 45.0,
                                       double lon0 = -80.0, double lon1 = -76.0) {
    WeatherSeries series;
    std::int64_t t_start = parse_iso8601_utc("2018-07-01T06:00:00Z");
    for (int n = 0; n < n_snapshots; ++n) {
        WeatherSnapshot snap;
        snap.timestamp_s = t_start + static_cast<std::int64_t>(n * interval_s);
        snap.timestamp_iso = format_iso8601_utc(snap.timestamp_s);
        snap.grid.lat0 = lat0;
        snap.grid.lon0 = lon0;
        snap.grid.nlat = nlat;
        snap.grid.nlon = nlon;
        snap.grid.dlat = (lat1 - lat0) / (nlat - 1);
        snap.grid.dlon = (lon1 - lon0) / (nlon - 1);
        std::size_t cells = static_cast<std::size_t>(nlat) * nlon;
        snap.temp_c.resize(cells);
        snap.wind_u_ms.resize(cells);
        snap.wind_v_ms.resize(cells);
        snap.solar_wm2.resize(cells);
        snap.sun_alt_deg.resize(cells);
        snap.sun_az_deg.resize(cells);
        double hours = n * interval_s / 3600.0;
        for (int i = 0; i < nlat; ++i) {
            for (int j = 0; j < nlon; ++j) {
                double lat = lat0 + i * snap.grid.dlat;
                double lon = lon0 + j * snap.grid.dlon;
                std::size_t idx = snap.grid.index(i, j);
                // Warm afternoon peak plus gentle spatial gradients.
                snap.temp_c[idx] = 24.0 +
                                   9.0 * std::sin(kPi * (hours + 1.0) / 17.0) +
                                   1.5 * std::sin(lat * 2.1) +
                                   1.0 * std::cos(lon * 1.7);
                snap.wind_u_ms[idx] =
                        1.8 + 1.2 * std::sin(0.35 * hours + lon * 0.8);
                snap.wind_v_ms[idx] =
                        0.8 + 1.0 * std::cos(0.27 * hours + lat * 1.1);
                double solar_hour =
                        std::fmod(utc_hour(snap.timestamp_s) + lon / 15.0 + 24.0,
                                  24.0);
                SolarPosition sun = solar_geometry(
                        lat, day_of_year_utc(snap.timestamp_s), solar_hour);
                snap.sun_alt_deg[idx] = sun.altitude_deg;
                snap.sun_az_deg[idx] = sun.azimuth_deg;
                snap.solar_wm2[idx] =
                        sun.altitude_deg > 0.0
                                ? 1000.0 * std::sin(deg_to_rad(sun.altitude_deg))
                                : 0.0;
            }
        }
        series.snapshots.push_back(std::move(snap));
    }
    return series;
}

/// N-k style states: listed lines out, the rest uniformly up-rated.
inline std::vector<OperationState> synthetic_states(const Network& net,
                                                    int n_states,
                                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<OperationState> states;
    for (int s = 0; s < n_states; ++s) {
        OperationState st;
        st.state_id = "S" + std::to_string(s);
        if (s == 0) {
            st.description = "base";
        } else {
            int outages = 1 + static_cast<int>(u01(rng) * 3.0);
            st.description = std::to_string(outages) + " lines out";
            for (int k = 0; k < outages; ++k) {
                std::size_t pick = static_cast<std::size_t>(
                        u01(rng) * static_cast<double>(net.lines.size()));
                pick = std::min(pick, net.lines.size() - 1);
                st.line_multipliers[net.lines[pick].line_id] = 0.0;
            }
            double uplift = 1.05 + 0.25 * u01(rng);
            for (const auto& line : net.lines)
                if (!st.line_multipliers.count(line.line_id))
                    st.line_multipliers[line.line_id] = uplift;
        }
        states.push_back(std::move(st));
    }
    return states;
}

}  // namespace linetherm::testing
