#include "linetherm/physics.hpp"

#include <algorithm>
#include <cmath>

#include "linetherm/util.hpp"

namespace linetherm {

AirProperties air_properties(double conductor_c, double ambient_c,
                             double elevation_m) {
    AirProperties p;
    p.film_c = 0.5 * (conductor_c + ambient_c);
    double t = p.film_c;
    p.viscosity_kg_per_m_s = 1.458e-6 * std::pow(t + 273.0, 1.5) / (t + 383.4);
    p.conductivity_w_per_m_c = 2.424e-2 + 7.477e-5 * t - 4.407e-9 * t * t;
    double he = elevation_m;
    p.density_kg_per_m3 =
            (1.293 - 1.525e-4 * he + 6.379e-9 * he * he) / (1.0 + 0.00367 * t);
    return p;
}

double wind_angle_factor(double wind_from_deg, double line_azimuth_deg) {
    double phi = deg_to_rad(acute_axis_angle(wind_from_deg, line_azimuth_deg));
    return 1.194 - std::cos(phi) + 0.194 * std::cos(2.0 * phi) +
           0.368 * std::sin(2.0 * phi);
}

double solar_heat(const Conductor& c, const EnvironmentSample& env,
                  double line_azimuth_deg) {
    if (env.solar_wm2 <= 0.0 || env.sun_altitude_deg <= 0.0) return 0.0;
    double hc = deg_to_rad(env.sun_altitude_deg);
    double dz = deg_to_rad(env.sun_azimuth_deg - line_azimuth_deg);
    double cos_theta = std::clamp(std::cos(hc) * std::cos(dz), -1.0, 1.0);
    double theta = std::acos(cos_theta);
    return c.absorptivity * env.solar_wm2 * std::sin(theta) *
           c.projected_area_m2_per_m;
}

double radiation_heat(const Conductor& c, double conductor_c, double ambient_c) {
    double x = (conductor_c + 273.0) / 100.0;
    double y = (ambient_c + 273.0) / 100.0;
    return 17.8 * c.emissivity * c.diameter_m * (x * x * x * x - y * y * y * y);
}

double radiation_linear_factor(const Conductor& c, double conductor_c,
                               double ambient_c) {
    // x^4 - y^4 = (x^2 + y^2)(x + y)(x - y); with x,y = (T + 273)/100 the
    // (x + y)(x - y) part is (Tc + Ta + 546)(Tc - Ta)/1e4.
    double x = (conductor_c + 273.0) / 100.0;
    double y = (ambient_c + 273.0) / 100.0;
    return 17.8 * c.emissivity * c.diameter_m * (conductor_c + ambient_c + 546.0) /
           1.0e4 * (x * x + y * y);
}

ConvectionResult convection_heat(const Conductor& c, const EnvironmentSample& env,
                                 double line_azimuth_deg, double conductor_c) {
    AirProperties air = air_properties(conductor_c, env.ambient_c, env.elevation_m);
    double dt = conductor_c - env.ambient_c;

    ConvectionResult r;
    r.angle_factor = wind_angle_factor(env.wind_from_deg, line_azimuth_deg);
    r.reynolds = c.diameter_m * air.density_kg_per_m3 * env.wind_speed_ms /
                 air.viscosity_kg_per_m_s;

    // Per-degree coefficients of the three correlations. Each branch's power
    // is coefficient * dt, which extends the natural branch oddly through
    // dt = 0 and keeps coefficient * dt == q_c exact for the linearization.
    double kf = air.conductivity_w_per_m_c;
    double coef_high = 0.754 * r.angle_factor * std::pow(r.reynolds, 0.6) * kf;
    double coef_low =
            r.angle_factor * (1.01 + 1.35 * std::pow(r.reynolds, 0.52)) * kf;
    double coef_nat = 3.645 * std::sqrt(air.density_kg_per_m3) *
                      std::pow(c.diameter_m, 0.75) *
                      std::pow(std::fabs(dt), 0.25);

    double q_high = coef_high * dt;
    double q_low = coef_low * dt;
    double q_nat = coef_nat * dt;

    r.q_w_per_m = std::max({q_high, q_low, q_nat});
    if (r.q_w_per_m == q_high && dt != 0.0) {
        r.branch = ConvectionBranch::ForcedHigh;
        r.coefficient_w_per_m_c = coef_high;
    } else if (r.q_w_per_m == q_nat && dt != 0.0) {
        r.branch = ConvectionBranch::Natural;
        r.coefficient_w_per_m_c = coef_nat;
    } else {
        r.branch = ConvectionBranch::ForcedLow;
        r.coefficient_w_per_m_c = coef_low;
    }
    if (dt == 0.0) {
        // q_c is zero regardless; report the coefficient the heating side
        // would see so beta stays continuous from above.
        r.coefficient_w_per_m_c = std::max(coef_high, coef_low);
        r.branch = coef_high >= coef_low ? ConvectionBranch::ForcedHigh
                                         : ConvectionBranch::ForcedLow;
    }
    return r;
}

HeatTerms heat_terms(const Conductor& c, const EnvironmentSample& env,
                     double line_azimuth_deg, double current_a,
                     double conductor_c) {
    HeatTerms t;
    double i_sub = c.subconductor_current(current_a);
    t.joule = i_sub * i_sub * c.resistance_at(conductor_c);
    t.solar = solar_heat(c, env, line_azimuth_deg);
    ConvectionResult conv =
            convection_heat(c, env, line_azimuth_deg, conductor_c);
    t.convection = conv.q_w_per_m;
    t.branch = conv.branch;
    t.angle_factor = conv.angle_factor;
    t.reynolds = conv.reynolds;
    t.radiation = radiation_heat(c, conductor_c, env.ambient_c);
    return t;
}

double heat_balance_rhs(const Conductor& c, const EnvironmentSample& env,
                        double line_azimuth_deg, double current_a,
                        double conductor_c) {
    HeatTerms t = heat_terms(c, env, line_azimuth_deg, current_a, conductor_c);
    return (t.joule + t.solar - t.convection - t.radiation) /
           c.heat_capacity_j_per_m_c;
}

double beta_coefficient(const Conductor& c, const EnvironmentSample& env,
                        double line_azimuth_deg, double current_a,
                        double conductor_c) {
    ConvectionResult conv =
            convection_heat(c, env, line_azimuth_deg, conductor_c);
    double i_sub = c.subconductor_current(current_a);
    double rad = radiation_linear_factor(c, conductor_c, env.ambient_c);
    return (conv.coefficient_w_per_m_c -
            i_sub * i_sub * c.resistance_slope_ohm_per_m_c + rad) /
           c.heat_capacity_j_per_m_c;
}

double q_si(const Conductor& c, const EnvironmentSample& env,
            double line_azimuth_deg, double current_a) {
    double i_sub = c.subconductor_current(current_a);
    double joule_at_ambient = i_sub * i_sub * c.resistance_at(env.ambient_c);
    return (joule_at_ambient + solar_heat(c, env, line_azimuth_deg)) /
           c.heat_capacity_j_per_m_c;
}

SolarPosition solar_geometry(double latitude_deg, int day_of_year,
                             double local_solar_hour) {
    double decl_deg =
            23.46 * std::sin(deg_to_rad(360.0 * (284.0 + day_of_year) / 365.0));
    double lat = deg_to_rad(latitude_deg);
    double decl = deg_to_rad(decl_deg);
    double omega = deg_to_rad(15.0 * (local_solar_hour - 12.0));

    double sin_alt = std::cos(lat) * std::cos(decl) * std::cos(omega) +
                     std::sin(lat) * std::sin(decl);
    SolarPosition pos;
    pos.altitude_deg = rad_to_deg(std::asin(std::clamp(sin_alt, -1.0, 1.0)));

    double denom = std::sin(lat) * std::cos(omega) - std::cos(lat) * std::tan(decl);
    double chi = (denom == 0.0 && std::sin(omega) == 0.0)
                         ? 0.0
                         : std::sin(omega) / denom;
    double constant;
    if (omega < 0.0)
        constant = chi >= 0.0 ? 0.0 : 180.0;
    else
        constant = chi >= 0.0 ? 180.0 : 360.0;
    pos.azimuth_deg = wrap_azimuth(constant + rad_to_deg(std::atan(chi)));
    return pos;
}

}  // namespace linetherm
