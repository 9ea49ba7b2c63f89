#pragma once

#include "linetherm/conductor.hpp"

namespace linetherm {

/// Weather and solar inputs at one place and time.
struct EnvironmentSample {
    double ambient_c = 25.0;
    double wind_speed_ms = 0.0;
    double wind_from_deg = 0.0;    // meteorological: azimuth the wind blows from
    double solar_wm2 = 0.0;        // global irradiance on the conductor plane
    double sun_altitude_deg = 0.0;
    double sun_azimuth_deg = 180.0;
    double elevation_m = 0.0;
};

/// Air film properties at the mean of conductor and ambient temperature.
/// IEEE Std 738-2012 SI polynomial fits.
struct AirProperties {
    double film_c;
    double conductivity_w_per_m_c;  // k_f
    double density_kg_per_m3;       // rho_f
    double viscosity_kg_per_m_s;    // mu_f
};

enum class ConvectionBranch { ForcedHigh, ForcedLow, Natural };

/// Convection power plus the pieces reused by the linearization.
struct ConvectionResult {
    double q_w_per_m = 0.0;   // signed: follows (Tc - Ta)
    ConvectionBranch branch = ConvectionBranch::Natural;
    double angle_factor = 0.0;  // K_a
    double reynolds = 0.0;
    double coefficient_w_per_m_c = 0.0;  // q = coefficient * (Tc - Ta)
};

/// All four heat-balance terms at one operating point, in W/m.
struct HeatTerms {
    double joule = 0.0;
    double solar = 0.0;
    double convection = 0.0;
    double radiation = 0.0;
    ConvectionBranch branch = ConvectionBranch::Natural;
    double angle_factor = 0.0;
    double reynolds = 0.0;
};

AirProperties air_properties(double conductor_c, double ambient_c,
                             double elevation_m);

/// Wind direction factor K_a for the acute angle between wind and line axis.
double wind_angle_factor(double wind_from_deg, double line_azimuth_deg);

/// Solar gain in W/m; zero at night (sun at or below the horizon) or with no
/// irradiance.
double solar_heat(const Conductor& c, const EnvironmentSample& env,
                  double line_azimuth_deg);

/// Radiated power in W/m, signed with (Tc - Ta).
double radiation_heat(const Conductor& c, double conductor_c, double ambient_c);

/// Linear-in-dT factor of the radiation term: radiation_heat = factor * (Tc - Ta).
double radiation_linear_factor(const Conductor& c, double conductor_c,
                               double ambient_c);

/// Convective loss: maximum of the two forced-convection correlations and the
/// natural-convection correlation. For Tc < Ta all three branches are extended
/// oddly in (Tc - Ta) so the result keeps the sign of the temperature excess.
ConvectionResult convection_heat(const Conductor& c, const EnvironmentSample& env,
                                 double line_azimuth_deg, double conductor_c);

HeatTerms heat_terms(const Conductor& c, const EnvironmentSample& env,
                     double line_azimuth_deg, double current_a,
                     double conductor_c);

/// dTc/dt in degC/s from the full heat balance.
double heat_balance_rhs(const Conductor& c, const EnvironmentSample& env,
                        double line_azimuth_deg, double current_a,
                        double conductor_c);

/// Temperature-loss coefficient beta(Tc) in 1/s, defined so that
/// dTc/dt = q_si - beta(Tc) * (Tc - Ta) holds exactly.
double beta_coefficient(const Conductor& c, const EnvironmentSample& env,
                        double line_azimuth_deg, double current_a,
                        double conductor_c);

/// Forcing term (joule heat at ambient-temperature resistance plus solar gain)
/// divided by heat capacity, in degC/s. Independent of conductor temperature.
double q_si(const Conductor& c, const EnvironmentSample& env,
            double line_azimuth_deg, double current_a);

struct SolarPosition {
    double altitude_deg;  // H_c
    double azimuth_deg;   // Z_c, clockwise from north
};

/// Sun position from the IEEE Std 738-2012 annex model (declination fit plus
/// altitude/azimuth from the hour angle). Hour is local solar time.
SolarPosition solar_geometry(double latitude_deg, int day_of_year,
                             double local_solar_hour);

}  // namespace linetherm
