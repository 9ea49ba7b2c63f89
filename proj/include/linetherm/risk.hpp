#pragma once

#include <optional>
#include <string>
#include <vector>

#include "linetherm/analytic.hpp"
#include "linetherm/physics.hpp"

namespace linetherm {

/// Sector-conditional Weibull wind rose plus an independent ambient
/// temperature distribution.
struct WindSector {
    double from_deg = 0.0;
    double to_deg = 0.0;  // may wrap past 360
    double weibull_shape = 2.0;
    double weibull_scale = 1.0;
    double probability = 0.0;
};

struct AmbientDistribution {
    // Uniform when the histogram is empty; otherwise bins of (lo, hi, prob).
    double uniform_lo_c = 0.0;
    double uniform_hi_c = 0.0;
    struct Bin {
        double lo_c, hi_c, probability;
    };
    std::vector<Bin> histogram;
};

struct WindModel {
    std::vector<WindSector> sectors;
    AmbientDistribution ambient;

    void validate() const;
    const WindSector& sector_for(double direction_deg) const;
    /// Probability density of the wind direction at an azimuth.
    double direction_density(double direction_deg) const;
};

double weibull_cdf(double v, double shape, double scale);
double weibull_pdf(double v, double shape, double scale);

struct BinningSpec {
    int n_temp_bins = 25;
    int n_direction_bins = 25;
};

/// Fixed per-segment context for risk scans: geometry and solar state.
struct SegmentContext {
    double line_azimuth_deg = 90.0;
    double solar_wm2 = 0.0;
    double sun_altitude_deg = 0.0;
    double sun_azimuth_deg = 180.0;
    double elevation_m = 0.0;
};

/// Largest wind speed at which the steady-state temperature still reaches
/// threshold_c, from the closed-form inversion of the forced-convection
/// correlations; nullopt when no wind speed (including calm) gets there.
std::optional<double> threshold_wind_speed(const Conductor& c,
                                           double threshold_c, double ambient_c,
                                           double wind_from_deg,
                                           const SegmentContext& ctx,
                                           double current_a);

/// Probability that the steady-state temperature reaches threshold_c under
/// the wind model, by midpoint-rule integration over (ambient, direction)
/// bins.
double overtemp_probability(const Conductor& c, const SegmentContext& ctx,
                            double current_a, double threshold_c,
                            const WindModel& wind, const BinningSpec& binning);

enum class RegionCellStatus { Reached, Never, AlreadyExceeded };

struct RegionCell {
    double direction_deg = 0.0;   // cell-center wind direction
    double wind_speed_ms = 0.0;   // cell-center wind speed
    double time_s = -1.0;         // valid when status == Reached
    RegionCellStatus status = RegionCellStatus::Never;
    double density = 0.0;         // filled by overlay_probability
};

struct RegionAxes {
    int n_direction = 72;
    int n_speed = 50;
    double speed_min_ms = 0.05;
    double speed_max_ms = 5.0;
    int n_steady_samples = 400;  // sweep resolution per direction
};

struct RegionGrid {
    RegionAxes axes;
    std::vector<RegionCell> cells;  // row-major: direction index * n_speed + speed index
    double threshold_c = 0.0;
    double ambient_c = 0.0;
    double initial_c = 0.0;
    double current_a = 0.0;
    std::string conductor_name;

    const RegionCell& at(int dir_idx, int speed_idx) const {
        return cells[static_cast<std::size_t>(dir_idx) * axes.n_speed + speed_idx];
    }
};

/// Time-to-over-temperature over a (wind direction, wind speed) grid. Each
/// direction column sweeps candidate steady temperatures from the value at
/// the lowest wind down to the threshold, maps each to a wind speed by the
/// convection inversion and to a crossing time by the first-order solution,
/// then interpolates cell values from that table. Directions sharing the same
/// wind-line angle are computed once and mirrored.
RegionGrid time_to_overtemp_region(const Conductor& c, const SegmentContext& ctx,
                                   double current_a, double threshold_c,
                                   double ambient_c, double initial_c,
                                   const RegionAxes& axes,
                                   SolutionForm form = SolutionForm::FirstOrder,
                                   const SolverConfig& solver = {});

/// Attaches the (direction, speed) probability density to every cell.
RegionGrid overlay_probability(const RegionGrid& grid, const WindModel& wind);

/// CSV export (direction_deg, wind_speed_ms, time_to_limit_s, density) with
/// -1 for Never and -2 for AlreadyExceeded, plus a JSON metadata sidecar.
void save_region_csv(const RegionGrid& grid, const std::string& csv_path);
void save_region_metadata(const RegionGrid& grid, const std::string& json_path);

/// Reads back an exported region (cells only; metadata fields default).
RegionGrid load_region_csv(const std::string& csv_path);

/// Wind model JSON loader ({sectors: [...], ambient: {...}}).
WindModel load_wind_model(const std::string& path);
void save_wind_model(const WindModel& model, const std::string& path);

}  // namespace linetherm
