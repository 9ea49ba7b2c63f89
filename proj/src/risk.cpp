#include "linetherm/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "linetherm/util.hpp"

namespace linetherm {

void WindModel::validate() const {
    if (sectors.empty()) throw InputError("wind model: no sectors");
    double total = 0.0;
    for (const auto& s : sectors) {
        if (!(s.weibull_shape > 0.0) || !(s.weibull_scale > 0.0))
            throw InputError("wind model: Weibull parameters must be > 0");
        if (s.probability < 0.0)
            throw InputError("wind model: negative sector probability");
        total += s.probability;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw InputError("wind model: sector probabilities sum to " +
                         std::to_string(total));
    if (ambient.histogram.empty()) {
        if (ambient.uniform_lo_c > ambient.uniform_hi_c)
            throw InputError("wind model: ambient range inverted");
    } else {
        double p = 0.0;
        for (const auto& b : ambient.histogram) {
            if (b.lo_c > b.hi_c)
                throw InputError("wind model: ambient histogram bin inverted");
            p += b.probability;
        }
        if (std::fabs(p - 1.0) > 1e-9)
            throw InputError("wind model: ambient histogram sums to " +
                             std::to_string(p));
    }
}

namespace {

double sector_width_deg(const WindSector& s) {
    double w = wrap_azimuth(s.to_deg - s.from_deg);
    return w == 0.0 ? 360.0 : w;
}

bool sector_contains(const WindSector& s, double dir_deg) {
    double rel = wrap_azimuth(dir_deg - s.from_deg);
    return rel < sector_width_deg(s);
}

}  // namespace

const WindSector& WindModel::sector_for(double direction_deg) const {
    for (const auto& s : sectors)
        if (sector_contains(s, direction_deg)) return s;
    throw InputError("wind model: no sector covers direction " +
                     std::to_string(direction_deg));
}

double WindModel::direction_density(double direction_deg) const {
    const WindSector& s = sector_for(direction_deg);
    return s.probability / sector_width_deg(s);
}

double weibull_cdf(double v, double shape, double scale) {
    if (v <= 0.0) return 0.0;
    return 1.0 - std::exp(-std::pow(v / scale, shape));
}

double weibull_pdf(double v, double shape, double scale) {
    if (v < 0.0) return 0.0;
    double z = v / scale;
    return shape / scale * std::pow(z, shape - 1.0) *
           std::exp(-std::pow(z, shape));
}

namespace {

EnvironmentSample context_env(const SegmentContext& ctx, double ambient_c,
                              double wind_speed_ms, double wind_from_deg) {
    EnvironmentSample env;
    env.ambient_c = ambient_c;
    env.wind_speed_ms = wind_speed_ms;
    env.wind_from_deg = wind_from_deg;
    env.solar_wm2 = ctx.solar_wm2;
    env.sun_altitude_deg = ctx.sun_altitude_deg;
    env.sun_azimuth_deg = ctx.sun_azimuth_deg;
    env.elevation_m = ctx.elevation_m;
    return env;
}

/// Wind speed whose steady state equals target_c, by inverting the forced
/// convection correlations against the required convection power; nullopt
/// when calm air already holds the conductor below target_c.
std::optional<double> invert_wind_speed(const Conductor& c, double target_c,
                                        double ambient_c, double wind_from_deg,
                                        const SegmentContext& ctx,
                                        double current_a) {
    double dt = target_c - ambient_c;
    if (!(dt > 0.0))
        throw InputError("threshold temperature must exceed ambient");

    EnvironmentSample env = context_env(ctx, ambient_c, 0.0, wind_from_deg);
    double i_sub = c.subconductor_current(current_a);
    double required = i_sub * i_sub * c.resistance_at(target_c) +
                      solar_heat(c, env, ctx.line_azimuth_deg) -
                      radiation_heat(c, target_c, ambient_c);

    AirProperties air = air_properties(target_c, ambient_c, ctx.elevation_m);
    double ka = wind_angle_factor(wind_from_deg, ctx.line_azimuth_deg);
    double kf = air.conductivity_w_per_m_c;

    double q_natural = 3.645 * std::sqrt(air.density_kg_per_m3) *
                       std::pow(c.diameter_m, 0.75) * std::pow(dt, 1.25);
    double q_calm_forced = ka * 1.01 * kf * dt;  // low-wind branch at rest
    if (required < std::max(q_natural, q_calm_forced)) return std::nullopt;

    double nr_to_speed = air.viscosity_kg_per_m_s /
                         (c.diameter_m * air.density_kg_per_m3);

    double base_low = (required / (ka * kf * dt) - 1.01) / 1.35;
    double v_low = base_low <= 0.0
                           ? 0.0
                           : std::pow(base_low, 1.0 / 0.52) * nr_to_speed;
    double nr_high = std::pow(required / (0.754 * ka * kf * dt), 1.0 / 0.6);
    double v_high = nr_high * nr_to_speed;
    return std::min(v_low, v_high);
}

}  // namespace

std::optional<double> threshold_wind_speed(const Conductor& c,
                                           double threshold_c, double ambient_c,
                                           double wind_from_deg,
                                           const SegmentContext& ctx,
                                           double current_a) {
    return invert_wind_speed(c, threshold_c, ambient_c, wind_from_deg, ctx,
                             current_a);
}

double overtemp_probability(const Conductor& c, const SegmentContext& ctx,
                            double current_a, double threshold_c,
                            const WindModel& wind, const BinningSpec& binning) {
    wind.validate();
    if (binning.n_temp_bins < 1 || binning.n_direction_bins < 1)
        throw InputError("binning must have >= 1 bin per axis");

    // Ambient axis: (center, probability mass) pairs at midpoint-rule bins.
    std::vector<std::pair<double, double>> temp_bins;
    if (wind.ambient.histogram.empty()) {
        double lo = wind.ambient.uniform_lo_c, hi = wind.ambient.uniform_hi_c;
        if (hi - lo < 1e-12) {
            temp_bins.push_back({lo, 1.0});
        } else {
            double w = (hi - lo) / binning.n_temp_bins;
            for (int i = 0; i < binning.n_temp_bins; ++i)
                temp_bins.push_back({lo + (i + 0.5) * w, w / (hi - lo)});
        }
    } else {
        double lo = wind.ambient.histogram.front().lo_c;
        double hi = wind.ambient.histogram.front().hi_c;
        for (const auto& b : wind.ambient.histogram) {
            lo = std::min(lo, b.lo_c);
            hi = std::max(hi, b.hi_c);
        }
        double w = (hi - lo) / binning.n_temp_bins;
        for (int i = 0; i < binning.n_temp_bins; ++i) {
            double center = lo + (i + 0.5) * w;
            double density = 0.0;
            for (const auto& b : wind.ambient.histogram) {
                if (center >= b.lo_c && center < b.hi_c && b.hi_c > b.lo_c)
                    density = b.probability / (b.hi_c - b.lo_c);
            }
            temp_bins.push_back({center, density * w});
        }
    }

    double dir_width = 360.0 / binning.n_direction_bins;
    double prob = 0.0;
    for (const auto& [ta, temp_mass] : temp_bins) {
        if (!(threshold_c > ta)) {
            prob += temp_mass;  // ambient at or above the limit
            continue;
        }
        for (int j = 0; j < binning.n_direction_bins; ++j) {
            double dir = (j + 0.5) * dir_width;
            double dir_mass = wind.direction_density(dir) * dir_width;
            if (dir_mass <= 0.0) continue;
            std::optional<double> vth =
                    threshold_wind_speed(c, threshold_c, ta, dir, ctx, current_a);
            if (!vth) continue;
            const WindSector& s = wind.sector_for(dir);
            prob += weibull_cdf(*vth, s.weibull_shape, s.weibull_scale) *
                    temp_mass * dir_mass;
        }
    }
    return std::clamp(prob, 0.0, 1.0);
}

RegionGrid time_to_overtemp_region(const Conductor& c, const SegmentContext& ctx,
                                   double current_a, double threshold_c,
                                   double ambient_c, double initial_c,
                                   const RegionAxes& axes, SolutionForm form,
                                   const SolverConfig& solver) {
    if (!(threshold_c > ambient_c))
        throw InputError("threshold temperature must exceed ambient");
    if (!(axes.speed_min_ms > 0.0) || axes.speed_max_ms <= axes.speed_min_ms)
        throw InputError("wind-speed axis must satisfy 0 < min < max");
    if (axes.n_direction < 1 || axes.n_speed < 1 || axes.n_steady_samples < 2)
        throw InputError("region axes must have positive bin counts");

    RegionGrid grid;
    grid.axes = axes;
    grid.threshold_c = threshold_c;
    grid.ambient_c = ambient_c;
    grid.initial_c = initial_c;
    grid.current_a = current_a;
    grid.conductor_name = c.name;
    grid.cells.resize(static_cast<std::size_t>(axes.n_direction) * axes.n_speed);

    double dir_width = 360.0 / axes.n_direction;
    double speed_width = (axes.speed_max_ms - axes.speed_min_ms) / axes.n_speed;
    auto speed_center = [&](int j) {
        return axes.speed_min_ms + (j + 0.5) * speed_width;
    };

    for (int i = 0; i < axes.n_direction; ++i)
        for (int j = 0; j < axes.n_speed; ++j) {
            RegionCell& cell = grid.cells[static_cast<std::size_t>(i) *
                                                  axes.n_speed + j];
            cell.direction_deg = (i + 0.5) * dir_width;
            cell.wind_speed_ms = speed_center(j);
        }

    if (initial_c >= threshold_c) {
        for (auto& cell : grid.cells)
            cell.status = RegionCellStatus::AlreadyExceeded;
        return grid;
    }

    // Directions with the same wind-line angle produce identical columns;
    // compute one column per distinct angle and copy (the wind-direction
    // symmetry reduces work to about a quarter of the axis).
    std::map<long long, std::vector<int>> columns_by_angle;
    for (int i = 0; i < axes.n_direction; ++i) {
        double phi = acute_axis_angle((i + 0.5) * dir_width, ctx.line_azimuth_deg);
        columns_by_angle[std::llround(phi * 1e7)].push_back(i);
    }

    double qsi_cs = q_si(c,
                         context_env(ctx, ambient_c, 0.0, ctx.line_azimuth_deg),
                         ctx.line_azimuth_deg, current_a);

    for (const auto& [phi_key, dir_indices] : columns_by_angle) {
        (void)phi_key;
        double dir = (dir_indices.front() + 0.5) * dir_width;

        std::optional<double> vth =
                threshold_wind_speed(c, threshold_c, ambient_c, dir, ctx,
                                     current_a);
        auto mark_column_never = [&] {
            for (int i : dir_indices)
                for (int j = 0; j < axes.n_speed; ++j)
                    grid.cells[static_cast<std::size_t>(i) * axes.n_speed + j]
                            .status = RegionCellStatus::Never;
        };
        if (!vth) {
            mark_column_never();
            continue;
        }

        double v_lo = speed_center(0);
        double steady_max =
                solve_steady_state(c, context_env(ctx, ambient_c, v_lo, dir),
                                   ctx.line_azimuth_deg, current_a, initial_c,
                                   solver)
                        .steady_c;
        if (steady_max <= threshold_c) {
            mark_column_never();
            continue;
        }

        // Sweep candidate steady temperatures down toward the threshold and
        // record the wind speed that produces each one.
        std::vector<std::pair<double, double>> speed_to_steady;  // (V, Te)
        speed_to_steady.reserve(axes.n_steady_samples);
        for (int k = 0; k < axes.n_steady_samples; ++k) {
            double te = steady_max - (steady_max - threshold_c) * k /
                                             axes.n_steady_samples;
            std::optional<double> v =
                    invert_wind_speed(c, te, ambient_c, dir, ctx, current_a);
            if (!v) continue;  // natural convection alone holds te: flat band
            speed_to_steady.push_back({std::max(*v, v_lo), te});
        }
        std::sort(speed_to_steady.begin(), speed_to_steady.end());

        for (int j = 0; j < axes.n_speed; ++j) {
            double v = speed_center(j);
            RegionCellStatus status;
            double time_s = -1.0;
            if (v > *vth || speed_to_steady.empty()) {
                status = RegionCellStatus::Never;
            } else {
                // Steady temperature at this wind speed from the sweep table.
                double te;
                auto it = std::lower_bound(
                        speed_to_steady.begin(), speed_to_steady.end(),
                        std::pair<double, double>{v, -1e300});
                if (it == speed_to_steady.begin()) {
                    te = it->second;
                } else if (it == speed_to_steady.end()) {
                    te = std::prev(it)->second;
                } else {
                    auto lo = std::prev(it);
                    double f = (v - lo->first) / (it->first - lo->first);
                    te = lo->second + f * (it->second - lo->second);
                }
                if (te <= threshold_c) {
                    status = RegionCellStatus::Never;
                } else {
                    // Linearize around (initial, te) and invert for the
                    // crossing time.
                    double beta_e = qsi_cs / (te - ambient_c);
                    EnvironmentSample env = context_env(ctx, ambient_c, v, dir);
                    double beta_c0 = beta_coefficient(c, env,
                                                      ctx.line_azimuth_deg,
                                                      current_a, initial_c);
                    double slope = 0.0;
                    if (std::fabs(te - initial_c) >= 1e-9)
                        slope = (beta_e - beta_c0) / (te - initial_c);
                    double beta0 = beta_c0 - slope * (initial_c - ambient_c);
                    LinearizedModel m = model_from_coefficients(
                            ambient_c, initial_c, qsi_cs, beta0, slope,
                            current_a, solver);
                    std::optional<double> t =
                            time_to_threshold(m, threshold_c, form);
                    if (t) {
                        status = RegionCellStatus::Reached;
                        time_s = *t;
                    } else {
                        status = RegionCellStatus::Never;
                    }
                }
            }
            for (int i : dir_indices) {
                RegionCell& cell =
                        grid.cells[static_cast<std::size_t>(i) * axes.n_speed +
                                   j];
                cell.status = status;
                cell.time_s = time_s;
            }
        }
    }
    return grid;
}

RegionGrid overlay_probability(const RegionGrid& grid, const WindModel& wind) {
    wind.validate();
    if (grid.cells.empty() ||
        grid.cells.size() != static_cast<std::size_t>(grid.axes.n_direction) *
                                     grid.axes.n_speed)
        throw InputError("region grid axes do not match its cells");
    RegionGrid out = grid;
    for (auto& cell : out.cells)
        cell.density = wind.direction_density(cell.direction_deg) *
                       weibull_pdf(cell.wind_speed_ms,
                                   wind.sector_for(cell.direction_deg).weibull_shape,
                                   wind.sector_for(cell.direction_deg).weibull_scale);
    return out;
}

void save_region_csv(const RegionGrid& grid, const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw InputError("cannot write region file: " + csv_path);
    out << "direction_deg,wind_speed_ms,time_to_limit_s,density\n";
    for (const auto& cell : grid.cells) {
        double t = cell.status == RegionCellStatus::Reached ? cell.time_s
                   : cell.status == RegionCellStatus::Never ? -1.0
                                                            : -2.0;
        out << format_sig6(cell.direction_deg) << ','
            << format_sig6(cell.wind_speed_ms) << ',' << format_sig6(t) << ','
            << format_sig6(cell.density) << '\n';
    }
}

void save_region_metadata(const RegionGrid& grid, const std::string& json_path) {
    nlohmann::json doc = {
            {"schema_version", 1},
            {"conductor", grid.conductor_name},
            {"current_a", grid.current_a},
            {"threshold_c", grid.threshold_c},
            {"ambient_c", grid.ambient_c},
            {"initial_c", grid.initial_c},
            {"axes",
             {{"n_direction", grid.axes.n_direction},
              {"n_speed", grid.axes.n_speed},
              {"speed_min_ms", grid.axes.speed_min_ms},
              {"speed_max_ms", grid.axes.speed_max_ms}}},
            {"sentinels", {{"never", -1}, {"already_exceeded", -2}}},
    };
    std::ofstream out(json_path);
    if (!out) throw InputError("cannot write region metadata: " + json_path);
    out << doc.dump(2) << "\n";
}

RegionGrid load_region_csv(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw InputError("cannot open region file: " + csv_path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "direction_deg,wind_speed_ms,time_to_limit_s,density")
        throw SchemaError("region CSV " + csv_path + ": unexpected header");

    RegionGrid grid;
    std::set<double> dirs, speeds;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        RegionCell cell;
        double t;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &cell.direction_deg,
                        &cell.wind_speed_ms, &t, &cell.density) != 4)
            throw ParseError("region CSV line " + std::to_string(line_no) +
                             ": expected 4 numbers");
        if (t == -1.0) {
            cell.status = RegionCellStatus::Never;
        } else if (t == -2.0) {
            cell.status = RegionCellStatus::AlreadyExceeded;
        } else {
            cell.status = RegionCellStatus::Reached;
            cell.time_s = t;
        }
        dirs.insert(cell.direction_deg);
        speeds.insert(cell.wind_speed_ms);
        grid.cells.push_back(cell);
    }
    grid.axes.n_direction = static_cast<int>(dirs.size());
    grid.axes.n_speed = static_cast<int>(speeds.size());
    if (grid.cells.size() != static_cast<std::size_t>(grid.axes.n_direction) *
                                     grid.axes.n_speed)
        throw SchemaError("region CSV " + csv_path + ": ragged grid");
    if (!speeds.empty()) {
        double width = grid.axes.n_speed > 1
                               ? (*speeds.rbegin() - *speeds.begin()) /
                                         (grid.axes.n_speed - 1)
                               : 1.0;
        grid.axes.speed_min_ms = *speeds.begin() - 0.5 * width;
        grid.axes.speed_max_ms = *speeds.rbegin() + 0.5 * width;
    }
    return grid;
}

WindModel load_wind_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open wind model: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("wind model " + path + ": " + e.what());
    }
    WindModel m;
    if (!doc.contains("sectors"))
        throw SchemaError("wind model " + path + ": missing 'sectors'");
    for (const auto& s : doc["sectors"]) {
        WindSector sec;
        sec.from_deg = s.at("from_deg").get<double>();
        sec.to_deg = s.at("to_deg").get<double>();
        sec.weibull_shape = s.at("weibull_shape").get<double>();
        sec.weibull_scale = s.at("weibull_scale").get<double>();
        sec.probability = s.at("probability").get<double>();
        m.sectors.push_back(sec);
    }
    if (doc.contains("ambient")) {
        const auto& a = doc["ambient"];
        if (a.contains("uniform")) {
            m.ambient.uniform_lo_c = a["uniform"][0].get<double>();
            m.ambient.uniform_hi_c = a["uniform"][1].get<double>();
        } else if (a.contains("histogram")) {
            for (const auto& b : a["histogram"])
                m.ambient.histogram.push_back({b[0].get<double>(),
                                               b[1].get<double>(),
                                               b[2].get<double>()});
        }
    }
    m.validate();
    return m;
}

void save_wind_model(const WindModel& model, const std::string& path) {
    nlohmann::json sectors = nlohmann::json::array();
    for (const auto& s : model.sectors)
        sectors.push_back({{"from_deg", s.from_deg},
                           {"to_deg", s.to_deg},
                           {"weibull_shape", s.weibull_shape},
                           {"weibull_scale", s.weibull_scale},
                           {"probability", s.probability}});
    nlohmann::json ambient;
    if (model.ambient.histogram.empty()) {
        ambient["uniform"] = {model.ambient.uniform_lo_c,
                              model.ambient.uniform_hi_c};
    } else {
        nlohmann::json bins = nlohmann::json::array();
        for (const auto& b : model.ambient.histogram)
            bins.push_back({b.lo_c, b.hi_c, b.probability});
        ambient["histogram"] = bins;
    }
    nlohmann::json doc = {{"schema_version", 1},
                          {"sectors", sectors},
                          {"ambient", ambient}};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write wind model: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace linetherm
