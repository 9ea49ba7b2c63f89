// linetherm: overhead-line conductor temperature simulation CLI.
//
// Subcommands: steady, evolve, update-current, region, prob, segment,
// cluster, batch, snapshot. Exit codes: 0 success, 1 input error,
// 2 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "linetherm/analytic.hpp"
#include "linetherm/batch.hpp"
#include "linetherm/cluster.hpp"
#include "linetherm/geo.hpp"
#include "linetherm/oracle.hpp"
#include "linetherm/risk.hpp"

namespace fs = std::filesystem;
using namespace linetherm;

namespace {

struct CommonOptions {
    std::string catalog_path;
    std::string output_dir;
    unsigned threads = 0;
};

std::vector<Conductor> resolve_catalog(const CommonOptions& common) {
    if (common.catalog_path.empty()) return default_catalog();
    return load_catalog(common.catalog_path);
}

fs::path resolve_out(const CommonOptions& common, const std::string& out) {
    fs::path p(out);
    if (!common.output_dir.empty() && p.is_relative())
        p = fs::path(common.output_dir) / p;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

/// Environment flags shared by the single-conductor commands. Sun position
/// comes either from explicit angles or from latitude/day/hour.
struct EnvOptions {
    double ambient_c = 25.0;
    double wind_speed_ms = 0.61;
    double wind_from_deg = 0.0;
    double line_azimuth_deg = 90.0;
    double solar_wm2 = 0.0;
    double sun_alt_deg = -90.0;
    double sun_az_deg = 180.0;
    double latitude_deg = 1e9;
    int day_of_year = 182;
    double hour = 12.0;
    double elevation_m = 0.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--ta", ambient_c, "Ambient temperature [degC]");
        cmd->add_option("--wind-speed", wind_speed_ms, "Wind speed [m/s]")
                ->check(CLI::NonNegativeNumber);
        cmd->add_option("--wind-dir", wind_from_deg,
                        "Wind origin azimuth [deg, clockwise from north]");
        cmd->add_option("--line-az", line_azimuth_deg, "Line azimuth [deg]");
        cmd->add_option("--qse", solar_wm2, "Solar irradiance [W/m^2]")
                ->check(CLI::NonNegativeNumber);
        cmd->add_option("--sun-alt", sun_alt_deg, "Sun altitude [deg]");
        cmd->add_option("--sun-az", sun_az_deg, "Sun azimuth [deg]");
        cmd->add_option("--lat", latitude_deg,
                        "Latitude [deg]; with --day/--hour computes the sun "
                        "position");
        cmd->add_option("--day", day_of_year, "Day of year [1..366]")
                ->check(CLI::Range(1, 366));
        cmd->add_option("--hour", hour, "Local solar hour [0..24)");
        cmd->add_option("--elevation", elevation_m,
                        "Elevation above sea level [m]");
    }

    EnvironmentSample build() const {
        EnvironmentSample env;
        env.ambient_c = ambient_c;
        env.wind_speed_ms = wind_speed_ms;
        env.wind_from_deg = wind_from_deg;
        env.solar_wm2 = solar_wm2;
        env.elevation_m = elevation_m;
        if (latitude_deg <= 90.0) {
            SolarPosition sun = solar_geometry(latitude_deg, day_of_year, hour);
            env.sun_altitude_deg = sun.altitude_deg;
            env.sun_azimuth_deg = sun.azimuth_deg;
        } else {
            env.sun_altitude_deg = sun_alt_deg;
            env.sun_azimuth_deg = sun_az_deg;
        }
        return env;
    }

    SegmentContext context() const {
        EnvironmentSample env = build();
        SegmentContext ctx;
        ctx.line_azimuth_deg = line_azimuth_deg;
        ctx.solar_wm2 = env.solar_wm2;
        ctx.sun_altitude_deg = env.sun_altitude_deg;
        ctx.sun_azimuth_deg = env.sun_azimuth_deg;
        ctx.elevation_m = env.elevation_m;
        return ctx;
    }
};

struct TraceStats {
    double max_temp_low_c = 0.0;    // analytic below reference
    double max_temp_high_c = 0.0;   // analytic above reference
    double max_time_late_s = 0.0;   // analytic reaches a level later
    double max_time_early_s = 0.0;  // analytic reaches a level earlier
};

/// Temperature and level-crossing error statistics of an analytic trace
/// against a reference trace sampled at the same times. Crossing lags are
/// evaluated over a sweep of temperature levels inside the common range.
TraceStats trace_stats(const Trace& reference,
                       const std::vector<double>& analytic) {
    TraceStats s;
    double lo = reference.front().temp_c, hi = reference.front().temp_c;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        double d = analytic[i] - reference[i].temp_c;
        s.max_temp_high_c = std::max(s.max_temp_high_c, d);
        s.max_temp_low_c = std::max(s.max_temp_low_c, -d);
        lo = std::min(lo, reference[i].temp_c);
        hi = std::max(hi, reference[i].temp_c);
    }
    Trace analytic_trace;
    analytic_trace.reserve(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i)
        analytic_trace.push_back({reference[i].t_s, analytic[i]});
    for (double level = lo + 0.5; level < hi - 0.1; level += 0.5) {
        auto t_ref = crossing_time(reference, level);
        auto t_an = crossing_time(analytic_trace, level);
        if (!t_ref || !t_an) continue;
        double d = *t_an - *t_ref;
        s.max_time_late_s = std::max(s.max_time_late_s, d);
        s.max_time_early_s = std::max(s.max_time_early_s, -d);
    }
    return s;
}

int run_steady(const CommonOptions& common, const EnvOptions& envopt,
               const std::string& conductor_name, double current_a,
               double initial_c, const SolverConfig& solver) {
    const Conductor& cond = find_conductor(resolve_catalog(common),
                                           conductor_name);
    EnvironmentSample env = envopt.build();
    SteadyStateResult r = solve_steady_state(cond, env,
                                             envopt.line_azimuth_deg,
                                             current_a, initial_c, solver);
    std::printf("steady_c=%.6g iterations=%d residual_w_per_m=%.3g\n",
                r.steady_c, r.iterations, r.residual_w_per_m);
    return 0;
}

int run_evolve(const CommonOptions& common, const EnvOptions& envopt,
               const std::string& conductor_name, double current_a,
               double initial_c, double horizon_s, double step_s,
               const std::string& out_prefix) {
    const Conductor& cond = find_conductor(resolve_catalog(common),
                                           conductor_name);
    EnvironmentSample env = envopt.build();
    double az = envopt.line_azimuth_deg;

    IntegrationConfig ic;
    ic.step_s = step_s;
    ic.max_time_s = horizon_s;
    Trace rk4 = integrate(cond, env, az, current_a, initial_c, ic);
    LinearizedModel model = build_model(cond, env, az, current_a, initial_c);

    std::vector<double> ric(rk4.size()), fo(rk4.size());
    for (std::size_t i = 0; i < rk4.size(); ++i) {
        ric[i] = eval_riccati(model, rk4[i].t_s);
        fo[i] = eval_first_order(model, rk4[i].t_s);
    }

    fs::path csv = resolve_out(common, out_prefix + ".csv");
    {
        std::ofstream out(csv);
        if (!out) throw InputError("cannot write " + csv.string());
        out << "t_s,rk4_c,riccati_c,first_order_c\n";
        for (std::size_t i = 0; i < rk4.size(); ++i)
            out << format_sig6(rk4[i].t_s) << ',' << format_sig6(rk4[i].temp_c)
                << ',' << format_sig6(ric[i]) << ',' << format_sig6(fo[i])
                << '\n';
    }

    TraceStats rs = trace_stats(rk4, ric);
    TraceStats fos = trace_stats(rk4, fo);
    nlohmann::json summary = {
            {"steady_c", model.steady_c},
            {"first_order_rate_per_s", model.rate},
            {"riccati",
             {{"max_temp_low_c", rs.max_temp_low_c},
              {"max_time_late_s", rs.max_time_late_s},
              {"max_temp_high_c", rs.max_temp_high_c},
              {"max_time_early_s", rs.max_time_early_s}}},
            {"first_order",
             {{"max_temp_low_c", fos.max_temp_low_c},
              {"max_time_late_s", fos.max_time_late_s},
              {"max_temp_high_c", fos.max_temp_high_c},
              {"max_time_early_s", fos.max_time_early_s}}},
    };
    fs::path json_path = resolve_out(common, out_prefix + "_summary.json");
    std::ofstream(json_path) << summary.dump(2) << "\n";
    std::printf("evolve: %zu samples, steady %.6g C -> %s, %s\n", rk4.size(),
                model.steady_c, csv.string().c_str(),
                json_path.string().c_str());
    return 0;
}

int run_update_current(const CommonOptions& common, const EnvOptions& envopt,
                       const std::string& conductor_name, double reference_a,
                       double new_current_a, double initial_c) {
    const Conductor& cond = find_conductor(resolve_catalog(common),
                                           conductor_name);
    EnvironmentSample env = envopt.build();
    double az = envopt.line_azimuth_deg;
    LinearizedModel ref = build_model(cond, env, az, reference_a, initial_c);
    LinearizedModel upd = update_for_current(ref, cond, new_current_a);
    SteadyStateResult full = solve_steady_state(cond, env, az, new_current_a,
                                                initial_c);
    std::printf("reference_a=%.6g steady_c=%.6g\n", reference_a, ref.steady_c);
    std::printf("updated_a=%.6g steady_c=%.6g rate_per_s=%.6g\n",
                new_current_a, upd.steady_c, upd.rate);
    std::printf("full_solve_steady_c=%.6g update_error_c=%.6g\n",
                full.steady_c, std::fabs(upd.steady_c - full.steady_c));
    return 0;
}

int run_region(const CommonOptions& common, const EnvOptions& envopt,
               const std::string& conductor_name, double current_a,
               double threshold_c, double initial_c, const RegionAxes& axes,
               const std::string& form_name, const std::string& wind_model_path,
               const std::string& out_prefix) {
    const Conductor& cond = find_conductor(resolve_catalog(common),
                                           conductor_name);
    SolutionForm form = form_name == "riccati" ? SolutionForm::Riccati
                                               : SolutionForm::FirstOrder;
    RegionGrid grid = time_to_overtemp_region(cond, envopt.context(), current_a,
                                              threshold_c, envopt.ambient_c,
                                              initial_c, axes, form);
    if (!wind_model_path.empty())
        grid = overlay_probability(grid, load_wind_model(wind_model_path));

    fs::path csv = resolve_out(common, out_prefix + ".csv");
    fs::path meta = resolve_out(common, out_prefix + "_meta.json");
    save_region_csv(grid, csv.string());
    save_region_metadata(grid, meta.string());

    int reached = 0;
    for (const auto& cell : grid.cells)
        if (cell.status == RegionCellStatus::Reached) ++reached;
    std::printf("region: %dx%d cells, %d can reach %.6g C -> %s\n",
                axes.n_direction, axes.n_speed, reached, threshold_c,
                csv.string().c_str());
    return 0;
}

int run_prob(const CommonOptions& common, const EnvOptions& envopt,
             const std::string& conductor_name, double current_a,
             double threshold_c, const std::string& wind_model_path,
             const BinningSpec& binning) {
    const Conductor& cond = find_conductor(resolve_catalog(common),
                                           conductor_name);
    WindModel wind = load_wind_model(wind_model_path);
    double p = overtemp_probability(cond, envopt.context(), current_a,
                                    threshold_c, wind, binning);
    std::printf("overtemp_probability=%.6g binning=%dx%d\n", p,
                binning.n_temp_bins, binning.n_direction_bins);
    return 0;
}

int run_segment(const CommonOptions& common, const std::string& network_path,
                double max_length_km, const std::string& out) {
    Network net = load_network(network_path);
    std::vector<Segment> segments = segment_network(net, max_length_km);
    fs::path path = resolve_out(common, out);
    std::ofstream file(path);
    if (!file) throw InputError("cannot write " + path.string());
    file << "segment_id,line_id,lat,lon,azimuth_deg,length_km,conductor,"
            "base_current_a\n";
    for (const auto& s : segments)
        file << s.segment_id << ',' << s.line_id << ','
             << format_sig6(s.midpoint.lat_deg) << ','
             << format_sig6(s.midpoint.lon_deg) << ','
             << format_sig6(s.azimuth_deg) << ',' << format_sig6(s.length_km)
             << ',' << s.conductor_name << ','
             << format_sig6(s.base_current_a) << '\n';
    std::printf("segment: %zu lines -> %zu segments -> %s\n", net.lines.size(),
                segments.size(), path.string().c_str());
    return 0;
}

int run_cluster(const CommonOptions& common, const std::string& network_path,
                const std::string& weather_path, double max_length_km,
                ClusterSpec spec, int snapshot_index, const std::string& out) {
    Network net = load_network(network_path);
    WeatherSeries wx = load_weather_series(weather_path);
    if (snapshot_index < 0 ||
        snapshot_index >= static_cast<int>(wx.snapshots.size()))
        throw InputError("snapshot index out of range");
    std::vector<Segment> segments = segment_network(net, max_length_km);
    std::vector<EnvironmentSample> envs;
    envs.reserve(segments.size());
    for (const auto& s : segments)
        envs.push_back(sample_environment(wx.snapshots[snapshot_index],
                                          s.midpoint,
                                          InterpolationMode::Nearest));
    ClusterResult r = cluster_segments(segments, envs, spec, common.threads);
    fs::path path = resolve_out(common, out);
    save_cluster_assignment(segments, r.assignment, path.string());
    ClusterQuality q = cluster_quality(segments, envs, r.assignment);
    std::printf("cluster: %zu segments -> k=%d, iterations=%d, "
                "max spreads: %.2f C, %.2f m/s, %.1f deg -> %s\n",
                segments.size(), r.k_effective, r.iterations,
                q.max_ambient_spread_c, q.max_wind_speed_spread_ms,
                q.max_wind_direction_spread_deg, path.string().c_str());
    return 0;
}

int run_batch_cmd(const CommonOptions& common, const std::string& network_path,
                  const std::string& weather_path,
                  const std::string& states_path, BatchConfig config,
                  const std::string& out_dir) {
    Network net = load_network(network_path);
    WeatherSeries wx = load_weather_series(weather_path);
    for (const auto& w : wx.warnings) std::cerr << "warning: " << w << "\n";
    std::vector<OperationState> states;
    if (!states_path.empty()) states = load_states(states_path);

    fs::path dir = resolve_out(common, out_dir);
    fs::create_directories(dir);

    config.threads = common.threads;
    config.keep_traces = false;
    std::vector<Conductor> catalog = resolve_catalog(common);

    BatchReport report = run_batch(
            net, catalog, wx, states, config,
            [&](const OperationState& st,
                const std::vector<TemperatureTrace>& traces) {
                fs::path p = dir / ("traces_" + st.state_id + ".csv");
                save_traces_csv(traces, p.string());
            });
    fs::path report_path = dir / "report.json";
    save_batch_report(report, report_path.string());
    std::printf("batch: %zu segments x %zu snapshots, %zu models, "
                "%zu states, %zu flagged pairs; t_gp=%.3gs t_gs=%.3gs -> %s\n",
                report.segment_count, report.snapshot_count, report.model_count,
                report.states.size(), report.flagged.size(),
                report.parameter_generation_seconds,
                report.mean_state_eval_seconds, dir.string().c_str());
    return 0;
}

int run_snapshot(const CommonOptions& common, const std::string& traces_path,
                 double t_s, double limit_c, const std::string& out) {
    std::vector<TemperatureTrace> traces = load_traces_csv(traces_path);
    if (traces.empty()) throw InputError("no traces in " + traces_path);
    std::vector<SegmentTemperature> snap = snapshot_at(traces, t_s);
    fs::path path = resolve_out(common, out);
    std::ofstream file(path);
    if (!file) throw InputError("cannot write " + path.string());
    file << "segment_id,temp_c,over_limit\n";
    int over = 0;
    for (std::size_t i = 0; i < snap.size(); ++i) {
        bool flag = snap[i].over_limit || snap[i].temp_c >= limit_c;
        if (flag) ++over;
        file << snap[i].segment_id << ',' << format_sig6(snap[i].temp_c) << ','
             << (flag ? 1 : 0) << '\n';
    }
    std::printf("snapshot: %zu segments at t=%.6g s, %d over limit -> %s\n",
                snap.size(), t_s, over, path.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
            "linetherm: overhead transmission-line conductor temperature "
            "simulation.\n"
            "Closed-form temperature evolution, over-temperature risk "
            "regions, and batch\ncontingency screening over gridded weather "
            "forecasts.\n\n"
            "File formats (all schema_version 1):\n"
            "  catalog:    JSON array of conductor records (diameter in mm "
            "on disk)\n"
            "  network:    JSON {lines: [{id, waypoints: [[lat,lon]...], "
            "conductor_name,\n              base_current_amps}]}\n"
            "  weather:    CSV timestamp_iso8601,lat,lon,temp_c,wind_u_ms,"
            "wind_v_ms,\n              solar_wm2[,sun_alt_deg,sun_az_deg]\n"
            "  states:     JSON list of {state_id, description, "
            "line_currents and/or\n              line_multipliers maps}\n"
            "  wind model: JSON {sectors: [{from_deg, to_deg, weibull_shape,"
            "\n              weibull_scale, probability}], ambient: "
            "{uniform: [lo, hi]}}\n"};
    app.require_subcommand(1);

    CommonOptions common;
    app.add_option("--catalog", common.catalog_path,
                   "Conductor catalog JSON (default: built-in five ACSR "
                   "types)");
    app.add_option("--output-dir", common.output_dir,
                   "Directory prepended to relative output paths")
            ->envname("LINETHERM_OUTPUT_DIR");
    app.add_option("--threads", common.threads,
                   "Worker threads (0 = all available)");

    std::string conductor = "Drake";
    double current = 800.0, initial = 50.0, threshold = 100.0;
    SolverConfig solver;

    EnvOptions env_steady;
    auto* steady = app.add_subcommand(
            "steady", "Steady-state temperature by Newton-Raphson");
    steady->add_option("--conductor", conductor, "Catalog conductor name");
    steady->add_option("--current", current, "Line current [A]")
            ->check(CLI::NonNegativeNumber);
    steady->add_option("--tc0", initial, "Initial conductor temperature "
                                         "[degC]");
    steady->add_option("--tolerance", solver.heat_mismatch_tolerance_w_per_m,
                       "Heat mismatch tolerance [W/m]");
    steady->add_option("--max-iterations", solver.max_iterations,
                       "Iteration cap");
    env_steady.add_to(steady);

    EnvOptions env_evolve;
    double horizon = 7200.0, step = 5.0;
    std::string evolve_out = "evolve";
    auto* evolve = app.add_subcommand(
            "evolve", "Temperature trace: integrator vs both closed forms");
    evolve->add_option("--conductor", conductor, "Catalog conductor name");
    evolve->add_option("--current", current, "Line current [A]")
            ->check(CLI::NonNegativeNumber);
    evolve->add_option("--tc0", initial, "Initial temperature [degC]");
    evolve->add_option("--horizon", horizon, "Horizon [s]")
            ->check(CLI::PositiveNumber);
    evolve->add_option("--step", step, "Sample step [s]")
            ->check(CLI::PositiveNumber);
    evolve->add_option("--out", evolve_out, "Output prefix");
    env_evolve.add_to(evolve);

    EnvOptions env_update;
    double new_current = 1000.0;
    auto* update = app.add_subcommand(
            "update-current",
            "Re-derive a solution at a new current without a fresh solve");
    update->add_option("--conductor", conductor, "Catalog conductor name");
    update->add_option("--current", current, "Reference current [A]");
    update->add_option("--new-current", new_current, "Target current [A]")
            ->check(CLI::NonNegativeNumber);
    update->add_option("--tc0", initial, "Initial temperature [degC]");
    env_update.add_to(update);

    EnvOptions env_region;
    RegionAxes axes;
    std::string form = "first-order", wind_model_path, region_out = "region";
    auto* region = app.add_subcommand(
            "region",
            "Time-to-over-temperature region over (wind direction, speed)");
    region->add_option("--conductor", conductor, "Catalog conductor name");
    region->add_option("--current", current, "Line current [A]");
    region->add_option("--tth", threshold, "Temperature limit [degC]");
    region->add_option("--tc0", initial, "Initial temperature [degC]");
    region->add_option("--dir-bins", axes.n_direction, "Direction bins");
    region->add_option("--speed-bins", axes.n_speed, "Speed bins");
    region->add_option("--speed-min", axes.speed_min_ms, "Axis minimum [m/s]");
    region->add_option("--speed-max", axes.speed_max_ms, "Axis maximum [m/s]");
    region->add_option("--form", form, "Crossing-time form")
            ->check(CLI::IsMember({"first-order", "riccati"}));
    region->add_option("--wind-model", wind_model_path,
                       "Wind model JSON for the probability overlay");
    region->add_option("--out", region_out, "Output prefix");
    env_region.add_to(region);

    EnvOptions env_prob;
    BinningSpec binning;
    std::string prob_wind_path;
    auto* prob = app.add_subcommand(
            "prob",
            "Steady-state over-temperature probability under a wind model");
    prob->add_option("--conductor", conductor, "Catalog conductor name");
    prob->add_option("--current", current, "Line current [A]");
    prob->add_option("--tth", threshold, "Temperature limit [degC]");
    prob->add_option("--wind-model", prob_wind_path, "Wind model JSON")
            ->required();
    prob->add_option("--temp-bins", binning.n_temp_bins, "Ambient bins");
    prob->add_option("--dir-bins", binning.n_direction_bins, "Direction bins");
    env_prob.add_to(prob);

    std::string network_path, segment_out = "segments.csv";
    double max_length = 3.0;
    auto* seg = app.add_subcommand("segment",
                                   "Split network lines into segments");
    seg->add_option("--network", network_path, "Network JSON")->required();
    seg->add_option("--max-length", max_length, "Max segment length [km]")
            ->check(CLI::PositiveNumber);
    seg->add_option("--out", segment_out, "Output CSV");

    std::string weather_path, cluster_out = "clusters.csv";
    ClusterSpec cluster_spec;
    int snapshot_index = 0;
    auto* cluster = app.add_subcommand(
            "cluster", "K-means segment clustering on one weather snapshot");
    cluster->add_option("--network", network_path, "Network JSON")->required();
    cluster->add_option("--weather", weather_path, "Weather CSV")->required();
    cluster->add_option("--max-length", max_length, "Max segment length [km]");
    cluster->add_option("--k", cluster_spec.k, "Cluster count");
    cluster->add_option("--seed", cluster_spec.seed, "Seed");
    cluster->add_option("--snapshot", snapshot_index, "Snapshot index");
    cluster->add_option("--out", cluster_out, "Output CSV");

    BatchConfig batch_config;
    std::string states_path, batch_mode = "screen", batch_out = "batch";
    std::uint64_t batch_seed = 0;
    bool batch_clusters = false;
    auto* batch = app.add_subcommand(
            "batch",
            "System-wide temperature evolution over a weather series and "
            "operation states");
    batch->add_option("--network", network_path, "Network JSON")->required();
    batch->add_option("--weather", weather_path, "Weather CSV")->required();
    batch->add_option("--states", states_path, "States JSON");
    batch->add_option("--max-length", batch_config.max_segment_length_km,
                      "Max segment length [km]");
    batch->add_option("--limit", batch_config.temperature_limit_c,
                      "Temperature limit [degC]");
    batch->add_flag("--clusters", batch_clusters,
                    "Enable segment clustering");
    batch->add_option("--k", batch_config.cluster.k, "Cluster count");
    batch->add_option("--seed", batch_seed, "Seed");
    batch->add_option("--mode", batch_mode, "Output mode")
            ->check(CLI::IsMember({"screen", "trace"}));
    batch->add_option("--step", batch_config.trace_step_s,
                      "Dense trace step [s]");
    batch->add_option("--out", batch_out, "Output directory");

    std::string traces_path, snapshot_out = "snapshot.csv";
    double at_time = 0.0;
    auto* snap = app.add_subcommand("snapshot",
                                    "Per-segment temperatures at one time");
    snap->add_option("--traces", traces_path, "Trace CSV from batch")
            ->required();
    snap->add_option("--t", at_time, "Time from series start [s]")->required();
    snap->add_option("--limit", threshold, "Temperature limit [degC]");
    snap->add_option("--out", snapshot_out, "Output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (steady->parsed())
            return run_steady(common, env_steady, conductor, current, initial,
                              solver);
        if (evolve->parsed())
            return run_evolve(common, env_evolve, conductor, current, initial,
                              horizon, step, evolve_out);
        if (update->parsed())
            return run_update_current(common, env_update, conductor, current,
                                      new_current, initial);
        if (region->parsed())
            return run_region(common, env_region, conductor, current, threshold,
                              initial, axes, form, wind_model_path, region_out);
        if (prob->parsed())
            return run_prob(common, env_prob, conductor, current, threshold,
                            prob_wind_path, binning);
        if (seg->parsed())
            return run_segment(common, network_path, max_length, segment_out);
        if (cluster->parsed())
            return run_cluster(common, network_path, weather_path, max_length,
                               cluster_spec, snapshot_index, cluster_out);
        if (batch->parsed()) {
            batch_config.use_clustering = batch_clusters;
            batch_config.seed = batch_seed;
            batch_config.cluster.seed = batch_seed;
            batch_config.output = batch_mode == "trace"
                                          ? EvalOutput::DenseTrace
                                          : EvalOutput::Screening;
            return run_batch_cmd(common, network_path, weather_path,
                                 states_path, batch_config, batch_out);
        }
        if (snap->parsed())
            return run_snapshot(common, traces_path, at_time, threshold,
                                snapshot_out);
    } catch (const NonConvergence& e) {
        std::cerr << "numerical failure: " << e.what() << " (last iterate "
                  << e.last_temp_c << " C after " << e.iterations
                  << " iterations)\n";
        return 2;
    } catch (const NegativeDiscriminant& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const InvalidModel& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
