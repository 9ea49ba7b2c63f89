// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Heavier fixtures than the unit tests; expect a few minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "linetherm/analytic.hpp"
#include "linetherm/batch.hpp"
#include "linetherm/cluster.hpp"
#include "linetherm/geo.hpp"
#include "linetherm/oracle.hpp"
#include "linetherm/risk.hpp"

using namespace linetherm;
namespace lt = linetherm::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double now_s() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. Analytical-vs-integrator accuracy on the reference scenario.
Outcome criterion1() {
    double t0 = now_s();
    lt::ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    s.current_a, s.initial_c);
    IntegrationConfig ic;
    ic.step_s = 5.0;
    ic.max_time_s = 7200.0;
    Trace rk4 = integrate(s.conductor, s.env, s.line_azimuth_deg, s.current_a,
                          s.initial_c, ic);

    double ric_over = 0.0, fo_over = 0.0, fo_minus_ric_min = 1e300;
    for (const auto& p : rk4) {
        double ric = eval_riccati(m, p.t_s);
        double fo = eval_first_order(m, p.t_s);
        ric_over = std::max(ric_over, ric - p.temp_c);
        fo_over = std::max(fo_over, fo - p.temp_c);
        fo_minus_ric_min = std::min(fo_minus_ric_min, fo - ric);
    }
    double elapsed = now_s() - t0;
    bool pass = ric_over <= 0.8 && fo_minus_ric_min >= -1e-9 &&
                fo_over <= 2.5 && elapsed < 5.0;
    std::ostringstream d;
    d << "riccati over integrator max " << ric_over
      << " C (<= 0.8), first-order >= riccati (min gap " << fo_minus_ric_min
      << ", >= -1e-9), first-order over integrator max " << fo_over
      << " C (<= 2.5), " << elapsed << " s (< 5)";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 2. Conservativeness and the error bound over random linearized models.
Outcome criterion2() {
    double t0 = now_s();
    std::mt19937_64 rng(20240201);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int built = 0, violations = 0;
    double worst_gap = 0.0, worst_excess = -1e300;
    while (built < 10000) {
        double ambient = u01(rng) * 40.0;
        double beta0 = 2e-4 + u01(rng) * 2.5e-3;
        double beta_slope = u01(rng) * 5e-5;
        double qsi = u01(rng) * 0.09;
        double initial = ambient - 10.0 + u01(rng) * 100.0;
        LinearizedModel m;
        try {
            m = model_from_coefficients(ambient, initial, qsi, beta0,
                                        beta_slope, 1000.0);
        } catch (const InvalidModel&) {
            continue;
        }
        if (m.c_ratio <= -1.0) continue;
        ++built;
        double bound = error_bound(m);
        double horizon = 20.0 / m.rate;
        for (int i = 0; i <= 200; ++i) {
            double t = horizon * i / 200.0;
            double gap = eval_first_order(m, t) - eval_riccati(m, t);
            if (gap < -1e-9 || gap > bound + 1e-9) ++violations;
            worst_gap = std::min(worst_gap, gap);
            worst_excess = std::max(worst_excess, gap - bound);
        }
    }
    double elapsed = now_s() - t0;
    bool pass = violations == 0 && elapsed < 30.0;
    std::ostringstream d;
    d << "10000 models x 201 samples, " << violations
      << " violations (min gap " << worst_gap << ", max gap-bound "
      << worst_excess << ", tolerance 1e-9), " << elapsed << " s (< 30)";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 3. Steady-state solver robustness over the verification ranges.
Outcome criterion3() {
    double t0 = now_s();
    std::mt19937_64 rng(424242);
    int population = 0, converged = 0, within10 = 0;
    while (population < 10000) {
        lt::RandomDraw draw = lt::random_draw(rng);
        double te_true = lt::bisect_steady_state(draw.conductor, draw.env,
                                                 draw.line_azimuth_deg,
                                                 draw.current_a);
        if (te_true >= 300.0) continue;
        ++population;
        try {
            SteadyStateResult r = solve_steady_state(
                    draw.conductor, draw.env, draw.line_azimuth_deg,
                    draw.current_a, draw.initial_c);
            if (std::fabs(r.steady_c - te_true) < 0.01) {
                ++converged;
                if (r.iterations <= 10) ++within10;
            }
        } catch (const NonConvergence&) {
        }
    }
    double elapsed = now_s() - t0;
    double pct10 = 100.0 * within10 / population;
    bool pass = converged == population && pct10 >= 95.0 && elapsed < 10.0;
    std::ostringstream d;
    d << converged << "/" << population
      << " converged to the bisection oracle at 1e-6 W/m, " << pct10
      << "% within 10 iterations (>= 95), " << elapsed << " s (< 10)";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 4. Two-reference current update over 0..200% of rating.
Outcome criterion4() {
    double t0 = now_s();
    lt::ReferenceScenario s;
    LinearizedModel lo = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                     1400.0, s.initial_c);
    LinearizedModel hi = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                     1900.0, s.initial_c);
    double worst_steady = 0.0, worst_trace = 0.0;
    for (double ip = 0.0; ip <= 2000.0; ip += 50.0) {
        const LinearizedModel& ref =
                std::fabs(ip - 1400.0) <= std::fabs(ip - 1900.0) ? lo : hi;
        LinearizedModel upd = update_for_current(ref, s.conductor, ip);
        LinearizedModel full = build_model(s.conductor, s.env,
                                           s.line_azimuth_deg, ip, s.initial_c);
        worst_steady = std::max(worst_steady,
                                std::fabs(upd.steady_c - full.steady_c));
        for (double t = 0.0; t <= 7200.0; t += 30.0)
            worst_trace = std::max(worst_trace,
                                   std::fabs(eval_riccati(upd, t) -
                                             eval_riccati(full, t)));
    }
    double elapsed = now_s() - t0;
    bool pass = worst_steady < 2.0 && worst_trace < 2.0 && elapsed < 10.0;
    std::ostringstream d;
    d << "references {1400, 1900} A: max steady error " << worst_steady
      << " C, max trace error " << worst_trace << " C (< 2), " << elapsed
      << " s (< 10)";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 5. Threshold wind speed vs the double-bisection oracle.
Outcome criterion5() {
    double t0 = now_s();
    Conductor drake = lt::drake_single();
    std::mt19937_64 rng(8181);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int reachable = 0, unreachable = 0, verdict_mismatch = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        SegmentContext ctx;
        ctx.line_azimuth_deg = u01(rng) * 180.0;
        ctx.solar_wm2 = u01(rng) * 1000.0;
        ctx.sun_altitude_deg = u01(rng) * 90.0;
        ctx.sun_azimuth_deg = u01(rng) * 360.0;
        double ambient = u01(rng) * 40.0;
        double threshold = ambient + 20.0 + u01(rng) * 80.0;
        double direction = u01(rng) * 360.0;
        double current = u01(rng) * 1400.0;

        std::optional<double> fast = threshold_wind_speed(
                drake, threshold, ambient, direction, ctx, current);

        EnvironmentSample env;
        env.ambient_c = ambient;
        env.wind_from_deg = direction;
        env.solar_wm2 = ctx.solar_wm2;
        env.sun_altitude_deg = ctx.sun_altitude_deg;
        env.sun_azimuth_deg = ctx.sun_azimuth_deg;
        auto steady_at = [&](double v) {
            env.wind_speed_ms = v;
            return lt::bisect_steady_state(drake, env, ctx.line_azimuth_deg,
                                           current);
        };
        std::optional<double> oracle;
        if (steady_at(0.0) >= threshold) {
            double lo = 0.0, hi = 60.0;
            for (int i = 0; i < 60; ++i) {
                double mid = 0.5 * (lo + hi);
                (steady_at(mid) > threshold ? lo : hi) = mid;
            }
            oracle = 0.5 * (lo + hi);
        }

        if (fast.has_value() != oracle.has_value()) {
            ++verdict_mismatch;
            continue;
        }
        if (fast) {
            ++reachable;
            worst = std::max(worst, std::fabs(*fast - *oracle));
        } else {
            ++unreachable;
        }
    }
    double elapsed = now_s() - t0;
    bool pass = verdict_mismatch == 0 && worst < 0.05 && reachable > 0 &&
                unreachable > 0 && elapsed < 30.0;
    std::ostringstream d;
    d << reachable << " reachable / " << unreachable << " unreachable, "
      << verdict_mismatch << " verdict mismatches (= 0), max |dV| " << worst
      << " m/s (< 0.05), " << elapsed << " s (< 30)";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 6. Probability binning convergence on the sector-rose fixture.
Outcome criterion6() {
    double t0 = now_s();
    Conductor drake = lt::drake_single();
    SolarPosition sun = solar_geometry(30.0, 182, 12.0);
    SegmentContext ctx;
    ctx.line_azimuth_deg = 90.0;
    ctx.solar_wm2 = 1000.0;
    ctx.sun_altitude_deg = sun.altitude_deg;
    ctx.sun_azimuth_deg = sun.azimuth_deg;

    WindModel rose;
    double probs[5] = {0.28, 0.18, 0.12, 0.22, 0.20};
    double scales[5] = {3.2, 2.4, 1.9, 2.8, 3.5};
    double shapes[5] = {2.1, 1.9, 2.3, 2.0, 1.8};
    for (int i = 0; i < 5; ++i)
        rose.sectors.push_back(
                {i * 72.0, (i + 1) * 72.0, shapes[i], scales[i], probs[i]});
    rose.ambient.uniform_lo_c = 30.0;
    rose.ambient.uniform_hi_c = 40.0;

    auto probability_at = [&](int n) {
        return overtemp_probability(drake, ctx, 1000.0, 100.0, rose,
                                    BinningSpec{n, n});
    };
    double p25 = probability_at(25);
    double p50 = probability_at(50);
    double p100 = probability_at(100);
    double p200 = probability_at(200);
    double p500 = probability_at(500);

    double rel = std::fabs(p25 - p500) / p500;
    double d1 = std::fabs(p50 - p25), d2 = std::fabs(p100 - p50);
    double d3 = std::fabs(p200 - p100), d4 = std::fabs(p500 - p200);
    double elapsed = now_s() - t0;
    bool pass = rel < 0.05 && d1 > d2 && d2 > d3 && d3 > d4 && elapsed < 30.0;
    std::ostringstream d;
    d << "p25 " << p25 << " vs p500 " << p500 << ": relative " << rel * 100.0
      << "% (< 5), refinement differences " << d1 << " > " << d2 << " > "
      << d3 << " > " << d4 << " (strictly shrinking), " << elapsed
      << " s (< 30)";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// Shared desk-scale fixture for criteria 7 and 8.
struct DeskFixture {
    Network net;
    WeatherSeries weather;
    std::vector<OperationState> states;
    std::vector<Segment> segments;
};

DeskFixture build_desk_fixture(int n_states) {
    DeskFixture f;
    // 48 lines of ~30-70 km at a 1 km cut: a bit over 2000 segments.
    f.net = lt::synthetic_network(48, 20240301);
    f.weather = lt::synthetic_weather(73, 12, 12);
    f.states = lt::synthetic_states(f.net, n_states, 20240302);
    f.segments = segment_network(f.net, 1.0);
    return f;
}

// Boundary-time temperatures of the windowed integrator for one
// segment/state, using the stored per-segment environments.
std::vector<double> oracle_boundaries(const ParameterStore& store,
                                      std::size_t seg,
                                      const OperationState& state) {
    const Segment& s = store.segments[seg];
    const Conductor& cond = store.conductors[store.conductor_of_segment[seg]];
    double current = state.current_for(s.line_id, s.base_current_a);
    std::vector<IntegrationWindow> windows;
    for (std::size_t n = 0; n + 1 < store.times_s.size(); ++n)
        windows.push_back({store.groups[n][store.group_of[n][seg]].env, current,
                           store.durations_s[n]});
    IntegrationConfig ic;
    ic.step_s = 5.0;
    Trace tr = integrate_windows(cond, s.azimuth_deg, store.initial_temp_c[seg],
                                 windows, ic);
    std::vector<double> out;
    out.reserve(store.times_s.size());
    double t_next = 0.0;
    for (std::size_t n = 0; n < store.times_s.size(); ++n) {
        for (const auto& p : tr)
            if (std::fabs(p.t_s - t_next) < 1e-6) {
                out.push_back(p.temp_c);
                break;
            }
        t_next += n < store.durations_s.size() ? store.durations_s[n] : 0.0;
    }
    return out;
}

Outcome criterion7() {
    double t0 = now_s();
    DeskFixture f = build_desk_fixture(10);
    std::size_t n_seg = f.segments.size();
    std::size_t n_states = f.states.size();

    BatchConfig config;
    config.max_segment_length_km = 1.0;
    OperationState base;
    ParameterStore store = generate_parameters(f.segments, default_catalog(),
                                               f.weather, base, config);

    // Integrator truth at the 73 boundaries for every (segment, state).
    std::vector<std::vector<std::vector<double>>> oracle(n_states);
    for (std::size_t st = 0; st < n_states; ++st) {
        oracle[st].resize(n_seg);
        parallel_for(n_seg, [&](std::size_t i) {
            oracle[st][i] = oracle_boundaries(store, i, f.states[st]);
        });
    }

    // Unclustered analytic path.
    double abs_err_sum = 0.0;
    std::size_t samples = 0;
    for (std::size_t st = 0; st < n_states; ++st) {
        auto traces = evaluate_state(store, f.states[st], EvalOutput::Screening,
                                     config);
        for (std::size_t i = 0; i < n_seg; ++i) {
            for (std::size_t n = 0; n < traces[i].samples.size(); ++n) {
                abs_err_sum += std::fabs(traces[i].samples[n].temp_c -
                                         oracle[st][i][n]);
                ++samples;
            }
        }
    }
    double mean_unclustered = abs_err_sum / static_cast<double>(samples);

    // Clustered path at k scaled from the reference system size.
    BatchConfig clustered = config;
    clustered.use_clustering = true;
    clustered.cluster.k = std::max(
            1, static_cast<int>(std::lround(500.0 * n_seg / 20000.0)));
    clustered.cluster.seed = 7;
    ParameterStore cstore = generate_parameters(f.segments, default_catalog(),
                                                f.weather, base, clustered);
    std::vector<double> per_pair_mean;
    per_pair_mean.reserve(n_states * n_seg);
    for (std::size_t st = 0; st < n_states; ++st) {
        auto traces = evaluate_state(cstore, f.states[st],
                                     EvalOutput::Screening, clustered);
        for (std::size_t i = 0; i < n_seg; ++i) {
            double acc = 0.0;
            for (std::size_t n = 0; n < traces[i].samples.size(); ++n)
                acc += std::fabs(traces[i].samples[n].temp_c -
                                 oracle[st][i][n]);
            per_pair_mean.push_back(acc / traces[i].samples.size());
        }
    }
    std::nth_element(per_pair_mean.begin(),
                     per_pair_mean.begin() + per_pair_mean.size() / 2,
                     per_pair_mean.end());
    double median_clustered = per_pair_mean[per_pair_mean.size() / 2];

    double elapsed = now_s() - t0;
    bool pass = n_seg >= 2000 && mean_unclustered < 0.15 &&
                median_clustered < 1.0 && elapsed < 600.0;
    std::ostringstream d;
    d << n_seg << " segments (>= 2000) x 73 snapshots x " << n_states
      << " states: mean |error| " << mean_unclustered
      << " C unclustered (< 0.15); k=" << clustered.cluster.k
      << " clustered median |error| " << median_clustered << " C (< 1), "
      << elapsed << " s (< 600)";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 8. Cost model linearity and speedup over the per-state integrator.
Outcome criterion8() {
    double t0 = now_s();
    DeskFixture f = build_desk_fixture(100);

    BatchConfig config;
    config.max_segment_length_km = 1.0;
    config.keep_traces = false;

    double worst_fit = 0.0;
    double tau_gp = 0.0, tau_gs = 0.0;
    for (int n_states : {1, 10, 50, 100}) {
        std::vector<OperationState> subset(f.states.begin(),
                                           f.states.begin() + n_states);
        BatchReport report = run_batch(f.net, default_catalog(), f.weather,
                                       subset, config);
        double predicted = report.parameter_generation_seconds +
                           report.clustering_seconds +
                           n_states * report.mean_state_eval_seconds;
        worst_fit = std::max(worst_fit,
                             std::fabs(report.total_seconds - predicted) /
                                     report.total_seconds);
        tau_gp = report.parameter_generation_seconds;
        tau_gs = report.mean_state_eval_seconds;
    }

    // Per-state integrator cost, measured on one state and scaled linearly.
    OperationState base;
    ParameterStore store = generate_parameters(f.segments, default_catalog(),
                                               f.weather, base, config);
    auto t_rk0 = std::chrono::steady_clock::now();
    std::vector<double> sink(f.segments.size());
    parallel_for(f.segments.size(), [&](std::size_t i) {
        sink[i] = oracle_boundaries(store, i, f.states[1]).back();
    });
    double tau_i = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t_rk0)
                           .count();

    double analytic_100 = tau_gp + 100.0 * tau_gs;
    double integrator_100 = 100.0 * tau_i;
    double speedup = integrator_100 / analytic_100;

    double elapsed = now_s() - t0;
    bool pass = worst_fit <= 0.20 && speedup >= 100.0;
    std::ostringstream d;
    d << "cost-model fit error " << worst_fit * 100.0
      << "% (<= 20) over N_s in {1,10,50,100}; tau_gp " << tau_gp
      << " s, tau_gs " << tau_gs << " s, per-state integrator " << tau_i
      << " s -> speedup x" << speedup << " (>= 100), " << elapsed << " s";
    return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 9. Segmentation arithmetic, series ingestion, golden-file stability.
Outcome criterion9() {
    double t0 = now_s();
    std::ostringstream d;
    bool pass = true;

    // 10 km leg at 3 km max -> 4 equal segments of 2.5 km.
    LineRoute leg;
    leg.line_id = "leg";
    leg.conductor_name = "Drake";
    leg.base_current_a = 800.0;
    double dlat = 10.0 / great_circle_km({42.0, -80.0}, {43.0, -80.0});
    leg.waypoints = {{42.0, -80.0}, {42.0 + dlat, -80.0}};
    std::vector<Segment> segs = segment_line(leg, 3.0);
    bool seg_ok = segs.size() == 4;
    for (const auto& s : segs)
        seg_ok = seg_ok && std::fabs(s.length_km - 2.5) < 1e-3;
    pass = pass && seg_ok;
    d << "10 km / 3 km -> " << segs.size() << " x "
      << (segs.empty() ? 0.0 : segs[0].length_km) << " km"
      << (seg_ok ? "" : " MISMATCH");

    // 73-snapshot series: loads back with an 18 h span.
    fs::path dir = fs::temp_directory_path() / "linetherm_acceptance";
    fs::create_directories(dir);
    WeatherSeries wx = lt::synthetic_weather(73, 4, 4);
    fs::path wx_path = dir / "weather73.csv";
    save_weather_series(wx, wx_path.string());
    WeatherSeries loaded = load_weather_series(wx_path.string());
    bool wx_ok = loaded.snapshots.size() == 73 &&
                 std::fabs(loaded.span_s() - 18.0 * 3600.0) < 1e-6;
    pass = pass && wx_ok;
    d << "; 73 snapshots span " << loaded.span_s() / 3600.0 << " h"
      << (wx_ok ? "" : " MISMATCH");

    // Byte-identical batch CSVs across two runs with the same seed.
    Network net = lt::synthetic_network(5, 99);
    WeatherSeries wx_small = lt::synthetic_weather(5, 6, 6);
    auto states = lt::synthetic_states(net, 2, 100);
    BatchConfig config;
    config.use_clustering = true;
    config.cluster.k = 8;
    config.cluster.seed = 13;
    auto render = [&]() {
        BatchReport report = run_batch(net, default_catalog(), wx_small, states,
                                       config);
        std::ostringstream all;
        for (const auto& traces : report.traces) {
            fs::path p = dir / "golden.csv";
            save_traces_csv(traces, p.string());
            std::ifstream in(p, std::ios::binary);
            all << in.rdbuf();
        }
        return all.str();
    };
    std::string first = render();
    std::string second = render();
    bool golden_ok = !first.empty() && first == second;
    pass = pass && golden_ok;
    d << "; golden CSVs " << (golden_ok ? "byte-identical" : "DIFFER");

    double elapsed = now_s() - t0;
    d << ", " << elapsed << " s";
    return {pass, d.str()};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Outcome (*fn)();
    };
    const Entry entries[] = {
            {"1 analytical accuracy vs integrator", criterion1},
            {"2 first-order conservativeness and bound", criterion2},
            {"3 steady-state solver robustness", criterion3},
            {"4 two-reference current update", criterion4},
            {"5 threshold wind speed vs oracle", criterion5},
            {"6 probability binning convergence", criterion6},
            {"7 batch accuracy vs integrator", criterion7},
            {"8 cost model and speedup", criterion8},
            {"9 segmentation, ingestion, golden files", criterion9},
    };
    int failures = 0;
    for (const auto& e : entries) {
        Outcome o = e.fn();
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", e.name,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    if (failures == 0)
        std::printf("acceptance: all %zu criteria passed\n",
                    std::size(entries));
    else
        std::printf("acceptance: %d criteria FAILED\n", failures);
    return failures;
}
