#include "linetherm/batch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "linetherm/util.hpp"

namespace linetherm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
}

/// One weather step of one segment: either an analytical model re-based to
/// the running temperature, or (after solver failures) a numerically
/// integrated window trace.
struct StepSolution {
    bool analytic = true;
    LinearizedModel model;
    Trace numeric;  // window-relative, starting at t = 0

    double at(double s, SolutionForm form) const {
        if (analytic) return eval(model, s, form);
        auto it = std::lower_bound(
                numeric.begin(), numeric.end(), s,
                [](const TracePoint& p, double t) { return p.t_s < t; });
        if (it == numeric.begin()) return it->temp_c;
        if (it == numeric.end()) return numeric.back().temp_c;
        auto lo = std::prev(it);
        double f = (s - lo->t_s) / (it->t_s - lo->t_s);
        return lo->temp_c + f * (it->temp_c - lo->temp_c);
    }

    std::optional<double> crossing(double limit_c, SolutionForm form) const {
        if (analytic) return time_to_threshold(model, limit_c, form);
        return crossing_time(numeric, limit_c);
    }
};

StepSolution make_step_solution(const ParameterStore& store,
                                const StoredModelSet& set, double current_a,
                                double start_temp_c, double duration_s,
                                const BatchConfig& config) {
    const Conductor& cond = store.conductors[set.conductor_idx];
    auto numeric_fallback = [&] {
        StepSolution sol;
        sol.analytic = false;
        IntegrationConfig ic;
        ic.step_s = std::min(config.trace_step_s, std::max(duration_s, 1.0));
        ic.max_time_s = std::max(duration_s, ic.step_s);
        sol.numeric = integrate(cond, set.env, set.line_azimuth_deg, current_a,
                                start_temp_c, ic);
        return sol;
    };

    if (set.failed || set.refs.empty()) return numeric_fallback();

    auto fresh_solve = [&]() -> StepSolution {
        StepSolution sol;
        sol.model = build_model(cond, set.env, set.line_azimuth_deg, current_a,
                                start_temp_c, config.solver);
        return sol;
    };

    try {
        if (set.base_current_a > 0.0 &&
            current_a > config.rebuild_fraction * set.base_current_a)
            return fresh_solve();
        // Nearest reference current (ties toward the first entry).
        std::size_t best = 0;
        double best_d = std::fabs(current_a - set.refs[0].reference_current_a);
        for (std::size_t r = 1; r < set.refs.size(); ++r) {
            double d = std::fabs(current_a - set.refs[r].reference_current_a);
            if (d < best_d) {
                best_d = d;
                best = r;
            }
        }
        StepSolution sol;
        try {
            sol.model = with_initial_temp(
                    update_for_current(set.refs[best], cond, current_a),
                    start_temp_c);
        } catch (const NegativeDiscriminant&) {
            return fresh_solve();
        } catch (const InvalidModel&) {
            return fresh_solve();
        }
        return sol;
    } catch (const std::runtime_error&) {
        return numeric_fallback();
    }
}

int current_band(double current_a, double ratio) {
    if (current_a <= 0.0) return -1000;
    return static_cast<int>(std::floor(std::log(current_a / 100.0) /
                                       std::log(ratio)));
}

}  // namespace

ParameterStore generate_parameters(const std::vector<Segment>& segments,
                                   const std::vector<Conductor>& catalog,
                                   const WeatherSeries& series,
                                   const OperationState& base_state,
                                   const BatchConfig& config) {
    if (series.snapshots.empty())
        throw InputError("generate_parameters: empty weather series");
    if (segments.empty())
        throw InputError("generate_parameters: no segments");

    auto t_start = std::chrono::steady_clock::now();
    ParameterStore store;
    store.segments = segments;

    // Resolve each segment's conductor into a deduplicated table.
    for (const auto& seg : segments) {
        const Conductor& c = find_conductor(catalog, seg.conductor_name);
        int idx = -1;
        for (std::size_t i = 0; i < store.conductors.size(); ++i)
            if (store.conductors[i].name == c.name) idx = static_cast<int>(i);
        if (idx < 0) {
            store.conductors.push_back(c);
            idx = static_cast<int>(store.conductors.size()) - 1;
        }
        store.conductor_of_segment.push_back(idx);
    }

    std::size_t n_seg = segments.size();
    std::size_t n_snap = series.snapshots.size();
    for (const auto& snap : series.snapshots)
        store.times_s.push_back(snap.timestamp_s);
    for (std::size_t n = 0; n < n_snap; ++n)
        store.durations_s.push_back(
                n + 1 < n_snap ? static_cast<double>(store.times_s[n + 1] -
                                                     store.times_s[n])
                               : 0.0);

    // Initial condition: steady state under the base state and the first
    // snapshot, unless overridden.
    std::vector<EnvironmentSample> env0(n_seg);
    parallel_for(n_seg, [&](std::size_t i) {
        env0[i] = sample_environment(series.snapshots[0], segments[i].midpoint,
                                     config.interpolation);
    }, config.threads);
    store.initial_temp_c.assign(n_seg, 0.0);
    std::vector<std::string> init_failures(n_seg);
    parallel_for(n_seg, [&](std::size_t i) {
        if (config.initial_temp_override_c) {
            store.initial_temp_c[i] = *config.initial_temp_override_c;
            return;
        }
        const Segment& seg = segments[i];
        double base = base_state.current_for(seg.line_id, seg.base_current_a);
        try {
            store.initial_temp_c[i] =
                    solve_steady_state(
                            store.conductors[store.conductor_of_segment[i]],
                            env0[i], seg.azimuth_deg, base,
                            env0[i].ambient_c + 10.0, config.solver)
                            .steady_c;
        } catch (const NonConvergence& e) {
            store.initial_temp_c[i] = env0[i].ambient_c;
            init_failures[i] = "initial condition for " + seg.segment_id + ": " +
                               e.what();
        }
    }, config.threads);
    for (auto& f : init_failures)
        if (!f.empty()) store.failures.push_back(std::move(f));

    std::vector<double> base_temp = store.initial_temp_c;

    for (std::size_t n = 0; n < n_snap; ++n) {
        const WeatherSnapshot& snap = series.snapshots[n];
        std::vector<EnvironmentSample> envs(n_seg);
        parallel_for(n_seg, [&](std::size_t i) {
            envs[i] = sample_environment(snap, segments[i].midpoint,
                                         config.interpolation);
        }, config.threads);

        // Group formation: per segment, or per (cluster, conductor,
        // current band) with a representative member.
        std::vector<int> group_of(n_seg);
        std::vector<std::size_t> group_rep;
        if (!config.use_clustering) {
            group_rep.resize(n_seg);
            for (std::size_t i = 0; i < n_seg; ++i) {
                group_of[i] = static_cast<int>(i);
                group_rep[i] = i;
            }
        } else {
            auto t_cluster = std::chrono::steady_clock::now();
            ClusterResult cr = cluster_segments(segments, envs, config.cluster,
                                                config.threads);
            std::map<std::tuple<int, int, int>, int> group_index;
            std::vector<std::vector<std::size_t>> members;
            for (std::size_t i = 0; i < n_seg; ++i) {
                const Segment& seg = segments[i];
                double base = base_state.current_for(seg.line_id,
                                                     seg.base_current_a);
                std::tuple<int, int, int> key{
                        cr.assignment[i], store.conductor_of_segment[i],
                        current_band(base, config.current_band_ratio)};
                auto [it, inserted] = group_index.emplace(
                        key, static_cast<int>(members.size()));
                if (inserted) members.emplace_back();
                members[it->second].push_back(i);
                group_of[i] = it->second;
            }
            group_rep.resize(members.size());
            for (std::size_t g = 0; g < members.size(); ++g) {
                // Prefer the k-means representative when it landed in this
                // sub-group, otherwise the first member.
                group_rep[g] = members[g].front();
                for (std::size_t i : members[g]) {
                    if (static_cast<int>(i) ==
                        cr.representative[cr.assignment[i]]) {
                        group_rep[g] = i;
                        break;
                    }
                }
            }
            store.clustering_seconds += seconds_since(t_cluster);
        }

        std::size_t n_groups = group_rep.size();
        std::vector<StoredModelSet> sets(n_groups);
        std::vector<std::string> group_failures(n_groups);
        parallel_for(n_groups, [&](std::size_t g) {
            std::size_t rep = group_rep[g];
            const Segment& seg = segments[rep];
            StoredModelSet& set = sets[g];
            set.env = envs[rep];
            set.line_azimuth_deg = seg.azimuth_deg;
            set.conductor_idx = store.conductor_of_segment[rep];
            set.base_current_a =
                    base_state.current_for(seg.line_id, seg.base_current_a);
            const Conductor& cond = store.conductors[set.conductor_idx];
            for (double frac : config.reference_fractions) {
                double ref_current = frac * set.base_current_a;
                try {
                    set.refs.push_back(build_model(cond, set.env,
                                                   set.line_azimuth_deg,
                                                   ref_current, base_temp[rep],
                                                   config.solver));
                } catch (const std::runtime_error& e) {
                    set.failed = true;
                    set.refs.clear();
                    group_failures[g] = "snapshot " + snap.timestamp_iso +
                                        " segment " + seg.segment_id + ": " +
                                        e.what();
                    break;
                }
            }
        }, config.threads);
        for (std::size_t g = 0; g < n_groups; ++g) {
            store.model_count += sets[g].refs.size();
            if (!group_failures[g].empty())
                store.failures.push_back(std::move(group_failures[g]));
        }

        store.groups.push_back(std::move(sets));
        store.group_of.push_back(std::move(group_of));

        // Advance the base-state temperatures to the end of this step.
        double dur = store.durations_s[n];
        if (dur > 0.0) {
            const auto& sets_n = store.groups[n];
            const auto& gof = store.group_of[n];
            std::vector<double> next_temp(n_seg);
            parallel_for(n_seg, [&](std::size_t i) {
                const Segment& seg = segments[i];
                double current = base_state.current_for(seg.line_id,
                                                        seg.base_current_a);
                StepSolution sol =
                        make_step_solution(store, sets_n[gof[i]], current,
                                           base_temp[i], dur, config);
                next_temp[i] = sol.at(dur, config.eval_form);
            }, config.threads);
            base_temp = std::move(next_temp);
        }
    }

    store.generation_seconds =
            seconds_since(t_start) - store.clustering_seconds;
    return store;
}

std::vector<TemperatureTrace> evaluate_state(const ParameterStore& store,
                                             const OperationState& state,
                                             EvalOutput output,
                                             const BatchConfig& config) {
    if (store.groups.size() != store.times_s.size() || store.segments.empty())
        throw MissingParameters("parameter store is empty or incomplete");

    std::size_t n_seg = store.segments.size();
    std::vector<TemperatureTrace> traces(n_seg);
    parallel_for(n_seg, [&](std::size_t i) {
        const Segment& seg = store.segments[i];
        TemperatureTrace& tr = traces[i];
        tr.segment_id = seg.segment_id;
        tr.state_id = state.state_id;

        double temp = store.initial_temp_c[i];
        tr.samples.push_back({0.0, temp});
        if (temp >= config.temperature_limit_c) tr.over_temperature_at_s = 0.0;

        double current = state.current_for(seg.line_id, seg.base_current_a);
        double t_global = 0.0;
        for (std::size_t n = 0; n < store.times_s.size(); ++n) {
            double dur = store.durations_s[n];
            if (dur <= 0.0) continue;
            const StoredModelSet& set = store.groups[n][store.group_of[n][i]];
            StepSolution sol = make_step_solution(store, set, current, temp,
                                                  dur, config);
            if (!tr.over_temperature_at_s) {
                std::optional<double> cross =
                        sol.crossing(config.temperature_limit_c,
                                     config.crossing_form);
                if (cross && *cross <= dur)
                    tr.over_temperature_at_s = t_global + *cross;
            }
            if (output == EvalOutput::DenseTrace) {
                for (double s = config.trace_step_s; s < dur - 1e-9;
                     s += config.trace_step_s)
                    tr.samples.push_back(
                            {t_global + s, sol.at(s, config.eval_form)});
            }
            temp = sol.at(dur, config.eval_form);
            t_global += dur;
            tr.samples.push_back({t_global, temp});
        }
    }, config.threads);
    return traces;
}

BatchReport run_batch(const Network& network,
                      const std::vector<Conductor>& catalog,
                      const WeatherSeries& series,
                      const std::vector<OperationState>& states,
                      const BatchConfig& config, const TraceSink& sink) {
    auto t_start = std::chrono::steady_clock::now();

    std::set<std::string> line_ids;
    for (const auto& line : network.lines) line_ids.insert(line.line_id);
    for (const auto& st : states) {
        for (const auto& [id, v] : st.line_currents_a) {
            (void)v;
            if (!line_ids.count(id))
                throw InputError("state '" + st.state_id +
                                 "' references unknown line '" + id + "'");
        }
        for (const auto& [id, v] : st.line_multipliers) {
            (void)v;
            if (!line_ids.count(id))
                throw InputError("state '" + st.state_id +
                                 "' references unknown line '" + id + "'");
        }
    }

    std::vector<Segment> segments =
            segment_network(network, config.max_segment_length_km);

    OperationState base;
    base.state_id = "base";
    ParameterStore store =
            generate_parameters(segments, catalog, series, base, config);

    BatchReport report;
    report.segment_count = segments.size();
    report.snapshot_count = series.snapshots.size();
    report.model_count = store.model_count;
    report.clustering_seconds = store.clustering_seconds;
    report.parameter_generation_seconds = store.generation_seconds;
    report.failures = store.failures;
    report.config = config;

    double eval_total = 0.0;
    for (const auto& st : states) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<TemperatureTrace> traces =
                evaluate_state(store, st, config.output, config);
        double dt = seconds_since(t0);
        eval_total += dt;

        StateSummary summary;
        summary.state_id = st.state_id;
        summary.eval_seconds = dt;
        for (const auto& tr : traces) {
            if (tr.over_temperature_at_s) {
                summary.flagged_segments++;
                report.flagged.push_back({st.state_id, tr.segment_id,
                                          *tr.over_temperature_at_s});
            }
        }
        report.states.push_back(summary);
        if (sink)
            sink(st, traces);
        else if (config.keep_traces)
            report.traces.push_back(std::move(traces));
    }
    report.mean_state_eval_seconds =
            states.empty() ? 0.0 : eval_total / static_cast<double>(states.size());
    report.total_seconds = seconds_since(t_start);
    return report;
}

std::vector<SegmentTemperature> snapshot_at(
        const std::vector<TemperatureTrace>& traces, double t_s) {
    std::vector<SegmentTemperature> out;
    out.reserve(traces.size());
    for (const auto& tr : traces) {
        if (tr.samples.empty() || t_s < tr.samples.front().t_s - 1e-9 ||
            t_s > tr.samples.back().t_s + 1e-9)
            throw InputError("snapshot time " + std::to_string(t_s) +
                             " is outside the trace span");
        auto it = std::lower_bound(
                tr.samples.begin(), tr.samples.end(), t_s,
                [](const TracePoint& p, double t) { return p.t_s < t; });
        double temp;
        if (it == tr.samples.begin()) {
            temp = it->temp_c;
        } else if (it == tr.samples.end()) {
            temp = tr.samples.back().temp_c;
        } else {
            auto lo = std::prev(it);
            double f = (t_s - lo->t_s) / (it->t_s - lo->t_s);
            temp = lo->temp_c + f * (it->temp_c - lo->temp_c);
        }
        bool over = tr.over_temperature_at_s && *tr.over_temperature_at_s <= t_s;
        out.push_back({tr.segment_id, temp, over});
    }
    return out;
}

std::vector<OperationState> load_states(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open states file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("states " + path + ": " + e.what());
    }
    const nlohmann::json* list = &doc;
    if (doc.is_object()) {
        if (!doc.contains("states"))
            throw SchemaError("states " + path + ": missing 'states' array");
        list = &doc["states"];
    }
    if (!list->is_array())
        throw SchemaError("states " + path + ": expected a JSON list");

    std::vector<OperationState> out;
    for (const auto& rec : *list) {
        OperationState st;
        if (!rec.contains("state_id"))
            throw SchemaError("states " + path + ": record missing 'state_id'");
        st.state_id = rec.at("state_id").get<std::string>();
        st.description = rec.value("description", std::string{});
        if (rec.contains("line_currents"))
            for (const auto& [id, v] : rec["line_currents"].items()) {
                double amps = v.get<double>();
                if (amps < 0.0)
                    throw SchemaError("state '" + st.state_id +
                                      "': negative current on line " + id);
                st.line_currents_a[id] = amps;
            }
        if (rec.contains("line_multipliers"))
            for (const auto& [id, v] : rec["line_multipliers"].items()) {
                double m = v.get<double>();
                if (m < 0.0)
                    throw SchemaError("state '" + st.state_id +
                                      "': negative multiplier on line " + id);
                st.line_multipliers[id] = m;
            }
        out.push_back(std::move(st));
    }
    return out;
}

void save_states(const std::vector<OperationState>& states,
                 const std::string& path) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& st : states) {
        nlohmann::json rec = {{"state_id", st.state_id},
                              {"description", st.description}};
        if (!st.line_currents_a.empty()) {
            nlohmann::json m = nlohmann::json::object();
            for (const auto& [id, v] : st.line_currents_a) m[id] = v;
            rec["line_currents"] = m;
        }
        if (!st.line_multipliers.empty()) {
            nlohmann::json m = nlohmann::json::object();
            for (const auto& [id, v] : st.line_multipliers) m[id] = v;
            rec["line_multipliers"] = m;
        }
        list.push_back(rec);
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write states file: " + path);
    out << list.dump(2) << "\n";
}

void save_traces_csv(const std::vector<TemperatureTrace>& traces,
                     const std::string& path, bool append) {
    std::ofstream out(path, append ? std::ios::app : std::ios::out);
    if (!out) throw InputError("cannot write trace file: " + path);
    if (!append) out << "segment_id,state_id,t_s,temp_c\n";
    for (const auto& tr : traces)
        for (const auto& p : tr.samples)
            out << tr.segment_id << ',' << tr.state_id << ','
                << format_sig6(p.t_s) << ',' << format_sig6(p.temp_c) << '\n';
}

std::vector<TemperatureTrace> load_traces_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "segment_id,state_id,t_s,temp_c")
        throw SchemaError("trace CSV " + path + ": unexpected header");

    std::vector<TemperatureTrace> traces;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t a = line.find(',');
        std::size_t b = line.find(',', a + 1);
        std::size_t c = line.find(',', b + 1);
        if (a == std::string::npos || b == std::string::npos ||
            c == std::string::npos)
            throw ParseError("trace CSV line " + std::to_string(line_no) +
                             ": expected 4 fields");
        std::string seg = line.substr(0, a);
        std::string state = line.substr(a + 1, b - a - 1);
        double t, temp;
        try {
            t = std::stod(line.substr(b + 1, c - b - 1));
            temp = std::stod(line.substr(c + 1));
        } catch (const std::exception&) {
            throw ParseError("trace CSV line " + std::to_string(line_no) +
                             ": bad number");
        }
        auto key = std::make_pair(seg, state);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, traces.size()).first;
            traces.push_back({seg, state, {}, std::nullopt});
        }
        traces[it->second].samples.push_back({t, temp});
    }
    return traces;
}

void save_batch_report(const BatchReport& report, const std::string& path) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& s : report.states)
        states.push_back({{"state_id", s.state_id},
                          {"eval_seconds", s.eval_seconds},
                          {"flagged_segments", s.flagged_segments}});
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& f : report.flagged)
        flagged.push_back({{"state_id", f.state_id},
                           {"segment_id", f.segment_id},
                           {"over_temperature_at_s", f.over_temperature_at_s}});
    nlohmann::json doc = {
            {"schema_version", 1},
            {"segment_count", report.segment_count},
            {"snapshot_count", report.snapshot_count},
            {"model_count", report.model_count},
            {"timings",
             {{"clustering_seconds", report.clustering_seconds},
              {"parameter_generation_seconds",
               report.parameter_generation_seconds},
              {"mean_state_eval_seconds", report.mean_state_eval_seconds},
              {"total_seconds", report.total_seconds}}},
            {"states", states},
            {"flagged", flagged},
            {"failures", report.failures},
            {"config",
             {{"max_segment_length_km", report.config.max_segment_length_km},
              {"interpolation",
               report.config.interpolation == InterpolationMode::Nearest
                       ? "nearest"
                       : "bilinear"},
              {"use_clustering", report.config.use_clustering},
              {"cluster_k", report.config.cluster.k},
              {"reference_fractions", report.config.reference_fractions},
              {"rebuild_fraction", report.config.rebuild_fraction},
              {"temperature_limit_c", report.config.temperature_limit_c},
              {"trace_step_s", report.config.trace_step_s},
              {"seed", report.config.seed}}},
    };
    std::ofstream out(path);
    if (!out) throw InputError("cannot write report file: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace linetherm
