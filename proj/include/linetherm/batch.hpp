#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linetherm/analytic.hpp"
#include "linetherm/cluster.hpp"
#include "linetherm/geo.hpp"
#include "linetherm/oracle.hpp"
#include "linetherm/util.hpp"

namespace linetherm {

struct MissingParameters : InputError {
    using InputError::InputError;
};

/// One study case: a current on every line, absolute or as a multiplier on
/// the line's base current (unlisted lines stay at base).
struct OperationState {
    std::string state_id;
    std::string description;
    std::map<std::string, double> line_currents_a;
    std::map<std::string, double> line_multipliers;

    double current_for(const std::string& line_id, double base_a) const {
        if (auto it = line_currents_a.find(line_id); it != line_currents_a.end())
            return it->second;
        if (auto it = line_multipliers.find(line_id); it != line_multipliers.end())
            return it->second * base_a;
        return base_a;
    }
};

struct TemperatureTrace {
    std::string segment_id;
    std::string state_id;
    std::vector<TracePoint> samples;
    std::optional<double> over_temperature_at_s;
};

enum class EvalOutput { DenseTrace, Screening };

struct BatchConfig {
    double max_segment_length_km = 3.0;
    InterpolationMode interpolation = InterpolationMode::Nearest;

    bool use_clustering = false;
    ClusterSpec cluster;
    double current_band_ratio = 1.5;  // sub-groups clusters by base-current band

    /// Reference currents per group, as fractions of the base-state current.
    std::vector<double> reference_fractions = {1.0, 1.8};
    /// Fresh steady-state solve when a state's current exceeds this fraction
    /// of the group's base current.
    double rebuild_fraction = 2.0;

    double temperature_limit_c = 100.0;
    SolutionForm eval_form = SolutionForm::Riccati;       // emitted temperatures
    SolutionForm crossing_form = SolutionForm::FirstOrder;  // limit crossings
    EvalOutput output = EvalOutput::Screening;  // run_batch evaluation mode
    double trace_step_s = 5.0;

    SolverConfig solver;
    std::optional<double> initial_temp_override_c;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    bool keep_traces = true;
};

/// Per-(snapshot, group) analytical-solution parameters: one model per
/// configured reference current, all sharing the group representative's
/// environment.
struct StoredModelSet {
    EnvironmentSample env;
    double line_azimuth_deg = 0.0;
    int conductor_idx = 0;
    double base_current_a = 0.0;
    std::vector<LinearizedModel> refs;
    bool failed = false;  // solver failure: this entry integrates numerically
};

struct ParameterStore {
    std::vector<Segment> segments;
    std::vector<Conductor> conductors;        // resolved, deduplicated
    std::vector<int> conductor_of_segment;
    std::vector<std::int64_t> times_s;        // snapshot timestamps
    std::vector<double> durations_s;          // per snapshot (last is 0)

    std::vector<std::vector<StoredModelSet>> groups;  // [snapshot][group]
    std::vector<std::vector<int>> group_of;           // [snapshot][segment]

    std::vector<double> initial_temp_c;  // per segment at series start
    std::size_t model_count = 0;
    double generation_seconds = 0.0;
    double clustering_seconds = 0.0;
    std::vector<std::string> failures;

    double horizon_s() const {
        return times_s.size() < 2 ? 0.0
                                  : static_cast<double>(times_s.back() -
                                                        times_s.front());
    }
};

/// Builds analytical-solution parameters for every snapshot and every segment
/// (or cluster group), chaining each group's initial temperature along the
/// base state. Solver failures are recorded and marked for numerical
/// fallback rather than aborting.
ParameterStore generate_parameters(const std::vector<Segment>& segments,
                                   const std::vector<Conductor>& catalog,
                                   const WeatherSeries& series,
                                   const OperationState& base_state,
                                   const BatchConfig& config);

/// Walks the weather series for one operation state: per segment and per
/// step, the nearest reference model is re-based to the state's current and
/// to the running temperature, then sampled densely (DenseTrace) or at step
/// boundaries (Screening). The first limit crossing is flagged.
std::vector<TemperatureTrace> evaluate_state(const ParameterStore& store,
                                             const OperationState& state,
                                             EvalOutput output,
                                             const BatchConfig& config);

struct FlaggedPair {
    std::string state_id;
    std::string segment_id;
    double over_temperature_at_s;
};

struct StateSummary {
    std::string state_id;
    double eval_seconds = 0.0;
    int flagged_segments = 0;
};

struct BatchReport {
    std::size_t segment_count = 0;
    std::size_t snapshot_count = 0;
    std::size_t model_count = 0;
    double clustering_seconds = 0.0;
    double parameter_generation_seconds = 0.0;
    double mean_state_eval_seconds = 0.0;
    double total_seconds = 0.0;
    std::vector<StateSummary> states;
    std::vector<FlaggedPair> flagged;
    std::vector<std::string> failures;
    std::vector<std::vector<TemperatureTrace>> traces;  // per state if kept
    BatchConfig config;
};

using TraceSink = std::function<void(const OperationState&,
                                     const std::vector<TemperatureTrace>&)>;

/// Full cycle: segmentation, sampling, optional clustering, parameter
/// generation, then per-state evaluation in screening output. When a sink is
/// given traces are streamed to it instead of being kept in the report.
BatchReport run_batch(const Network& network,
                      const std::vector<Conductor>& catalog,
                      const WeatherSeries& series,
                      const std::vector<OperationState>& states,
                      const BatchConfig& config, const TraceSink& sink = {});

struct SegmentTemperature {
    std::string segment_id;
    double temp_c;
    bool over_limit;
};

/// Per-segment temperatures at time t (linear interpolation between samples).
/// Throws InputError when t lies outside the trace span.
std::vector<SegmentTemperature> snapshot_at(
        const std::vector<TemperatureTrace>& traces, double t_s);

/// States file: JSON list of {state_id, description, line_currents and/or
/// line_multipliers maps}.
std::vector<OperationState> load_states(const std::string& path);
void save_states(const std::vector<OperationState>& states,
                 const std::string& path);

void save_traces_csv(const std::vector<TemperatureTrace>& traces,
                     const std::string& path, bool append = false);
std::vector<TemperatureTrace> load_traces_csv(const std::string& path);
void save_batch_report(const BatchReport& report, const std::string& path);

}  // namespace linetherm
