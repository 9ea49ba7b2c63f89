#pragma once

#include <optional>
#include <vector>

#include "linetherm/physics.hpp"

namespace linetherm {

struct TracePoint {
    double t_s;
    double temp_c;
};

using Trace = std::vector<TracePoint>;

struct IntegrationConfig {
    double step_s = 5.0;
    enum class Method { Rk4, Euler } method = Method::Rk4;
    double max_time_s = 3600.0;
};

/// Fixed-step integration of the heat balance under a constant environment.
/// The trace holds every step endpoint, starting at (0, initial_c).
Trace integrate(const Conductor& c, const EnvironmentSample& env,
                double line_azimuth_deg, double current_a, double initial_c,
                const IntegrationConfig& config);

/// Continues an integration across a sequence of (environment, current,
/// duration) windows, each held constant; used as the reference for stitched
/// analytical traces.
struct IntegrationWindow {
    EnvironmentSample env;
    double current_a;
    double duration_s;
};

Trace integrate_windows(const Conductor& c, double line_azimuth_deg,
                        double initial_c,
                        const std::vector<IntegrationWindow>& windows,
                        const IntegrationConfig& config);

/// First time the trace reaches threshold_c, linearly interpolated inside the
/// step; nullopt when never reached.
std::optional<double> crossing_time(const Trace& trace, double threshold_c);

}  // namespace linetherm
