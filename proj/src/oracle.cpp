#include "linetherm/oracle.hpp"

#include <cmath>

#include "linetherm/util.hpp"

namespace linetherm {

namespace {

double step_once(const Conductor& c, const EnvironmentSample& env,
                 double line_azimuth_deg, double current_a, double temp_c,
                 double h, IntegrationConfig::Method method) {
    auto rhs = [&](double t) {
        return heat_balance_rhs(c, env, line_azimuth_deg, current_a, t);
    };
    if (method == IntegrationConfig::Method::Euler)
        return temp_c + h * rhs(temp_c);
    double k1 = rhs(temp_c);
    double k2 = rhs(temp_c + 0.5 * h * k1);
    double k3 = rhs(temp_c + 0.5 * h * k2);
    double k4 = rhs(temp_c + h * k3);
    return temp_c + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Advances by `duration` appending points at t0 + i*step; the final partial
// step (if any) is taken with a shortened h so the window endpoint is exact.
double advance(const Conductor& c, const EnvironmentSample& env,
               double line_azimuth_deg, double current_a, double temp_c,
               double t0, double duration, const IntegrationConfig& config,
               Trace& out) {
    double t = 0.0;
    while (t < duration - 1e-9) {
        double h = std::min(config.step_s, duration - t);
        temp_c = step_once(c, env, line_azimuth_deg, current_a, temp_c, h,
                           config.method);
        t += h;
        out.push_back({t0 + t, temp_c});
    }
    return temp_c;
}

}  // namespace

Trace integrate(const Conductor& c, const EnvironmentSample& env,
                double line_azimuth_deg, double current_a, double initial_c,
                const IntegrationConfig& config) {
    if (!(config.step_s > 0.0) || config.max_time_s < config.step_s)
        throw InputError("integration config: need step > 0 and max_time >= step");
    Trace out;
    out.reserve(static_cast<std::size_t>(config.max_time_s / config.step_s) + 2);
    out.push_back({0.0, initial_c});
    advance(c, env, line_azimuth_deg, current_a, initial_c, 0.0,
            config.max_time_s, config, out);
    return out;
}

Trace integrate_windows(const Conductor& c, double line_azimuth_deg,
                        double initial_c,
                        const std::vector<IntegrationWindow>& windows,
                        const IntegrationConfig& config) {
    Trace out;
    out.push_back({0.0, initial_c});
    double temp = initial_c;
    double t0 = 0.0;
    for (const auto& w : windows) {
        temp = advance(c, w.env, line_azimuth_deg, w.current_a, temp, t0,
                       w.duration_s, config, out);
        t0 += w.duration_s;
    }
    return out;
}

std::optional<double> crossing_time(const Trace& trace, double threshold_c) {
    if (trace.empty()) throw InputError("crossing_time: empty trace");
    if (trace.front().temp_c >= threshold_c) return 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].temp_c >= threshold_c) {
            const TracePoint& a = trace[i - 1];
            const TracePoint& b = trace[i];
            double frac = (threshold_c - a.temp_c) / (b.temp_c - a.temp_c);
            return a.t_s + frac * (b.t_s - a.t_s);
        }
    }
    return std::nullopt;
}

}  // namespace linetherm
