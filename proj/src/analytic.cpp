#include "linetherm/analytic.hpp"

#include <cmath>

#include "linetherm/util.hpp"

namespace linetherm {

namespace {

// Shared tail of model construction: given the affine loss coefficient
// (beta0, beta_slope) and the forcing q_si, derive the steady excess from the
// quadratic root and fill every dependent field. Keeping the steady
// temperature exactly on the quadratic makes eval/update/time inversions
// mutually consistent.
LinearizedModel derive_model(double ambient_c, double initial_c, double qsi,
                             double beta0, double beta_slope,
                             double reference_current_a,
                             const SolverConfig& config) {
    LinearizedModel m;
    m.ambient_c = ambient_c;
    m.initial_c = initial_c;
    m.q_si = qsi;
    m.beta0 = beta0;
    m.beta_slope = beta_slope;
    m.reference_current_a = reference_current_a;

    if (std::fabs(beta_slope) < config.degenerate_slope_threshold) {
        if (!(beta0 > 0.0))
            throw InvalidModel("degenerate model with non-positive loss coefficient");
        m.degenerate = true;
        m.beta_slope = 0.0;
        m.delta_b = qsi / beta0;
        m.delta_a = 0.0;
        m.steady_c = ambient_c + m.delta_b;
        m.rate = beta0;
        m.c_ratio = 0.0;
        return m;
    }

    double disc = beta0 * beta0 + 4.0 * qsi * beta_slope;
    if (disc < 0.0)
        throw NegativeDiscriminant(
                "loss quadratic has no real steady state; rebuild from a fresh solve");
    double s = std::sqrt(disc);
    m.delta_b = (s - beta0) / (2.0 * beta_slope);
    m.delta_a = (s + beta0) / (2.0 * beta_slope);
    m.steady_c = ambient_c + m.delta_b;
    m.rate = s;

    double denom = m.delta_a + (initial_c - ambient_c);
    if (denom == 0.0)
        throw InvalidModel("initial temperature sits on the unstable equilibrium");
    m.c_ratio = (m.steady_c - initial_c) / denom;
    return m;
}

}  // namespace

SteadyStateResult solve_steady_state(const Conductor& c,
                                     const EnvironmentSample& env,
                                     double line_azimuth_deg, double current_a,
                                     double initial_c,
                                     const SolverConfig& config) {
    double mcp = c.heat_capacity_j_per_m_c;
    double qsi = q_si(c, env, line_azimuth_deg, current_a);

    auto beta_at_dt = [&](double dt) {
        return beta_coefficient(c, env, line_azimuth_deg, current_a,
                                env.ambient_c + dt);
    };

    // Anchor for the secant derivative: starts at the initial temperature and
    // then tracks the previous iterate. At very high current the loss
    // coefficient can be negative near the initial temperature (local joule
    // runaway); walk the anchor upward until losses dominate so the guess is
    // usable.
    double dt_prev = initial_c - env.ambient_c;
    double beta_prev = beta_at_dt(dt_prev);
    if (!(beta_prev > 0.0)) {
        double step = std::max(std::fabs(dt_prev), 10.0);
        bool found = false;
        for (int i = 0; i < 60; ++i) {
            dt_prev += step;
            beta_prev = beta_at_dt(dt_prev);
            if (beta_prev > 0.0) {
                found = true;
                break;
            }
            step *= 1.5;
        }
        if (!found)
            throw NonConvergence("loss coefficient never turns positive",
                                 initial_c, 0);
    }

    double dt = qsi / beta_prev;  // initial guess
    int iter = 0;
    while (iter < config.max_iterations) {
        ++iter;
        double beta = beta_at_dt(dt);
        double mismatch = qsi - beta * dt;  // degC/s
        if (std::fabs(mismatch) * mcp < config.heat_mismatch_tolerance_w_per_m)
            return {env.ambient_c + dt, iter, std::fabs(mismatch) * mcp};

        double slope = 0.0;
        if (std::fabs(dt - dt_prev) > 1e-12)
            slope = (beta - beta_prev) / (dt - dt_prev);
        double derivative = -beta - slope * dt;
        if (derivative == 0.0 || !std::isfinite(derivative))
            throw NonConvergence("stalled: zero mismatch derivative",
                                 env.ambient_c + dt, iter);
        dt_prev = dt;
        beta_prev = beta;
        dt -= mismatch / derivative;
        if (!std::isfinite(dt))
            throw NonConvergence("diverged to non-finite temperature",
                                 env.ambient_c + dt, iter);
    }
    throw NonConvergence("max iterations reached", env.ambient_c + dt, iter);
}

LinearizedModel linearize(const Conductor& c, const EnvironmentSample& env,
                          double line_azimuth_deg, double current_a,
                          double initial_c, double steady_c,
                          const SolverConfig& config) {
    double qsi = q_si(c, env, line_azimuth_deg, current_a);
    double dt0 = initial_c - env.ambient_c;
    double dte = steady_c - env.ambient_c;
    double beta_init = beta_coefficient(c, env, line_azimuth_deg, current_a,
                                        initial_c);

    double beta_slope = 0.0;
    if (std::fabs(dte - dt0) >= 1e-9) {
        double beta_steady = beta_coefficient(c, env, line_azimuth_deg, current_a,
                                              steady_c);
        beta_slope = (beta_steady - beta_init) / (dte - dt0);
    }
    double beta0 = beta_init - beta_slope * dt0;
    return derive_model(env.ambient_c, initial_c, qsi, beta0, beta_slope,
                        current_a, config);
}

LinearizedModel build_model(const Conductor& c, const EnvironmentSample& env,
                            double line_azimuth_deg, double current_a,
                            double initial_c, const SolverConfig& config) {
    SteadyStateResult ss = solve_steady_state(c, env, line_azimuth_deg, current_a,
                                              initial_c, config);
    return linearize(c, env, line_azimuth_deg, current_a, initial_c, ss.steady_c,
                     config);
}

LinearizedModel model_from_coefficients(double ambient_c, double initial_c,
                                        double q_si, double beta0,
                                        double beta_slope,
                                        double reference_current_a,
                                        const SolverConfig& config) {
    return derive_model(ambient_c, initial_c, q_si, beta0, beta_slope,
                        reference_current_a, config);
}

double eval_riccati(const LinearizedModel& m, double t_s) {
    if (m.degenerate) return eval_first_order(m, t_s);
    double e = std::exp(-m.rate * t_s);
    double ce = m.c_ratio * e;
    return (m.delta_b - m.delta_a * ce) / (1.0 + ce) + m.ambient_c;
}

double eval_first_order(const LinearizedModel& m, double t_s) {
    return m.steady_c + (m.initial_c - m.steady_c) * std::exp(-m.rate * t_s);
}

double eval(const LinearizedModel& m, double t_s, SolutionForm form) {
    return form == SolutionForm::Riccati ? eval_riccati(m, t_s)
                                         : eval_first_order(m, t_s);
}

double error_bound(const LinearizedModel& m) {
    if (m.degenerate) return 0.0;
    if (m.c_ratio <= -1.0)
        throw InvalidModel("initial condition beyond the unstable equilibrium");
    double span = m.delta_a + m.delta_b;  // = rate / beta_slope
    if (span < 0.0)
        throw InvalidModel("conservativeness bound requires non-negative "
                           "loss-coefficient slope");
    double root = std::sqrt(1.0 + m.c_ratio);
    double d = root - 1.0;
    return d * d / (1.0 + m.c_ratio) * span;
}

LinearizedModel update_for_current(const LinearizedModel& m, const Conductor& c,
                                   double new_current_a) {
    double i_old = c.subconductor_current(m.reference_current_a);
    double i_new = c.subconductor_current(new_current_a);
    double di2 = i_new * i_new - i_old * i_old;
    double mcp = c.heat_capacity_j_per_m_c;

    double qsi = m.q_si + di2 * c.resistance_at(m.ambient_c) / mcp;
    double beta0 = m.beta0 - di2 * c.resistance_slope_ohm_per_m_c / mcp;

    return derive_model(m.ambient_c, m.initial_c, qsi, beta0, m.beta_slope,
                        new_current_a, SolverConfig{});
}

LinearizedModel with_initial_temp(const LinearizedModel& m, double initial_c) {
    LinearizedModel out = m;
    out.initial_c = initial_c;
    if (!out.degenerate) {
        double denom = out.delta_a + (initial_c - out.ambient_c);
        if (denom == 0.0)
            throw InvalidModel("initial temperature sits on the unstable equilibrium");
        out.c_ratio = (out.steady_c - initial_c) / denom;
    }
    return out;
}

std::optional<double> time_to_threshold(const LinearizedModel& m,
                                        double threshold_c, SolutionForm form) {
    if (m.initial_c >= threshold_c) return 0.0;
    if (m.steady_c <= threshold_c) return std::nullopt;

    double ratio = (m.steady_c - m.initial_c) / (m.steady_c - threshold_c);
    if (form == SolutionForm::Riccati && !m.degenerate) {
        // Exact inversion of the quadratic-model solution.
        double num = (threshold_c - m.ambient_c) + m.delta_a;
        double den = (m.initial_c - m.ambient_c) + m.delta_a;
        ratio *= num / den;
    }
    return std::log(ratio) / m.rate;
}

}  // namespace linetherm
