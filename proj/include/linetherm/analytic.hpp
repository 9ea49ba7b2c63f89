#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "linetherm/physics.hpp"

namespace linetherm {

/// Iteration controls for the steady-state solve.
struct SolverConfig {
    double heat_mismatch_tolerance_w_per_m = 1e-6;
    int max_iterations = 50;
    double degenerate_slope_threshold = 1e-12;  // 1/(s*degC)
};

struct NonConvergence : std::runtime_error {
    NonConvergence(const std::string& msg, double last_c, int iters)
        : std::runtime_error(msg), last_temp_c(last_c), iterations(iters) {}
    double last_temp_c;
    int iterations;
};

struct NegativeDiscriminant : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SteadyStateResult {
    double steady_c;
    int iterations;
    double residual_w_per_m;
};

/// Affine-in-dT approximation of the loss coefficient around one operating
/// point, plus everything derived from it. Valid for one environment sample
/// and one reference current.
struct LinearizedModel {
    double ambient_c = 0.0;
    double initial_c = 0.0;
    double steady_c = 0.0;
    double q_si = 0.0;        // degC/s
    double beta0 = 0.0;       // 1/s, loss coefficient at dT = 0
    double beta_slope = 0.0;  // 1/(s*degC)
    double delta_a = 0.0;     // degC; -delta_a is the unstable equilibrium excess
    double delta_b = 0.0;     // degC; steady-state excess temperature
    double c_ratio = 0.0;     // dimensionless initial-condition ratio
    double rate = 0.0;        // 1/s, first-order decay rate
    double reference_current_a = 0.0;
    bool degenerate = false;  // |beta_slope| below threshold: plain exponential
};

enum class SolutionForm { FirstOrder, Riccati };

/// Newton-Raphson solve of the steady-state heat balance. The initial guess
/// is q_si / beta(initial temperature); the derivative uses the secant of
/// beta between the initial temperature and the current iterate. Throws
/// NonConvergence when max_iterations is exhausted.
SteadyStateResult solve_steady_state(const Conductor& c,
                                     const EnvironmentSample& env,
                                     double line_azimuth_deg, double current_a,
                                     double initial_c,
                                     const SolverConfig& config = {});

/// Builds the linearized model from a converged steady-state temperature.
/// The stored steady temperature is the exact root of the fitted quadratic
/// (within solver tolerance of the input) so all model identities hold.
LinearizedModel linearize(const Conductor& c, const EnvironmentSample& env,
                          double line_azimuth_deg, double current_a,
                          double initial_c, double steady_c,
                          const SolverConfig& config = {});

/// solve_steady_state followed by linearize.
LinearizedModel build_model(const Conductor& c, const EnvironmentSample& env,
                            double line_azimuth_deg, double current_a,
                            double initial_c, const SolverConfig& config = {});

/// Builds a model directly from affine loss coefficients; the steady
/// temperature is the stable root of the loss quadratic.
LinearizedModel model_from_coefficients(double ambient_c, double initial_c,
                                        double q_si, double beta0,
                                        double beta_slope,
                                        double reference_current_a,
                                        const SolverConfig& config = {});

/// Closed-form solution of the quadratic (Riccati) approximation at time t.
double eval_riccati(const LinearizedModel& m, double t_s);

/// Conservative single-exponential solution at time t; never below the
/// Riccati value.
double eval_first_order(const LinearizedModel& m, double t_s);

double eval(const LinearizedModel& m, double t_s, SolutionForm form);

/// Tight upper bound on sup_t (first_order - riccati). Throws InvalidModel
/// when the initial condition lies beyond the unstable equilibrium.
double error_bound(const LinearizedModel& m);

/// Re-derives the model for a different current without a fresh solve:
/// beta_slope is kept, q_si and beta0 shift by the joule-heat delta, and the
/// steady temperature comes from the quadratic root. Throws
/// NegativeDiscriminant when the shifted quadratic has no real root.
LinearizedModel update_for_current(const LinearizedModel& m, const Conductor& c,
                                   double new_current_a);

/// Rebuilds the derived fields after replacing the initial temperature
/// (used when stitching steps of a trace).
LinearizedModel with_initial_temp(const LinearizedModel& m, double initial_c);

/// Time for the solution to reach threshold_c: nullopt when the steady state
/// never reaches it, 0 when the initial temperature already exceeds it.
std::optional<double> time_to_threshold(const LinearizedModel& m,
                                        double threshold_c,
                                        SolutionForm form = SolutionForm::FirstOrder);

}  // namespace linetherm
