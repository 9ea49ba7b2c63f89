#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "linetherm/analytic.hpp"
#include "linetherm/oracle.hpp"

using namespace linetherm;
using linetherm::testing::ReferenceScenario;
using linetherm::testing::bisect_steady_state;
using linetherm::testing::drake_single;
using linetherm::testing::random_draw;

TEST_CASE("steady state: zero forcing converges to ambient in one iteration") {
    Conductor drake = drake_single();
    EnvironmentSample env;
    env.ambient_c = 25.0;
    env.wind_speed_ms = 1.0;
    auto r = solve_steady_state(drake, env, 0.0, 0.0, 25.0);
    CHECK(r.steady_c == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(r.iterations == 1);
}

TEST_CASE("steady state: reference scenario matches the bisection oracle") {
    ReferenceScenario s;
    auto r = solve_steady_state(s.conductor, s.env, s.line_azimuth_deg,
                                s.current_a, s.initial_c);
    double oracle = bisect_steady_state(s.conductor, s.env, s.line_azimuth_deg,
                                        s.current_a);
    CHECK(std::fabs(r.steady_c - oracle) < 0.01);
    CHECK(r.residual_w_per_m < 1e-6);
    CHECK(r.iterations <= 10);
}

TEST_CASE("steady state: random suite converges and matches the oracle") {
    std::mt19937_64 rng(2024);
    int total = 0, within10 = 0;
    while (total < 1000) {
        auto d = random_draw(rng);
        double oracle = bisect_steady_state(d.conductor, d.env,
                                            d.line_azimuth_deg, d.current_a);
        if (oracle >= 300.0) continue;
        ++total;
        auto r = solve_steady_state(d.conductor, d.env, d.line_azimuth_deg,
                                    d.current_a, d.initial_c);
        CHECK(std::fabs(r.steady_c - oracle) < 0.01);
        if (r.iterations <= 10) ++within10;
    }
    CHECK(within10 >= 950);
}

TEST_CASE("steady state: non-convergence carries the last iterate") {
    ReferenceScenario s;
    SolverConfig config;
    config.max_iterations = 1;
    config.heat_mismatch_tolerance_w_per_m = 1e-15;
    CHECK_THROWS_AS(solve_steady_state(s.conductor, s.env, s.line_azimuth_deg,
                                       s.current_a, s.initial_c, config),
                    NonConvergence);
    try {
        solve_steady_state(s.conductor, s.env, s.line_azimuth_deg, s.current_a,
                           s.initial_c, config);
    } catch (const NonConvergence& e) {
        CHECK(e.iterations == 1);
        CHECK(e.last_temp_c > s.env.ambient_c);
    }
}

TEST_CASE("linearize: model invariants") {
    ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    s.current_a, s.initial_c);

    CHECK(m.delta_b == doctest::Approx(m.steady_c - m.ambient_c).epsilon(1e-12));
    CHECK(m.delta_a ==
          doctest::Approx(m.delta_b + m.beta0 / m.beta_slope).epsilon(1e-9));
    CHECK(m.c_ratio ==
          doctest::Approx((m.steady_c - m.initial_c) /
                          (m.delta_a + m.initial_c - m.ambient_c))
                  .epsilon(1e-12));
    // Optimal-rate identity.
    CHECK(m.rate ==
          doctest::Approx(m.beta_slope * (m.delta_a + m.delta_b)).epsilon(1e-9));
    CHECK(m.rate == doctest::Approx(std::sqrt(m.beta0 * m.beta0 +
                                              4.0 * m.q_si * m.beta_slope))
                            .epsilon(1e-9));
    CHECK(m.rate > 0.0);
    CHECK(m.beta_slope > 0.0);  // losses steepen with excess temperature here
}

TEST_CASE("linearize: secant reproduces beta at both endpoints") {
    ReferenceScenario s;
    auto ss = solve_steady_state(s.conductor, s.env, s.line_azimuth_deg,
                                 s.current_a, s.initial_c);
    LinearizedModel m = linearize(s.conductor, s.env, s.line_azimuth_deg,
                                  s.current_a, s.initial_c, ss.steady_c);
    double b0 = beta_coefficient(s.conductor, s.env, s.line_azimuth_deg,
                                 s.current_a, s.initial_c);
    double be = beta_coefficient(s.conductor, s.env, s.line_azimuth_deg,
                                 s.current_a, ss.steady_c);
    double dt0 = s.initial_c - s.env.ambient_c;
    double dte = ss.steady_c - s.env.ambient_c;
    CHECK(m.beta0 + m.beta_slope * dt0 == doctest::Approx(b0).epsilon(1e-12));
    CHECK(m.beta0 + m.beta_slope * dte == doctest::Approx(be).epsilon(1e-9));
}

TEST_CASE("linearize: degenerate when already at steady state") {
    Conductor drake = drake_single();
    EnvironmentSample env;
    env.ambient_c = 25.0;
    env.wind_speed_ms = 1.0;
    LinearizedModel m = build_model(drake, env, 0.0, 0.0, 25.0);
    CHECK(m.degenerate);
    for (double t : {0.0, 10.0, 1e4})
        CHECK(eval_riccati(m, t) == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("closed forms: initial condition, limit, and ODE consistency") {
    ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    s.current_a, s.initial_c);

    CHECK(eval_riccati(m, 0.0) == doctest::Approx(s.initial_c).epsilon(1e-9));
    CHECK(eval_first_order(m, 0.0) == doctest::Approx(s.initial_c).epsilon(1e-12));

    double t_settle = 20.0 / m.rate;
    CHECK(std::fabs(eval_riccati(m, t_settle) - m.steady_c) < 1e-6);
    CHECK(std::fabs(eval_first_order(m, t_settle) - m.steady_c) < 1e-6);

    // The evaluated trace satisfies the quadratic ODE: central difference vs
    // q_si - beta0*dT - slope*dT^2.
    for (double t : {30.0, 300.0, 1500.0, 4000.0}) {
        double h = 0.01;
        double deriv = (eval_riccati(m, t + h) - eval_riccati(m, t - h)) /
                       (2.0 * h);
        double dt = eval_riccati(m, t) - m.ambient_c;
        double rhs = m.q_si - m.beta0 * dt - m.beta_slope * dt * dt;
        CHECK(std::fabs(deriv - rhs) < 1e-4);
    }
}

TEST_CASE("closed forms: track the integrator on the reference scenario") {
    ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    s.current_a, s.initial_c);
    IntegrationConfig ic;
    ic.step_s = 5.0;
    ic.max_time_s = 1800.0;
    Trace rk4 = integrate(s.conductor, s.env, s.line_azimuth_deg, s.current_a,
                          s.initial_c, ic);
    double max_ric_high = -1e9;
    for (const auto& p : rk4) {
        double ric = eval_riccati(m, p.t_s);
        max_ric_high = std::max(max_ric_high, ric - p.temp_c);
        CHECK(std::fabs(ric - p.temp_c) <= 0.6);
    }
    CHECK(max_ric_high <= 0.6);
}

TEST_CASE("first order: never below the quadratic solution") {
    ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    s.current_a, s.initial_c);
    double bound = error_bound(m);
    CHECK(bound >= 0.0);
    for (int i = 0; i <= 2000; ++i) {
        double t = i * 7.2;  // 0..4 h
        double gap = eval_first_order(m, t) - eval_riccati(m, t);
        CHECK(gap >= -1e-9);
        CHECK(gap <= bound + 1e-9);
    }
}

TEST_CASE("first order: degenerate slope limit is the exact linear solution") {
    LinearizedModel m = model_from_coefficients(40.0, 50.0, 0.05, 1e-3, 0.0,
                                                800.0);
    CHECK(m.degenerate);
    CHECK(m.rate == doctest::Approx(1e-3));
    CHECK(m.steady_c == doctest::Approx(40.0 + 0.05 / 1e-3));
    for (double t : {0.0, 100.0, 2000.0})
        CHECK(eval_riccati(m, t) ==
              doctest::Approx(eval_first_order(m, t)).epsilon(1e-12));
}

TEST_CASE("error bound: conservativeness property over random models") {
    // Random consistent models: coefficients drawn, steady state derived.
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int built = 0;
    while (built < 1000) {
        double ambient = u01(rng) * 40.0;
        double beta0 = 2e-4 + u01(rng) * 2e-3;
        double beta_slope = u01(rng) * 4e-5;
        double qsi = u01(rng) * 0.08;
        double initial = ambient - 5.0 + u01(rng) * 80.0;
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
        CHECK(bound >= 0.0);
        double horizon = 20.0 / m.rate;
        double sup = -1e18;
        for (int i = 0; i <= 400; ++i) {
            double t = horizon * i / 400.0;
            double gap = eval_first_order(m, t) - eval_riccati(m, t);
            sup = std::max(sup, gap);
            CHECK(gap >= -1e-9);
        }
        CHECK(sup <= bound + 1e-9);
    }
}

TEST_CASE("error bound: zero at steady start, invalid beyond the unstable root") {
    LinearizedModel m = model_from_coefficients(40.0, 40.0 + 50.0, 0.05, 1e-3,
                                                1e-5, 800.0);
    // c_ratio == 0 when initial == steady.
    LinearizedModel at_steady = with_initial_temp(m, m.steady_c);
    CHECK(error_bound(at_steady) == doctest::Approx(0.0).epsilon(1e-12));

    LinearizedModel beyond = with_initial_temp(m, m.ambient_c - m.delta_a - 1.0);
    CHECK(beyond.c_ratio < -1.0);
    CHECK_THROWS_AS(error_bound(beyond), InvalidModel);
}

TEST_CASE("update for current: identity and round trip") {
    ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    1500.0, s.initial_c);
    LinearizedModel same = update_for_current(m, s.conductor, 1500.0);
    CHECK(same.steady_c == doctest::Approx(m.steady_c).epsilon(1e-12));
    CHECK(same.q_si == doctest::Approx(m.q_si).epsilon(1e-12));
    CHECK(same.beta0 == doctest::Approx(m.beta0).epsilon(1e-12));
    CHECK(same.rate == doctest::Approx(m.rate).epsilon(1e-12));
    CHECK(same.c_ratio == doctest::Approx(m.c_ratio).epsilon(1e-12));

    LinearizedModel up = update_for_current(m, s.conductor, 900.0);
    LinearizedModel back = update_for_current(up, s.conductor, 1500.0);
    CHECK(back.steady_c == doctest::Approx(m.steady_c).epsilon(1e-9));
    CHECK(back.beta0 == doctest::Approx(m.beta0).epsilon(1e-9));
    CHECK(back.q_si == doctest::Approx(m.q_si).epsilon(1e-9));
}

TEST_CASE("update for current: two references cover 0-200% of rating") {
    ReferenceScenario s;
    LinearizedModel lo = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                     1400.0, s.initial_c);
    LinearizedModel hi = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                     1900.0, s.initial_c);
    double worst = 0.0;
    for (double ip = 0.0; ip <= 2000.0; ip += 50.0) {
        const LinearizedModel& ref =
                std::fabs(ip - 1400.0) <= std::fabs(ip - 1900.0) ? lo : hi;
        LinearizedModel upd = update_for_current(ref, s.conductor, ip);
        double full = solve_steady_state(s.conductor, s.env, s.line_azimuth_deg,
                                         ip, s.initial_c)
                              .steady_c;
        worst = std::max(worst, std::fabs(upd.steady_c - full));
    }
    CHECK(worst < 2.0);

    // Single reference at 1400: error below 1.5 degC up to the reference.
    for (double ip = 0.0; ip <= 1400.0; ip += 100.0) {
        LinearizedModel upd = update_for_current(lo, s.conductor, ip);
        double full = solve_steady_state(s.conductor, s.env, s.line_azimuth_deg,
                                         ip, s.initial_c)
                              .steady_c;
        CHECK(std::fabs(upd.steady_c - full) < 1.5);
    }
}

TEST_CASE("time to threshold: contract cases") {
    ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    s.current_a, s.initial_c);
    CHECK(time_to_threshold(m, s.initial_c) == 0.0);
    CHECK(time_to_threshold(m, m.steady_c + 1.0) == std::nullopt);
    CHECK(time_to_threshold(m, m.steady_c) == std::nullopt);

    auto t = time_to_threshold(m, 80.0, SolutionForm::FirstOrder);
    REQUIRE(t.has_value());
    CHECK(eval_first_order(m, *t) == doctest::Approx(80.0).epsilon(1e-9));

    auto t_ric = time_to_threshold(m, 80.0, SolutionForm::Riccati);
    REQUIRE(t_ric.has_value());
    CHECK(eval_riccati(m, *t_ric) == doctest::Approx(80.0).epsilon(1e-9));
}

TEST_CASE("time to threshold: against the integrator") {
    ReferenceScenario s;
    LinearizedModel m = build_model(s.conductor, s.env, s.line_azimuth_deg,
                                    s.current_a, s.initial_c);
    IntegrationConfig ic;
    ic.step_s = 5.0;
    ic.max_time_s = 3600.0 * 4.0;
    Trace rk4 = integrate(s.conductor, s.env, s.line_azimuth_deg, s.current_a,
                          s.initial_c, ic);
    auto t_fo = time_to_threshold(m, 100.0, SolutionForm::FirstOrder);
    auto t_rk = crossing_time(rk4, 100.0);
    REQUIRE(t_fo.has_value());
    REQUIRE(t_rk.has_value());
    CHECK(std::fabs(*t_fo - *t_rk) <= 75.0);
    CHECK(*t_fo - *t_rk <= 30.0);  // conservative: not later than the oracle
}
