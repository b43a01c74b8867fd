#include <catch2/catch_amalgamated.hpp>

#include "editext/oracle.hpp"

using namespace editext;

TEST_CASE("posterior mean closed form at its limit points") {
    Matrix mu(2, 2), x_t(2, 2);
    mu(0, 0) = 2.0; mu(0, 1) = -1.0; mu(1, 0) = 0.5; mu(1, 1) = 3.0;
    x_t(0, 0) = 1.0; x_t(0, 1) = 0.0; x_t(1, 0) = -2.0; x_t(1, 1) = 4.0;

    // alpha = 1 (no noise): the observation is the answer.
    Matrix at1 = posterior_mean_at_alpha(mu, 1.0, x_t, 1.0);
    REQUIRE(max_abs_diff(at1, x_t) <= 1e-12);

    // Degenerate prior: the class mean is the answer regardless of x_t.
    Matrix tight = posterior_mean_at_alpha(mu, 1e-12, x_t, 0.5);
    REQUIRE(max_abs_diff(tight, mu) <= 1e-9);

    // General scalar point: mu=2, prior_var=1, alpha=0.5, x_t=1.
    Matrix m1(1, 1), xt1(1, 1);
    m1(0, 0) = 2.0;
    xt1(0, 0) = 1.0;
    double got = posterior_mean_at_alpha(m1, 1.0, xt1, 0.5)(0, 0);
    double want = 2.0 + (std::sqrt(0.5) * 1.0 / (0.5 + 0.5)) * (1.0 - std::sqrt(0.5) * 2.0);
    REQUIRE(got == Catch::Approx(want).epsilon(1e-12));

    REQUIRE_THROWS_AS(posterior_mean_at_alpha(mu, 0.0, x_t, 0.5), config_error);
    REQUIRE_THROWS_AS(posterior_mean_at_alpha(mu, -1.0, x_t, 0.5), config_error);
}

TEST_CASE("posterior mean via schedule enforces preconditions") {
    NoiseSchedule s = build_schedule(32, ScheduleKind::Cosine);
    GaussianWorld world = verify_detail::default_world(2, 3);
    RngStream rng(4);
    Matrix x_t = Matrix::standard_normal(2, 3, rng);
    REQUIRE_THROWS_AS(posterior_mean(world, x_t, 0, 0, s), input_error);
    REQUIRE_THROWS_AS(posterior_mean(world, x_t, 1, 5, s), input_error);
    REQUIRE(posterior_mean(world, x_t, 1, 0, s).all_finite());
}

TEST_CASE("posterior mean agrees with importance-sampled Monte Carlo", "[statistical]") {
    NoiseSchedule s = build_schedule(250, ScheduleKind::Cosine);
    VerifyCheck c = check_posterior_mean_monte_carlo(s);
    INFO(c.detail);
    REQUIRE(c.pass);
}

TEST_CASE("world edits: full-noise mean and retention monotonicity", "[statistical]") {
    NoiseSchedule s = build_schedule(250, ScheduleKind::Cosine);
    VerifyCheck mean_check = check_world_full_edit_mean(s, 500);
    INFO(mean_check.detail);
    REQUIRE(mean_check.pass);

    VerifyCheck mono_check = check_world_retention_monotone(s, 500);
    INFO(mono_check.detail);
    REQUIRE(mono_check.pass);
}

TEST_CASE("editor trajectories depend on the denoiser only via outputs") {
    NoiseSchedule s = build_schedule(128, ScheduleKind::Cosine);
    VerifyCheck c = check_denoiser_injection_equivalence(s);
    INFO(c.detail);
    REQUIRE(c.pass);
}

TEST_CASE("full verification battery passes") {
    NoiseSchedule s = build_schedule(250, ScheduleKind::Cosine);
    for (const VerifyCheck& c : run_verification(s)) {
        INFO(c.name << ": " << c.detail);
        REQUIRE(c.pass);
    }
}
