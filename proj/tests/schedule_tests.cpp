#include <catch2/catch_amalgamated.hpp>

#include "editext/rng.hpp"
#include "editext/schedule.hpp"

using namespace editext;

TEST_CASE("schedules satisfy endpoint and monotonicity invariants") {
    for (ScheduleKind kind : {ScheduleKind::Cosine, ScheduleKind::Linear}) {
        for (int T : {2, 16, 250}) {
            NoiseSchedule s = build_schedule(T, kind);
            REQUIRE(static_cast<int>(s.alpha.size()) == T + 1);
            REQUIRE(s.alpha[0] == 1.0);
            REQUIRE(s.alpha[T] <= 1e-5);
            for (int t = 0; t <= T; ++t) {
                REQUIRE(s.alpha[t] >= 0.0);
                REQUIRE(s.alpha[t] <= 1.0);
                REQUIRE(s.alpha[t] + s.lambda[t] == 1.0);  // exact by construction
                if (t > 0) REQUIRE(s.alpha[t] < s.alpha[t - 1]);
            }
        }
    }
    REQUIRE_THROWS_AS(build_schedule(1, ScheduleKind::Cosine), config_error);
}

TEST_CASE("linear schedule at T=4 matches its closed form") {
    // alpha_t = 1 - t/T with endpoint clamps; scale factor is exactly 1.
    NoiseSchedule s = build_schedule(4, ScheduleKind::Linear);
    REQUIRE(s.alpha[0] == 1.0);
    REQUIRE(s.alpha[1] == 0.75);
    REQUIRE(s.alpha[2] == 0.5);
    REQUIRE(s.alpha[3] == 0.25);
    REQUIRE(s.alpha[4] <= 1e-5);
}

TEST_CASE("forward_noise endpoints and worked example") {
    NoiseSchedule s = build_schedule(250, ScheduleKind::Cosine);
    RngStream rng(9);
    Matrix x0 = Matrix::standard_normal(3, 4, rng);
    Matrix eps = Matrix::standard_normal(3, 4, rng);

    // t = 0: alpha = 1 exactly, so the clean latent comes back bitwise.
    Matrix at0 = forward_noise(x0, 0, eps, s);
    REQUIRE(at0.v == x0.v);

    // t = T: alpha <= 1e-5, so the output is eps up to the clamp leakage.
    Matrix atT = forward_noise(x0, s.T, eps, s);
    double leak = std::sqrt(1e-5) * max_abs(x0) + 1e-5 * max_abs(eps);
    REQUIRE(max_abs_diff(atT, eps) <= leak);

    // Direct substitution at alpha = 0.25.
    NoiseSchedule tiny = build_schedule(4, ScheduleKind::Linear);
    Matrix x(1, 2), e(1, 2);
    x(0, 0) = 1.0;
    e(0, 1) = 2.0;
    Matrix out = forward_noise(x, 3, e, tiny);  // alpha_3 = 0.25
    REQUIRE(out(0, 0) == Catch::Approx(0.5).epsilon(1e-12));
    REQUIRE(out(0, 1) == Catch::Approx(1.7320508).epsilon(1e-7));

    Matrix wrong(2, 2);
    REQUIRE_THROWS_AS(forward_noise(x, 1, wrong, tiny), input_error);
    REQUIRE_THROWS_AS(forward_noise(x, 5, e, tiny), input_error);
}

TEST_CASE("forward_noise preserves unit variance", "[statistical]") {
    NoiseSchedule s = build_schedule(250, ScheduleKind::Cosine);
    RngStream rng(31);
    const int n = 10000;
    for (int t : {1, 62, 125, 187, 250}) {
        double mean = 0.0, m2 = 0.0;
        for (int i = 0; i < n; ++i) {
            Matrix x0(1, 1), eps(1, 1);
            x0(0, 0) = rng.normal();
            eps(0, 0) = rng.normal();
            double y = forward_noise(x0, t, eps, s)(0, 0);
            double delta = y - mean;
            mean += delta / (i + 1);
            m2 += delta * (y - mean);
        }
        double var = m2 / (n - 1);
        INFO("t = " << t);
        REQUIRE(var == Catch::Approx(1.0).margin(0.05));
    }
}
