#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "editext/editor.hpp"
#include "editext/matrix.hpp"
#include "editext/rng.hpp"
#include "editext/sampler.hpp"
#include "editext/schedule.hpp"

namespace editext {

// Analytic world: per class, clean latents are N(mu_c, prior_var * I). Under
// the forward process this admits a closed-form optimal denoiser, so the
// sampling and editing loops can be verified end to end without training.
struct GaussianWorld {
    std::vector<Matrix> class_means;
    double prior_var = 1.0;

    void validate() const {
        if (prior_var <= 0.0) throw config_error("gaussian world: prior variance must be > 0");
        if (class_means.size() < 2) throw config_error("gaussian world: need at least two class means");
        if (max_abs_diff(class_means[0], class_means[1]) == 0.0)
            throw config_error("gaussian world: class means must be distinct");
    }
};

// E[x_0 | x_t, c] for x_0 ~ N(mu_c, s0 I) and x_t = sqrt(a) x_0 + sqrt(1-a) eps:
//   mu_c + (sqrt(a) * s0 / (a * s0 + (1-a))) * (x_t - sqrt(a) * mu_c)
inline Matrix posterior_mean_at_alpha(const Matrix& mu, double prior_var, const Matrix& x_t, double alpha) {
    if (prior_var <= 0.0) throw config_error("posterior_mean: prior variance must be > 0");
    require_same_shape(mu, x_t, "posterior_mean");
    const double sa = std::sqrt(alpha);
    const double gain = sa * prior_var / (alpha * prior_var + (1.0 - alpha));
    Matrix out = mu;
    for (size_t i = 0; i < out.size(); ++i) out.v[i] += gain * (x_t.v[i] - sa * mu.v[i]);
    return out;
}

inline Matrix posterior_mean(const GaussianWorld& world, const Matrix& x_t, int t, int cls,
                             const NoiseSchedule& sched) {
    if (t < 1 || t > sched.T) throw input_error("posterior_mean: t must be in [1,T]");
    if (cls < 0 || cls >= static_cast<int>(world.class_means.size()))
        throw input_error("posterior_mean: class out of range");
    return posterior_mean_at_alpha(world.class_means[cls], world.prior_var, x_t, sched.alpha[t]);
}

// Test doubles with the learned denoiser's signature.

// Returns its self-condition when present, the noisy input otherwise.
inline DenoiseFn echo_stub() {
    return [](const Matrix& x_t, int, const SelfCondition& sc, int) {
        return sc.has_value() ? *sc : x_t;
    };
}

inline DenoiseFn constant_stub(Matrix r) {
    return [r = std::move(r)](const Matrix&, int, const SelfCondition&, int) { return r; };
}

// Exact Bayes denoiser for the Gaussian world. Ignores the self-condition:
// it verifies loop plumbing and coarse dynamics, while the echo stub covers
// the self-conditioning path.
inline DenoiseFn posterior_stub(const GaussianWorld& world, const NoiseSchedule& sched) {
    return [&world, &sched](const Matrix& x_t, int t, const SelfCondition&, int cls) {
        return posterior_mean(world, x_t, t, cls, sched);
    };
}

struct WorldEditControls {
    EditMethod method = EditMethod::Coarse;
    int target_class = 0;
    int t_ce = 0;
    int t_fe = 0;
};

// Runs the exact editor loops in the analytic world with the posterior-mean
// denoiser. Deterministic given the seed.
inline Matrix run_world_edit(const GaussianWorld& world, const Matrix& x_ref,
                             const WorldEditControls& controls, uint64_t seed,
                             const NoiseSchedule& sched) {
    DenoiseFn denoise = posterior_stub(world, sched);
    switch (controls.method) {
        case EditMethod::Coarse:
            return edit_coarse_latent(denoise, x_ref, controls.target_class, controls.t_ce, seed, sched)
                .final_latent;
        case EditMethod::Fine:
            return edit_fine_latent(denoise, x_ref, controls.target_class, controls.t_fe, seed, sched)
                .final_latent;
        default:
            return edit_integrated_latent(denoise, x_ref, controls.target_class, controls.t_ce,
                                          controls.t_fe, seed, sched)
                .final_latent;
    }
}

// ---------------------------------------------------------------------------
// Training-free verification suite. Shared by the unit/acceptance tests and
// the `verify` CLI subcommand.

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace verify_detail {

inline GaussianWorld default_world(int rows, int cols) {
    GaussianWorld w;
    Matrix mu0(rows, cols), mu1(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            mu0(i, j) = 1.5 + 0.1 * i - 0.05 * j;
            mu1(i, j) = -1.5 - 0.07 * i + 0.04 * j;
        }
    w.class_means = {mu0, mu1};
    w.prior_var = 1.0;
    return w;
}

// Self-normalized importance-sampling estimate of E[x_0 | x_t] in the scalar
// world: sample x_0 from the prior, weight by the likelihood of x_t.
struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;
};

inline McEstimate mc_posterior_mean(double mu, double prior_var, double x_t, double alpha, int draws,
                                    RngStream& rng) {
    const double lam = 1.0 - alpha;
    const double sa = std::sqrt(alpha);
    std::vector<double> xs(draws), ws(draws);
    double wsum = 0.0;
    for (int i = 0; i < draws; ++i) {
        double x0 = mu + std::sqrt(prior_var) * rng.normal();
        double r = x_t - sa * x0;
        xs[i] = x0;
        ws[i] = std::exp(-r * r / (2.0 * lam));
        wsum += ws[i];
    }
    McEstimate est;
    for (int i = 0; i < draws; ++i) est.mean += ws[i] / wsum * xs[i];
    double var = 0.0;
    for (int i = 0; i < draws; ++i) {
        double wn = ws[i] / wsum;
        double d = xs[i] - est.mean;
        var += wn * wn * d * d;
    }
    est.std_err = std::sqrt(var);
    return est;
}

}  // namespace verify_detail

// Implied-noise conservation and exact termination of the fixed-prediction
// chain (acceptance criterion 1 machinery).
inline VerifyCheck check_fixed_prediction_chain(const NoiseSchedule& sched, uint64_t seed = 71) {
    VerifyCheck c{"sampler: implied-eps conserved and chain terminates at prediction", false, ""};
    RngStream rng(seed);
    Matrix r = Matrix::standard_normal(4, 6, rng);
    Matrix x = Matrix::standard_normal(4, 6, rng);
    Matrix eps_ref = eps_from_x0(x, sched.T, r, sched);
    double ref_scale = std::max(max_abs(eps_ref), 1e-12);
    double max_rel_drift = 0.0;
    for (int t = sched.T; t >= 1; --t) {
        Matrix eps_t = eps_from_x0(x, t, r, sched);
        max_rel_drift = std::max(max_rel_drift, max_abs_diff(eps_t, eps_ref) / ref_scale);
        x = ddim_step(x, t, r, sched);
    }
    bool exact_terminal = x.v == r.v;
    c.pass = max_rel_drift <= 1e-6 && exact_terminal;
    c.detail = "max relative drift " + std::to_string(max_rel_drift) +
               (exact_terminal ? ", terminal latent bitwise equal" : ", terminal latent differs");
    return c;
}

inline VerifyCheck check_echo_stub_generation(const NoiseSchedule& sched, uint64_t seed = 72) {
    VerifyCheck c{"sampler: echo-stub generation returns its start noise", false, ""};
    Matrix out = generate_latent(echo_stub(), 0, seed, sched, 4, 6);
    RngStream noise_rng = RngStream(seed).split("edit-noise");
    Matrix x_T = Matrix::standard_normal(4, 6, noise_rng);
    c.pass = out.v == x_T.v;
    c.detail = c.pass ? "bitwise equal" : "mismatch " + std::to_string(max_abs_diff(out, x_T));
    return c;
}

inline VerifyCheck check_echo_stub_fine_identity(const NoiseSchedule& sched, uint64_t seed = 73) {
    VerifyCheck c{"editor: echo-stub fine edit at t_fe=1 returns the reference latent", false, ""};
    RngStream rng(seed);
    Matrix x_ref = Matrix::standard_normal(4, 6, rng);
    Matrix out = edit_fine_latent(echo_stub(), x_ref, 0, 1, seed, sched).final_latent;
    c.pass = out.v == x_ref.v;
    c.detail = c.pass ? "bitwise equal" : "mismatch " + std::to_string(max_abs_diff(out, x_ref));
    return c;
}

inline VerifyCheck check_coarse_zero_identity(const NoiseSchedule& sched, uint64_t seed = 74) {
    VerifyCheck c{"editor: coarse edit at t_ce=0 returns the reference latent", false, ""};
    RngStream rng(seed);
    Matrix x_ref = Matrix::standard_normal(4, 6, rng);
    GaussianWorld world = verify_detail::default_world(4, 6);
    Matrix out = edit_coarse_latent(posterior_stub(world, sched), x_ref, 1, 0, seed, sched).final_latent;
    c.pass = out.v == x_ref.v;
    c.detail = c.pass ? "bitwise equal" : "mismatch " + std::to_string(max_abs_diff(out, x_ref));
    return c;
}

// Closed-form posterior mean against importance-sampled Monte Carlo at
// randomly drawn scalar points (acceptance criterion 3, first half).
inline VerifyCheck check_posterior_mean_monte_carlo(const NoiseSchedule& sched, int points = 10,
                                                    int draws = 100000, uint64_t seed = 75) {
    VerifyCheck c{"oracle: posterior mean matches Monte Carlo within 3 standard errors", false, ""};
    RngStream rng(seed);
    int worst_point = -1;
    double worst_sigmas = 0.0;
    for (int p = 0; p < points; ++p) {
        RngStream point_rng = rng.split(static_cast<uint64_t>(p));
        int t = point_rng.uniform_int(1, sched.T);
        double alpha = sched.alpha[t];
        double prior_var = 0.3 + 1.7 * point_rng.uniform();
        double mu = -2.0 + 4.0 * point_rng.uniform();
        double marg_std = std::sqrt(alpha * prior_var + (1.0 - alpha));
        double x_t = std::sqrt(alpha) * mu + (2.0 * point_rng.uniform() - 1.0) * 1.5 * marg_std;

        Matrix mu_m(1, 1), xt_m(1, 1);
        mu_m(0, 0) = mu;
        xt_m(0, 0) = x_t;
        double closed = posterior_mean_at_alpha(mu_m, prior_var, xt_m, alpha)(0, 0);
        auto est = verify_detail::mc_posterior_mean(mu, prior_var, x_t, alpha, draws, point_rng);
        double sigmas = std::fabs(est.mean - closed) / std::max(est.std_err, 1e-12);
        if (sigmas > worst_sigmas) {
            worst_sigmas = sigmas;
            worst_point = p;
        }
    }
    c.pass = worst_sigmas <= 3.0;
    c.detail = "worst deviation " + std::to_string(worst_sigmas) + " standard errors (point " +
               std::to_string(worst_point) + ")";
    return c;
}

// Full-noise coarse edits in the analytic world average out to the class
// mean (acceptance criterion 3, second half, part one).
inline VerifyCheck check_world_full_edit_mean(const NoiseSchedule& sched, int seeds = 500,
                                              uint64_t seed = 76) {
    VerifyCheck c{"oracle: coarse edit at t_ce=T converges to the class mean over seeds", false, ""};
    const int rows = 2, cols = 3;
    GaussianWorld world = verify_detail::default_world(rows, cols);
    RngStream rng(seed);
    Matrix x_ref = Matrix::standard_normal(rows, cols, rng);
    const int cls = 1;

    Matrix mean(rows, cols);
    Matrix m2(rows, cols);
    for (int s = 0; s < seeds; ++s) {
        WorldEditControls controls{EditMethod::Coarse, cls, sched.T, 0};
        Matrix out = run_world_edit(world, x_ref, controls, rng.split("edit").split(s).next_u64(), sched);
        for (size_t i = 0; i < out.size(); ++i) {
            double delta = out.v[i] - mean.v[i];
            mean.v[i] += delta / (s + 1);
            m2.v[i] += delta * (out.v[i] - mean.v[i]);
        }
    }
    double diff_norm = 0.0, bound = 0.0;
    const Matrix& mu = world.class_means[cls];
    for (size_t i = 0; i < mean.size(); ++i) {
        double d = mean.v[i] - mu.v[i];
        diff_norm += d * d;
        bound += m2.v[i] / (seeds - 1) / seeds;  // squared std err per entry
    }
    diff_norm = std::sqrt(diff_norm);
    bound = 3.0 * std::sqrt(bound);
    c.pass = diff_norm <= bound;
    c.detail = "||mean - mu|| = " + std::to_string(diff_norm) + ", 3 sigma bound " + std::to_string(bound);
    return c;
}

// Retention interpolation (acceptance criterion 3, second half, part two):
// mean distance to the reference grows with t_ce.
inline VerifyCheck check_world_retention_monotone(const NoiseSchedule& sched, int seeds = 500,
                                                  uint64_t seed = 77) {
    VerifyCheck c{"oracle: mean distance to reference is monotone in t_ce", false, ""};
    const int rows = 2, cols = 3;
    GaussianWorld world = verify_detail::default_world(rows, cols);
    RngStream rng(seed);
    Matrix x_ref = Matrix::standard_normal(rows, cols, rng);
    std::vector<int> levels;
    for (int k = 1; k <= 5; ++k) levels.push_back(sched.T * k / 5);

    std::vector<double> means;
    for (int level : levels) {
        double acc = 0.0;
        for (int s = 0; s < seeds; ++s) {
            WorldEditControls controls{EditMethod::Coarse, 1, level, 0};
            Matrix out =
                run_world_edit(world, x_ref, controls, rng.split("lvl").split(level).split(s).next_u64(),
                               sched);
            acc += std::sqrt(frob_sq(sub(out, x_ref)));
        }
        means.push_back(acc / seeds);
    }
    bool monotone = true;
    std::string detail = "means:";
    for (size_t i = 0; i < means.size(); ++i) {
        detail += " " + std::to_string(means[i]);
        if (i > 0 && means[i] < means[i - 1]) monotone = false;
    }
    c.pass = monotone;
    c.detail = detail;
    return c;
}

// Swapping denoiser implementations with identical outputs-per-call must
// yield identical trajectories (pure dependency-injection check).
inline VerifyCheck check_denoiser_injection_equivalence(const NoiseSchedule& sched, uint64_t seed = 78) {
    VerifyCheck c{"editor: loops depend on the denoiser only through its outputs", false, ""};
    const int rows = 2, cols = 3;
    GaussianWorld world = verify_detail::default_world(rows, cols);
    RngStream rng(seed);
    Matrix x_ref = Matrix::standard_normal(rows, cols, rng);

    auto recorded = std::make_shared<std::vector<Matrix>>();
    DenoiseFn recording = [&world, &sched, recorded](const Matrix& x_t, int t, const SelfCondition&,
                                                     int cls) {
        Matrix out = posterior_mean(world, x_t, t, cls, sched);
        recorded->push_back(out);
        return out;
    };
    int t_ce = sched.T / 2;
    Matrix first = edit_coarse_latent(recording, x_ref, 0, t_ce, seed, sched).final_latent;

    auto cursor = std::make_shared<size_t>(0);
    DenoiseFn replay = [recorded, cursor](const Matrix&, int, const SelfCondition&, int) {
        return (*recorded)[(*cursor)++];
    };
    Matrix second = edit_coarse_latent(replay, x_ref, 0, t_ce, seed, sched).final_latent;
    c.pass = first.v == second.v && *cursor == recorded->size();
    c.detail = c.pass ? "trajectories bitwise equal" : "trajectories differ";
    return c;
}

inline std::vector<VerifyCheck> run_verification(const NoiseSchedule& sched) {
    return {
        check_fixed_prediction_chain(sched),
        check_echo_stub_generation(sched),
        check_echo_stub_fine_identity(sched),
        check_coarse_zero_identity(sched),
        check_posterior_mean_monte_carlo(sched),
        check_world_full_edit_mean(sched),
        check_world_retention_monotone(sched),
        check_denoiser_injection_equivalence(sched),
    };
}

}  // namespace editext
