#pragma once

#include <functional>
#include <optional>

#include "editext/matrix.hpp"
#include "editext/rng.hpp"
#include "editext/schedule.hpp"

namespace editext {

// Absent self-conditioning is "no condition", not a zero latent; the two are
// encoded differently by every denoiser implementation.
using SelfCondition = std::optional<Matrix>;

// Any clean-latent predictor with the signature x0_hat(x_t, t, self_cond, c).
// Learned denoisers and the analytic/stub oracles all plug in here, which is
// what lets the editing loops be verified without training.
using DenoiseFn = std::function<Matrix(const Matrix& x_t, int t, const SelfCondition& self_cond, int cls)>;

// Implied noise of a clean-latent prediction:
//   eps = (x_t - sqrt(alpha_t) * x0_hat) / sqrt(1 - alpha_t)
inline Matrix eps_from_x0(const Matrix& x_t, int t, const Matrix& x0_hat, const NoiseSchedule& sched) {
    if (t < 1 || t > sched.T) throw input_error("eps_from_x0: t must be in [1,T]");
    require_same_shape(x_t, x0_hat, "eps_from_x0");
    const double inv_sl = 1.0 / std::sqrt(sched.lambda[t]);
    const double sa = std::sqrt(sched.alpha[t]);
    Matrix eps = x_t;
    for (size_t i = 0; i < eps.size(); ++i) eps.v[i] = inv_sl * (eps.v[i] - sa * x0_hat.v[i]);
    return eps;
}

// Deterministic reverse update: reproject the predicted clean latent and its
// implied noise onto the t-1 noise level. No fresh noise enters the step.
//   x_{t-1} = sqrt(alpha_{t-1}) * x0_hat + sqrt(lambda_{t-1}) * eps_from_x0(x_t, t, x0_hat)
inline Matrix ddim_step(const Matrix& x_t, int t, const Matrix& x0_hat_sc, const NoiseSchedule& sched) {
    Matrix eps = eps_from_x0(x_t, t, x0_hat_sc, sched);
    const double sa_prev = std::sqrt(sched.alpha[t - 1]);
    const double sl_prev = std::sqrt(sched.lambda[t - 1]);
    Matrix out = x0_hat_sc;
    for (size_t i = 0; i < out.size(); ++i) out.v[i] = sa_prev * out.v[i] + sl_prev * eps.v[i];
    return out;
}

// Class-conditional generation from seeded noise with self-conditioning: the
// first step runs unconditioned, every later step feeds back the previous
// prediction. With alpha_0 = 1 the loop's final step returns the last
// prediction itself.
inline Matrix generate_latent(const DenoiseFn& denoise, int cls, uint64_t seed,
                              const NoiseSchedule& sched, int latent_len, int latent_dim) {
    RngStream noise_rng = RngStream(seed).split("edit-noise");
    Matrix x = Matrix::standard_normal(latent_len, latent_dim, noise_rng);
    SelfCondition sc;  // none at t = T
    for (int t = sched.T; t >= 1; --t) {
        Matrix x0_hat_sc = denoise(x, t, sc, cls);
        x = ddim_step(x, t, x0_hat_sc, sched);
        sc = std::move(x0_hat_sc);
    }
    return x;
}

}  // namespace editext
