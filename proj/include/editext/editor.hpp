#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "editext/corpus.hpp"
#include "editext/matrix.hpp"
#include "editext/rng.hpp"
#include "editext/sampler.hpp"
#include "editext/schedule.hpp"

namespace editext {

enum class EditMethod { Coarse, Fine, Integrated };

inline EditMethod edit_method_from_string(const std::string& s) {
    if (s == "coarse") return EditMethod::Coarse;
    if (s == "fine") return EditMethod::Fine;
    if (s == "integrated") return EditMethod::Integrated;
    throw input_error("unknown edit method: " + s);
}

inline const char* to_string(EditMethod m) {
    switch (m) {
        case EditMethod::Coarse: return "coarse";
        case EditMethod::Fine: return "fine";
        default: return "integrated";
    }
}

struct EditRequest {
    TokenSequence reference;
    int target_class = 0;
    EditMethod method = EditMethod::Coarse;
    int t_ce = 0;  // coarse / integrated control
    int t_fe = 0;  // fine / integrated control
    uint64_t seed = 0;

    void validate(int T) const {
        switch (method) {
            case EditMethod::Coarse:
                if (t_ce < 0 || t_ce > T) throw input_error("edit: t_ce must be in [0,T]");
                break;
            case EditMethod::Fine:
                if (t_fe < 1 || t_fe > T) throw input_error("edit: t_fe must be in [1,T]");
                break;
            case EditMethod::Integrated:
                if (t_ce < 0 || t_ce > T) throw input_error("edit: t_ce must be in [0,T]");
                if (t_fe < 0 || t_fe > t_ce) throw input_error("edit: t_fe must be in [0,t_ce]");
                break;
        }
    }
};

struct EditTrace {
    Matrix injected;                    // latent fed into the first loop step
    std::vector<double> pred_norms;     // per-step ||x0_hat_sc||_F
};

struct LatentEditOutcome {
    Matrix final_latent;
    EditTrace trace;
};

struct EditResult {
    TokenSequence edited;
    Matrix final_latent;
    EditTrace trace;
};

// The editing loops draw their perturbation/start noise as the first draw of
// the "edit-noise" substream of the request seed. Both the coarse epsilon and
// the fine start z come from that same draw, so per-seed comparisons across
// methods line up.
inline Matrix edit_noise_draw(uint64_t seed, int rows, int cols) {
    RngStream rng = RngStream(seed).split("edit-noise");
    return Matrix::standard_normal(rows, cols, rng);
}

// Perturb the reference to t_ce, then denoise it back. The first step runs
// without self-conditioning; later steps feed back the previous prediction.
// t_ce = 0 skips the loop entirely and returns the reference latent.
inline LatentEditOutcome edit_coarse_latent(const DenoiseFn& denoise, const Matrix& x_ref, int cls,
                                            int t_ce, uint64_t seed, const NoiseSchedule& sched) {
    if (t_ce < 0 || t_ce > sched.T) throw input_error("edit_coarse: t_ce must be in [0,T]");
    LatentEditOutcome out;
    Matrix eps = edit_noise_draw(seed, x_ref.rows, x_ref.cols);
    Matrix x = forward_noise(x_ref, t_ce, eps, sched);
    out.trace.injected = x;
    SelfCondition sc;
    for (int t = t_ce; t >= 1; --t) {
        Matrix x0_hat_sc = denoise(x, t, sc, cls);
        out.trace.pred_norms.push_back(std::sqrt(frob_sq(x0_hat_sc)));
        x = ddim_step(x, t, x0_hat_sc, sched);
        sc = std::move(x0_hat_sc);
    }
    out.final_latent = std::move(x);
    return out;
}

// Full-length sampling from noise, with the reference latent supplied as the
// self-condition for t in [t_fe, T] and ordinary self-conditioning below.
inline LatentEditOutcome edit_fine_latent(const DenoiseFn& denoise, const Matrix& x_ref, int cls,
                                          int t_fe, uint64_t seed, const NoiseSchedule& sched) {
    if (t_fe < 1 || t_fe > sched.T) throw input_error("edit_fine: t_fe must be in [1,T]");
    LatentEditOutcome out;
    Matrix x = edit_noise_draw(seed, x_ref.rows, x_ref.cols);
    out.trace.injected = x;
    SelfCondition sc;
    for (int t = sched.T; t >= 1; --t) {
        SelfCondition cond = (t >= t_fe) ? SelfCondition(x_ref) : std::move(sc);
        Matrix x0_hat_sc = denoise(x, t, cond, cls);
        out.trace.pred_norms.push_back(std::sqrt(frob_sq(x0_hat_sc)));
        x = ddim_step(x, t, x0_hat_sc, sched);
        sc = std::move(x0_hat_sc);
    }
    out.final_latent = std::move(x);
    return out;
}

// Coarse perturbation to t_ce followed by reference self-conditioning on
// t in [t_fe, t_ce]. Unlike the coarse loop, the first step is already
// conditioned on the reference.
inline LatentEditOutcome edit_integrated_latent(const DenoiseFn& denoise, const Matrix& x_ref, int cls,
                                                int t_ce, int t_fe, uint64_t seed,
                                                const NoiseSchedule& sched) {
    if (t_ce < 0 || t_ce > sched.T) throw input_error("edit_integrated: t_ce must be in [0,T]");
    if (t_fe < 0 || t_fe > t_ce) throw input_error("edit_integrated: t_fe must be in [0,t_ce]");
    LatentEditOutcome out;
    Matrix eps = edit_noise_draw(seed, x_ref.rows, x_ref.cols);
    Matrix x = forward_noise(x_ref, t_ce, eps, sched);
    out.trace.injected = x;
    SelfCondition sc;
    for (int t = t_ce; t >= 1; --t) {
        SelfCondition cond = (t >= t_fe) ? SelfCondition(x_ref) : std::move(sc);
        Matrix x0_hat_sc = denoise(x, t, cond, cls);
        out.trace.pred_norms.push_back(std::sqrt(frob_sq(x0_hat_sc)));
        x = ddim_step(x, t, x0_hat_sc, sched);
        sc = std::move(x0_hat_sc);
    }
    out.final_latent = std::move(x);
    return out;
}

// Token-level editing bundle: encoder/decoder plus a denoiser, all behind
// function interfaces so stub implementations slot in.
struct EditModels {
    std::function<Matrix(const TokenSequence&)> encode;
    std::function<TokenSequence(const Matrix&)> decode;
    DenoiseFn denoise;
    const NoiseSchedule* sched = nullptr;
};

inline EditResult run_edit(const EditModels& models, const EditRequest& req) {
    req.validate(models.sched->T);
    // The reference encoding is loop-invariant; compute it once.
    Matrix x_ref = models.encode(req.reference);
    LatentEditOutcome latent;
    switch (req.method) {
        case EditMethod::Coarse:
            latent = edit_coarse_latent(models.denoise, x_ref, req.target_class, req.t_ce, req.seed,
                                        *models.sched);
            break;
        case EditMethod::Fine:
            latent = edit_fine_latent(models.denoise, x_ref, req.target_class, req.t_fe, req.seed,
                                      *models.sched);
            break;
        case EditMethod::Integrated:
            latent = edit_integrated_latent(models.denoise, x_ref, req.target_class, req.t_ce, req.t_fe,
                                            req.seed, *models.sched);
            break;
    }
    EditResult res;
    res.edited = models.decode(latent.final_latent);
    res.final_latent = std::move(latent.final_latent);
    res.trace = std::move(latent.trace);
    return res;
}

}  // namespace editext
