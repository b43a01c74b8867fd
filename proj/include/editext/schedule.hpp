#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "editext/errors.hpp"
#include "editext/matrix.hpp"

namespace editext {

enum class ScheduleKind { Cosine, Linear };

inline ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "cosine") return ScheduleKind::Cosine;
    if (s == "linear") return ScheduleKind::Linear;
    throw config_error("unknown schedule kind: " + s);
}

inline const char* to_string(ScheduleKind k) {
    return k == ScheduleKind::Cosine ? "cosine" : "linear";
}

// Cumulative signal-level schedule over timesteps 0..T.
//
// alpha[t] is the squared signal coefficient of the forward corruption
//   x_t = sqrt(alpha_t) * x_0 + sqrt(1 - alpha_t) * eps,
// lambda[t] = 1 - alpha[t] is the noise level. Endpoints are clamped:
// alpha[0] = 1 exactly (the t=0 state is the clean latent) and
// alpha[T] <= 1e-5 (the t=T state is noise up to the documented leakage).
struct NoiseSchedule {
    int T = 0;
    ScheduleKind kind = ScheduleKind::Cosine;
    std::vector<double> alpha;   // size T+1
    std::vector<double> lambda;  // size T+1, lambda[t] = 1 - alpha[t]

    static constexpr double kTerminalAlphaCap = 1e-5;
};

// Closed forms before clamping, for raw levels a(t), u = t/T:
//   cosine:  a(t) = cos^2(((u + s) / (1 + s)) * pi/2) / cos^2((s / (1 + s)) * pi/2),  s = 0.008
//   linear:  a(t) = 1 - u
// Both are then clamped: a(0) := 1 exactly, a(T) := min(a(T), 1e-5).
inline NoiseSchedule build_schedule(int T, ScheduleKind kind = ScheduleKind::Cosine) {
    if (T < 2) throw config_error("build_schedule: T must be >= 2");
    NoiseSchedule s;
    s.T = T;
    s.kind = kind;
    s.alpha.resize(T + 1);

    if (kind == ScheduleKind::Cosine) {
        const double off = 0.008;
        auto f = [&](double u) {
            double c = std::cos((u + off) / (1.0 + off) * M_PI / 2.0);
            return c * c;
        };
        const double f0 = f(0.0);
        for (int t = 0; t <= T; ++t) s.alpha[t] = f(static_cast<double>(t) / T) / f0;
    } else {
        for (int t = 0; t <= T; ++t) s.alpha[t] = 1.0 - static_cast<double>(t) / T;
    }

    s.alpha[0] = 1.0;
    s.alpha[T] = std::min(s.alpha[T], NoiseSchedule::kTerminalAlphaCap);

    for (int t = 0; t <= T; ++t) {
        if (s.alpha[t] < 0.0 || s.alpha[t] > 1.0)
            throw config_error("build_schedule: alpha out of [0,1] at t=" + std::to_string(t));
        if (t > 0 && s.alpha[t] >= s.alpha[t - 1])
            throw config_error("build_schedule: alpha not strictly decreasing at t=" + std::to_string(t));
    }

    s.lambda.resize(T + 1);
    for (int t = 0; t <= T; ++t) s.lambda[t] = 1.0 - s.alpha[t];
    return s;
}

// x_t = sqrt(alpha_t) * x_0 + sqrt(1 - alpha_t) * eps
inline Matrix forward_noise(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& sched) {
    if (t < 0 || t > sched.T) throw input_error("forward_noise: t out of [0,T]");
    require_same_shape(x0, eps, "forward_noise");
    const double sa = std::sqrt(sched.alpha[t]);
    const double sl = std::sqrt(sched.lambda[t]);
    Matrix out = x0;
    for (size_t i = 0; i < out.size(); ++i) out.v[i] = sa * out.v[i] + sl * eps.v[i];
    return out;
}

}  // namespace editext
