#pragma once

#include <cstdint>

#include "pixelarm/model.hpp"

namespace pixelarm {

struct TrainConfig {
    int stage = 1;
    double peak_lr = 3e-4;
    double min_lr = 3e-5;
    long warmup_steps = 2000;
    long total_steps = 1000000;
    int batch_size = 384;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double weight_decay = 0.1;
    double grad_clip = 1.0;
    double adam_epsilon = 1e-8;
    double lambda_m = 9.0;       // stage 2
    double disc_peak_lr = 3e-5;  // stage 2
    double disc_min_lr = 3e-6;   // stage 2
    std::uint64_t seed = 42;
    long checkpoint_every = 0;  // 0: only the final checkpoint

    void validate() const {
        if (stage != 1 && stage != 2) throw ConfigError("stage must be 1 or 2");
        if (!(min_lr > 0.0) || min_lr > peak_lr)
            throw ConfigError("require 0 < min_lr <= peak_lr");
        if (warmup_steps < 0 || warmup_steps >= total_steps)
            throw ConfigError("require 0 <= warmup_steps < total_steps");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (lambda_m < 0.0) throw ConfigError("lambda_m must be >= 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
            throw ConfigError("betas must lie in [0, 1)");
        if (checkpoint_every < 0)
            throw ConfigError("checkpoint_every must be >= 0");
    }
};

// Linear ramp 0 -> peak over warmup_steps, then cosine peak -> min over the
// remaining steps. Exact at the endpoints: lr(warmup) = peak, lr(total) = min.
inline double lr_at(long step, double peak, double min_lr, long warmup,
                    long total) {
    if (step < 0 || step > total)
        throw ConfigError("lr_at: step out of range");
    if (warmup > 0 && step <= warmup)
        return peak * (static_cast<double>(step) / static_cast<double>(warmup));
    const double u = static_cast<double>(step - warmup) /
                     static_cast<double>(total - warmup);
    return min_lr + (peak - min_lr) * 0.5 * (1.0 + std::cos(M_PI * u));
}

inline double lr_at(long step, const TrainConfig& cfg) {
    return lr_at(step, cfg.peak_lr, cfg.min_lr, cfg.warmup_steps,
                 cfg.total_steps);
}

template <class S>
struct AdamState {
    long step = 0;
    std::vector<std::vector<S>> m, v;

    template <class P>
    void ensure(const P& params) {
        if (!m.empty()) return;
        for (const auto& r : tensor_refs(params)) {
            m.emplace_back(r.size, S(0));
            v.emplace_back(r.size, S(0));
        }
    }
};

template <class S>
bool all_finite(const Parameters<S>& p) {
    for (const auto& r : tensor_refs(p))
        for (std::size_t k = 0; k < r.size; ++k)
            if (!std::isfinite(r.data[k])) return false;
    return true;
}

template <class S>
double global_grad_norm(const Parameters<S>& grads) {
    double ss = 0.0;
    for (const auto& r : tensor_refs(grads))
        for (std::size_t k = 0; k < r.size; ++k)
            ss += static_cast<double>(r.data[k]) * r.data[k];
    return std::sqrt(ss);
}

// Scales grads in place so the global norm is at most clip. No-op when
// clip <= 0.
template <class S>
void clip_global_norm(Parameters<S>& grads, double clip) {
    if (clip <= 0.0) return;
    const double norm = global_grad_norm(grads);
    if (norm <= clip || norm == 0.0) return;
    const S scale = static_cast<S>(clip / norm);
    for (auto& r : tensor_refs(grads))
        for (std::size_t k = 0; k < r.size; ++k) r.data[k] *= scale;
}

// One AdamW step: bias-corrected moments, decoupled decay applied to weight
// tensors only (norm gains and biases are excluded). Gradients must already
// be clipped; non-finite gradients abort without touching the parameters.
template <class S>
void adamw_step(Parameters<S>& params, const Parameters<S>& grads,
                AdamState<S>& state, double lr, const TrainConfig& cfg) {
    if (!all_finite(grads))
        throw NumericError("adamw_step: non-finite gradient");
    state.ensure(params);
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    const S b1 = static_cast<S>(cfg.beta1);
    const S b2 = static_cast<S>(cfg.beta2);
    const S eps = static_cast<S>(cfg.adam_epsilon);

    auto prefs = tensor_refs(params);
    auto grefs = tensor_refs(const_cast<Parameters<S>&>(grads));
    for (std::size_t i = 0; i < prefs.size(); ++i) {
        S* m = state.m[i].data();
        S* v = state.v[i].data();
        const bool decay = prefs[i].kind == ParamKind::weight &&
                           cfg.weight_decay != 0.0;
        const S wd = static_cast<S>(lr * cfg.weight_decay);
        for (std::size_t k = 0; k < prefs[i].size; ++k) {
            const S g = grefs[i].data[k];
            m[k] = b1 * m[k] + (S(1) - b1) * g;
            v[k] = b2 * v[k] + (S(1) - b2) * g * g;
            const S mhat = static_cast<S>(m[k] / bc1);
            const S vhat = static_cast<S>(v[k] / bc2);
            const S prev = prefs[i].data[k];
            S next = prev - static_cast<S>(lr) * mhat /
                                (std::sqrt(vhat) + eps);
            if (decay) next -= wd * prev;
            prefs[i].data[k] = next;
        }
    }
}

}  // namespace pixelarm
