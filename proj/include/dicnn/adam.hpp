#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dicnn {

/// Named view over one parameter array and its gradient. Models expose their
/// parameters as a list of these; the optimizer and checkpointing work
/// against the views.
template <typename T>
struct ParamView {
    std::string name;
    T* data = nullptr;
    T* grad = nullptr;
    std::vector<std::size_t> shape;

    std::size_t count() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
};

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment accumulators for one parameter array.
template <typename T>
struct AdamState {
    std::vector<T> m, v;
    std::int64_t step = 0;

    void ensure(std::size_t n) {
        if (m.size() != n) {
            m.assign(n, T(0));
            v.assign(n, T(0));
            step = 0;
        }
    }
};

/// One bias-corrected Adam update, in place.
template <typename T>
void adam_step(T* params, const T* grads, std::size_t n, AdamState<T>& state,
               const AdamHyper& h = AdamHyper{}) {
    state.ensure(n);
    state.step += 1;
    const double b1 = h.beta1, b2 = h.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = static_cast<double>(grads[i]);
        const double m = b1 * state.m[i] + (1.0 - b1) * g;
        const double v = b2 * state.v[i] + (1.0 - b2) * g * g;
        state.m[i] = static_cast<T>(m);
        state.v[i] = static_cast<T>(v);
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        params[i] = static_cast<T>(params[i] - h.lr * mhat / (std::sqrt(vhat) + h.eps));
    }
}

/// Optimizer over a model's parameter views.
template <typename T>
struct AdamOptimizer {
    AdamHyper hyper;
    std::vector<AdamState<T>> states;

    explicit AdamOptimizer(AdamHyper h = AdamHyper{}) : hyper(h) {}

    void step(std::vector<ParamView<T>>& params) {
        if (states.size() != params.size()) states.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            adam_step(params[i].data, params[i].grad, params[i].count(), states[i], hyper);
    }
};

}  // namespace dicnn
