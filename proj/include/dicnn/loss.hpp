#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dicnn {

/// Numerically stable softmax cross-entropy for one sample.
/// Returns the loss; grad_out (length n) receives softmax(logits) - onehot.
template <typename T>
double softmax_cross_entropy(const T* logits, int n, int label, T* grad_out) {
    if (label < 0 || label >= n) throw std::invalid_argument("softmax_cross_entropy: bad label");
    double mx = logits[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, static_cast<double>(logits[i]));
    double denom = 0.0;
    for (int i = 0; i < n; ++i) denom += std::exp(static_cast<double>(logits[i]) - mx);
    const double log_denom = std::log(denom);
    for (int i = 0; i < n; ++i) {
        const double p = std::exp(static_cast<double>(logits[i]) - mx) / denom;
        grad_out[i] = static_cast<T>(p - (i == label ? 1.0 : 0.0));
    }
    return -(static_cast<double>(logits[label]) - mx - log_denom);
}

/// Mean loss over a batch of row-major logits; gradients are scaled by 1/B.
template <typename T>
double softmax_cross_entropy_batch(const std::vector<T>& logits, std::size_t batch, int classes,
                                   const int* labels, std::vector<T>& grad_out) {
    if (logits.size() != batch * static_cast<std::size_t>(classes))
        throw std::invalid_argument("softmax_cross_entropy_batch: size mismatch");
    grad_out.assign(logits.size(), T(0));
    double total = 0.0;
    std::vector<T> g(classes);
    for (std::size_t b = 0; b < batch; ++b) {
        total += softmax_cross_entropy(logits.data() + b * classes, classes, labels[b], g.data());
        for (int i = 0; i < classes; ++i)
            grad_out[b * classes + i] = static_cast<T>(g[i] / static_cast<double>(batch));
    }
    return total / static_cast<double>(batch);
}

}  // namespace dicnn
