#pragma once

// Test-only reference implementations. These stay independent of the library
// code paths they check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "dicnn/complex_tensor.hpp"
#include "dicnn/rng.hpp"

namespace oracle {

/// Naive O(N^2) DFT, the ground truth for every fast transform check.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

/// Independently coded scalar Adam trajectory.
struct ReferenceAdam {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double m = 0.0, v = 0.0;
    long t = 0;

    double step(double param, double grad) {
        t += 1;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad * grad;
        const double mhat = m / (1.0 - std::pow(beta1, t));
        const double vhat = v / (1.0 - std::pow(beta2, t));
        return param - lr * mhat / (std::sqrt(vhat) + eps);
    }
};

inline double rel_err(double got, double want) {
    const double denom = std::max(std::abs(want), 1e-12);
    return std::abs(got - want) / denom;
}

/// max_i |a_i - b_i| / max(|b|_inf, floor)
template <typename T>
double max_rel_err(const std::vector<T>& got, const std::vector<T>& want, double floor = 1e-8) {
    double scale = floor;
    for (const T& v : want) scale = std::max(scale, std::abs(static_cast<double>(v)));
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(got[i]) - want[i]) / scale);
    return worst;
}

template <typename T>
dicnn::ComplexTensor<T> random_complex(std::size_t b, std::size_t c, std::size_t l,
                                       dicnn::Rng& rng, double scale = 1.0) {
    dicnn::ComplexTensor<T> x(b, c, l);
    for (auto& v : x.re) v = static_cast<T>(rng.uniform(-scale, scale));
    for (auto& v : x.im) v = static_cast<T>(rng.uniform(-scale, scale));
    return x;
}

template <typename T>
dicnn::RealTensor<T> random_real(std::size_t b, std::size_t c, std::size_t l, dicnn::Rng& rng,
                                 double scale = 1.0) {
    dicnn::RealTensor<T> x(b, c, l);
    for (auto& v : x.data) v = static_cast<T>(rng.uniform(-scale, scale));
    return x;
}

/// Central finite differences of a scalar functional of a parameter array.
/// `eval` must be a pure function of the current parameter values.
template <typename T, typename Eval>
std::vector<double> fd_gradient(T* params, std::size_t n, double h, Eval eval) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const T saved = params[i];
        params[i] = static_cast<T>(static_cast<double>(saved) + h);
        const double up = eval();
        params[i] = static_cast<T>(static_cast<double>(saved) - h);
        const double dn = eval();
        params[i] = saved;
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

/// Circular roll of a complex tensor along the length axis by m (right shift).
template <typename T>
dicnn::ComplexTensor<T> roll(const dicnn::ComplexTensor<T>& x, long m) {
    dicnn::ComplexTensor<T> y(x.batch, x.channels, x.length);
    const long L = static_cast<long>(x.length);
    for (std::size_t b = 0; b < x.batch; ++b)
        for (std::size_t c = 0; c < x.channels; ++c)
            for (long l = 0; l < L; ++l) {
                long src = (l - m) % L;
                if (src < 0) src += L;
                y.re[y.idx(b, c, l)] = x.re[x.idx(b, c, src)];
                y.im[y.idx(b, c, l)] = x.im[x.idx(b, c, src)];
            }
    return y;
}

}  // namespace oracle
