#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dicnn/complex_tensor.hpp"
#include "dicnn/layers.hpp"
#include "dicnn/rng.hpp"

namespace dicnn {

/// Plain real 1-D convolution, kernel 4, stride 1, left pad 1 / right pad 2.
/// Used by the time-domain baseline.
template <typename T = float>
struct RealConv1d {
    static constexpr int kKernel = 4;

    int in_ch = 0, out_ch = 0;
    std::vector<T> w;  // [out_ch][in_ch][kKernel]
    std::vector<T> b;  // [out_ch]
    std::vector<T> gw, gb;

    RealConv1d() = default;
    RealConv1d(int in, int out) : in_ch(in), out_ch(out) {
        w.assign(static_cast<std::size_t>(in) * out * kKernel, T(0));
        b.assign(out, T(0));
        gw.assign(w.size(), T(0));
        gb.assign(out, T(0));
    }

    std::size_t widx(int oc, int ic, int k) const {
        return (static_cast<std::size_t>(oc) * in_ch + ic) * kKernel + k;
    }

    void init(Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * kKernel);
        for (auto& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
    }

    void zero_grad() {
        std::fill(gw.begin(), gw.end(), T(0));
        std::fill(gb.begin(), gb.end(), T(0));
    }

    RealTensor<T> forward(const RealTensor<T>& x) const {
        if (static_cast<int>(x.channels) != in_ch)
            throw std::invalid_argument("RealConv1d: input channel mismatch");
        const std::size_t L = x.length;
        RealTensor<T> y(x.batch, static_cast<std::size_t>(out_ch), L);
        for (std::size_t b_ = 0; b_ < x.batch; ++b_) {
            std::vector<T> ext(in_ch * (L + 3));
            for (int ic = 0; ic < in_ch; ++ic)
                detail::build_ext_row(x.row_ptr(b_, ic), L, ConvPadMode::zero_pad_1_2,
                                      ext.data() + ic * (L + 3));
            for (int oc = 0; oc < out_ch; ++oc) {
                T* yr = y.row_ptr(b_, oc);
                std::vector<double> acc(L, 0.0);
                for (int ic = 0; ic < in_ch; ++ic) {
                    const T* xr = ext.data() + ic * (L + 3);
                    const T* wr = w.data() + widx(oc, ic, 0);
                    for (std::size_t l = 0; l < L; ++l) {
                        double s = 0.0;
                        for (int k = 0; k < kKernel; ++k) s += static_cast<double>(xr[l + k]) * wr[k];
                        acc[l] += s;
                    }
                }
                for (std::size_t l = 0; l < L; ++l)
                    yr[l] = static_cast<T>(acc[l] + static_cast<double>(b[oc]));
            }
        }
        return y;
    }

    RealTensor<T> backward(const RealTensor<T>& x, const RealTensor<T>& gout) {
        if (!(x.batch == gout.batch && x.length == gout.length &&
              static_cast<int>(gout.channels) == out_ch))
            throw std::invalid_argument("RealConv1d: gradient shape mismatch");
        const std::size_t L = x.length;
        RealTensor<T> gx(x.batch, x.channels, L);
        for (std::size_t b_ = 0; b_ < x.batch; ++b_) {
            std::vector<T> gext(out_ch * (L + 3));
            for (int oc = 0; oc < out_ch; ++oc)
                detail::build_ext_grad_row(gout.row_ptr(b_, oc), L, ConvPadMode::zero_pad_1_2,
                                           gext.data() + oc * (L + 3));
            for (int ic = 0; ic < static_cast<int>(x.channels); ++ic) {
                T* gxr = gx.row_ptr(b_, ic);
                std::vector<double> acc(L, 0.0);
                for (int oc = 0; oc < out_ch; ++oc) {
                    const T* gr = gext.data() + oc * (L + 3);
                    const T* wr = w.data() + widx(oc, ic, 0);
                    for (std::size_t t = 0; t < L; ++t) {
                        double s = 0.0;
                        for (int k = 0; k < kKernel; ++k)
                            s += static_cast<double>(gr[t + k]) * wr[kKernel - 1 - k];
                        acc[t] += s;
                    }
                }
                for (std::size_t t = 0; t < L; ++t) gxr[t] = static_cast<T>(acc[t]);
            }
        }
        for (int oc = 0; oc < out_ch; ++oc) {
            for (int ic = 0; ic < in_ch; ++ic) {
                double acc[kKernel] = {0, 0, 0, 0};
                std::vector<T> ext(L + 3);
                for (std::size_t b_ = 0; b_ < x.batch; ++b_) {
                    detail::build_ext_row(x.row_ptr(b_, ic), L, ConvPadMode::zero_pad_1_2, ext.data());
                    const T* gr = gout.row_ptr(b_, oc);
                    for (std::size_t l = 0; l < L; ++l)
                        for (int k = 0; k < kKernel; ++k)
                            acc[k] += static_cast<double>(gr[l]) * ext[l + k];
                }
                for (int k = 0; k < kKernel; ++k) gw[widx(oc, ic, k)] += static_cast<T>(acc[k]);
            }
            double ab = 0.0;
            for (std::size_t b_ = 0; b_ < x.batch; ++b_) {
                const T* gr = gout.row_ptr(b_, oc);
                for (std::size_t l = 0; l < L; ++l) ab += static_cast<double>(gr[l]);
            }
            gb[oc] += static_cast<T>(ab);
        }
        return gx;
    }
};

template <typename T>
RealTensor<T> relu(const RealTensor<T>& x) {
    RealTensor<T> y = x;
    for (auto& v : y.data) v = v > T(0) ? v : T(0);
    return y;
}

template <typename T>
RealTensor<T> relu_backward(const RealTensor<T>& x, const RealTensor<T>& gout) {
    RealTensor<T> gx(x.batch, x.channels, x.length);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        gx.data[i] = x.data[i] > T(0) ? gout.data[i] : T(0);
    return gx;
}

/// Non-overlapping windows when kernel == stride; trailing remainder samples
/// are dropped. Ties resolve to the first position.
struct MaxPoolIndices {
    std::vector<std::size_t> argmax;  // flat source index per output element
    std::size_t batch = 0, channels = 0, in_len = 0, out_len = 0;
};

template <typename T>
RealTensor<T> max_pool_forward(const RealTensor<T>& x, int kernel, int stride,
                               MaxPoolIndices* idx = nullptr) {
    if (kernel < 1 || stride < 1) throw std::invalid_argument("max_pool: bad kernel/stride");
    if (x.length < static_cast<std::size_t>(kernel))
        throw std::invalid_argument("max_pool: input shorter than kernel");
    const std::size_t out_len = (x.length - kernel) / stride + 1;
    RealTensor<T> y(x.batch, x.channels, out_len);
    MaxPoolIndices local;
    MaxPoolIndices& m = idx ? *idx : local;
    m.argmax.assign(x.batch * x.channels * out_len, 0);
    m.batch = x.batch;
    m.channels = x.channels;
    m.in_len = x.length;
    m.out_len = out_len;
    for (std::size_t b = 0; b < x.batch; ++b)
        for (std::size_t c = 0; c < x.channels; ++c) {
            const T* xr = x.row_ptr(b, c);
            T* yr = y.row_ptr(b, c);
            for (std::size_t o = 0; o < out_len; ++o) {
                std::size_t best = o * stride;
                T best_v = xr[best];
                for (int k = 1; k < kernel; ++k) {
                    const std::size_t p = o * stride + k;
                    if (xr[p] > best_v) {
                        best_v = xr[p];
                        best = p;
                    }
                }
                yr[o] = best_v;
                m.argmax[y.idx(b, c, o)] = x.idx(b, c, best);
            }
        }
    return y;
}

template <typename T>
RealTensor<T> max_pool_backward(const RealTensor<T>& gout, const MaxPoolIndices& m) {
    RealTensor<T> gx(m.batch, m.channels, m.in_len);
    for (std::size_t i = 0; i < gout.data.size(); ++i) gx.data[m.argmax[i]] += gout.data[i];
    return gx;
}

/// 1-D batch norm over (batch, length) per channel, with running statistics
/// for eval mode.
template <typename T = float>
struct BatchNorm1d {
    int ch = 0;
    double momentum = 0.1;
    double eps = 1e-5;
    std::vector<T> gamma, beta;
    std::vector<T> g_gamma, g_beta;
    std::vector<T> running_mean, running_var;

    struct Cache {
        std::vector<double> mean, inv_std;
        RealTensor<T> xhat;
    };

    BatchNorm1d() = default;
    explicit BatchNorm1d(int channels) : ch(channels) {
        gamma.assign(channels, T(1));
        beta.assign(channels, T(0));
        g_gamma.assign(channels, T(0));
        g_beta.assign(channels, T(0));
        running_mean.assign(channels, 0.0);
        running_var.assign(channels, 1.0);
    }

    void zero_grad() {
        std::fill(g_gamma.begin(), g_gamma.end(), T(0));
        std::fill(g_beta.begin(), g_beta.end(), T(0));
    }

    RealTensor<T> forward(const RealTensor<T>& x, bool training, Cache* cache = nullptr) {
        if (static_cast<int>(x.channels) != ch)
            throw std::invalid_argument("BatchNorm1d: channel mismatch");
        RealTensor<T> y(x.batch, x.channels, x.length);
        const double n = static_cast<double>(x.batch * x.length);
        if (training && cache) {
            cache->mean.assign(ch, 0.0);
            cache->inv_std.assign(ch, 0.0);
            cache->xhat = RealTensor<T>(x.batch, x.channels, x.length);
        }
        for (int c = 0; c < ch; ++c) {
            double mean, var;
            if (training) {
                double s = 0.0;
                for (std::size_t b = 0; b < x.batch; ++b) {
                    const T* xr = x.row_ptr(b, c);
                    for (std::size_t l = 0; l < x.length; ++l) s += xr[l];
                }
                mean = s / n;
                double sv = 0.0;
                for (std::size_t b = 0; b < x.batch; ++b) {
                    const T* xr = x.row_ptr(b, c);
                    for (std::size_t l = 0; l < x.length; ++l) {
                        const double d = xr[l] - mean;
                        sv += d * d;
                    }
                }
                var = sv / n;
                const double unbiased = n > 1.0 ? sv / (n - 1.0) : var;
                running_mean[c] =
                    static_cast<T>((1.0 - momentum) * running_mean[c] + momentum * mean);
                running_var[c] =
                    static_cast<T>((1.0 - momentum) * running_var[c] + momentum * unbiased);
            } else {
                mean = running_mean[c];
                var = running_var[c];
            }
            const double inv_std = 1.0 / std::sqrt(var + eps);
            if (training && cache) {
                cache->mean[c] = mean;
                cache->inv_std[c] = inv_std;
            }
            const double g = gamma[c], bt = beta[c];
            for (std::size_t b = 0; b < x.batch; ++b) {
                const T* xr = x.row_ptr(b, c);
                T* yr = y.row_ptr(b, c);
                T* xh = (training && cache) ? cache->xhat.row_ptr(b, c) : nullptr;
                for (std::size_t l = 0; l < x.length; ++l) {
                    const double h = (xr[l] - mean) * inv_std;
                    if (xh) xh[l] = static_cast<T>(h);
                    yr[l] = static_cast<T>(g * h + bt);
                }
            }
        }
        return y;
    }

    RealTensor<T> backward(const Cache& cache, const RealTensor<T>& gout) {
        const std::size_t B = gout.batch, L = gout.length;
        const double n = static_cast<double>(B * L);
        RealTensor<T> gx(B, gout.channels, L);
        for (int c = 0; c < ch; ++c) {
            double sum_g = 0.0, sum_gx = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                const T* gr = gout.row_ptr(b, c);
                const T* xh = cache.xhat.row_ptr(b, c);
                for (std::size_t l = 0; l < L; ++l) {
                    sum_g += gr[l];
                    sum_gx += static_cast<double>(gr[l]) * xh[l];
                }
            }
            g_gamma[c] += static_cast<T>(sum_gx);
            g_beta[c] += static_cast<T>(sum_g);
            const double g = gamma[c];
            const double inv_std = cache.inv_std[c];
            for (std::size_t b = 0; b < B; ++b) {
                const T* gr = gout.row_ptr(b, c);
                const T* xh = cache.xhat.row_ptr(b, c);
                T* gxr = gx.row_ptr(b, c);
                for (std::size_t l = 0; l < L; ++l) {
                    const double t = n * gr[l] - sum_g - xh[l] * sum_gx;
                    gxr[l] = static_cast<T>(g * inv_std * t / n);
                }
            }
        }
        return gx;
    }
};

/// Inverted dropout. The mask is drawn from the provided stream so a step is
/// reproducible; eval mode is the identity.
template <typename T>
RealTensor<T> dropout_forward(const RealTensor<T>& x, double rate, bool training, Rng& rng,
                              std::vector<std::uint8_t>* mask_out = nullptr) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) {
        if (mask_out) mask_out->assign(x.data.size(), 1);
        return x;
    }
    RealTensor<T> y(x.batch, x.channels, x.length);
    const double scale = 1.0 / (1.0 - rate);
    std::vector<std::uint8_t> local;
    std::vector<std::uint8_t>& mask = mask_out ? *mask_out : local;
    mask.assign(x.data.size(), 0);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const bool keep = rng.uniform() >= rate;
        mask[i] = keep ? 1 : 0;
        y.data[i] = keep ? static_cast<T>(x.data[i] * scale) : T(0);
    }
    return y;
}

template <typename T>
RealTensor<T> dropout_backward(const RealTensor<T>& gout, const std::vector<std::uint8_t>& mask,
                               double rate) {
    RealTensor<T> gx(gout.batch, gout.channels, gout.length);
    const double scale = rate > 0.0 ? 1.0 / (1.0 - rate) : 1.0;
    for (std::size_t i = 0; i < gout.data.size(); ++i)
        gx.data[i] = mask[i] ? static_cast<T>(gout.data[i] * scale) : T(0);
    return gx;
}

}  // namespace dicnn
