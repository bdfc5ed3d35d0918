#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicnn/complex_tensor.hpp"
#include "dicnn/rng.hpp"

namespace dicnn {

enum class ConvPadMode {
    zero_pad_1_2,  // left pad 1, right pad 2 (length-preserving for kernel 4)
    circular,      // wrap-around taps; exactly equivariant to circular shifts
};

inline const char* to_string(ConvPadMode m) {
    return m == ConvPadMode::circular ? "circular" : "zero";
}

inline ConvPadMode conv_pad_mode_from_string(const std::string& s) {
    if (s == "circular") return ConvPadMode::circular;
    if (s == "zero" || s == "zero_pad_1_2") return ConvPadMode::zero_pad_1_2;
    throw std::invalid_argument("unknown conv pad mode: " + s);
}

namespace detail {

// Extended input row: ext[t] corresponds to x[t - 1] with the out-of-range
// positions zero-filled or wrapped. Length L + 3 serves kernel 4, stride 1.
template <typename T>
void build_ext_row(const T* x, std::size_t len, ConvPadMode mode, T* ext) {
    if (mode == ConvPadMode::circular) {
        ext[0] = x[len - 1];
        for (std::size_t t = 0; t < len; ++t) ext[t + 1] = x[t];
        ext[len + 1] = x[0];
        ext[len + 2] = x[1 % len];
    } else {
        ext[0] = T(0);
        for (std::size_t t = 0; t < len; ++t) ext[t + 1] = x[t];
        ext[len + 1] = T(0);
        ext[len + 2] = T(0);
    }
}

// Extended gradient row for the input-gradient pass: gext[j] = g[j - 2]
// (mirror padding of the forward pass).
template <typename T>
void build_ext_grad_row(const T* g, std::size_t len, ConvPadMode mode, T* ext) {
    if (mode == ConvPadMode::circular) {
        ext[0] = g[(len - 2) % len];
        ext[1] = g[len - 1];
        for (std::size_t t = 0; t < len; ++t) ext[t + 2] = g[t];
        ext[len + 2] = g[0];
    } else {
        ext[0] = T(0);
        ext[1] = T(0);
        for (std::size_t t = 0; t < len; ++t) ext[t + 2] = g[t];
        ext[len + 2] = T(0);
    }
}

}  // namespace detail

/// Complex 1-D convolution, kernel 4, stride 1, length preserving.
/// Re(out) = conv(x_r, w_r) - conv(x_i, w_i) + b_r
/// Im(out) = conv(x_r, w_i) + conv(x_i, w_r) + b_i
/// Accumulation is double precision in a fixed operand order, so in circular
/// mode the layer is bit-exactly equivariant to circular shifts.
template <typename T = float>
struct ComplexConv {
    static constexpr int kKernel = 4;

    int in_ch = 0, out_ch = 0;
    ConvPadMode pad_mode = ConvPadMode::zero_pad_1_2;
    std::vector<T> w_r, w_i;    // [out_ch][in_ch][kKernel]
    std::vector<T> b_r, b_i;    // [out_ch]
    std::vector<T> gw_r, gw_i, gb_r, gb_i;

    ComplexConv() = default;
    ComplexConv(int in, int out, ConvPadMode mode) : in_ch(in), out_ch(out), pad_mode(mode) {
        const std::size_t wn = static_cast<std::size_t>(in) * out * kKernel;
        w_r.assign(wn, T(0));
        w_i.assign(wn, T(0));
        b_r.assign(out, T(0));
        b_i.assign(out, T(0));
        gw_r.assign(wn, T(0));
        gw_i.assign(wn, T(0));
        gb_r.assign(out, T(0));
        gb_i.assign(out, T(0));
    }

    std::size_t widx(int oc, int ic, int k) const {
        return (static_cast<std::size_t>(oc) * in_ch + ic) * kKernel + k;
    }

    void init(Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * kKernel);
        for (auto& w : w_r) w = static_cast<T>(rng.uniform(-bound, bound));
        for (auto& w : w_i) w = static_cast<T>(rng.uniform(-bound, bound));
    }

    void zero_grad() {
        std::fill(gw_r.begin(), gw_r.end(), T(0));
        std::fill(gw_i.begin(), gw_i.end(), T(0));
        std::fill(gb_r.begin(), gb_r.end(), T(0));
        std::fill(gb_i.begin(), gb_i.end(), T(0));
    }

    ComplexTensor<T> forward(const ComplexTensor<T>& x) const {
        if (static_cast<int>(x.channels) != in_ch)
            throw std::invalid_argument("ComplexConv: input channel mismatch");
        if (pad_mode == ConvPadMode::circular && x.length < 2)
            throw std::invalid_argument("ComplexConv: circular mode needs length >= 2");
        const std::size_t L = x.length;
        ComplexTensor<T> y(x.batch, static_cast<std::size_t>(out_ch), L);

#pragma omp parallel for schedule(static)
        for (long long bi = 0; bi < static_cast<long long>(x.batch); ++bi) {
            const std::size_t b = static_cast<std::size_t>(bi);
            std::vector<T> ext_r(in_ch * (L + 3)), ext_i(in_ch * (L + 3));
            for (int ic = 0; ic < in_ch; ++ic) {
                detail::build_ext_row(x.re_row(b, ic), L, pad_mode, ext_r.data() + ic * (L + 3));
                detail::build_ext_row(x.im_row(b, ic), L, pad_mode, ext_i.data() + ic * (L + 3));
            }
            std::vector<double> acc_r(L), acc_i(L);
            for (int oc = 0; oc < out_ch; ++oc) {
                std::fill(acc_r.begin(), acc_r.end(), 0.0);
                std::fill(acc_i.begin(), acc_i.end(), 0.0);
                double* __restrict ar = acc_r.data();
                double* __restrict ai = acc_i.data();
                for (int ic = 0; ic < in_ch; ++ic) {
                    // Shifted elementwise passes over l: no cross-l reduction,
                    // so the loop vectorizes while each output element keeps a
                    // fixed (ic, k) accumulation order.
                    for (int k = 0; k < kKernel; ++k) {
                        const T* __restrict xr = ext_r.data() + ic * (L + 3) + k;
                        const T* __restrict xi = ext_i.data() + ic * (L + 3) + k;
                        const double wr = w_r[widx(oc, ic, k)];
                        const double wi = w_i[widx(oc, ic, k)];
                        for (std::size_t l = 0; l < L; ++l) {
                            const double vr = static_cast<double>(xr[l]);
                            const double vi = static_cast<double>(xi[l]);
                            ar[l] += vr * wr - vi * wi;
                            ai[l] += vr * wi + vi * wr;
                        }
                    }
                }
                T* yr = y.re_row(b, oc);
                T* yi = y.im_row(b, oc);
                for (std::size_t l = 0; l < L; ++l) {
                    yr[l] = static_cast<T>(acc_r[l] + static_cast<double>(b_r[oc]));
                    yi[l] = static_cast<T>(acc_i[l] + static_cast<double>(b_i[oc]));
                }
            }
        }
        return y;
    }

    /// Accumulates parameter gradients (caller zeroes them per step) and
    /// returns the input gradient. Deterministic for any thread count.
    /// Pass need_input_grad = false for the first layer to skip that pass.
    ComplexTensor<T> backward(const ComplexTensor<T>& x, const ComplexTensor<T>& gout,
                              bool need_input_grad = true) {
        if (!(x.batch == gout.batch && x.length == gout.length &&
              static_cast<int>(gout.channels) == out_ch))
            throw std::invalid_argument("ComplexConv: gradient shape mismatch");
        const std::size_t L = x.length;
        ComplexTensor<T> gx;
        if (need_input_grad) gx = ComplexTensor<T>(x.batch, x.channels, L);

        // Input gradient: correlation of the padded output gradient with the
        // reversed kernels.
#pragma omp parallel for schedule(static)
        for (long long bi = 0; bi < static_cast<long long>(need_input_grad ? x.batch : 0); ++bi) {
            const std::size_t b = static_cast<std::size_t>(bi);
            std::vector<T> gext_r(out_ch * (L + 3)), gext_i(out_ch * (L + 3));
            for (int oc = 0; oc < out_ch; ++oc) {
                detail::build_ext_grad_row(gout.re_row(b, oc), L, pad_mode,
                                           gext_r.data() + oc * (L + 3));
                detail::build_ext_grad_row(gout.im_row(b, oc), L, pad_mode,
                                           gext_i.data() + oc * (L + 3));
            }
            std::vector<double> acc_r(L), acc_i(L);
            for (int ic = 0; ic < static_cast<int>(x.channels); ++ic) {
                std::fill(acc_r.begin(), acc_r.end(), 0.0);
                std::fill(acc_i.begin(), acc_i.end(), 0.0);
                double* __restrict ar = acc_r.data();
                double* __restrict ai = acc_i.data();
                for (int oc = 0; oc < out_ch; ++oc) {
                    for (int k = 0; k < kKernel; ++k) {
                        const T* __restrict gr = gext_r.data() + oc * (L + 3) + k;
                        const T* __restrict gi = gext_i.data() + oc * (L + 3) + k;
                        const double wr_v = w_r[widx(oc, ic, kKernel - 1 - k)];
                        const double wi_v = w_i[widx(oc, ic, kKernel - 1 - k)];
                        for (std::size_t t = 0; t < L; ++t) {
                            const double gr_d = static_cast<double>(gr[t]);
                            const double gi_d = static_cast<double>(gi[t]);
                            ar[t] += gr_d * wr_v + gi_d * wi_v;
                            ai[t] += -gr_d * wi_v + gi_d * wr_v;
                        }
                    }
                }
                T* gxr = gx.re_row(b, ic);
                T* gxi = gx.im_row(b, ic);
                for (std::size_t t = 0; t < L; ++t) {
                    gxr[t] = static_cast<T>(acc_r[t]);
                    gxi[t] = static_cast<T>(acc_i[t]);
                }
            }
        }

        // Weight gradients. Extended input planes are materialized once, then
        // each (oc, ic) slice is reduced over (batch, l) in a fixed order;
        // slices are independent, so the loop parallelizes.
        const std::size_t ext_stride = L + 3;
        std::vector<T> ext_r(x.batch * x.channels * ext_stride);
        std::vector<T> ext_i(x.batch * x.channels * ext_stride);
#pragma omp parallel for schedule(static)
        for (long long bi = 0; bi < static_cast<long long>(x.batch); ++bi) {
            const std::size_t b = static_cast<std::size_t>(bi);
            for (std::size_t c = 0; c < x.channels; ++c) {
                const std::size_t base = (b * x.channels + c) * ext_stride;
                detail::build_ext_row(x.re_row(b, c), L, pad_mode, ext_r.data() + base);
                detail::build_ext_row(x.im_row(b, c), L, pad_mode, ext_i.data() + base);
            }
        }
#pragma omp parallel for schedule(static)
        for (long long slice = 0; slice < static_cast<long long>(out_ch) * in_ch; ++slice) {
            const int oc = static_cast<int>(slice / in_ch);
            const int ic = static_cast<int>(slice % in_ch);
            double awr0 = 0, awr1 = 0, awr2 = 0, awr3 = 0;
            double awi0 = 0, awi1 = 0, awi2 = 0, awi3 = 0;
            for (std::size_t b = 0; b < x.batch; ++b) {
                const std::size_t base = (b * x.channels + ic) * ext_stride;
                const T* __restrict xr = ext_r.data() + base;
                const T* __restrict xi = ext_i.data() + base;
                const T* __restrict gr = gout.re_row(b, oc);
                const T* __restrict gi = gout.im_row(b, oc);
#pragma omp simd reduction(+ : awr0, awr1, awr2, awr3, awi0, awi1, awi2, awi3)
                for (std::size_t l = 0; l < L; ++l) {
                    const double gr_v = static_cast<double>(gr[l]);
                    const double gi_v = static_cast<double>(gi[l]);
                    awr0 += gr_v * xr[l] + gi_v * xi[l];
                    awi0 += -gr_v * xi[l] + gi_v * xr[l];
                    awr1 += gr_v * xr[l + 1] + gi_v * xi[l + 1];
                    awi1 += -gr_v * xi[l + 1] + gi_v * xr[l + 1];
                    awr2 += gr_v * xr[l + 2] + gi_v * xi[l + 2];
                    awi2 += -gr_v * xi[l + 2] + gi_v * xr[l + 2];
                    awr3 += gr_v * xr[l + 3] + gi_v * xi[l + 3];
                    awi3 += -gr_v * xi[l + 3] + gi_v * xr[l + 3];
                }
            }
            const double awr[kKernel] = {awr0, awr1, awr2, awr3};
            const double awi[kKernel] = {awi0, awi1, awi2, awi3};
            for (int k = 0; k < kKernel; ++k) {
                gw_r[widx(oc, ic, k)] += static_cast<T>(awr[k]);
                gw_i[widx(oc, ic, k)] += static_cast<T>(awi[k]);
            }
        }

        for (int oc = 0; oc < out_ch; ++oc) {
            double ar = 0.0, ai = 0.0;
            for (std::size_t b = 0; b < x.batch; ++b) {
                const T* gr = gout.re_row(b, oc);
                const T* gi = gout.im_row(b, oc);
                for (std::size_t l = 0; l < L; ++l) {
                    ar += static_cast<double>(gr[l]);
                    ai += static_cast<double>(gi[l]);
                }
            }
            gb_r[oc] += static_cast<T>(ar);
            gb_i[oc] += static_cast<T>(ai);
        }
        return gx;
    }
};

/// Elementwise ReLU applied independently to the real and imaginary planes.
template <typename T>
ComplexTensor<T> complex_relu(const ComplexTensor<T>& x) {
    ComplexTensor<T> y = x;
    for (auto& v : y.re) v = v > T(0) ? v : T(0);
    for (auto& v : y.im) v = v > T(0) ? v : T(0);
    return y;
}

template <typename T>
ComplexTensor<T> complex_relu_backward(const ComplexTensor<T>& x, const ComplexTensor<T>& gout) {
    if (!x.same_shape(gout)) throw std::invalid_argument("complex_relu: shape mismatch");
    ComplexTensor<T> gx(x.batch, x.channels, x.length);
    for (std::size_t i = 0; i < x.re.size(); ++i) gx.re[i] = x.re[i] > T(0) ? gout.re[i] : T(0);
    for (std::size_t i = 0; i < x.im.size(); ++i) gx.im[i] = x.im[i] > T(0) ? gout.im[i] : T(0);
    return gx;
}

/// Which polyphase offset each batch sample selected; needed to route
/// gradients and to assert the invariance property layerwise.
struct ApsSelection {
    std::vector<int> offsets;  // one per batch sample
    std::size_t batch = 0, channels = 0, in_len = 0;
    int stride = 1;
};

/// Adaptive polyphase downsampling. Per batch sample, picks the polyphase
/// component x[offset::stride] with the largest l2 norm over all channels
/// and positions (squared-modulus sum); ties go to the lowest offset.
/// Output length is ceil(L/stride); short components are zero-filled at the
/// tail so shapes stay static when stride does not divide L.
template <typename T>
ComplexTensor<T> aps_forward(const ComplexTensor<T>& x, int stride, ApsSelection* sel = nullptr) {
    if (stride < 1) throw std::invalid_argument("aps_forward: stride must be >= 1");
    if (x.length < static_cast<std::size_t>(stride))
        throw std::invalid_argument("aps_forward: length must be >= stride");
    const std::size_t L = x.length;
    const std::size_t out_len = (L + stride - 1) / stride;
    ComplexTensor<T> y(x.batch, x.channels, out_len);
    ApsSelection local;
    ApsSelection& s = sel ? *sel : local;
    s.offsets.assign(x.batch, 0);
    s.batch = x.batch;
    s.channels = x.channels;
    s.in_len = L;
    s.stride = stride;

    for (std::size_t b = 0; b < x.batch; ++b) {
        int best = 0;
        double best_norm = -1.0;
        for (int off = 0; off < stride; ++off) {
            NeumaierSum acc;
            for (std::size_t c = 0; c < x.channels; ++c) {
                const T* xr = x.re_row(b, c);
                const T* xi = x.im_row(b, c);
                for (std::size_t t = off; t < L; t += stride) {
                    const double vr = static_cast<double>(xr[t]);
                    const double vi = static_cast<double>(xi[t]);
                    acc.add(vr * vr + vi * vi);
                }
            }
            const double norm = acc.value();
            if (norm > best_norm) {
                best_norm = norm;
                best = off;
            }
        }
        s.offsets[b] = best;
        for (std::size_t c = 0; c < x.channels; ++c) {
            const T* xr = x.re_row(b, c);
            const T* xi = x.im_row(b, c);
            T* yr = y.re_row(b, c);
            T* yi = y.im_row(b, c);
            for (std::size_t t = 0; t < out_len; ++t) {
                const std::size_t src = static_cast<std::size_t>(best) + t * stride;
                yr[t] = src < L ? xr[src] : T(0);
                yi[t] = src < L ? xi[src] : T(0);
            }
        }
    }
    return y;
}

template <typename T>
ComplexTensor<T> aps_backward(const ComplexTensor<T>& gout, const ApsSelection& sel) {
    ComplexTensor<T> gx(sel.batch, sel.channels, sel.in_len);
    for (std::size_t b = 0; b < sel.batch; ++b) {
        const std::size_t off = static_cast<std::size_t>(sel.offsets[b]);
        for (std::size_t c = 0; c < sel.channels; ++c) {
            const T* gr = gout.re_row(b, c);
            const T* gi = gout.im_row(b, c);
            T* xr = gx.re_row(b, c);
            T* xi = gx.im_row(b, c);
            for (std::size_t t = 0; t < gout.length; ++t) {
                const std::size_t dst = off + t * sel.stride;
                if (dst < sel.in_len) {
                    xr[dst] = gr[t];
                    xi[dst] = gi[t];
                }
            }
        }
    }
    return gx;
}

/// Per-channel complex mean over the length axis. Compensated summation keeps
/// the result insensitive to circular rotations of the input.
template <typename T>
ComplexTensor<T> gap_forward(const ComplexTensor<T>& x) {
    if (x.length < 1) throw std::invalid_argument("gap_forward: empty length axis");
    ComplexTensor<T> y(x.batch, x.channels, 1);
    for (std::size_t b = 0; b < x.batch; ++b)
        for (std::size_t c = 0; c < x.channels; ++c) {
            NeumaierSum sr, si;
            const T* xr = x.re_row(b, c);
            const T* xi = x.im_row(b, c);
            for (std::size_t l = 0; l < x.length; ++l) {
                sr.add(static_cast<double>(xr[l]));
                si.add(static_cast<double>(xi[l]));
            }
            y.re[y.idx(b, c, 0)] = static_cast<T>(sr.value() / static_cast<double>(x.length));
            y.im[y.idx(b, c, 0)] = static_cast<T>(si.value() / static_cast<double>(x.length));
        }
    return y;
}

template <typename T>
ComplexTensor<T> gap_backward(const ComplexTensor<T>& gout, std::size_t in_len) {
    ComplexTensor<T> gx(gout.batch, gout.channels, in_len);
    for (std::size_t b = 0; b < gout.batch; ++b)
        for (std::size_t c = 0; c < gout.channels; ++c) {
            const T gr = gout.re[gout.idx(b, c, 0)] / static_cast<T>(in_len);
            const T gi = gout.im[gout.idx(b, c, 0)] / static_cast<T>(in_len);
            T* xr = gx.re_row(b, c);
            T* xi = gx.im_row(b, c);
            for (std::size_t l = 0; l < in_len; ++l) {
                xr[l] = gr;
                xi[l] = gi;
            }
        }
    return gx;
}

/// Complex fully connected layer over feature vectors (tensors of length 1).
/// Re(out) = x_r w_r - x_i w_i + b_r;  Im(out) = x_r w_i + x_i w_r + b_i.
template <typename T = float>
struct ComplexLinear {
    int in_f = 0, out_f = 0;
    std::vector<T> w_r, w_i;  // [out_f][in_f]
    std::vector<T> b_r, b_i;  // [out_f]
    std::vector<T> gw_r, gw_i, gb_r, gb_i;

    ComplexLinear() = default;
    ComplexLinear(int in, int out) : in_f(in), out_f(out) {
        w_r.assign(static_cast<std::size_t>(in) * out, T(0));
        w_i.assign(static_cast<std::size_t>(in) * out, T(0));
        b_r.assign(out, T(0));
        b_i.assign(out, T(0));
        gw_r.assign(w_r.size(), T(0));
        gw_i.assign(w_i.size(), T(0));
        gb_r.assign(out, T(0));
        gb_i.assign(out, T(0));
    }

    void init(Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_f));
        for (auto& w : w_r) w = static_cast<T>(rng.uniform(-bound, bound));
        for (auto& w : w_i) w = static_cast<T>(rng.uniform(-bound, bound));
    }

    void zero_grad() {
        std::fill(gw_r.begin(), gw_r.end(), T(0));
        std::fill(gw_i.begin(), gw_i.end(), T(0));
        std::fill(gb_r.begin(), gb_r.end(), T(0));
        std::fill(gb_i.begin(), gb_i.end(), T(0));
    }

    ComplexTensor<T> forward(const ComplexTensor<T>& x) const {
        if (static_cast<int>(x.channels) != in_f || x.length != 1)
            throw std::invalid_argument("ComplexLinear: input shape mismatch");
        ComplexTensor<T> y(x.batch, static_cast<std::size_t>(out_f), 1);
        for (std::size_t b = 0; b < x.batch; ++b)
            for (int o = 0; o < out_f; ++o) {
                double ar = static_cast<double>(b_r[o]);
                double ai = static_cast<double>(b_i[o]);
                const T* wr = w_r.data() + static_cast<std::size_t>(o) * in_f;
                const T* wi = w_i.data() + static_cast<std::size_t>(o) * in_f;
                for (int i = 0; i < in_f; ++i) {
                    const double xr = x.re[x.idx(b, i, 0)];
                    const double xi = x.im[x.idx(b, i, 0)];
                    ar += xr * wr[i] - xi * wi[i];
                    ai += xr * wi[i] + xi * wr[i];
                }
                y.re[y.idx(b, o, 0)] = static_cast<T>(ar);
                y.im[y.idx(b, o, 0)] = static_cast<T>(ai);
            }
        return y;
    }

    ComplexTensor<T> backward(const ComplexTensor<T>& x, const ComplexTensor<T>& gout) {
        if (!(gout.batch == x.batch && static_cast<int>(gout.channels) == out_f && gout.length == 1))
            throw std::invalid_argument("ComplexLinear: gradient shape mismatch");
        ComplexTensor<T> gx(x.batch, x.channels, 1);
        for (std::size_t b = 0; b < x.batch; ++b) {
            for (int i = 0; i < in_f; ++i) {
                double ar = 0.0, ai = 0.0;
                for (int o = 0; o < out_f; ++o) {
                    const double gr = gout.re[gout.idx(b, o, 0)];
                    const double gi = gout.im[gout.idx(b, o, 0)];
                    const double wr = w_r[static_cast<std::size_t>(o) * in_f + i];
                    const double wi = w_i[static_cast<std::size_t>(o) * in_f + i];
                    ar += gr * wr + gi * wi;
                    ai += -gr * wi + gi * wr;
                }
                gx.re[gx.idx(b, i, 0)] = static_cast<T>(ar);
                gx.im[gx.idx(b, i, 0)] = static_cast<T>(ai);
            }
        }
        for (int o = 0; o < out_f; ++o) {
            for (int i = 0; i < in_f; ++i) {
                double awr = 0.0, awi = 0.0;
                for (std::size_t b = 0; b < x.batch; ++b) {
                    const double gr = gout.re[gout.idx(b, o, 0)];
                    const double gi = gout.im[gout.idx(b, o, 0)];
                    const double xr = x.re[x.idx(b, i, 0)];
                    const double xi = x.im[x.idx(b, i, 0)];
                    awr += gr * xr + gi * xi;
                    awi += -gr * xi + gi * xr;
                }
                gw_r[static_cast<std::size_t>(o) * in_f + i] += static_cast<T>(awr);
                gw_i[static_cast<std::size_t>(o) * in_f + i] += static_cast<T>(awi);
            }
            double abr = 0.0, abi = 0.0;
            for (std::size_t b = 0; b < x.batch; ++b) {
                abr += static_cast<double>(gout.re[gout.idx(b, o, 0)]);
                abi += static_cast<double>(gout.im[gout.idx(b, o, 0)]);
            }
            gb_r[o] += static_cast<T>(abr);
            gb_i[o] += static_cast<T>(abi);
        }
        return gx;
    }
};

/// Elementwise modulus of a feature vector: the real class scores fed to
/// softmax. d|z|/dz_r = z_r/|z| with the convention 0 at z = 0.
template <typename T>
std::vector<T> magnitude_logits(const ComplexTensor<T>& z) {
    std::vector<T> out(z.batch * z.channels);
    for (std::size_t b = 0; b < z.batch; ++b)
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double zr = z.re[z.idx(b, c, 0)];
            const double zi = z.im[z.idx(b, c, 0)];
            out[b * z.channels + c] = static_cast<T>(std::sqrt(zr * zr + zi * zi));
        }
    return out;
}

template <typename T>
ComplexTensor<T> magnitude_logits_backward(const ComplexTensor<T>& z, const std::vector<T>& gout) {
    if (gout.size() != z.batch * z.channels)
        throw std::invalid_argument("magnitude_logits: gradient size mismatch");
    ComplexTensor<T> gz(z.batch, z.channels, 1);
    for (std::size_t b = 0; b < z.batch; ++b)
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double zr = z.re[z.idx(b, c, 0)];
            const double zi = z.im[z.idx(b, c, 0)];
            const double mag = std::sqrt(zr * zr + zi * zi);
            const double g = static_cast<double>(gout[b * z.channels + c]);
            if (mag > 0.0) {
                gz.re[gz.idx(b, c, 0)] = static_cast<T>(g * zr / mag);
                gz.im[gz.idx(b, c, 0)] = static_cast<T>(g * zi / mag);
            }
        }
    return gz;
}

}  // namespace dicnn
