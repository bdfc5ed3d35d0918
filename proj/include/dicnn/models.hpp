#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dicnn/adam.hpp"
#include "dicnn/baseline_layers.hpp"
#include "dicnn/iq_frame.hpp"
#include "dicnn/layers.hpp"
#include "dicnn/loss.hpp"
#include "dicnn/spectral.hpp"

namespace dicnn {

/// Pack a batch of frames into the frequency-domain input tensor:
/// zero-pad by `pad` per side, DFT, one channel per sample.
template <typename T = float>
ComplexTensor<T> spectra_from_frames(const std::vector<const IqFrame*>& frames, int pad,
                                     const DftPlan* plan = nullptr) {
    if (frames.empty()) throw std::invalid_argument("spectra_from_frames: empty batch");
    const std::size_t n = frames[0]->size() + 2 * static_cast<std::size_t>(pad);
    ComplexTensor<T> x(frames.size(), 1, n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(frames.size()); ++i) {
        const Spectrum s = pad_and_dft(*frames[static_cast<std::size_t>(i)], pad, 1.0, plan);
        T* xr = x.re_row(static_cast<std::size_t>(i), 0);
        T* xi = x.im_row(static_cast<std::size_t>(i), 0);
        for (std::size_t k = 0; k < n; ++k) {
            xr[k] = static_cast<T>(s.re[k]);
            xi[k] = static_cast<T>(s.im[k]);
        }
    }
    return x;
}

/// Copy one spectrum per batch row (used when a shift operator has already
/// been applied to the spectrum).
template <typename T = float>
ComplexTensor<T> tensor_from_spectra(const std::vector<Spectrum>& spectra) {
    if (spectra.empty()) throw std::invalid_argument("tensor_from_spectra: empty batch");
    const std::size_t n = spectra[0].size();
    ComplexTensor<T> x(spectra.size(), 1, n);
    for (std::size_t b = 0; b < spectra.size(); ++b) {
        if (spectra[b].size() != n) throw std::invalid_argument("tensor_from_spectra: ragged batch");
        T* xr = x.re_row(b, 0);
        T* xi = x.im_row(b, 0);
        for (std::size_t k = 0; k < n; ++k) {
            xr[k] = static_cast<T>(spectra[b].re[k]);
            xi[k] = static_cast<T>(spectra[b].im[k]);
        }
    }
    return x;
}

template <typename T = float>
RealTensor<T> iq_tensor_from_frames(const std::vector<const IqFrame*>& frames) {
    if (frames.empty()) throw std::invalid_argument("iq_tensor_from_frames: empty batch");
    const std::size_t n = frames[0]->size();
    RealTensor<T> x(frames.size(), 2, n);
    for (std::size_t b = 0; b < frames.size(); ++b) {
        T* i_row = x.row_ptr(b, 0);
        T* q_row = x.row_ptr(b, 1);
        for (std::size_t k = 0; k < n; ++k) {
            i_row[k] = static_cast<T>(frames[b]->samples[k].real());
            q_row[k] = static_cast<T>(frames[b]->samples[k].imag());
        }
    }
    return x;
}

struct InvariantModelConfig {
    int pad = 280;
    int stride = 2;
    ConvPadMode conv_pad = ConvPadMode::zero_pad_1_2;
    int frame_len = 128;
    int classes = 7;
    std::array<int, 3> conv_channels{64, 32, 16};

    PaddingConfig padding() const { return PaddingConfig(pad, stride, frame_len); }

    void validate() const {
        if (classes < 2) throw std::invalid_argument("model config: classes must be >= 2");
        padding();  // throws on bad pad/stride/frame_len
    }
};

/// Frequency-domain classifier: three complex conv + ReLU blocks, each
/// followed by adaptive polyphase downsampling, then global average pooling,
/// a complex fully connected layer and an elementwise modulus producing the
/// real class scores.
template <typename T = float>
struct InvariantModel {
    InvariantModelConfig cfg;
    ComplexConv<T> cc1, cc2, cc3;
    ComplexLinear<T> fc;

    struct Cache {
        ComplexTensor<T> x0, a1, r1, p1, a2, r2, p2, a3, r3, p3, g, z;
        ApsSelection sel1, sel2, sel3;
    };

    InvariantModel() = default;
    explicit InvariantModel(const InvariantModelConfig& c) : cfg(c) {
        cfg.validate();
        cc1 = ComplexConv<T>(1, cfg.conv_channels[0], cfg.conv_pad);
        cc2 = ComplexConv<T>(cfg.conv_channels[0], cfg.conv_channels[1], cfg.conv_pad);
        cc3 = ComplexConv<T>(cfg.conv_channels[1], cfg.conv_channels[2], cfg.conv_pad);
        fc = ComplexLinear<T>(cfg.conv_channels[2], cfg.classes);
    }

    void init(std::uint64_t seed) {
        Rng r1_ = Rng::substream(seed, 1), r2_ = Rng::substream(seed, 2),
            r3_ = Rng::substream(seed, 3), r4_ = Rng::substream(seed, 4);
        cc1.init(r1_);
        cc2.init(r2_);
        cc3.init(r3_);
        fc.init(r4_);
    }

    /// Input: (B, 1, frame_len + 2*pad) spectra. Returns row-major (B, classes)
    /// real logits.
    std::vector<T> forward(const ComplexTensor<T>& spectra, Cache* cache = nullptr) const {
        if (spectra.channels != 1 ||
            spectra.length != static_cast<std::size_t>(cfg.padding().padded_len()))
            throw std::invalid_argument("InvariantModel: input shape mismatch");
        Cache local;
        Cache& c = cache ? *cache : local;
        c.x0 = spectra;
        c.a1 = cc1.forward(c.x0);
        c.r1 = complex_relu(c.a1);
        c.p1 = aps_forward(c.r1, cfg.stride, &c.sel1);
        c.a2 = cc2.forward(c.p1);
        c.r2 = complex_relu(c.a2);
        c.p2 = aps_forward(c.r2, cfg.stride, &c.sel2);
        c.a3 = cc3.forward(c.p2);
        c.r3 = complex_relu(c.a3);
        c.p3 = aps_forward(c.r3, cfg.stride, &c.sel3);
        c.g = gap_forward(c.p3);
        c.z = fc.forward(c.g);
        return magnitude_logits(c.z);
    }

    /// Accumulates parameter gradients from the logits gradient.
    void backward(const Cache& c, const std::vector<T>& dlogits) {
        ComplexTensor<T> dz = magnitude_logits_backward(c.z, dlogits);
        ComplexTensor<T> dg = fc.backward(c.g, dz);
        ComplexTensor<T> dp3 = gap_backward(dg, c.p3.length);
        ComplexTensor<T> dr3 = aps_backward<T>(dp3, c.sel3);
        ComplexTensor<T> da3 = complex_relu_backward(c.a3, dr3);
        ComplexTensor<T> dp2 = cc3.backward(c.p2, da3);
        ComplexTensor<T> dr2 = aps_backward<T>(dp2, c.sel2);
        ComplexTensor<T> da2 = complex_relu_backward(c.a2, dr2);
        ComplexTensor<T> dp1 = cc2.backward(c.p1, da2);
        ComplexTensor<T> dr1 = aps_backward<T>(dp1, c.sel1);
        ComplexTensor<T> da1 = complex_relu_backward(c.a1, dr1);
        cc1.backward(c.x0, da1, /*need_input_grad=*/false);
    }

    void zero_grad() {
        cc1.zero_grad();
        cc2.zero_grad();
        cc3.zero_grad();
        fc.zero_grad();
    }

    std::vector<ParamView<T>> params() {
        auto conv_views = [](const char* prefix, ComplexConv<T>& l, std::vector<ParamView<T>>& out) {
            const std::vector<std::size_t> wshape{static_cast<std::size_t>(l.out_ch),
                                                  static_cast<std::size_t>(l.in_ch),
                                                  static_cast<std::size_t>(ComplexConv<T>::kKernel)};
            const std::vector<std::size_t> bshape{static_cast<std::size_t>(l.out_ch)};
            out.push_back({std::string(prefix) + ".w_r", l.w_r.data(), l.gw_r.data(), wshape});
            out.push_back({std::string(prefix) + ".w_i", l.w_i.data(), l.gw_i.data(), wshape});
            out.push_back({std::string(prefix) + ".b_r", l.b_r.data(), l.gb_r.data(), bshape});
            out.push_back({std::string(prefix) + ".b_i", l.b_i.data(), l.gb_i.data(), bshape});
        };
        std::vector<ParamView<T>> out;
        conv_views("cc1", cc1, out);
        conv_views("cc2", cc2, out);
        conv_views("cc3", cc3, out);
        const std::vector<std::size_t> wshape{static_cast<std::size_t>(fc.out_f),
                                              static_cast<std::size_t>(fc.in_f)};
        const std::vector<std::size_t> bshape{static_cast<std::size_t>(fc.out_f)};
        out.push_back({"fc.w_r", fc.w_r.data(), fc.gw_r.data(), wshape});
        out.push_back({"fc.w_i", fc.w_i.data(), fc.gw_i.data(), wshape});
        out.push_back({"fc.b_r", fc.b_r.data(), fc.gb_r.data(), bshape});
        out.push_back({"fc.b_i", fc.b_i.data(), fc.gb_i.data(), bshape});
        return out;
    }

    std::vector<ParamView<T>> buffers() { return {}; }
};

template <typename T = float>
InvariantModel<T> init_invariant(const InvariantModelConfig& cfg, std::uint64_t seed) {
    InvariantModel<T> m(cfg);
    m.init(seed);
    return m;
}

struct VanillaModelConfig {
    int frame_len = 128;
    int classes = 7;
    std::array<int, 3> conv_channels{64, 32, 16};
    int pool = 2;  // max pool kernel == stride
    double dropout = 0.5;

    void validate() const {
        if (classes < 2) throw std::invalid_argument("model config: classes must be >= 2");
        if (frame_len % (pool * pool * pool) != 0)
            throw std::invalid_argument("model config: frame_len must survive three poolings");
    }

    int flat_features() const {
        return conv_channels[2] * (frame_len / (pool * pool * pool));
    }
};

/// Real linear layer for the baseline head.
template <typename T = float>
struct RealLinear {
    int in_f = 0, out_f = 0;
    std::vector<T> w, b, gw, gb;

    RealLinear() = default;
    RealLinear(int in, int out) : in_f(in), out_f(out) {
        w.assign(static_cast<std::size_t>(in) * out, T(0));
        b.assign(out, T(0));
        gw.assign(w.size(), T(0));
        gb.assign(out, T(0));
    }

    void init(Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_f));
        for (auto& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
    }

    void zero_grad() {
        std::fill(gw.begin(), gw.end(), T(0));
        std::fill(gb.begin(), gb.end(), T(0));
    }

    // x: (B, in_f) row-major.
    std::vector<T> forward(const std::vector<T>& x, std::size_t batch) const {
        if (x.size() != batch * static_cast<std::size_t>(in_f))
            throw std::invalid_argument("RealLinear: input size mismatch");
        std::vector<T> y(batch * out_f);
        for (std::size_t bt = 0; bt < batch; ++bt)
            for (int o = 0; o < out_f; ++o) {
                double acc = b[o];
                const T* wr = w.data() + static_cast<std::size_t>(o) * in_f;
                const T* xr = x.data() + bt * in_f;
                for (int i = 0; i < in_f; ++i) acc += static_cast<double>(xr[i]) * wr[i];
                y[bt * out_f + o] = static_cast<T>(acc);
            }
        return y;
    }

    std::vector<T> backward(const std::vector<T>& x, std::size_t batch, const std::vector<T>& gout) {
        std::vector<T> gx(batch * in_f, T(0));
        for (std::size_t bt = 0; bt < batch; ++bt) {
            const T* xr = x.data() + bt * in_f;
            const T* gr = gout.data() + bt * out_f;
            T* gxr = gx.data() + bt * in_f;
            for (int o = 0; o < out_f; ++o) {
                const T* wr = w.data() + static_cast<std::size_t>(o) * in_f;
                for (int i = 0; i < in_f; ++i) gxr[i] += static_cast<T>(gr[o] * wr[i]);
            }
        }
        for (int o = 0; o < out_f; ++o) {
            for (int i = 0; i < in_f; ++i) {
                double acc = 0.0;
                for (std::size_t bt = 0; bt < batch; ++bt)
                    acc += static_cast<double>(gout[bt * out_f + o]) * x[bt * in_f + i];
                gw[static_cast<std::size_t>(o) * in_f + i] += static_cast<T>(acc);
            }
            double acc = 0.0;
            for (std::size_t bt = 0; bt < batch; ++bt) acc += gout[bt * out_f + o];
            gb[o] += static_cast<T>(acc);
        }
        return gx;
    }
};

/// Time-domain baseline: three real conv blocks (conv -> ReLU -> max pool ->
/// batch norm) on the raw 2 x frame_len I/Q planes, dropout, then a real
/// fully connected head.
template <typename T = float>
struct VanillaModel {
    VanillaModelConfig cfg;
    RealConv1d<T> conv1, conv2, conv3;
    BatchNorm1d<T> bn1, bn2, bn3;
    RealLinear<T> fc;

    struct Cache {
        RealTensor<T> x0, a1, r1, m1, n1, a2, r2, m2, n2, a3, r3, m3, n3, d;
        MaxPoolIndices idx1, idx2, idx3;
        typename BatchNorm1d<T>::Cache bn1c, bn2c, bn3c;
        std::vector<std::uint8_t> drop_mask;
        std::vector<T> flat;
    };

    VanillaModel() = default;
    explicit VanillaModel(const VanillaModelConfig& c) : cfg(c) {
        cfg.validate();
        conv1 = RealConv1d<T>(2, cfg.conv_channels[0]);
        conv2 = RealConv1d<T>(cfg.conv_channels[0], cfg.conv_channels[1]);
        conv3 = RealConv1d<T>(cfg.conv_channels[1], cfg.conv_channels[2]);
        bn1 = BatchNorm1d<T>(cfg.conv_channels[0]);
        bn2 = BatchNorm1d<T>(cfg.conv_channels[1]);
        bn3 = BatchNorm1d<T>(cfg.conv_channels[2]);
        fc = RealLinear<T>(cfg.flat_features(), cfg.classes);
    }

    void init(std::uint64_t seed) {
        Rng r1_ = Rng::substream(seed, 1), r2_ = Rng::substream(seed, 2),
            r3_ = Rng::substream(seed, 3), r4_ = Rng::substream(seed, 4);
        conv1.init(r1_);
        conv2.init(r2_);
        conv3.init(r3_);
        fc.init(r4_);
    }

    /// training=true uses batch statistics and applies dropout from drop_rng.
    std::vector<T> forward(const RealTensor<T>& x, bool training, Rng& drop_rng,
                           Cache* cache = nullptr) {
        if (x.channels != 2 || x.length != static_cast<std::size_t>(cfg.frame_len))
            throw std::invalid_argument("VanillaModel: input shape mismatch");
        Cache local;
        Cache& c = cache ? *cache : local;
        c.x0 = x;
        c.a1 = conv1.forward(c.x0);
        c.r1 = relu(c.a1);
        c.m1 = max_pool_forward(c.r1, cfg.pool, cfg.pool, &c.idx1);
        c.n1 = bn1.forward(c.m1, training, &c.bn1c);
        c.a2 = conv2.forward(c.n1);
        c.r2 = relu(c.a2);
        c.m2 = max_pool_forward(c.r2, cfg.pool, cfg.pool, &c.idx2);
        c.n2 = bn2.forward(c.m2, training, &c.bn2c);
        c.a3 = conv3.forward(c.n2);
        c.r3 = relu(c.a3);
        c.m3 = max_pool_forward(c.r3, cfg.pool, cfg.pool, &c.idx3);
        c.n3 = bn3.forward(c.m3, training, &c.bn3c);
        c.d = dropout_forward(c.n3, cfg.dropout, training, drop_rng, &c.drop_mask);
        c.flat = c.d.data;  // (B, C*L) row-major flatten
        return fc.forward(c.flat, x.batch);
    }

    std::vector<T> forward_eval(const RealTensor<T>& x) {
        Rng unused(0);
        return forward(x, false, unused, nullptr);
    }

    void backward(const Cache& c, const std::vector<T>& dlogits) {
        const std::size_t B = c.x0.batch;
        std::vector<T> dflat = fc.backward(c.flat, B, dlogits);
        RealTensor<T> dd(B, c.d.channels, c.d.length);
        dd.data = dflat;
        RealTensor<T> dn3 = dropout_backward(dd, c.drop_mask, cfg.dropout);
        RealTensor<T> dm3 = bn3.backward(c.bn3c, dn3);
        RealTensor<T> dr3 = max_pool_backward(dm3, c.idx3);
        RealTensor<T> da3 = relu_backward(c.r3, dr3);
        RealTensor<T> dn2 = conv3.backward(c.n2, da3);
        RealTensor<T> dm2 = bn2.backward(c.bn2c, dn2);
        RealTensor<T> dr2 = max_pool_backward(dm2, c.idx2);
        RealTensor<T> da2 = relu_backward(c.r2, dr2);
        RealTensor<T> dn1 = conv2.backward(c.n1, da2);
        RealTensor<T> dm1 = bn1.backward(c.bn1c, dn1);
        RealTensor<T> dr1 = max_pool_backward(dm1, c.idx1);
        RealTensor<T> da1 = relu_backward(c.r1, dr1);
        conv1.backward(c.x0, da1);
    }

    void zero_grad() {
        conv1.zero_grad();
        conv2.zero_grad();
        conv3.zero_grad();
        bn1.zero_grad();
        bn2.zero_grad();
        bn3.zero_grad();
        fc.zero_grad();
    }

    std::vector<ParamView<T>> params() {
        auto conv_views = [](const char* prefix, RealConv1d<T>& l, std::vector<ParamView<T>>& out) {
            out.push_back({std::string(prefix) + ".w", l.w.data(), l.gw.data(),
                           {static_cast<std::size_t>(l.out_ch), static_cast<std::size_t>(l.in_ch),
                            static_cast<std::size_t>(RealConv1d<T>::kKernel)}});
            out.push_back({std::string(prefix) + ".b", l.b.data(), l.gb.data(),
                           {static_cast<std::size_t>(l.out_ch)}});
        };
        auto bn_views = [](const char* prefix, BatchNorm1d<T>& l, std::vector<ParamView<T>>& out) {
            out.push_back({std::string(prefix) + ".gamma", l.gamma.data(), l.g_gamma.data(),
                           {static_cast<std::size_t>(l.ch)}});
            out.push_back({std::string(prefix) + ".beta", l.beta.data(), l.g_beta.data(),
                           {static_cast<std::size_t>(l.ch)}});
        };
        std::vector<ParamView<T>> out;
        conv_views("conv1", conv1, out);
        bn_views("bn1", bn1, out);
        conv_views("conv2", conv2, out);
        bn_views("bn2", bn2, out);
        conv_views("conv3", conv3, out);
        bn_views("bn3", bn3, out);
        out.push_back({"fc.w", fc.w.data(), fc.gw.data(),
                       {static_cast<std::size_t>(fc.out_f), static_cast<std::size_t>(fc.in_f)}});
        out.push_back({"fc.b", fc.b.data(), fc.gb.data(), {static_cast<std::size_t>(fc.out_f)}});
        return out;
    }

    /// Non-trainable state (batch norm running statistics); persisted in
    /// checkpoints so eval-mode outputs round-trip exactly.
    std::vector<ParamView<T>> buffers() {
        auto bn_buf = [](const char* prefix, BatchNorm1d<T>& l, std::vector<ParamView<T>>& out) {
            out.push_back({std::string(prefix) + ".running_mean", l.running_mean.data(), nullptr,
                           {static_cast<std::size_t>(l.ch)}});
            out.push_back({std::string(prefix) + ".running_var", l.running_var.data(), nullptr,
                           {static_cast<std::size_t>(l.ch)}});
        };
        std::vector<ParamView<T>> out;
        bn_buf("bn1", bn1, out);
        bn_buf("bn2", bn2, out);
        bn_buf("bn3", bn3, out);
        return out;
    }
};

template <typename T = float>
VanillaModel<T> init_vanilla(const VanillaModelConfig& cfg, std::uint64_t seed) {
    VanillaModel<T> m(cfg);
    m.init(seed);
    return m;
}

inline std::vector<int> argmax_rows(const std::vector<float>& logits, std::size_t batch,
                                    int classes) {
    std::vector<int> out(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        int best = 0;
        for (int c = 1; c < classes; ++c)
            if (logits[b * classes + c] > logits[b * classes + best]) best = c;
        out[b] = best;
    }
    return out;
}

}  // namespace dicnn
