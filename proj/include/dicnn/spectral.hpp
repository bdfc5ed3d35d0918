#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dicnn/dft.hpp"
#include "dicnn/iq_frame.hpp"

namespace dicnn {

/// Symmetric zero padding plus downsampling-chain bookkeeping.
/// padded_len = frame_len + 2p; the chain lengths are the signal lengths
/// entering each of the three pooling layers.
struct PaddingConfig {
    int pad = 0;
    int stride = 2;
    int frame_len = 128;

    PaddingConfig() = default;
    PaddingConfig(int p, int s, int frame = 128) : pad(p), stride(s), frame_len(frame) {
        if (p < 0) throw std::invalid_argument("PaddingConfig: pad must be >= 0");
        if (s < 2) throw std::invalid_argument("PaddingConfig: stride must be >= 2");
        if (frame < 8) throw std::invalid_argument("PaddingConfig: frame_len must be >= 8");
    }

    int padded_len() const { return frame_len + 2 * pad; }

    static int ceil_div(int a, int b) { return (a + b - 1) / b; }

    // Lengths entering pooling layers 1..3.
    int n1() const { return padded_len(); }
    int n2() const { return ceil_div(padded_len(), stride); }
    int n3() const { return ceil_div(padded_len(), stride * stride); }
    // Length after the third pooling layer (input to global average pooling).
    int n4() const { return ceil_div(padded_len(), stride * stride * stride); }
};

/// True iff every pooling layer in the chain sees a length divisible by the
/// stride: padded_len, ceil(padded_len/s) and ceil(padded_len/s^2) are all
/// multiples of s.
inline bool padding_condition(int pad, int stride, int frame_len = 128) {
    if (pad < 0 || stride < 2) throw std::invalid_argument("padding_condition: pad >= 0, stride >= 2");
    const PaddingConfig pc(pad, stride, frame_len);
    return pc.n1() % stride == 0 && pc.n2() % stride == 0 && pc.n3() % stride == 0;
}

/// Complex frequency array produced by pad_and_dft.
struct Spectrum {
    std::vector<float> re, im;
    double bin_spacing_hz = 0.0;

    std::size_t size() const { return re.size(); }
};

/// Zero-pad the frame by `pad` samples on both sides, then take the full
/// complex DFT of length frame_len + 2*pad. A prebuilt plan of the right
/// length may be passed to amortize setup across frames.
inline Spectrum pad_and_dft(const IqFrame& frame, int pad, double sample_rate_hz,
                            const DftPlan* plan = nullptr) {
    if (pad < 0) throw std::invalid_argument("pad_and_dft: pad must be >= 0");
    const std::size_t n = frame.size() + 2 * static_cast<std::size_t>(pad);
    std::vector<cplx> buf(n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const auto& s = frame.samples[i];
        buf[static_cast<std::size_t>(pad) + i] = cplx(s.real(), s.imag());
    }
    std::optional<DftPlan> local;
    const DftPlan* p = (plan && plan->size() == n) ? plan : &local.emplace(n);
    std::vector<cplx> out(n);
    p->forward(buf.data(), out.data());

    Spectrum spec;
    spec.re.resize(n);
    spec.im.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        spec.re[k] = static_cast<float>(out[k].real());
        spec.im[k] = static_cast<float>(out[k].imag());
    }
    spec.bin_spacing_hz = sample_rate_hz / static_cast<double>(n);
    return spec;
}

/// Circular shift by m bins: out[k] = in[(k - m) mod N]. Pure permutation,
/// energy preserved exactly.
inline Spectrum bin_shift(const Spectrum& spec, long m) {
    const long n = static_cast<long>(spec.size());
    Spectrum out;
    out.re.resize(spec.size());
    out.im.resize(spec.size());
    out.bin_spacing_hz = spec.bin_spacing_hz;
    for (long k = 0; k < n; ++k) {
        long src = (k - m) % n;
        if (src < 0) src += n;
        out.re[static_cast<std::size_t>(k)] = spec.re[static_cast<std::size_t>(src)];
        out.im[static_cast<std::size_t>(k)] = spec.im[static_cast<std::size_t>(src)];
    }
    return out;
}

/// Time-domain frequency shift: y[n] = x[n] * exp(j*2*pi*f_d*(n + origin)/f_s).
/// The origin offset only sets the (physically arbitrary) global phase; pass
/// the pad length to make an integer-bin shift match bin_shift on the padded
/// spectrum exactly, since that operator is referenced to the padded buffer's
/// time origin.
inline IqFrame apply_doppler_time(const IqFrame& frame, double f_d_hz, double sample_rate_hz,
                                  long origin_offset_samples = 0) {
    if (!(std::abs(f_d_hz) < sample_rate_hz / 2.0))
        throw std::invalid_argument("apply_doppler_time: |f_d| must be < f_s/2");
    IqFrame out(frame.size());
    const double w = 2.0 * M_PI * f_d_hz / sample_rate_hz;
    for (std::size_t n = 0; n < frame.size(); ++n) {
        const double t = static_cast<double>(n) + static_cast<double>(origin_offset_samples);
        const double c = std::cos(w * t);
        const double s = std::sin(w * t);
        const double xr = frame.samples[n].real();
        const double xi = frame.samples[n].imag();
        out.samples[n] = {static_cast<float>(xr * c - xi * s),
                          static_cast<float>(xr * s + xi * c)};
    }
    return out;
}

}  // namespace dicnn
