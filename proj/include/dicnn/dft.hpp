#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dicnn {

using cplx = std::complex<double>;

/// DFT plan for one transform length. Power-of-two lengths run an iterative
/// radix-2 kernel; every other length goes through Bluestein's chirp-z
/// reduction to a power-of-two convolution, so any n >= 1 is supported.
/// Plans are immutable after construction and safe to share across threads.
class DftPlan {
public:
    explicit DftPlan(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("DftPlan: length must be >= 1");
        if (is_pow2(n)) {
            m_ = n;
        } else {
            m_ = 1;
            while (m_ < 2 * n - 1) m_ <<= 1;
            chirp_.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                // k^2 mod 2n keeps the trig argument small without changing
                // exp(-i*pi*k^2/n), which is 2n-periodic in k^2.
                const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
                const double ang = -M_PI * static_cast<double>(k2) / static_cast<double>(n);
                chirp_[k] = cplx(std::cos(ang), std::sin(ang));
            }
            std::vector<cplx> b(m_, cplx(0.0, 0.0));
            b[0] = std::conj(chirp_[0]);
            for (std::size_t k = 1; k < n; ++k) {
                b[k] = std::conj(chirp_[k]);
                b[m_ - k] = b[k];
            }
            build_pow2_tables();
            pow2_fft(b.data(), false);
            chirp_fft_ = std::move(b);
        }
        if (twiddle_.empty()) build_pow2_tables();
    }

    std::size_t size() const { return n_; }

    void forward(const cplx* in, cplx* out) const { transform(in, out, false); }

    /// Inverse transform including the 1/n scale.
    void inverse(const cplx* in, cplx* out) const {
        transform(in, out, true);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_; ++k) out[k] *= scale;
    }

    std::vector<cplx> forward(const std::vector<cplx>& in) const {
        check_len(in.size());
        std::vector<cplx> out(n_);
        forward(in.data(), out.data());
        return out;
    }

    std::vector<cplx> inverse(const std::vector<cplx>& in) const {
        check_len(in.size());
        std::vector<cplx> out(n_);
        inverse(in.data(), out.data());
        return out;
    }

private:
    static bool is_pow2(std::size_t n) { return (n & (n - 1)) == 0; }

    void check_len(std::size_t got) const {
        if (got != n_) throw std::invalid_argument("DftPlan: input length mismatch");
    }

    void build_pow2_tables() {
        twiddle_.resize(m_ / 2);
        for (std::size_t j = 0; j < m_ / 2; ++j) {
            const double ang = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(m_);
            twiddle_[j] = cplx(std::cos(ang), std::sin(ang));
        }
        bitrev_.resize(m_);
        std::size_t bits = 0;
        while ((std::size_t(1) << bits) < m_) ++bits;
        for (std::size_t i = 0; i < m_; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (bits - 1 - b);
            bitrev_[i] = static_cast<std::uint32_t>(r);
        }
    }

    // In-place radix-2 on a buffer of length m_.
    void pow2_fft(cplx* d, bool inv) const {
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t r = bitrev_[i];
            if (i < r) std::swap(d[i], d[r]);
        }
        for (std::size_t len = 2; len <= m_; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t step = m_ / len;
            for (std::size_t base = 0; base < m_; base += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    cplx w = twiddle_[j * step];
                    if (inv) w = std::conj(w);
                    const cplx u = d[base + j];
                    const cplx v = d[base + j + half] * w;
                    d[base + j] = u + v;
                    d[base + j + half] = u - v;
                }
            }
        }
    }

    void transform(const cplx* in, cplx* out, bool inv) const {
        if (m_ == n_) {
            if (out != in) std::copy(in, in + n_, out);
            pow2_fft(out, inv);
            return;
        }
        // Bluestein. The inverse is fft with conjugated input and output:
        // idft(x) = conj(dft(conj(x))) (caller applies the 1/n).
        std::vector<cplx> a(m_, cplx(0.0, 0.0));
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx x = inv ? std::conj(in[k]) : in[k];
            a[k] = x * chirp_[k];
        }
        pow2_fft(a.data(), false);
        for (std::size_t j = 0; j < m_; ++j) a[j] *= chirp_fft_[j];
        pow2_fft(a.data(), true);
        const double scale = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) {
            cplx y = a[k] * scale * chirp_[k];
            out[k] = inv ? std::conj(y) : y;
        }
    }

    std::size_t n_;
    std::size_t m_;
    std::vector<cplx> chirp_;
    std::vector<cplx> chirp_fft_;
    std::vector<cplx> twiddle_;
    std::vector<std::uint32_t> bitrev_;
};

}  // namespace dicnn
