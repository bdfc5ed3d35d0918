#pragma once

// Built-in oracle and property checks behind the CLI `selftest` command.
// Reference implementations here are written independently of the library
// code paths they exercise.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "dicnn/adam.hpp"
#include "dicnn/layers.hpp"
#include "dicnn/loss.hpp"
#include "dicnn/models.hpp"
#include "dicnn/spectral.hpp"

namespace dicnn::selftest {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::vector<cplx> reference_dft(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang =
                -2.0 * M_PI * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += x[t] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline ComplexTensor<float> random_tensor(std::size_t b, std::size_t c, std::size_t l, Rng& rng) {
    ComplexTensor<float> x(b, c, l);
    for (auto& v : x.re) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    for (auto& v : x.im) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return x;
}

inline ComplexTensor<float> roll_len(const ComplexTensor<float>& x, long m) {
    ComplexTensor<float> y(x.batch, x.channels, x.length);
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

template <typename Eval>
double fd_max_rel_err(float* params, std::size_t n, const float* analytic, double h, Eval eval) {
    double scale = 1e-8, worst = 0.0;
    std::vector<double> fd(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float saved = params[i];
        params[i] = static_cast<float>(saved + h);
        const double up = eval();
        params[i] = static_cast<float>(saved - h);
        const double dn = eval();
        params[i] = saved;
        fd[i] = (up - dn) / (2.0 * h);
        scale = std::max(scale, std::abs(fd[i]));
    }
    for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(static_cast<double>(analytic[i]) - fd[i]) / scale);
    return worst;
}

}  // namespace detail

inline CheckResult check_dft_oracle() {
    CheckResult r{"dft vs naive O(N^2) oracle on {128, 208, 688}", true, ""};
    double worst = 0.0;
    for (std::size_t n : {std::size_t(128), std::size_t(208), std::size_t(688)}) {
        Rng rng(100 + n);
        std::vector<cplx> x(n);
        for (auto& v : x) v = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const DftPlan plan(n);
        const auto got = plan.forward(x);
        const auto want = detail::reference_dft(x);
        double scale = 1e-12;
        for (const auto& v : want) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < n; ++k)
            worst = std::max(worst, std::abs(got[k] - want[k]) / scale);
    }
    r.pass = worst < 1e-4;
    r.detail = "max relative error " + std::to_string(worst);
    return r;
}

inline CheckResult check_gradients() {
    CheckResult r{"layer backward passes vs central finite differences (32-bit)", true, ""};
    Rng rng(2024);
    double worst = 0.0;

    {
        ComplexConv<float> conv(2, 3, ConvPadMode::zero_pad_1_2);
        conv.init(rng);
        auto x = detail::random_tensor(2, 2, 10, rng);
        auto coeff = detail::random_tensor(2, 3, 10, rng);
        auto eval = [&] {
            const auto y = conv.forward(x);
            double s = 0.0;
            for (std::size_t i = 0; i < y.re.size(); ++i)
                s += static_cast<double>(coeff.re[i]) * y.re[i] +
                     static_cast<double>(coeff.im[i]) * y.im[i];
            return s;
        };
        conv.zero_grad();
        conv.backward(x, coeff);
        worst = std::max(worst, detail::fd_max_rel_err(conv.w_r.data(), conv.w_r.size(),
                                                       conv.gw_r.data(), 1e-3, eval));
        worst = std::max(worst, detail::fd_max_rel_err(conv.w_i.data(), conv.w_i.size(),
                                                       conv.gw_i.data(), 1e-3, eval));
    }
    {
        ComplexLinear<float> lin(6, 4);
        lin.init(rng);
        auto x = detail::random_tensor(3, 6, 1, rng);
        auto coeff = detail::random_tensor(3, 4, 1, rng);
        auto eval = [&] {
            const auto y = lin.forward(x);
            double s = 0.0;
            for (std::size_t i = 0; i < y.re.size(); ++i)
                s += static_cast<double>(coeff.re[i]) * y.re[i] +
                     static_cast<double>(coeff.im[i]) * y.im[i];
            return s;
        };
        lin.zero_grad();
        lin.backward(x, coeff);
        worst = std::max(worst, detail::fd_max_rel_err(lin.w_r.data(), lin.w_r.size(),
                                                       lin.gw_r.data(), 1e-3, eval));
    }
    {
        // GAP + modulus + softmax head as one composite check through the
        // non-conv layers.
        auto x = detail::random_tensor(2, 7, 5, rng);
        for (auto& v : x.re) v += v >= 0 ? 0.2f : -0.2f;
        for (auto& v : x.im) v += v >= 0 ? 0.2f : -0.2f;
        auto head = [&] {
            const auto g = gap_forward(x);
            const auto logits = magnitude_logits(g);
            std::vector<float> grad(7);
            double loss = 0.0;
            for (std::size_t b = 0; b < 2; ++b)
                loss += softmax_cross_entropy(logits.data() + b * 7, 7, 3, grad.data());
            return loss;
        };
        // Analytic chain.
        const auto g = gap_forward(x);
        const auto logits = magnitude_logits(g);
        std::vector<float> dlogits(2 * 7);
        for (std::size_t b = 0; b < 2; ++b) {
            std::vector<float> grad(7);
            softmax_cross_entropy(logits.data() + b * 7, 7, 3, grad.data());
            for (int i = 0; i < 7; ++i) dlogits[b * 7 + i] = grad[i];
        }
        const auto dg = magnitude_logits_backward(g, dlogits);
        const auto dx = gap_backward(dg, x.length);
        worst = std::max(worst,
                         detail::fd_max_rel_err(x.re.data(), x.re.size(), dx.re.data(), 1e-3, head));
    }
    r.pass = worst < 1e-3;
    r.detail = "max relative error " + std::to_string(worst);
    return r;
}

inline CheckResult check_equivariance() {
    CheckResult r{"circular conv equivariance and polyphase pooling invariance", true, ""};
    Rng rng(777);
    ComplexConv<float> conv(2, 4, ConvPadMode::circular);
    conv.init(rng);
    const auto x = detail::random_tensor(2, 2, 24, rng);
    const auto y = conv.forward(x);
    bool ok = true;
    for (long m : {1L, 5L, 23L}) {
        const auto a = conv.forward(detail::roll_len(x, m));
        const auto b = detail::roll_len(y, m);
        if (a.re != b.re || a.im != b.im) ok = false;
    }

    // Pooling keeps the same value set under a one-step shift (stride 2,
    // ascending magnitudes).
    ComplexTensor<float> fig(1, 1, 6);
    fig.re = {1, 2, 3, 4, 5, 6};
    ApsSelection sel;
    const auto pooled = aps_forward(fig, 2, &sel);
    if (pooled.re != std::vector<float>{2, 4, 6}) ok = false;
    const auto pooled_shift = aps_forward(detail::roll_len(fig, 1), 2);
    std::vector<float> a(pooled.re), b(pooled_shift.re);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) ok = false;

    for (long m = 1; m < 24 && ok; ++m) {
        const auto p0 = aps_forward(x, 2);
        const auto p1 = aps_forward(detail::roll_len(x, m), 2);
        auto mods = [](const ComplexTensor<float>& t, std::size_t bb) {
            std::vector<double> v;
            for (std::size_t c = 0; c < t.channels; ++c)
                for (std::size_t l = 0; l < t.length; ++l) {
                    const double re = t.re[t.idx(bb, c, l)], im = t.im[t.idx(bb, c, l)];
                    v.push_back(re * re + im * im);
                }
            std::sort(v.begin(), v.end());
            return v;
        };
        for (std::size_t bb = 0; bb < x.batch; ++bb)
            if (mods(p0, bb) != mods(p1, bb)) ok = false;
    }
    r.pass = ok;
    r.detail = ok ? "bit-exact" : "mismatch detected";
    return r;
}

inline CheckResult check_padding_condition() {
    CheckResult r{"padding condition vs independent clause evaluation (124 cells)", true, ""};
    int checked = 0;
    bool ok = true;
    for (int p = 0; p <= 300; p += 10)
        for (int s = 2; s <= 5; ++s) {
            // Independent route: walk the chain by explicit ceiling division.
            int len = 128 + 2 * p;
            bool want = true;
            for (int layer = 0; layer < 3; ++layer) {
                if (len % s != 0) want = false;
                len = (len + s - 1) / s;
            }
            if (padding_condition(p, s) != want) ok = false;
            ++checked;
        }
    if (padding_condition(280, 4)) ok = false;  // the documented false case
    if (!padding_condition(280, 2)) ok = false;
    r.pass = ok && checked == 124;
    r.detail = std::to_string(checked) + " cells";
    return r;
}

inline CheckResult check_adam() {
    CheckResult r{"adam vs reference trajectory (10 steps)", true, ""};
    double m = 0.0, v = 0.0, ref = 0.8;
    double param = 0.8;
    AdamState<double> state;
    Rng rng(55);
    double worst = 0.0;
    for (int t = 1; t <= 10; ++t) {
        const double g = rng.uniform(-1.0, 1.0);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mhat = m / (1.0 - std::pow(0.9, t));
        const double vhat = v / (1.0 - std::pow(0.999, t));
        ref -= 1e-3 * mhat / (std::sqrt(vhat) + 1e-8);
        adam_step(&param, &g, 1, state);
        worst = std::max(worst, std::abs(param - ref));
    }
    r.pass = worst < 1e-7;
    r.detail = "max divergence " + std::to_string(worst);
    return r;
}

inline CheckResult check_doppler_binshift() {
    CheckResult r{"time-domain integer-bin doppler equals spectral bin shift", true, ""};
    Rng rng(66);
    IqFrame f(128);
    for (auto& s : f.samples)
        s = {static_cast<float>(rng.uniform(-1.0, 1.0)), static_cast<float>(rng.uniform(-1.0, 1.0))};
    const double fs = 1.0e6;
    double worst = 0.0;
    for (int p : {0, 40, 280}) {
        const std::size_t n = 128 + 2 * static_cast<std::size_t>(p);
        const double df = fs / static_cast<double>(n);
        const long m = 20;
        const IqFrame shifted = apply_doppler_time(f, m * df, fs, p);
        const Spectrum via_time = pad_and_dft(shifted, p, fs);
        const Spectrum via_bins = bin_shift(pad_and_dft(f, p, fs), m);
        double scale = 1e-12;
        for (std::size_t k = 0; k < n; ++k)
            scale = std::max(scale, std::hypot(static_cast<double>(via_bins.re[k]),
                                               static_cast<double>(via_bins.im[k])));
        for (std::size_t k = 0; k < n; ++k)
            worst = std::max(worst, std::hypot(via_time.re[k] - via_bins.re[k],
                                               via_time.im[k] - via_bins.im[k]) / scale);
    }
    r.pass = worst < 1e-5;
    r.detail = "max relative error " + std::to_string(worst);
    return r;
}

inline std::vector<CheckResult> run_all() {
    return {check_dft_oracle(),  check_gradients(), check_equivariance(),
            check_padding_condition(), check_adam(), check_doppler_binshift()};
}

/// Prints one line per check; returns the number of failures.
inline int run_and_print(std::FILE* out = stdout) {
    int failures = 0;
    for (const CheckResult& r : run_all()) {
        std::fprintf(out, "[%s] %s (%s)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                     r.detail.c_str());
        if (!r.pass) ++failures;
    }
    return failures;
}

}  // namespace dicnn::selftest
