#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "dicnn/spectral.hpp"
#include "dicnn/rng.hpp"
#include "oracles.hpp"

using namespace dicnn;

namespace {

IqFrame random_frame(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    IqFrame f(n);
    for (auto& s : f.samples)
        s = {static_cast<float>(rng.uniform(-1.0, 1.0)), static_cast<float>(rng.uniform(-1.0, 1.0))};
    return f;
}

}  // namespace

TEST_CASE("pad_and_dft of an impulse with p=0 is all ones") {
    IqFrame f(128);
    f.samples[0] = {1.0f, 0.0f};
    const Spectrum s = pad_and_dft(f, 0, 1.0e6);
    REQUIRE(s.size() == 128);
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(s.re[k] == Catch::Approx(1.0f).margin(1e-6));
        CHECK(s.im[k] == Catch::Approx(0.0f).margin(1e-6));
    }
}

TEST_CASE("pad_and_dft length and bin spacing") {
    const IqFrame f = random_frame(128, 3);
    const Spectrum s = pad_and_dft(f, 280, 1.0e6);
    CHECK(s.size() == 688);
    CHECK(s.bin_spacing_hz == Catch::Approx(1.0e6 / 688.0));
}

TEST_CASE("pad_and_dft satisfies parseval") {
    const IqFrame f = random_frame(128, 9);
    for (int p : {0, 40, 280}) {
        const Spectrum s = pad_and_dft(f, p, 1.0e6);
        double time_e = 0.0, freq_e = 0.0;
        for (const auto& v : f.samples) time_e += std::norm(std::complex<double>(v));
        for (std::size_t k = 0; k < s.size(); ++k)
            freq_e += static_cast<double>(s.re[k]) * s.re[k] +
                      static_cast<double>(s.im[k]) * s.im[k];
        INFO("p = " << p);
        CHECK(oracle::rel_err(freq_e / static_cast<double>(s.size()), time_e) < 1e-4);
    }
}

TEST_CASE("bin_shift basics") {
    Spectrum s;
    s.re = {1.0f, 2.0f, 3.0f, 4.0f};
    s.im = {10.0f, 20.0f, 30.0f, 40.0f};

    SECTION("m = 0 is identity") {
        const Spectrum out = bin_shift(s, 0);
        CHECK(out.re == s.re);
        CHECK(out.im == s.im);
    }
    SECTION("m = 1 rotates right") {
        const Spectrum out = bin_shift(s, 1);
        CHECK(out.re == std::vector<float>{4.0f, 1.0f, 2.0f, 3.0f});
        CHECK(out.im == std::vector<float>{40.0f, 10.0f, 20.0f, 30.0f});
    }
    SECTION("m = N wraps to identity") {
        const Spectrum out = bin_shift(s, 4);
        CHECK(out.re == s.re);
    }
    SECTION("negative m") {
        const Spectrum out = bin_shift(s, -1);
        CHECK(out.re == std::vector<float>{2.0f, 3.0f, 4.0f, 1.0f});
    }
}

TEST_CASE("bin_shift composes and preserves energy exactly") {
    const IqFrame f = random_frame(128, 11);
    Spectrum s = pad_and_dft(f, 10, 1.0e6);
    Spectrum once = s;
    for (int i = 0; i < 23; ++i) once = bin_shift(once, 1);
    const Spectrum direct = bin_shift(s, 23);
    CHECK(once.re == direct.re);
    CHECK(once.im == direct.im);

    // A pure permutation: the multiset of bin values is exactly preserved.
    auto sorted = [](std::vector<float> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    CHECK(sorted(direct.re) == sorted(s.re));
    CHECK(sorted(direct.im) == sorted(s.im));
}

TEST_CASE("apply_doppler_time with f_d = 0 is the identity") {
    const IqFrame f = random_frame(128, 13);
    const IqFrame out = apply_doppler_time(f, 0.0, 1.0e6);
    CHECK(out == f);
}

TEST_CASE("apply_doppler_time preserves per-sample modulus") {
    const IqFrame f = random_frame(128, 17);
    const IqFrame out = apply_doppler_time(f, 12345.0, 1.0e6);
    for (std::size_t n = 0; n < f.size(); ++n) {
        const double m0 = std::abs(std::complex<double>(f.samples[n]));
        const double m1 = std::abs(std::complex<double>(out.samples[n]));
        CHECK(oracle::rel_err(m1, m0) < 1e-6);
    }
}

TEST_CASE("integer-bin doppler equals a spectral bin shift") {
    const double fs = 1.0e6;
    const IqFrame f = random_frame(128, 19);
    for (int p : {0, 40}) {
        const std::size_t n = 128 + 2 * static_cast<std::size_t>(p);
        const double df = fs / static_cast<double>(n);
        const long m = 7;
        // Phase ramp referenced to the padded buffer's origin; a frame-based
        // origin would differ by an unobservable global phase.
        const IqFrame shifted = apply_doppler_time(f, m * df, fs, p);
        const Spectrum via_time = pad_and_dft(shifted, p, fs);
        const Spectrum via_bins = bin_shift(pad_and_dft(f, p, fs), m);

        double scale = 1e-12, worst = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            scale = std::max(scale, std::hypot(static_cast<double>(via_bins.re[k]),
                                               static_cast<double>(via_bins.im[k])));
        for (std::size_t k = 0; k < n; ++k)
            worst = std::max(worst, std::hypot(via_time.re[k] - via_bins.re[k],
                                               via_time.im[k] - via_bins.im[k]) / scale);
        INFO("p = " << p);
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("half-bin doppler splits a tone across two bins") {
    const double fs = 1.0e6;
    const std::size_t n = 128;
    const double df = fs / static_cast<double>(n);
    IqFrame tone(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = 2.0 * M_PI * 10.0 * static_cast<double>(i) / static_cast<double>(n);
        tone.samples[i] = {static_cast<float>(std::cos(ph)), static_cast<float>(std::sin(ph))};
    }
    const IqFrame shifted = apply_doppler_time(tone, df / 2.0, fs);
    const Spectrum s = pad_and_dft(shifted, 0, fs);
    double total = 0.0;
    std::vector<double> bin_e(n);
    for (std::size_t k = 0; k < n; ++k) {
        bin_e[k] = static_cast<double>(s.re[k]) * s.re[k] + static_cast<double>(s.im[k]) * s.im[k];
        total += bin_e[k];
    }
    // Energy lands on bins 10 and 11, neither holding 90% of the total.
    CHECK(bin_e[10] / total < 0.9);
    CHECK(bin_e[11] / total < 0.9);
    CHECK((bin_e[10] + bin_e[11]) / total > 0.75);
}

TEST_CASE("apply_doppler_time rejects out-of-range shifts") {
    const IqFrame f = random_frame(16, 23);
    CHECK_THROWS_AS(apply_doppler_time(f, 6.0e5, 1.0e6), std::invalid_argument);
}

TEST_CASE("padding_condition clause arithmetic") {
    // 688, 344, 172 all even.
    CHECK(padding_condition(280, 2));
    // 648, 216, 72 all divisible by 3.
    CHECK(padding_condition(260, 3));
    // 688 % 4 = 0 and 172 % 4 = 0, but ceil(688/16) = 43 and 43 % 4 = 3.
    CHECK_FALSE(padding_condition(280, 4));
}

TEST_CASE("padding_condition implies a divisible downsampling chain") {
    for (int p = 0; p <= 300; p += 10)
        for (int s = 2; s <= 5; ++s) {
            const PaddingConfig pc(p, s);
            if (padding_condition(p, s)) {
                CHECK(pc.n1() % s == 0);
                CHECK(pc.n2() % s == 0);
                CHECK(pc.n3() % s == 0);
            }
        }
}

TEST_CASE("padding config derived lengths") {
    const PaddingConfig pc(280, 4);
    CHECK(pc.padded_len() == 688);
    CHECK(pc.n2() == 172);
    CHECK(pc.n3() == 43);
    CHECK(pc.n4() == 11);
    CHECK_THROWS_AS(PaddingConfig(-1, 2), std::invalid_argument);
    CHECK_THROWS_AS(PaddingConfig(0, 1), std::invalid_argument);
}
