#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace dicnn {

/// One complex baseband frame. Samples are stored as 32-bit I/Q pairs.
struct IqFrame {
    std::vector<std::complex<float>> samples;

    IqFrame() = default;
    explicit IqFrame(std::size_t n) : samples(n) {}

    std::size_t size() const { return samples.size(); }

    double mean_power() const {
        double acc = 0.0;
        for (const auto& s : samples) acc += static_cast<double>(s.real()) * s.real() +
                                             static_cast<double>(s.imag()) * s.imag();
        return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
    }

    bool all_finite() const {
        for (const auto& s : samples)
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return false;
        return true;
    }

    bool operator==(const IqFrame& o) const { return samples == o.samples; }
};

}  // namespace dicnn
