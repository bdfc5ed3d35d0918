#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dicnn {

/// Batch x channels x length tensor of complex values held as two contiguous
/// real planes. All layer kernels operate on this layout.
template <typename T = float>
struct ComplexTensor {
    std::size_t batch = 0, channels = 0, length = 0;
    std::vector<T> re, im;

    ComplexTensor() = default;
    ComplexTensor(std::size_t b, std::size_t c, std::size_t l)
        : batch(b), channels(c), length(l), re(b * c * l, T(0)), im(b * c * l, T(0)) {}

    std::size_t size() const { return batch * channels * length; }
    std::size_t row(std::size_t b, std::size_t c) const { return (b * channels + c) * length; }
    std::size_t idx(std::size_t b, std::size_t c, std::size_t l) const { return row(b, c) + l; }

    T* re_row(std::size_t b, std::size_t c) { return re.data() + row(b, c); }
    T* im_row(std::size_t b, std::size_t c) { return im.data() + row(b, c); }
    const T* re_row(std::size_t b, std::size_t c) const { return re.data() + row(b, c); }
    const T* im_row(std::size_t b, std::size_t c) const { return im.data() + row(b, c); }

    bool same_shape(const ComplexTensor& o) const {
        return batch == o.batch && channels == o.channels && length == o.length;
    }

    bool all_finite() const {
        for (const T v : re)
            if (!std::isfinite(static_cast<double>(v))) return false;
        for (const T v : im)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

/// Real-valued counterpart used by the time-domain baseline.
template <typename T = float>
struct RealTensor {
    std::size_t batch = 0, channels = 0, length = 0;
    std::vector<T> data;

    RealTensor() = default;
    RealTensor(std::size_t b, std::size_t c, std::size_t l)
        : batch(b), channels(c), length(l), data(b * c * l, T(0)) {}

    std::size_t size() const { return batch * channels * length; }
    std::size_t row(std::size_t b, std::size_t c) const { return (b * channels + c) * length; }
    std::size_t idx(std::size_t b, std::size_t c, std::size_t l) const { return row(b, c) + l; }

    T* row_ptr(std::size_t b, std::size_t c) { return data.data() + row(b, c); }
    const T* row_ptr(std::size_t b, std::size_t c) const { return data.data() + row(b, c); }

    bool same_shape(const RealTensor& o) const {
        return batch == o.batch && channels == o.channels && length == o.length;
    }

    bool all_finite() const {
        for (const T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

/// Compensated (Neumaier) accumulator. Reductions whose operand order may be
/// rotated by a circular shift use this so the result is order-insensitive
/// down to one rounding of the final sum.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

}  // namespace dicnn
