#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicnn/adam.hpp"
#include "dicnn/checkpoint.hpp"
#include "dicnn/models.hpp"
#include "dicnn/rf_synth.hpp"

namespace dicnn {

struct TrainConfig {
    int epochs = 15;
    int batch_size = 256;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    double split_fraction = 0.8;

    void validate() const {
        if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
        if (!(split_fraction > 0.0 && split_fraction < 1.0))
            throw std::invalid_argument("train config: split fraction must be in (0, 1)");
        if (!(lr > 0.0)) throw std::invalid_argument("train config: lr must be > 0");
    }
};

/// Index view into a dataset; splits share the backing frames.
struct DatasetView {
    const Dataset* ds = nullptr;
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
    const FrameRecord& record(std::size_t i) const { return ds->frames[indices[i]]; }

    static DatasetView all(const Dataset& ds_) {
        DatasetView v;
        v.ds = &ds_;
        v.indices.resize(ds_.frames.size());
        for (std::size_t i = 0; i < v.indices.size(); ++i) v.indices[i] = i;
        return v;
    }
};

/// Train/test sizes for an n-element stratum at the given fraction.
inline std::pair<std::size_t, std::size_t> split_counts(std::size_t n, double fraction) {
    const auto train = static_cast<std::size_t>(static_cast<double>(n) * fraction);
    return {train, n - train};
}

/// Deterministic stratified split: within every (class, SNR) stratum the
/// frames are shuffled by a seed-derived stream and the first
/// floor(fraction * n) go to train. Strata too small to land on both sides
/// are an error.
inline std::pair<DatasetView, DatasetView> split_dataset(const Dataset& ds, double fraction,
                                                         std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split_dataset: fraction must be in (0, 1)");
    if (ds.frames.empty()) throw std::invalid_argument("split_dataset: empty dataset");

    std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < ds.frames.size(); ++i)
        strata[{static_cast<int>(ds.frames[i].label), ds.frames[i].snr_db}].push_back(i);

    DatasetView train, test;
    train.ds = &ds;
    test.ds = &ds;
    std::uint64_t stratum_id = 0;
    for (auto& [key, idx] : strata) {
        const auto [n_train, n_test] = split_counts(idx.size(), fraction);
        if (n_train == 0 || n_test == 0)
            throw std::invalid_argument("split_dataset: stratum (" +
                                        std::string(to_string(static_cast<SignalClass>(key.first))) +
                                        ", " + std::to_string(key.second) +
                                        " dB) too small for the requested fraction");
        Rng rng = Rng::substream(seed, 0xface0000u + stratum_id++);
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(static_cast<std::uint64_t>(i))]);
        train.indices.insert(train.indices.end(), idx.begin(), idx.begin() + n_train);
        test.indices.insert(test.indices.end(), idx.begin() + n_train, idx.end());
    }
    return {train, test};
}

struct TrainHistory {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_seconds;
};

namespace detail {

inline std::vector<const IqFrame*> gather_frames(const DatasetView& view, std::size_t begin,
                                                 std::size_t end,
                                                 const std::vector<std::size_t>& order) {
    std::vector<const IqFrame*> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
        out.push_back(&view.record(order[i]).frame);
    return out;
}

inline void shuffle_order(std::vector<std::size_t>& order, Rng& rng) {
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_int(static_cast<std::uint64_t>(i))]);
}

}  // namespace detail

/// Train the frequency-domain model in place. Deterministic given the seed;
/// spectra are computed per batch so memory stays flat at any dataset scale.
inline TrainHistory train_invariant(InvariantModel<float>& model, const DatasetView& train_set,
                                    const TrainConfig& cfg) {
    cfg.validate();
    TrainHistory hist;
    if (train_set.size() == 0) return hist;

    const DftPlan plan(static_cast<std::size_t>(model.cfg.padding().padded_len()));
    AdamOptimizer<float> opt(AdamHyper{cfg.lr, 0.9, 0.999, 1e-8});
    auto params = model.params();

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng = Rng::substream(cfg.seed, 0xe90000u + static_cast<std::uint64_t>(epoch));
        detail::shuffle_order(order, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            const auto frames = detail::gather_frames(train_set, begin, end, order);
            std::vector<int> labels;
            labels.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i)
                labels.push_back(static_cast<int>(train_set.record(order[i]).label));

            ComplexTensor<float> x = spectra_from_frames<float>(frames, model.cfg.pad, &plan);
            typename InvariantModel<float>::Cache cache;
            const std::vector<float> logits = model.forward(x, &cache);
            std::vector<float> dlogits;
            const double loss = softmax_cross_entropy_batch(logits, frames.size(),
                                                            model.cfg.classes, labels.data(),
                                                            dlogits);
            if (!std::isfinite(loss))
                throw std::runtime_error("training aborted: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", step " + std::to_string(steps));
            model.zero_grad();
            model.backward(cache, dlogits);
            opt.step(params);
            loss_sum += loss;
            ++steps;
        }
        const auto t1 = std::chrono::steady_clock::now();
        hist.epoch_loss.push_back(steps ? loss_sum / static_cast<double>(steps) : 0.0);
        hist.epoch_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    return hist;
}

/// Train the time-domain baseline in place.
inline TrainHistory train_vanilla(VanillaModel<float>& model, const DatasetView& train_set,
                                  const TrainConfig& cfg) {
    cfg.validate();
    TrainHistory hist;
    if (train_set.size() == 0) return hist;

    AdamOptimizer<float> opt(AdamHyper{cfg.lr, 0.9, 0.999, 1e-8});
    auto params = model.params();

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng = Rng::substream(cfg.seed, 0xe90000u + static_cast<std::uint64_t>(epoch));
        detail::shuffle_order(order, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            const auto frames = detail::gather_frames(train_set, begin, end, order);
            std::vector<int> labels;
            labels.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i)
                labels.push_back(static_cast<int>(train_set.record(order[i]).label));

            RealTensor<float> x = iq_tensor_from_frames<float>(frames);
            Rng drop_rng = Rng::substream(
                cfg.seed, 0xd0000000u + (static_cast<std::uint64_t>(epoch) << 24) + steps);
            typename VanillaModel<float>::Cache cache;
            const std::vector<float> logits = model.forward(x, true, drop_rng, &cache);
            std::vector<float> dlogits;
            const double loss = softmax_cross_entropy_batch(logits, frames.size(),
                                                            model.cfg.classes, labels.data(),
                                                            dlogits);
            if (!std::isfinite(loss))
                throw std::runtime_error("training aborted: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", step " + std::to_string(steps));
            model.zero_grad();
            model.backward(cache, dlogits);
            opt.step(params);
            loss_sum += loss;
            ++steps;
        }
        const auto t1 = std::chrono::steady_clock::now();
        hist.epoch_loss.push_back(steps ? loss_sum / static_cast<double>(steps) : 0.0);
        hist.epoch_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    return hist;
}

/// Per-class accuracy plus confusion counts; rows are true classes.
struct EvalAccuracy {
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};
    std::array<std::int64_t, kNumClasses> class_total{};

    double per_class(int c) const {
        return class_total[c] ? static_cast<double>(confusion[c][c]) / class_total[c] : 0.0;
    }

    double overall() const {
        std::int64_t correct = 0, total = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            correct += confusion[c][c];
            total += class_total[c];
        }
        return total ? static_cast<double>(correct) / total : 0.0;
    }
};

inline EvalAccuracy compute_accuracy(const std::vector<int>& labels,
                                     const std::vector<int>& preds) {
    if (labels.size() != preds.size())
        throw std::invalid_argument("compute_accuracy: size mismatch");
    EvalAccuracy acc;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        acc.confusion[labels[i]][preds[i]] += 1;
        acc.class_total[labels[i]] += 1;
    }
    return acc;
}

inline constexpr std::size_t kEvalChunk = 256;

/// Batched eval-mode predictions over arbitrary frames.
inline std::vector<int> predict_invariant(const InvariantModel<float>& model,
                                          const std::vector<const IqFrame*>& frames,
                                          const DftPlan* plan = nullptr) {
    std::vector<int> preds;
    preds.reserve(frames.size());
    for (std::size_t begin = 0; begin < frames.size(); begin += kEvalChunk) {
        const std::size_t end = std::min(frames.size(), begin + kEvalChunk);
        std::vector<const IqFrame*> chunk(frames.begin() + begin, frames.begin() + end);
        ComplexTensor<float> x = spectra_from_frames<float>(chunk, model.cfg.pad, plan);
        const auto logits = model.forward(x);
        const auto am = argmax_rows(logits, chunk.size(), model.cfg.classes);
        preds.insert(preds.end(), am.begin(), am.end());
    }
    return preds;
}

inline std::vector<int> predict_vanilla(VanillaModel<float>& model,
                                        const std::vector<const IqFrame*>& frames) {
    std::vector<int> preds;
    preds.reserve(frames.size());
    for (std::size_t begin = 0; begin < frames.size(); begin += kEvalChunk) {
        const std::size_t end = std::min(frames.size(), begin + kEvalChunk);
        std::vector<const IqFrame*> chunk(frames.begin() + begin, frames.begin() + end);
        RealTensor<float> x = iq_tensor_from_frames<float>(chunk);
        const auto logits = model.forward_eval(x);
        const auto am = argmax_rows(logits, chunk.size(), model.cfg.classes);
        preds.insert(preds.end(), am.begin(), am.end());
    }
    return preds;
}

inline std::vector<const IqFrame*> view_frames(const DatasetView& view) {
    std::vector<const IqFrame*> out;
    out.reserve(view.size());
    for (std::size_t i = 0; i < view.size(); ++i) out.push_back(&view.record(i).frame);
    return out;
}

inline std::vector<int> view_labels(const DatasetView& view) {
    std::vector<int> out;
    out.reserve(view.size());
    for (std::size_t i = 0; i < view.size(); ++i)
        out.push_back(static_cast<int>(view.record(i).label));
    return out;
}

inline EvalAccuracy evaluate(const InvariantModel<float>& model, const DatasetView& test_set) {
    if (test_set.size() == 0) throw std::invalid_argument("evaluate: empty test set");
    const DftPlan plan(static_cast<std::size_t>(model.cfg.padding().padded_len()));
    return compute_accuracy(view_labels(test_set),
                            predict_invariant(model, view_frames(test_set), &plan));
}

inline EvalAccuracy evaluate(VanillaModel<float>& model, const DatasetView& test_set) {
    if (test_set.size() == 0) throw std::invalid_argument("evaluate: empty test set");
    return compute_accuracy(view_labels(test_set), predict_vanilla(model, view_frames(test_set)));
}

}  // namespace dicnn
