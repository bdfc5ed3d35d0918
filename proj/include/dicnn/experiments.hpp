#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicnn/spectral.hpp"
#include "dicnn/train.hpp"

namespace dicnn {

/// Per-class accuracies before and after a transformation of the test set.
struct EvalReport {
    std::array<double, kNumClasses> before{};
    std::array<double, kNumClasses> after{};
    std::array<double, kNumClasses> abs_delta{};
    double total_abs_delta = 0.0;
    nlohmann::json metadata;

    void finalize() {
        total_abs_delta = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
            abs_delta[c] = std::abs(before[c] - after[c]);
            total_abs_delta += abs_delta[c];
        }
    }
};

inline EvalReport make_eval_report(const EvalAccuracy& before, const EvalAccuracy& after) {
    EvalReport r;
    for (int c = 0; c < kNumClasses; ++c) {
        r.before[c] = before.per_class(c);
        r.after[c] = after.per_class(c);
    }
    r.finalize();
    return r;
}

struct PureShiftResult {
    EvalReport report;
    bool argmax_identical = true;  // every test frame kept its prediction
};

/// Integer bin shift applied to the padded spectrum, exactly the frequency
/// translation the frequency-domain pipeline sees. Before/after predictions
/// are computed per frame so argmax stability can be checked frame by frame.
inline PureShiftResult run_pure_shift_experiment(const InvariantModel<float>& model,
                                                 const DatasetView& test_set, long bins) {
    if (test_set.size() == 0) throw std::invalid_argument("pure shift: empty test set");
    const std::size_t n = static_cast<std::size_t>(model.cfg.padding().padded_len());
    const DftPlan plan(n);

    std::vector<int> labels = view_labels(test_set);
    std::vector<int> preds_before, preds_after;
    preds_before.reserve(test_set.size());
    preds_after.reserve(test_set.size());

    for (std::size_t begin = 0; begin < test_set.size(); begin += kEvalChunk) {
        const std::size_t end = std::min(test_set.size(), begin + kEvalChunk);
        std::vector<Spectrum> specs, shifted;
        specs.reserve(end - begin);
        shifted.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            specs.push_back(pad_and_dft(test_set.record(i).frame, model.cfg.pad, 1.0, &plan));
            shifted.push_back(bin_shift(specs.back(), bins));
        }
        const auto lb = model.forward(tensor_from_spectra<float>(specs));
        const auto la = model.forward(tensor_from_spectra<float>(shifted));
        const auto ab = argmax_rows(lb, specs.size(), model.cfg.classes);
        const auto aa = argmax_rows(la, specs.size(), model.cfg.classes);
        preds_before.insert(preds_before.end(), ab.begin(), ab.end());
        preds_after.insert(preds_after.end(), aa.begin(), aa.end());
    }

    PureShiftResult res;
    res.report = make_eval_report(compute_accuracy(labels, preds_before),
                                  compute_accuracy(labels, preds_after));
    for (std::size_t i = 0; i < preds_before.size(); ++i)
        if (preds_before[i] != preds_after[i]) res.argmax_identical = false;
    res.report.metadata["experiment"] = "pure_shift";
    res.report.metadata["bins"] = bins;
    res.report.metadata["model"] = model_config_json(model.cfg);
    return res;
}

/// Per-frame random Doppler drawn uniformly from [f_lo, f_hi] Hz with a
/// random sign, applied in the time domain before each pipeline's own
/// preprocessing. Both models see identical shifted frames.
struct RandomDopplerResult {
    EvalReport invariant;
    EvalReport vanilla;
};

inline std::vector<IqFrame> doppler_shift_frames(const DatasetView& test_set, double f_lo,
                                                 double f_hi, double sample_rate_hz,
                                                 std::uint64_t seed) {
    if (f_lo < 0.0 || f_hi < f_lo) throw std::invalid_argument("doppler range: need 0 <= lo <= hi");
    std::vector<IqFrame> out;
    out.reserve(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        Rng rng = Rng::substream(seed, 0xd0bb1e00u + i);
        double f_d = rng.uniform(f_lo, f_hi);
        if (rng.coin()) f_d = -f_d;
        out.push_back(apply_doppler_time(test_set.record(i).frame, f_d, sample_rate_hz));
    }
    return out;
}

inline RandomDopplerResult run_random_doppler_experiment(const InvariantModel<float>& inv,
                                                         VanillaModel<float>& van,
                                                         const DatasetView& test_set, double f_lo,
                                                         double f_hi, std::uint64_t seed) {
    if (test_set.size() == 0) throw std::invalid_argument("random doppler: empty test set");
    const double fs = test_set.ds->config.sample_rate_hz;
    const std::vector<int> labels = view_labels(test_set);

    const std::vector<IqFrame> shifted = doppler_shift_frames(test_set, f_lo, f_hi, fs, seed);
    std::vector<const IqFrame*> shifted_ptrs;
    shifted_ptrs.reserve(shifted.size());
    for (const auto& f : shifted) shifted_ptrs.push_back(&f);

    const DftPlan plan(static_cast<std::size_t>(inv.cfg.padding().padded_len()));
    const auto inv_before = compute_accuracy(labels, predict_invariant(inv, view_frames(test_set), &plan));
    const auto inv_after = compute_accuracy(labels, predict_invariant(inv, shifted_ptrs, &plan));
    const auto van_before = compute_accuracy(labels, predict_vanilla(van, view_frames(test_set)));
    const auto van_after = compute_accuracy(labels, predict_vanilla(van, shifted_ptrs));

    RandomDopplerResult res;
    res.invariant = make_eval_report(inv_before, inv_after);
    res.vanilla = make_eval_report(van_before, van_after);
    nlohmann::json common;
    common["experiment"] = "random_doppler";
    common["f_lo_hz"] = f_lo;
    common["f_hi_hz"] = f_hi;
    common["sample_rate_hz"] = fs;
    common["seed"] = seed;
    res.invariant.metadata = common;
    res.invariant.metadata["model"] = model_config_json(inv.cfg);
    res.vanilla.metadata = common;
    res.vanilla.metadata["model"] = model_config_json(van.cfg);
    return res;
}

struct SweepCell {
    int pad = 0;
    int stride = 2;
    bool condition_ok = false;
    double total_abs_delta = 0.0;
    std::array<double, kNumClasses> per_class_delta{};
};

struct SweepReport {
    std::vector<SweepCell> cells;
    nlohmann::json metadata;
};

/// One trained model per (pad, stride) cell, same split and seeds throughout,
/// scored by total |delta| under the random-Doppler protocol.
inline SweepReport run_sweep(const std::vector<int>& p_list, const std::vector<int>& s_list,
                             const Dataset& ds, const TrainConfig& cfg, double f_lo, double f_hi,
                             ConvPadMode conv_pad = ConvPadMode::zero_pad_1_2,
                             bool log_progress = false) {
    if (p_list.empty() || s_list.empty()) throw std::invalid_argument("run_sweep: empty grid");
    cfg.validate();
    SweepReport report;
    report.metadata["experiment"] = "sweep";
    report.metadata["f_lo_hz"] = f_lo;
    report.metadata["f_hi_hz"] = f_hi;
    report.metadata["seed"] = cfg.seed;
    report.metadata["epochs"] = cfg.epochs;

    const auto [train_set, test_set] = split_dataset(ds, cfg.split_fraction, cfg.seed);
    const std::vector<int> labels = view_labels(test_set);
    const std::vector<IqFrame> shifted =
        doppler_shift_frames(test_set, f_lo, f_hi, ds.config.sample_rate_hz, cfg.seed);
    std::vector<const IqFrame*> shifted_ptrs;
    for (const auto& f : shifted) shifted_ptrs.push_back(&f);

    for (int p : p_list)
        for (int s : s_list) {
            InvariantModelConfig mc;
            mc.pad = p;
            mc.stride = s;
            mc.conv_pad = conv_pad;
            mc.frame_len = ds.config.frame_len;
            InvariantModel<float> model = init_invariant(mc, cfg.seed);
            train_invariant(model, train_set, cfg);

            const DftPlan plan(static_cast<std::size_t>(mc.padding().padded_len()));
            const auto before =
                compute_accuracy(labels, predict_invariant(model, view_frames(test_set), &plan));
            const auto after = compute_accuracy(labels, predict_invariant(model, shifted_ptrs, &plan));

            SweepCell cell;
            cell.pad = p;
            cell.stride = s;
            cell.condition_ok = padding_condition(p, s, ds.config.frame_len);
            for (int c = 0; c < kNumClasses; ++c) {
                cell.per_class_delta[c] = std::abs(before.per_class(c) - after.per_class(c));
                cell.total_abs_delta += cell.per_class_delta[c];
            }
            report.cells.push_back(cell);
            if (log_progress)
                std::fprintf(stderr, "sweep: pad=%d stride=%d total|delta|=%.4f condition=%d\n", p,
                             s, cell.total_abs_delta, cell.condition_ok ? 1 : 0);
        }
    return report;
}

struct RuntimeCell {
    int pad = 0;
    int stride = 2;
    double mean_epoch_seconds = 0.0;
};

struct RuntimeReport {
    std::vector<RuntimeCell> cells;
    int epochs = 0;
    int batches_per_epoch = 0;
    int batch_size = 0;
};

/// Mean wall-clock epoch time per (pad, stride) over a fixed batch count.
inline RuntimeReport measure_runtime(const std::vector<int>& p_list, const std::vector<int>& s_list,
                                     const Dataset& ds, int epochs, int batches_per_epoch,
                                     int batch_size, std::uint64_t seed) {
    if (p_list.empty() || s_list.empty()) throw std::invalid_argument("measure_runtime: empty grid");
    if (epochs < 3) throw std::invalid_argument("measure_runtime: need >= 3 epochs for a mean");
    const std::size_t need = static_cast<std::size_t>(batches_per_epoch) * batch_size;
    if (ds.frames.size() < need)
        throw std::invalid_argument("measure_runtime: dataset smaller than the fixed batch count");

    DatasetView subset;
    subset.ds = &ds;
    for (std::size_t i = 0; i < need; ++i) subset.indices.push_back(i);

    RuntimeReport report;
    report.epochs = epochs;
    report.batches_per_epoch = batches_per_epoch;
    report.batch_size = batch_size;
    for (int p : p_list)
        for (int s : s_list) {
            InvariantModelConfig mc;
            mc.pad = p;
            mc.stride = s;
            mc.frame_len = ds.config.frame_len;
            InvariantModel<float> model = init_invariant(mc, seed);
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.seed = seed;
            const TrainHistory hist = train_invariant(model, subset, cfg);
            double total = 0.0;
            for (double t : hist.epoch_seconds) total += t;
            report.cells.push_back({p, s, total / static_cast<double>(hist.epoch_seconds.size())});
        }
    return report;
}

}  // namespace dicnn
