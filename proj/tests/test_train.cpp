#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "dicnn/train.hpp"
#include "oracles.hpp"

using namespace dicnn;

namespace {

Dataset two_class_dataset(int frames_per_class, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.frames_per_class_snr = frames_per_class;
    cfg.snr_grid_db = {20};
    cfg.master_seed = seed;
    Dataset full = build_dataset(cfg);
    Dataset ds;
    ds.config = cfg;
    for (auto& rec : full.frames)
        if (rec.label == SignalClass::tone || rec.label == SignalClass::noise)
            ds.frames.push_back(std::move(rec));
    return ds;
}

}  // namespace

TEST_CASE("split counts reproduce the 80/20 arithmetic") {
    CHECK(split_counts(2000, 0.8) == std::make_pair<std::size_t, std::size_t>(1600, 400));
    // 147 strata of 2000 frames: 294000 -> 235200 / 58800.
    std::size_t train = 0, test = 0;
    for (int i = 0; i < 147; ++i) {
        const auto [a, b] = split_counts(2000, 0.8);
        train += a;
        test += b;
    }
    CHECK(train == 235200);
    CHECK(test == 58800);
}

TEST_CASE("split is stratified, disjoint, exhaustive and deterministic") {
    GeneratorConfig cfg;
    cfg.frames_per_class_snr = 20;
    cfg.snr_grid_db = {0, 10};
    cfg.master_seed = 3;
    const Dataset ds = build_dataset(cfg);

    const auto [train, test] = split_dataset(ds, 0.75, 42);
    CHECK(train.size() == static_cast<std::size_t>(7 * 2 * 15));
    CHECK(test.size() == static_cast<std::size_t>(7 * 2 * 5));

    std::set<std::size_t> seen(train.indices.begin(), train.indices.end());
    for (std::size_t i : test.indices) CHECK(seen.insert(i).second);  // disjoint
    CHECK(seen.size() == ds.frames.size());                           // union is everything

    // Stratification: every (class, snr) cell keeps its proportions.
    std::map<std::pair<int, int>, int> cell_count;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& r = train.record(i);
        cell_count[{static_cast<int>(r.label), r.snr_db}] += 1;
    }
    for (const auto& [key, n] : cell_count) CHECK(n == 15);

    const auto [train2, test2] = split_dataset(ds, 0.75, 42);
    CHECK(train2.indices == train.indices);
    CHECK(test2.indices == test.indices);

    const auto [train3, test3] = split_dataset(ds, 0.75, 43);
    CHECK(train3.indices != train.indices);
}

TEST_CASE("split rejects strata that cannot land on both sides") {
    GeneratorConfig cfg;
    cfg.frames_per_class_snr = 1;
    cfg.snr_grid_db = {0};
    const Dataset ds = build_dataset(cfg);
    CHECK_THROWS_WITH(split_dataset(ds, 0.5, 1),
                      Catch::Matchers::ContainsSubstring("stratum"));
}

TEST_CASE("training a separable two-class subset collapses the loss") {
    const Dataset ds = two_class_dataset(30, 17);
    InvariantModelConfig mcfg;
    mcfg.pad = 0;
    mcfg.stride = 2;
    InvariantModel<float> model = init_invariant(mcfg, 100);

    TrainConfig tcfg;
    tcfg.epochs = 8;
    tcfg.batch_size = 16;
    tcfg.seed = 5;
    const TrainHistory hist = train_invariant(model, DatasetView::all(ds), tcfg);
    REQUIRE(hist.epoch_loss.size() == 8);
    CHECK(hist.epoch_loss.back() < 0.1 * hist.epoch_loss.front());
    CHECK(hist.epoch_seconds.size() == 8);
}

TEST_CASE("zero training steps leave the model unchanged") {
    const Dataset ds = two_class_dataset(4, 19);
    InvariantModelConfig mcfg;
    mcfg.pad = 0;
    InvariantModel<float> model = init_invariant(mcfg, 7);
    const auto w_before = model.cc2.w_r;

    DatasetView empty;
    empty.ds = &ds;
    TrainConfig tcfg;
    tcfg.epochs = 3;
    const TrainHistory hist = train_invariant(model, empty, tcfg);
    CHECK(hist.epoch_loss.empty());
    CHECK(model.cc2.w_r == w_before);
}

TEST_CASE("training is deterministic given the seed") {
    const Dataset ds = two_class_dataset(12, 23);
    TrainConfig tcfg;
    tcfg.epochs = 2;
    tcfg.batch_size = 8;
    tcfg.seed = 77;

    InvariantModelConfig mcfg;
    mcfg.pad = 10;
    InvariantModel<float> m1 = init_invariant(mcfg, 50);
    InvariantModel<float> m2 = init_invariant(mcfg, 50);
    train_invariant(m1, DatasetView::all(ds), tcfg);
    train_invariant(m2, DatasetView::all(ds), tcfg);
    CHECK(serialize_checkpoint(model_config_json(m1.cfg), m1.params()) ==
          serialize_checkpoint(model_config_json(m2.cfg), m2.params()));

    VanillaModelConfig vcfg;
    VanillaModel<float> v1 = init_vanilla(vcfg, 50);
    VanillaModel<float> v2 = init_vanilla(vcfg, 50);
    train_vanilla(v1, DatasetView::all(ds), tcfg);
    train_vanilla(v2, DatasetView::all(ds), tcfg);
    CHECK(serialize_checkpoint(model_config_json(v1.cfg), detail::all_arrays(v1)) ==
          serialize_checkpoint(model_config_json(v2.cfg), detail::all_arrays(v2)));
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
    const Dataset ds = two_class_dataset(8, 29);
    InvariantModelConfig mcfg;
    mcfg.pad = 0;
    InvariantModel<float> model = init_invariant(mcfg, 1);
    // Poison a head weight: upstream ReLUs would squash a NaN to zero.
    model.fc.w_r[0] = std::numeric_limits<float>::quiet_NaN();
    TrainConfig tcfg;
    tcfg.epochs = 1;
    tcfg.batch_size = 8;
    CHECK_THROWS_WITH(train_invariant(model, DatasetView::all(ds), tcfg),
                      Catch::Matchers::ContainsSubstring("non-finite loss"));
}

TEST_CASE("oracle predictions give accuracy one everywhere") {
    std::vector<int> labels;
    for (int i = 0; i < 700; ++i) labels.push_back(i % 7);
    const EvalAccuracy acc = compute_accuracy(labels, labels);
    for (int c = 0; c < 7; ++c) CHECK(acc.per_class(c) == 1.0);
    CHECK(acc.overall() == 1.0);
}

TEST_CASE("constant predictions are right on one class only") {
    std::vector<int> labels, preds;
    for (int i = 0; i < 700; ++i) {
        labels.push_back(i % 7);
        preds.push_back(3);
    }
    const EvalAccuracy acc = compute_accuracy(labels, preds);
    for (int c = 0; c < 7; ++c) CHECK(acc.per_class(c) == (c == 3 ? 1.0 : 0.0));
}

TEST_CASE("uniform random predictions score about one seventh per class") {
    Rng rng(31337);
    std::vector<int> labels, preds;
    for (int i = 0; i < 7000; ++i) {
        labels.push_back(i % 7);
        preds.push_back(static_cast<int>(rng.uniform_int(7)));
    }
    const EvalAccuracy acc = compute_accuracy(labels, preds);
    for (int c = 0; c < 7; ++c) {
        CHECK(acc.per_class(c) > 1.0 / 7.0 - 0.03);
        CHECK(acc.per_class(c) < 1.0 / 7.0 + 0.03);
    }
}

TEST_CASE("confusion counts are consistent with totals and accuracies") {
    Rng rng(999);
    std::vector<int> labels, preds;
    for (int i = 0; i < 2100; ++i) {
        labels.push_back(static_cast<int>(rng.uniform_int(7)));
        preds.push_back(static_cast<int>(rng.uniform_int(7)));
    }
    const EvalAccuracy acc = compute_accuracy(labels, preds);
    std::int64_t total = 0;
    for (int c = 0; c < 7; ++c) {
        std::int64_t row = 0;
        for (int p = 0; p < 7; ++p) row += acc.confusion[c][p];
        CHECK(row == acc.class_total[c]);
        total += row;
        if (acc.class_total[c])
            CHECK(acc.per_class(c) ==
                  static_cast<double>(acc.confusion[c][c]) / acc.class_total[c]);
    }
    CHECK(total == 2100);
}

TEST_CASE("evaluate rejects an empty test set") {
    const Dataset ds = two_class_dataset(4, 37);
    InvariantModelConfig mcfg;
    mcfg.pad = 0;
    InvariantModel<float> model = init_invariant(mcfg, 2);
    DatasetView empty;
    empty.ds = &ds;
    CHECK_THROWS_AS(evaluate(model, empty), std::invalid_argument);
}
