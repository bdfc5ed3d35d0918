#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <set>

#include "dicnn/checkpoint.hpp"
#include "dicnn/models.hpp"
#include "dicnn/train.hpp"
#include "oracles.hpp"

using namespace dicnn;

namespace {

ComplexTensor<float> random_spectra(std::size_t batch, int padded_len, std::uint64_t seed,
                                    double scale = 10.0) {
    Rng rng(seed);
    return oracle::random_complex<float>(batch, 1, static_cast<std::size_t>(padded_len), rng,
                                         scale);
}

std::vector<double> sorted_moduli(const ComplexTensor<float>& t, std::size_t b) {
    std::vector<double> m;
    for (std::size_t c = 0; c < t.channels; ++c)
        for (std::size_t l = 0; l < t.length; ++l) {
            const double r = t.re[t.idx(b, c, l)], i = t.im[t.idx(b, c, l)];
            m.push_back(r * r + i * i);
        }
    std::sort(m.begin(), m.end());
    return m;
}

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("layer shapes follow the architecture table across the sweep grid") {
    for (int p : {0, 40, 150, 280, 300})
        for (int s : {2, 3, 4, 5}) {
            InvariantModelConfig cfg;
            cfg.pad = p;
            cfg.stride = s;
            InvariantModel<float> m = init_invariant(cfg, 1);
            const PaddingConfig pc = cfg.padding();
            const auto x = random_spectra(2, pc.padded_len(), 99);
            typename InvariantModel<float>::Cache cache;
            const auto logits = m.forward(x, &cache);
            INFO("p = " << p << ", s = " << s);
            CHECK(cache.a1.channels == 64);
            CHECK(cache.a1.length == static_cast<std::size_t>(pc.n1()));
            CHECK(cache.p1.channels == 64);
            CHECK(cache.p1.length == static_cast<std::size_t>(pc.n2()));
            CHECK(cache.a2.channels == 32);
            CHECK(cache.a2.length == static_cast<std::size_t>(pc.n2()));
            CHECK(cache.p2.channels == 32);
            CHECK(cache.p2.length == static_cast<std::size_t>(pc.n3()));
            CHECK(cache.a3.channels == 16);
            CHECK(cache.a3.length == static_cast<std::size_t>(pc.n3()));
            CHECK(cache.p3.channels == 16);
            CHECK(cache.p3.length == static_cast<std::size_t>(pc.n4()));
            CHECK(cache.g.channels == 16);
            CHECK(cache.g.length == 1);
            CHECK(logits.size() == 2 * 7);
        }
}

TEST_CASE("pad 280 stride 4 walks 688 -> 172 -> 43 -> 11") {
    InvariantModelConfig cfg;
    cfg.pad = 280;
    cfg.stride = 4;
    const PaddingConfig pc = cfg.padding();
    CHECK(pc.n1() == 688);
    CHECK(pc.n2() == 172);
    CHECK(pc.n3() == 43);
    CHECK(pc.n4() == 11);
}

TEST_CASE("pad 0 stride 2 walks 128 -> 64 -> 32 -> 16") {
    InvariantModelConfig cfg;
    cfg.pad = 0;
    cfg.stride = 2;
    const PaddingConfig pc = cfg.padding();
    CHECK(pc.n1() == 128);
    CHECK(pc.n2() == 64);
    CHECK(pc.n3() == 32);
    CHECK(pc.n4() == 16);
}

TEST_CASE("same seed gives identical parameters, different seeds differ") {
    InvariantModelConfig cfg;
    cfg.pad = 20;
    InvariantModel<float> a = init_invariant(cfg, 55);
    InvariantModel<float> b = init_invariant(cfg, 55);
    InvariantModel<float> c = init_invariant(cfg, 56);
    CHECK(a.cc1.w_r == b.cc1.w_r);
    CHECK(a.cc2.w_i == b.cc2.w_i);
    CHECK(a.fc.w_r == b.fc.w_r);
    CHECK(a.cc1.w_r != c.cc1.w_r);
}

TEST_CASE("forward is deterministic") {
    InvariantModelConfig cfg;
    cfg.pad = 10;
    InvariantModel<float> m = init_invariant(cfg, 3);
    const auto x = random_spectra(3, cfg.padding().padded_len(), 17);
    const auto l1 = m.forward(x);
    const auto l2 = m.forward(x);
    CHECK(l1 == l2);
}

TEST_CASE("forward rejects a wrong-length spectrum") {
    InvariantModelConfig cfg;
    cfg.pad = 10;
    InvariantModel<float> m = init_invariant(cfg, 3);
    const auto x = random_spectra(1, 128, 17);
    CHECK_THROWS_AS(m.forward(x), std::invalid_argument);
}

TEST_CASE("bin-shift invariance holds layerwise with circular convs and the padding condition") {
    // (40, 2) and (260, 3) both satisfy all three clauses.
    struct Case {
        int p, s;
    };
    for (const Case pc_case : {Case{40, 2}, Case{260, 3}}) {
        REQUIRE(padding_condition(pc_case.p, pc_case.s));
        InvariantModelConfig cfg;
        cfg.pad = pc_case.p;
        cfg.stride = pc_case.s;
        cfg.conv_pad = ConvPadMode::circular;
        InvariantModel<float> m = init_invariant(cfg, 77);
        const int n = cfg.padding().padded_len();
        const auto x = random_spectra(3, n, 31);

        typename InvariantModel<float>::Cache base;
        const auto logits = m.forward(x, &base);
        const auto preds = argmax_rows(logits, x.batch, 7);

        Rng mrng(131);
        std::vector<long> shifts = {1, 20, static_cast<long>(n - 1)};
        for (int i = 0; i < 12; ++i)
            shifts.push_back(1 + static_cast<long>(mrng.uniform_int(static_cast<std::uint64_t>(n - 1))));

        for (long shift : shifts) {
            typename InvariantModel<float>::Cache after;
            const auto logits2 = m.forward(oracle::roll(x, shift), &after);
            const auto preds2 = argmax_rows(logits2, x.batch, 7);
            INFO("p = " << pc_case.p << " s = " << pc_case.s << " m = " << shift);
            REQUIRE(preds2 == preds);
            for (std::size_t i = 0; i < logits.size(); ++i)
                REQUIRE(oracle::rel_err(logits2[i], logits[i]) < 1e-5);
            // The selected polyphase multisets agree exactly at every stage.
            for (std::size_t b = 0; b < x.batch; ++b) {
                REQUIRE(sorted_moduli(after.p1, b) == sorted_moduli(base.p1, b));
                REQUIRE(sorted_moduli(after.p2, b) == sorted_moduli(base.p2, b));
                REQUIRE(sorted_moduli(after.p3, b) == sorted_moduli(base.p3, b));
            }
        }
    }
}

TEST_CASE("invariance fails without the padding condition") {
    // (30, 2) violates the third clause: ceil(188/4) = 47 is odd.
    REQUIRE_FALSE(padding_condition(30, 2));
    InvariantModelConfig cfg;
    cfg.pad = 30;
    cfg.stride = 2;
    cfg.conv_pad = ConvPadMode::circular;
    InvariantModel<float> m = init_invariant(cfg, 78);
    const int n = cfg.padding().padded_len();
    const auto x = random_spectra(4, n, 37);
    const auto logits = m.forward(x);
    bool some_difference = false;
    for (long shift : {1L, 3L, 5L, 7L, 11L, 13L}) {
        const auto logits2 = m.forward(oracle::roll(x, shift));
        for (std::size_t i = 0; i < logits.size(); ++i)
            if (oracle::rel_err(logits2[i], logits[i]) > 1e-4) some_difference = true;
    }
    CHECK(some_difference);
}

TEST_CASE("vanilla baseline is not doppler invariant") {
    // A brief training run makes the predictor non-degenerate; the guard
    // below rejects a constant model.
    GeneratorConfig gcfg;
    gcfg.frames_per_class_snr = 24;
    gcfg.snr_grid_db = {20};
    gcfg.master_seed = 5;
    const Dataset ds = build_dataset(gcfg);
    const DatasetView all = DatasetView::all(ds);

    VanillaModelConfig vcfg;
    VanillaModel<float> m = init_vanilla(vcfg, 9);
    TrainConfig tcfg;
    tcfg.epochs = 4;
    tcfg.batch_size = 32;
    tcfg.seed = 10;
    train_vanilla(m, all, tcfg);

    const auto base_preds = predict_vanilla(m, view_frames(all));
    std::set<int> distinct(base_preds.begin(), base_preds.end());
    REQUIRE(distinct.size() >= 2);  // not a constant model

    bool flipped = false;
    for (int trial = 0; trial < 40 && !flipped; ++trial) {
        Rng rng(1000 + trial);
        const std::size_t i = rng.uniform_int(all.size());
        const double f_d = rng.uniform(0.05, 0.3) * gcfg.sample_rate_hz;
        const IqFrame shifted = apply_doppler_time(all.record(i).frame, f_d, gcfg.sample_rate_hz);
        std::vector<const IqFrame*> one{&shifted};
        if (predict_vanilla(m, one)[0] != base_preds[i]) flipped = true;
    }
    CHECK(flipped);
}

TEST_CASE("invariant checkpoint round-trips to identical outputs") {
    InvariantModelConfig cfg;
    cfg.pad = 20;
    cfg.stride = 2;
    InvariantModel<float> m = init_invariant(cfg, 404);
    const auto path = temp_path("dicnn_ckpt_inv.bin");
    save_checkpoint(m, path.string());
    InvariantModel<float> back = load_invariant_checkpoint(path.string());
    const auto x = random_spectra(2, cfg.padding().padded_len(), 7);
    CHECK(back.forward(x) == m.forward(x));
    CHECK(back.cfg.pad == cfg.pad);
    std::filesystem::remove(path);
}

TEST_CASE("vanilla checkpoint preserves running statistics") {
    GeneratorConfig gcfg;
    gcfg.frames_per_class_snr = 4;
    gcfg.snr_grid_db = {10};
    const Dataset ds = build_dataset(gcfg);
    VanillaModelConfig cfg;
    VanillaModel<float> m = init_vanilla(cfg, 11);
    TrainConfig tcfg;
    tcfg.epochs = 1;
    tcfg.batch_size = 8;
    train_vanilla(m, DatasetView::all(ds), tcfg);

    const auto path = temp_path("dicnn_ckpt_van.bin");
    save_checkpoint(m, path.string());
    VanillaModel<float> back = load_vanilla_checkpoint(path.string());
    const auto frames = view_frames(DatasetView::all(ds));
    CHECK(predict_vanilla(back, frames) == predict_vanilla(m, frames));
    RealTensor<float> x = iq_tensor_from_frames<float>(frames);
    CHECK(back.forward_eval(x) == m.forward_eval(x));
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint with a corrupted shape index is rejected") {
    InvariantModelConfig cfg;
    cfg.pad = 0;
    InvariantModel<float> m = init_invariant(cfg, 1);
    std::string bytes = serialize_checkpoint(model_config_json(m.cfg), m.params());
    // Swap the first entry's outer and kernel dims (64,1,4) -> (4,1,64);
    // the element count is unchanged so only the shape validation can
    // catch it. Layout: magic(8) + u16 + u32 cfg-len + cfg + u32 count +
    // u16 name-len + "cc1.w_r"(7) + u8 rank + dims.
    std::uint32_t clen;
    std::memcpy(&clen, bytes.data() + 10, 4);
    const std::size_t dim_pos = 14 + clen + 4 + 2 + 7 + 1;
    std::uint32_t d0, d2;
    std::memcpy(&d0, bytes.data() + dim_pos, 4);
    std::memcpy(&d2, bytes.data() + dim_pos + 8, 4);
    std::memcpy(bytes.data() + dim_pos, &d2, 4);
    std::memcpy(bytes.data() + dim_pos + 8, &d0, 4);

    const CheckpointData data = deserialize_checkpoint(bytes);
    InvariantModel<float> fresh(invariant_config_from_json(data.config));
    CHECK_THROWS_WITH(load_checkpoint_data(fresh, data),
                      Catch::Matchers::ContainsSubstring("shape mismatch"));
}

TEST_CASE("checkpoint of one model type is rejected by the other loader") {
    InvariantModelConfig cfg;
    cfg.pad = 0;
    InvariantModel<float> m = init_invariant(cfg, 1);
    const auto path = temp_path("dicnn_ckpt_type.bin");
    save_checkpoint(m, path.string());
    CHECK_THROWS_WITH(load_vanilla_checkpoint(path.string()),
                      Catch::Matchers::ContainsSubstring("model type mismatch"));
    CHECK(checkpoint_model_type(path.string()) == "invariant");
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint with bad magic or version is rejected") {
    InvariantModelConfig cfg;
    cfg.pad = 0;
    InvariantModel<float> m = init_invariant(cfg, 1);
    std::string bytes = serialize_checkpoint(model_config_json(m.cfg), m.params());
    std::string bad_magic = bytes;
    bad_magic[3] = 'x';
    CHECK_THROWS_WITH(deserialize_checkpoint(bad_magic),
                      Catch::Matchers::ContainsSubstring("bad magic"));
    std::string bad_version = bytes;
    bad_version[8] = 9;
    CHECK_THROWS_WITH(deserialize_checkpoint(bad_version),
                      Catch::Matchers::ContainsSubstring("format version"));
}
