// Command-line front end: dataset generation, training, evaluation,
// shift experiments, the padding/stride sweep, report rendering and the
// built-in self test.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "dicnn/checkpoint.hpp"
#include "dicnn/dataset_io.hpp"
#include "dicnn/experiments.hpp"
#include "dicnn/report.hpp"
#include "dicnn/selftest.hpp"
#include "dicnn/train.hpp"

namespace {

using namespace dicnn;

struct CommonOpts {
    int jobs = 1;  // worker threads; 1 keeps runs serial, any value is bit-reproducible
};

void apply_jobs(const CommonOpts& c) {
#ifdef _OPENMP
    if (c.jobs > 0) omp_set_num_threads(c.jobs);
#else
    (void)c;
#endif
}

void write_meta(const std::string& path, const nlohmann::json& meta) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << meta.dump(2) << "\n";
}

nlohmann::json train_meta(const TrainConfig& cfg, const std::string& data_path,
                          const Dataset& ds) {
    nlohmann::json j;
    j["train"] = {{"epochs", cfg.epochs},
                  {"batch_size", cfg.batch_size},
                  {"lr", cfg.lr},
                  {"seed", cfg.seed},
                  {"split_fraction", cfg.split_fraction}};
    j["dataset"] = {{"path", data_path},
                    {"master_seed", ds.config.master_seed},
                    {"sample_rate_hz", ds.config.sample_rate_hz},
                    {"frames", ds.frames.size()}};
    return j;
}

// Recover the held-out test split recorded in a checkpoint's metadata.
DatasetView test_split_from_meta(const Dataset& ds, const nlohmann::json& config) {
    double fraction = 0.8;
    std::uint64_t seed = 1;
    if (config.contains("meta") && config["meta"].contains("train")) {
        fraction = config["meta"]["train"].value("split_fraction", 0.8);
        seed = config["meta"]["train"].value("seed", std::uint64_t(1));
    }
    auto [train, test] = split_dataset(ds, fraction, seed);
    (void)train;
    return test;
}

int cmd_generate(const std::string& out, GeneratorConfig cfg, bool desk, const CommonOpts& common) {
    apply_jobs(common);
    if (desk) {
        const GeneratorConfig preset = GeneratorConfig::desk_scale();
        cfg.frames_per_class_snr = preset.frames_per_class_snr;
        cfg.snr_grid_db = preset.snr_grid_db;
    }
    cfg.validate();
    std::fprintf(stderr, "generating %d frames/(class,snr) x %zu snrs x %d classes...\n",
                 cfg.frames_per_class_snr, cfg.snr_grid_db.size(), kNumClasses);
    const Dataset ds = build_dataset(cfg);
    save_dataset(ds, out);
    std::fprintf(stderr, "wrote %zu frames to %s\n", ds.frames.size(), out.c_str());
    return 0;
}

int cmd_train(const std::string& data, const std::string& model_kind, const std::string& out,
              const std::string& history_path, InvariantModelConfig mcfg, TrainConfig tcfg,
              const CommonOpts& common) {
    apply_jobs(common);
    const Dataset ds = load_dataset(data);
    mcfg.frame_len = ds.config.frame_len;
    auto [train_set, test_set] = split_dataset(ds, tcfg.split_fraction, tcfg.seed);
    std::fprintf(stderr, "train %zu frames / test %zu frames\n", train_set.size(),
                 test_set.size());

    TrainHistory hist;
    if (model_kind == "invariant") {
        InvariantModel<float> model = init_invariant(mcfg, tcfg.seed);
        hist = train_invariant(model, train_set, tcfg);
        save_checkpoint(model, out, train_meta(tcfg, data, ds));
        const EvalAccuracy acc = evaluate(model, test_set);
        std::fprintf(stderr, "test accuracy %.4f\n", acc.overall());
    } else if (model_kind == "vanilla") {
        VanillaModelConfig vcfg;
        vcfg.frame_len = ds.config.frame_len;
        VanillaModel<float> model = init_vanilla(vcfg, tcfg.seed);
        hist = train_vanilla(model, train_set, tcfg);
        save_checkpoint(model, out, train_meta(tcfg, data, ds));
        const EvalAccuracy acc = evaluate(model, test_set);
        std::fprintf(stderr, "test accuracy %.4f\n", acc.overall());
    } else {
        throw std::runtime_error("unknown model kind: " + model_kind);
    }

    if (!history_path.empty()) {
        std::ofstream f(history_path, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open for writing: " + history_path);
        f << "epoch,mean_loss,seconds\n";
        for (std::size_t e = 0; e < hist.epoch_loss.size(); ++e) {
            char line[128];
            std::snprintf(line, sizeof(line), "%zu,%.6f,%.3f\n", e, hist.epoch_loss[e],
                          hist.epoch_seconds[e]);
            f << line;
        }
    }
    for (std::size_t e = 0; e < hist.epoch_loss.size(); ++e)
        std::fprintf(stderr, "epoch %zu: loss %.4f (%.1fs)\n", e, hist.epoch_loss[e],
                     hist.epoch_seconds[e]);
    std::fprintf(stderr, "checkpoint written to %s\n", out.c_str());
    return 0;
}

int cmd_eval(const std::string& data, const std::string& model_file, const std::string& out,
             bool on_all, const CommonOpts& common) {
    apply_jobs(common);
    const Dataset ds = load_dataset(data);
    const CheckpointData ckpt = deserialize_checkpoint(read_file(model_file));
    const DatasetView view =
        on_all ? DatasetView::all(ds) : test_split_from_meta(ds, ckpt.config);

    EvalAccuracy acc;
    nlohmann::json model_cfg;
    if (ckpt.config.at("type") == "invariant") {
        InvariantModel<float> model = load_invariant_checkpoint(model_file);
        acc = evaluate(model, view);
        model_cfg = model_config_json(model.cfg);
    } else {
        VanillaModel<float> model = load_vanilla_checkpoint(model_file);
        acc = evaluate(model, view);
        model_cfg = model_config_json(model.cfg);
    }

    EvalReport rep;
    for (int c = 0; c < kNumClasses; ++c) rep.before[c] = rep.after[c] = acc.per_class(c);
    rep.finalize();
    rep.metadata = {{"experiment", "eval"}, {"dataset", data}, {"model_file", model_file},
                    {"model", model_cfg}, {"frames", view.size()}};
    write_eval_csv(rep, out);
    write_meta(out + ".meta.json", rep.metadata);
    for (int c = 0; c < kNumClasses; ++c)
        std::printf("%-13s %.4f\n", to_string(static_cast<SignalClass>(c)), acc.per_class(c));
    std::printf("overall       %.4f\n", acc.overall());
    return 0;
}

int cmd_shift_test(const std::string& data, const std::string& model_file,
                   const std::string& vanilla_file, long bins, double dop_lo, double dop_hi,
                   std::uint64_t seed, const std::string& out_dir, const CommonOpts& common) {
    apply_jobs(common);
    const Dataset ds = load_dataset(data);
    const CheckpointData ckpt = deserialize_checkpoint(read_file(model_file));
    if (ckpt.config.at("type") != "invariant")
        throw std::runtime_error("shift-test expects an invariant-model checkpoint");
    InvariantModel<float> model = load_invariant_checkpoint(model_file);
    const DatasetView test = test_split_from_meta(ds, ckpt.config);
    std::filesystem::create_directories(out_dir);

    const PureShiftResult pure = run_pure_shift_experiment(model, test, bins);
    const std::string pure_csv = out_dir + "/pure_shift.csv";
    write_eval_csv(pure.report, pure_csv);
    write_meta(pure_csv + ".meta.json", pure.report.metadata);
    std::printf("pure shift (%ld bins): total |delta| = %.6f, argmax %s\n", bins,
                pure.report.total_abs_delta, pure.argmax_identical ? "identical" : "changed");

    if (!vanilla_file.empty()) {
        VanillaModel<float> van = load_vanilla_checkpoint(vanilla_file);
        const RandomDopplerResult rd =
            run_random_doppler_experiment(model, van, test, dop_lo, dop_hi, seed);
        write_eval_csv(rd.invariant, out_dir + "/doppler_invariant.csv");
        write_meta(out_dir + "/doppler_invariant.csv.meta.json", rd.invariant.metadata);
        write_eval_csv(rd.vanilla, out_dir + "/doppler_vanilla.csv");
        write_meta(out_dir + "/doppler_vanilla.csv.meta.json", rd.vanilla.metadata);
        std::printf("random doppler [%g, %g] Hz: invariant total |delta| = %.4f, "
                    "vanilla total |delta| = %.4f\n",
                    dop_lo, dop_hi, rd.invariant.total_abs_delta, rd.vanilla.total_abs_delta);
    }
    return 0;
}

int cmd_sweep(const std::string& data, std::vector<int> p_list, std::vector<int> s_list,
              TrainConfig tcfg, double dop_lo, double dop_hi, const std::string& conv_pad,
              const std::string& out_dir, const CommonOpts& common) {
    apply_jobs(common);
    const Dataset ds = load_dataset(data);
    std::filesystem::create_directories(out_dir);
    const SweepReport rep = run_sweep(p_list, s_list, ds, tcfg, dop_lo, dop_hi,
                                      conv_pad_mode_from_string(conv_pad), true);
    write_sweep_csv(rep, out_dir + "/sweep.csv");
    nlohmann::json meta = rep.metadata;
    meta["dataset"] = data;
    write_meta(out_dir + "/sweep.csv.meta.json", meta);
    write_sweep_svgs(rep, out_dir);
    std::printf("sweep finished: %zu cells -> %s/sweep.csv\n", rep.cells.size(), out_dir.c_str());
    return 0;
}

int cmd_report(const std::string& in_csv, const std::string& out_svg) {
    std::ifstream f(in_csv);
    if (!f) throw std::runtime_error("cannot open: " + in_csv);
    std::string header;
    std::getline(f, header);
    f.close();
    if (header.rfind("padding,stride,", 0) == 0) {
        render_sweep_csv_to_svg(in_csv, out_svg);
    } else if (header.rfind("class,before,after,", 0) == 0) {
        EvalReport rep;
        std::ifstream g(in_csv);
        std::string line;
        std::getline(g, line);
        int c = 0;
        while (std::getline(g, line) && c < kNumClasses) {
            const auto p1 = line.find(','), p2 = line.find(',', p1 + 1),
                       p3 = line.find(',', p2 + 1);
            if (p1 == std::string::npos || line.rfind("total", 0) == 0) break;
            rep.before[c] = std::stod(line.substr(p1 + 1, p2 - p1 - 1));
            rep.after[c] = std::stod(line.substr(p2 + 1, p3 - p2 - 1));
            ++c;
        }
        rep.finalize();
        write_eval_svg(rep, out_svg);
    } else {
        throw std::runtime_error("unrecognized CSV schema in " + in_csv);
    }
    std::printf("wrote %s\n", out_svg.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doppler-robust RF signal classification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // allow global flags like --jobs after the subcommand
    argv = app.ensure_utf8(argv);

    // Optional key=value config file; command-line flags take precedence.
    app.set_config("--config", "", "Read options from an INI config file")
        ->envname("DICNN_CONFIG");
    app.allow_config_extras(false);

    CommonOpts common;
    app.add_option("--jobs", common.jobs,
                   "Worker threads (results are identical for any value)")
        ->capture_default_str();

    GeneratorConfig gen_cfg;
    std::string gen_out = "dataset.bin";
    bool gen_desk = false;
    int snr_min = -20, snr_max = 20, snr_step = 2;
    auto* gen = app.add_subcommand("generate", "Synthesize the labeled IQ dataset");
    gen->add_option("--out", gen_out, "Output dataset file")->capture_default_str();
    gen->add_option("--seed", gen_cfg.master_seed, "Master seed")->capture_default_str();
    gen->add_option("--frames", gen_cfg.frames_per_class_snr, "Frames per (class, SNR)")
        ->capture_default_str();
    gen->add_option("--frame-len", gen_cfg.frame_len, "Samples per frame")->capture_default_str();
    gen->add_option("--sample-rate", gen_cfg.sample_rate_hz, "Sample rate in Hz")
        ->capture_default_str();
    gen->add_option("--margin", gen_cfg.nyquist_margin, "Nyquist margin fraction")
        ->capture_default_str();
    gen->add_option("--snr-min", snr_min, "Lowest SNR (dB)")->capture_default_str();
    gen->add_option("--snr-max", snr_max, "Highest SNR (dB)")->capture_default_str();
    gen->add_option("--snr-step", snr_step, "SNR grid step (dB)")->capture_default_str();
    gen->add_flag("--desk", gen_desk, "Desk-scale preset: 200 frames, SNRs {-10,0,10,20}");

    std::string train_data, train_out = "model.ckpt", train_history, train_kind = "invariant";
    InvariantModelConfig train_mcfg;
    TrainConfig train_tcfg;
    std::string train_conv_pad = "zero";
    auto* train = app.add_subcommand("train", "Train a model from scratch");
    train->add_option("--data", train_data, "Dataset file")->required();
    train->add_option("--model", train_kind, "invariant | vanilla")->capture_default_str();
    train->add_option("--out", train_out, "Checkpoint output path")->capture_default_str();
    train->add_option("--history", train_history, "Optional loss-history CSV path");
    train->add_option("--padding", train_mcfg.pad, "Zero padding per side (invariant model)")
        ->capture_default_str();
    train->add_option("--stride", train_mcfg.stride, "Downsampling stride (invariant model)")
        ->capture_default_str();
    train->add_option("--conv-pad", train_conv_pad, "Conv padding: zero | circular")
        ->capture_default_str();
    train->add_option("--epochs", train_tcfg.epochs, "Training epochs")->capture_default_str();
    train->add_option("--batch-size", train_tcfg.batch_size, "Minibatch size")
        ->capture_default_str();
    train->add_option("--lr", train_tcfg.lr, "Adam learning rate")->capture_default_str();
    train->add_option("--seed", train_tcfg.seed, "Training seed")->capture_default_str();
    train->add_option("--split", train_tcfg.split_fraction, "Train fraction")
        ->capture_default_str();

    std::string eval_data, eval_model, eval_out = "eval.csv";
    bool eval_all = false;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval_cmd->add_option("--data", eval_data, "Dataset file")->required();
    eval_cmd->add_option("--model-file", eval_model, "Checkpoint path")->required();
    eval_cmd->add_option("--out", eval_out, "Report CSV path")->capture_default_str();
    eval_cmd->add_flag("--all", eval_all, "Evaluate on every frame, not the held-out split");

    std::string st_data, st_model, st_vanilla, st_out = "shift-test-out";
    long st_bins = 20;
    double st_lo = 1.0, st_hi = 5000.0;
    std::uint64_t st_seed = 1;
    auto* st = app.add_subcommand("shift-test",
                                  "Pure bin-shift and random-Doppler experiments");
    st->add_option("--data", st_data, "Dataset file")->required();
    st->add_option("--model-file", st_model, "Invariant model checkpoint")->required();
    st->add_option("--vanilla-file", st_vanilla,
                   "Optional baseline checkpoint for the paired Doppler run");
    st->add_option("--bins", st_bins, "Pure shift size in bins")->capture_default_str();
    st->add_option("--doppler-min", st_lo, "Random Doppler lower bound (Hz)")
        ->capture_default_str();
    st->add_option("--doppler-max", st_hi, "Random Doppler upper bound (Hz)")
        ->capture_default_str();
    st->add_option("--seed", st_seed, "Doppler draw seed")->capture_default_str();
    st->add_option("--out-dir", st_out, "Output directory")->capture_default_str();

    std::string sw_data, sw_out = "sweep-out", sw_conv_pad = "zero";
    std::vector<int> sw_p = {0, 20, 30, 40, 80};
    std::vector<int> sw_s = {2, 3};
    TrainConfig sw_tcfg;
    sw_tcfg.epochs = 8;
    double sw_lo = 1.0, sw_hi = 5000.0;
    auto* sw = app.add_subcommand("sweep", "Train one model per (padding, stride) cell");
    sw->add_option("--data", sw_data, "Dataset file")->required();
    sw->add_option("--padding-list", sw_p, "Padding values")->capture_default_str();
    sw->add_option("--stride-list", sw_s, "Stride values")->capture_default_str();
    sw->add_option("--epochs", sw_tcfg.epochs, "Epochs per cell")->capture_default_str();
    sw->add_option("--batch-size", sw_tcfg.batch_size, "Minibatch size")->capture_default_str();
    sw->add_option("--seed", sw_tcfg.seed, "Seed shared across cells")->capture_default_str();
    sw->add_option("--split", sw_tcfg.split_fraction, "Train fraction")->capture_default_str();
    sw->add_option("--conv-pad", sw_conv_pad, "Conv padding: zero | circular")
        ->capture_default_str();
    sw->add_option("--doppler-min", sw_lo, "Random Doppler lower bound (Hz)")
        ->capture_default_str();
    sw->add_option("--doppler-max", sw_hi, "Random Doppler upper bound (Hz)")
        ->capture_default_str();
    sw->add_option("--out-dir", sw_out, "Output directory")->capture_default_str();

    std::string rep_in, rep_out = "report.svg";
    auto* rep = app.add_subcommand("report", "Render a CSV report to SVG");
    rep->add_option("--in", rep_in, "Input CSV (eval or sweep schema)")->required();
    rep->add_option("--out", rep_out, "Output SVG path")->capture_default_str();

    auto* selftest_cmd =
        app.add_subcommand("selftest", "Run the built-in oracle and property checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            gen_cfg.snr_grid_db.clear();
            for (int s = snr_min; s <= snr_max; s += snr_step) gen_cfg.snr_grid_db.push_back(s);
            return cmd_generate(gen_out, gen_cfg, gen_desk, common);
        }
        if (train->parsed()) {
            train_mcfg.conv_pad = conv_pad_mode_from_string(train_conv_pad);
            return cmd_train(train_data, train_kind, train_out, train_history, train_mcfg,
                             train_tcfg, common);
        }
        if (eval_cmd->parsed())
            return cmd_eval(eval_data, eval_model, eval_out, eval_all, common);
        if (st->parsed())
            return cmd_shift_test(st_data, st_model, st_vanilla, st_bins, st_lo, st_hi, st_seed,
                                  st_out, common);
        if (sw->parsed())
            return cmd_sweep(sw_data, sw_p, sw_s, sw_tcfg, sw_lo, sw_hi, sw_conv_pad, sw_out,
                             common);
        if (rep->parsed()) return cmd_report(rep_in, rep_out);
        if (selftest_cmd->parsed()) {
            apply_jobs(common);
            const int failures = selftest::run_and_print();
            return failures == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
