#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicnn/dft.hpp"
#include "dicnn/iq_frame.hpp"
#include "dicnn/rng.hpp"

namespace dicnn {

enum class SignalClass : std::uint8_t {
    tone = 0,
    hopping_tone = 1,
    chirp = 2,
    noise = 3,
    bpsk = 4,
    qpsk = 5,
    psk8 = 6,
};

inline constexpr int kNumClasses = 7;

inline const char* to_string(SignalClass c) {
    switch (c) {
        case SignalClass::tone: return "tone";
        case SignalClass::hopping_tone: return "hopping_tone";
        case SignalClass::chirp: return "chirp";
        case SignalClass::noise: return "noise";
        case SignalClass::bpsk: return "bpsk";
        case SignalClass::qpsk: return "qpsk";
        case SignalClass::psk8: return "8psk";
    }
    return "?";
}

inline SignalClass signal_class_from_string(const std::string& s) {
    for (int i = 0; i < kNumClasses; ++i) {
        const auto c = static_cast<SignalClass>(i);
        if (s == to_string(c)) return c;
    }
    throw std::invalid_argument("unknown signal class: " + s);
}

inline int psk_order(SignalClass c) {
    switch (c) {
        case SignalClass::bpsk: return 2;
        case SignalClass::qpsk: return 4;
        case SignalClass::psk8: return 8;
        default: return 0;
    }
}

struct GeneratorConfig {
    double sample_rate_hz = 1.0e6;
    int frames_per_class_snr = 2000;
    int frame_len = 128;
    std::vector<int> snr_grid_db;  // defaults to -20..20 step 2
    double nyquist_margin = 0.1;   // fraction of f_s kept clear below Nyquist
    std::uint64_t master_seed = 1;

    // Knobs the signal definitions leave open; all lengths in samples.
    int hop_len_min = 8, hop_len_max = 32;
    int psk_sym_len_min = 8, psk_sym_len_max = 32;
    double chirp_sweeps_min = 0.25, chirp_sweeps_max = 2.0;  // band traversals per frame
    double min_band_frac = 0.05;  // minimum chirp/noise band width, fraction of f_s

    GeneratorConfig() {
        for (int s = -20; s <= 20; s += 2) snr_grid_db.push_back(s);
    }

    // Highest frequency magnitude any generated content may reach.
    double max_freq_hz() const { return (0.5 - nyquist_margin) * sample_rate_hz; }

    void validate() const {
        if (sample_rate_hz <= 0.0) throw std::invalid_argument("config: sample_rate_hz must be > 0");
        if (frames_per_class_snr <= 0) throw std::invalid_argument("config: frames_per_class_snr must be > 0");
        if (frame_len < 8) throw std::invalid_argument("config: frame_len must be >= 8");
        if (snr_grid_db.empty()) throw std::invalid_argument("config: snr_grid_db must be non-empty");
        if (!(nyquist_margin > 0.0 && nyquist_margin <= 0.5))
            throw std::invalid_argument("config: nyquist_margin must be in (0, 0.5]");
        if (hop_len_min < 2 || hop_len_max < hop_len_min)
            throw std::invalid_argument("config: bad hop length range");
        if (psk_sym_len_min < 2 || psk_sym_len_max < psk_sym_len_min)
            throw std::invalid_argument("config: bad PSK symbol length range");
        if (psk_sym_len_min < 4)
            throw std::invalid_argument("config: PSK symbol length must be >= 4 to stay in band");
        if (!(min_band_frac > 0.0 && min_band_frac < 2.0 * (0.5 - nyquist_margin)))
            throw std::invalid_argument("config: min_band_frac incompatible with margin");
    }

    /// Reduced preset for desk-scale experiments: 200 frames per
    /// (class, SNR) over SNRs {-10, 0, 10, 20}.
    static GeneratorConfig desk_scale() {
        GeneratorConfig cfg;
        cfg.frames_per_class_snr = 200;
        cfg.snr_grid_db = {-10, 0, 10, 20};
        return cfg;
    }
};

/// Per-frame random draws. Only the fields relevant to the frame's class are
/// populated; the rest stay at their defaults.
struct FrameParams {
    double center_freq_hz = 0.0;  // tone / PSK carrier
    double phase_rad = 0.0;

    int hop_step_len = 0;               // samples per hop, constant in a frame
    std::vector<double> hop_freqs_hz;   // one entry per hop, first may start mid-step

    double chirp_f_min_hz = 0.0;
    double chirp_f_max_hz = 0.0;
    double chirp_rate_hz_per_s = 0.0;   // frequency slope, wraps max -> min
    double chirp_f_start_hz = 0.0;      // instantaneous frequency at n = 0

    double noise_band_lo_hz = 0.0;
    double noise_band_hi_hz = 0.0;
    std::uint64_t noise_seed = 0;       // white-noise substream, makes gen_frame pure

    int psk_order = 0;                  // 2, 4 or 8
    int psk_sym_len = 0;                // samples per symbol
    std::vector<std::uint8_t> psk_symbols;

    int time_offset = 0;                // samples into the first hop/symbol
};

inline void validate_frame_params(SignalClass cls, const FrameParams& p,
                                  const GeneratorConfig& cfg) {
    const double fmax = cfg.max_freq_hz();
    auto in_band = [&](double f, const char* what) {
        if (!(std::abs(f) <= fmax))
            throw std::invalid_argument(std::string("frame params: ") + what +
                                        " outside the Nyquist margin");
    };
    switch (cls) {
        case SignalClass::tone:
            in_band(p.center_freq_hz, "tone frequency");
            break;
        case SignalClass::hopping_tone:
            if (p.hop_step_len < 2) throw std::invalid_argument("frame params: hop step too short");
            if (p.hop_freqs_hz.empty()) throw std::invalid_argument("frame params: no hop frequencies");
            for (double f : p.hop_freqs_hz) in_band(f, "hop frequency");
            break;
        case SignalClass::chirp:
            in_band(p.chirp_f_min_hz, "chirp minimum frequency");
            in_band(p.chirp_f_max_hz, "chirp maximum frequency");
            if (!(p.chirp_f_max_hz > p.chirp_f_min_hz))
                throw std::invalid_argument("frame params: chirp band is empty");
            if (!(p.chirp_rate_hz_per_s > 0.0))
                throw std::invalid_argument("frame params: chirp rate must be > 0");
            if (p.chirp_f_start_hz < p.chirp_f_min_hz || p.chirp_f_start_hz > p.chirp_f_max_hz)
                throw std::invalid_argument("frame params: chirp start outside its band");
            break;
        case SignalClass::noise:
            in_band(p.noise_band_lo_hz, "noise band edge");
            in_band(p.noise_band_hi_hz, "noise band edge");
            if (!(p.noise_band_hi_hz > p.noise_band_lo_hz))
                throw std::invalid_argument("frame params: noise band is empty");
            break;
        case SignalClass::bpsk:
        case SignalClass::qpsk:
        case SignalClass::psk8: {
            if (p.psk_order != psk_order(cls))
                throw std::invalid_argument("frame params: PSK order does not match class");
            if (p.psk_sym_len < 2)
                throw std::invalid_argument("frame params: PSK symbol duration must be >= 2");
            // Keep the main spectral lobe (first nulls at +-2/T for the
            // rectangular pulse) inside the margin.
            const double lobe = 2.0 * cfg.sample_rate_hz / p.psk_sym_len;
            if (!(std::abs(p.center_freq_hz) + lobe <= fmax))
                throw std::invalid_argument(
                    "frame params: PSK carrier plus main lobe outside the Nyquist margin");
            if (p.psk_symbols.empty()) throw std::invalid_argument("frame params: no PSK symbols");
            for (std::uint8_t s : p.psk_symbols)
                if (s >= p.psk_order) throw std::invalid_argument("frame params: PSK symbol out of range");
            break;
        }
    }
    if (p.time_offset < 0) throw std::invalid_argument("frame params: negative time offset");
}

/// Draw the per-frame randomness for one frame of the given class.
inline FrameParams draw_frame_params(SignalClass cls, const GeneratorConfig& cfg, Rng& rng) {
    const double fmax = cfg.max_freq_hz();
    FrameParams p;
    p.phase_rad = rng.uniform(0.0, 2.0 * M_PI);
    switch (cls) {
        case SignalClass::tone:
            p.center_freq_hz = rng.uniform(-fmax, fmax);
            break;
        case SignalClass::hopping_tone: {
            p.hop_step_len = static_cast<int>(rng.uniform_int(cfg.hop_len_min, cfg.hop_len_max));
            p.time_offset = static_cast<int>(rng.uniform_int(0, p.hop_step_len - 1));
            const int hops = 2 + (cfg.frame_len + p.time_offset - 1) / p.hop_step_len;
            for (int h = 0; h < hops; ++h) p.hop_freqs_hz.push_back(rng.uniform(-fmax, fmax));
            break;
        }
        case SignalClass::chirp: {
            const double min_width = cfg.min_band_frac * cfg.sample_rate_hz;
            double a = rng.uniform(-fmax, fmax - min_width);
            double b = rng.uniform(a + min_width, fmax);
            p.chirp_f_min_hz = a;
            p.chirp_f_max_hz = b;
            const double frame_s = cfg.frame_len / cfg.sample_rate_hz;
            const double sweeps = rng.uniform(cfg.chirp_sweeps_min, cfg.chirp_sweeps_max);
            p.chirp_rate_hz_per_s = sweeps * (b - a) / frame_s;
            p.chirp_f_start_hz = rng.uniform(a, b);
            break;
        }
        case SignalClass::noise: {
            const double min_width = cfg.min_band_frac * cfg.sample_rate_hz;
            double a = rng.uniform(-fmax, fmax - min_width);
            double b = rng.uniform(a + min_width, fmax);
            p.noise_band_lo_hz = a;
            p.noise_band_hi_hz = b;
            p.noise_seed = rng.next_u64();
            break;
        }
        case SignalClass::bpsk:
        case SignalClass::qpsk:
        case SignalClass::psk8: {
            p.psk_order = psk_order(cls);
            p.psk_sym_len = static_cast<int>(rng.uniform_int(cfg.psk_sym_len_min, cfg.psk_sym_len_max));
            const double lobe = 2.0 * cfg.sample_rate_hz / p.psk_sym_len;
            const double fc_max = fmax - lobe;
            p.center_freq_hz = fc_max > 0.0 ? rng.uniform(-fc_max, fc_max) : 0.0;
            p.time_offset = static_cast<int>(rng.uniform_int(0, p.psk_sym_len - 1));
            const int symbols = 2 + (cfg.frame_len + p.time_offset - 1) / p.psk_sym_len;
            for (int s = 0; s < symbols; ++s)
                p.psk_symbols.push_back(static_cast<std::uint8_t>(rng.uniform_int(
                    static_cast<std::uint64_t>(p.psk_order))));
            break;
        }
    }
    return p;
}

namespace detail {

inline IqFrame gen_tone(const FrameParams& p, const GeneratorConfig& cfg) {
    IqFrame f(cfg.frame_len);
    const double w = 2.0 * M_PI * p.center_freq_hz / cfg.sample_rate_hz;
    for (int n = 0; n < cfg.frame_len; ++n) {
        const double ph = w * n + p.phase_rad;
        f.samples[n] = {static_cast<float>(std::cos(ph)), static_cast<float>(std::sin(ph))};
    }
    return f;
}

// Phase-continuous hopping: the oscillator retunes at each hop boundary, so
// the accumulated phase carries across hops.
inline IqFrame gen_hopping_tone(const FrameParams& p, const GeneratorConfig& cfg) {
    IqFrame f(cfg.frame_len);
    double phase = p.phase_rad;
    for (int n = 0; n < cfg.frame_len; ++n) {
        const int hop = (n + p.time_offset) / p.hop_step_len;
        const double freq = p.hop_freqs_hz[std::min<std::size_t>(hop, p.hop_freqs_hz.size() - 1)];
        f.samples[n] = {static_cast<float>(std::cos(phase)), static_cast<float>(std::sin(phase))};
        phase += 2.0 * M_PI * freq / cfg.sample_rate_hz;
    }
    return f;
}

inline IqFrame gen_chirp(const FrameParams& p, const GeneratorConfig& cfg) {
    IqFrame f(cfg.frame_len);
    const double width = p.chirp_f_max_hz - p.chirp_f_min_hz;
    double freq = p.chirp_f_start_hz;
    double phase = p.phase_rad;
    const double df = p.chirp_rate_hz_per_s / cfg.sample_rate_hz;  // Hz advanced per sample
    for (int n = 0; n < cfg.frame_len; ++n) {
        f.samples[n] = {static_cast<float>(std::cos(phase)), static_cast<float>(std::sin(phase))};
        phase += 2.0 * M_PI * freq / cfg.sample_rate_hz;
        freq += df;
        if (freq > p.chirp_f_max_hz) freq -= width;
    }
    return f;
}

// Partial-band noise: white complex Gaussian masked to the passband on the
// frame-length DFT grid, then normalized to unit mean power.
inline IqFrame gen_noise(const FrameParams& p, const GeneratorConfig& cfg) {
    const int n = cfg.frame_len;
    Rng rng(p.noise_seed);
    std::vector<cplx> white(n);
    for (int i = 0; i < n; ++i) white[i] = cplx(rng.normal(), rng.normal());

    DftPlan plan(static_cast<std::size_t>(n));
    std::vector<cplx> spec = plan.forward(white);
    for (int k = 0; k < n; ++k) {
        // Bin k represents signed frequency (k <= n/2 ? k : k - n) * f_s / n.
        const int signed_bin = k <= n / 2 ? k : k - n;
        const double freq = signed_bin * cfg.sample_rate_hz / n;
        if (freq < p.noise_band_lo_hz || freq > p.noise_band_hi_hz) spec[k] = 0.0;
    }
    std::vector<cplx> shaped = plan.inverse(spec);

    double power = 0.0;
    for (const auto& s : shaped) power += std::norm(s);
    power /= n;
    const double scale = power > 0.0 ? 1.0 / std::sqrt(power) : 0.0;

    IqFrame f(n);
    for (int i = 0; i < n; ++i)
        f.samples[i] = {static_cast<float>(shaped[i].real() * scale),
                        static_cast<float>(shaped[i].imag() * scale)};
    return f;
}

inline IqFrame gen_psk(const FrameParams& p, const GeneratorConfig& cfg) {
    IqFrame f(cfg.frame_len);
    const double w = 2.0 * M_PI * p.center_freq_hz / cfg.sample_rate_hz;
    for (int n = 0; n < cfg.frame_len; ++n) {
        const int sym = (n + p.time_offset) / p.psk_sym_len;
        const std::uint8_t point =
            p.psk_symbols[std::min<std::size_t>(sym, p.psk_symbols.size() - 1)];
        const double ph = w * n + p.phase_rad + 2.0 * M_PI * point / p.psk_order;
        f.samples[n] = {static_cast<float>(std::cos(ph)), static_cast<float>(std::sin(ph))};
    }
    return f;
}

}  // namespace detail

/// Generate one clean (pre-noise) frame. Pure function of its arguments;
/// every class except noise is exactly constant-modulus, and noise is
/// normalized, so the result has unit mean power.
inline IqFrame gen_frame(SignalClass cls, const FrameParams& params, const GeneratorConfig& cfg) {
    cfg.validate();
    validate_frame_params(cls, params, cfg);
    switch (cls) {
        case SignalClass::tone: return detail::gen_tone(params, cfg);
        case SignalClass::hopping_tone: return detail::gen_hopping_tone(params, cfg);
        case SignalClass::chirp: return detail::gen_chirp(params, cfg);
        case SignalClass::noise: return detail::gen_noise(params, cfg);
        case SignalClass::bpsk:
        case SignalClass::qpsk:
        case SignalClass::psk8: return detail::gen_psk(params, cfg);
    }
    throw std::logic_error("gen_frame: unreachable");
}

/// Add complex AWGN with per-sample variance sigma^2 = 10^(-snr_db/10).
/// The frame is assumed to be at unit mean power.
inline IqFrame add_awgn(const IqFrame& frame, int snr_db, Rng& rng) {
    const double sigma2 = std::pow(10.0, -snr_db / 10.0);
    const double s = std::sqrt(sigma2 / 2.0);
    IqFrame out(frame.size());
    for (std::size_t n = 0; n < frame.size(); ++n) {
        const double nr = rng.normal() * s;
        const double ni = rng.normal() * s;
        out.samples[n] = {static_cast<float>(frame.samples[n].real() + nr),
                          static_cast<float>(frame.samples[n].imag() + ni)};
    }
    return out;
}

struct FrameRecord {
    IqFrame frame;
    SignalClass label = SignalClass::tone;
    std::int16_t snr_db = 0;
    FrameParams params;  // in-memory only, not serialized
};

struct Dataset {
    GeneratorConfig config;
    std::vector<FrameRecord> frames;
};

/// Stream id for the (class, snr index, frame index) cell, so any frame can
/// be regenerated in isolation.
inline std::uint64_t frame_stream_id(SignalClass cls, int snr_index, int frame_index) {
    return (static_cast<std::uint64_t>(cls) << 56) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(snr_index)) << 36) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(frame_index));
}

/// Regenerate a single dataset frame from the master seed.
inline FrameRecord make_frame(const GeneratorConfig& cfg, SignalClass cls, int snr_index,
                              int frame_index) {
    Rng rng = Rng::substream(cfg.master_seed, frame_stream_id(cls, snr_index, frame_index));
    FrameRecord rec;
    rec.label = cls;
    rec.snr_db = static_cast<std::int16_t>(cfg.snr_grid_db.at(static_cast<std::size_t>(snr_index)));
    rec.params = draw_frame_params(cls, cfg, rng);
    rec.frame = add_awgn(gen_frame(cls, rec.params, cfg), rec.snr_db, rng);
    return rec;
}

/// Full cross product of classes x SNR grid x frames_per_class_snr.
/// Deterministic: a pure function of the config.
inline Dataset build_dataset(const GeneratorConfig& cfg) {
    cfg.validate();
    const std::uint64_t total = static_cast<std::uint64_t>(kNumClasses) *
                                cfg.snr_grid_db.size() *
                                static_cast<std::uint64_t>(cfg.frames_per_class_snr);
    if (total > (1ull << 31))
        throw std::invalid_argument("build_dataset: frame count overflow");

    Dataset ds;
    ds.config = cfg;
    ds.frames.reserve(total);
    for (int c = 0; c < kNumClasses; ++c)
        for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s)
            for (int i = 0; i < cfg.frames_per_class_snr; ++i)
                ds.frames.push_back(make_frame(cfg, static_cast<SignalClass>(c),
                                               static_cast<int>(s), i));
    return ds;
}

}  // namespace dicnn
