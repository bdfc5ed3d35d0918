#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicnn/rf_synth.hpp"

namespace dicnn {

// Dataset container format, all fields little-endian:
//   8 bytes   magic "RFIQDSET"
//   u16       format version (currently 1)
//   u32       manifest length
//   bytes     JSON manifest (config echo, seed, frame count)
//   per frame frame_len x (f32 I, f32 Q), u8 label, i16 snr_db
inline constexpr char kDatasetMagic[8] = {'R', 'F', 'I', 'Q', 'D', 'S', 'E', 'T'};
inline constexpr std::uint16_t kDatasetVersion = 1;

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    // Host is little-endian on every supported target; keep the copy explicit
    // so the layout is the file format, not the ABI.
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("dataset: truncated payload");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

inline nlohmann::json config_to_json(const GeneratorConfig& c) {
    nlohmann::json j;
    j["sample_rate_hz"] = c.sample_rate_hz;
    j["frames_per_class_snr"] = c.frames_per_class_snr;
    j["frame_len"] = c.frame_len;
    j["snr_grid_db"] = c.snr_grid_db;
    j["nyquist_margin"] = c.nyquist_margin;
    j["master_seed"] = c.master_seed;
    j["hop_len_min"] = c.hop_len_min;
    j["hop_len_max"] = c.hop_len_max;
    j["psk_sym_len_min"] = c.psk_sym_len_min;
    j["psk_sym_len_max"] = c.psk_sym_len_max;
    j["chirp_sweeps_min"] = c.chirp_sweeps_min;
    j["chirp_sweeps_max"] = c.chirp_sweeps_max;
    j["min_band_frac"] = c.min_band_frac;
    return j;
}

inline GeneratorConfig config_from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    c.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    c.frames_per_class_snr = j.at("frames_per_class_snr").get<int>();
    c.frame_len = j.at("frame_len").get<int>();
    c.snr_grid_db = j.at("snr_grid_db").get<std::vector<int>>();
    c.nyquist_margin = j.at("nyquist_margin").get<double>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.hop_len_min = j.at("hop_len_min").get<int>();
    c.hop_len_max = j.at("hop_len_max").get<int>();
    c.psk_sym_len_min = j.at("psk_sym_len_min").get<int>();
    c.psk_sym_len_max = j.at("psk_sym_len_max").get<int>();
    c.chirp_sweeps_min = j.at("chirp_sweeps_min").get<double>();
    c.chirp_sweeps_max = j.at("chirp_sweeps_max").get<double>();
    c.min_band_frac = j.at("min_band_frac").get<double>();
    return c;
}

}  // namespace detail

inline std::string serialize_dataset(const Dataset& ds) {
    nlohmann::json manifest;
    manifest["format"] = "rf-iq-dataset";
    manifest["version"] = kDatasetVersion;
    manifest["frame_count"] = ds.frames.size();
    manifest["config"] = detail::config_to_json(ds.config);
    const std::string mbytes = manifest.dump();

    std::string out;
    out.reserve(64 + mbytes.size() +
                ds.frames.size() * (ds.config.frame_len * 8 + 3));
    out.append(kDatasetMagic, sizeof(kDatasetMagic));
    detail::put_le<std::uint16_t>(out, kDatasetVersion);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mbytes.size()));
    out.append(mbytes);
    for (const FrameRecord& rec : ds.frames) {
        for (const auto& s : rec.frame.samples) {
            detail::put_le<float>(out, s.real());
            detail::put_le<float>(out, s.imag());
        }
        detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(rec.label));
        detail::put_le<std::int16_t>(out, rec.snr_db);
    }
    return out;
}

inline Dataset deserialize_dataset(const std::string& bytes) {
    if (bytes.size() < sizeof(kDatasetMagic) + 6 ||
        std::memcmp(bytes.data(), kDatasetMagic, sizeof(kDatasetMagic)) != 0)
        throw std::runtime_error("dataset: corrupt header (bad magic)");
    std::size_t pos = sizeof(kDatasetMagic);
    const auto version = detail::get_le<std::uint16_t>(bytes, pos);
    if (version != kDatasetVersion)
        throw std::runtime_error("dataset: unsupported format version " + std::to_string(version));
    const auto mlen = detail::get_le<std::uint32_t>(bytes, pos);
    if (pos + mlen > bytes.size()) throw std::runtime_error("dataset: truncated payload");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(bytes.substr(pos, mlen));
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("dataset: corrupt header (bad manifest)");
    }
    pos += mlen;

    Dataset ds;
    ds.config = detail::config_from_json(manifest.at("config"));
    const auto count = manifest.at("frame_count").get<std::uint64_t>();
    const std::size_t frame_bytes = static_cast<std::size_t>(ds.config.frame_len) * 8 + 3;
    if (bytes.size() - pos < count * frame_bytes)
        throw std::runtime_error("dataset: truncated payload");
    if (bytes.size() - pos > count * frame_bytes)
        throw std::runtime_error("dataset: manifest frame count mismatch");

    ds.frames.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        FrameRecord& rec = ds.frames[i];
        rec.frame.samples.resize(ds.config.frame_len);
        for (int n = 0; n < ds.config.frame_len; ++n) {
            const float re = detail::get_le<float>(bytes, pos);
            const float im = detail::get_le<float>(bytes, pos);
            rec.frame.samples[n] = {re, im};
        }
        const auto label = detail::get_le<std::uint8_t>(bytes, pos);
        if (label >= kNumClasses) throw std::runtime_error("dataset: invalid class label");
        rec.label = static_cast<SignalClass>(label);
        rec.snr_db = detail::get_le<std::int16_t>(bytes, pos);
    }
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("dataset: cannot open for writing: " + path);
    const std::string bytes = serialize_dataset(ds);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("dataset: write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dataset: cannot open: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_dataset(bytes);
}

}  // namespace dicnn
