#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicnn/models.hpp"

namespace dicnn {

// Model checkpoint format, all fields little-endian:
//   8 bytes  magic "DICNMODL"
//   u16      format version (currently 1)
//   u32      config length, then JSON config text
//   u32      entry count; per entry u16 name length + name, u8 rank,
//            u32 dims..., in payload order
//   payload  all arrays as f32, concatenated in entry order
inline constexpr char kCheckpointMagic[8] = {'D', 'I', 'C', 'N', 'M', 'O', 'D', 'L'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointData {
    nlohmann::json config;
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<float>>> arrays;
};

namespace detail {

template <typename T>
void ck_put(std::string& out, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.append(b, sizeof(T));
}

template <typename T>
T ck_get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("checkpoint: truncated payload");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace detail

inline nlohmann::json model_config_json(const InvariantModelConfig& c) {
    nlohmann::json j;
    j["type"] = "invariant";
    j["pad"] = c.pad;
    j["stride"] = c.stride;
    j["conv_pad"] = to_string(c.conv_pad);
    j["frame_len"] = c.frame_len;
    j["classes"] = c.classes;
    j["conv_channels"] = {c.conv_channels[0], c.conv_channels[1], c.conv_channels[2]};
    return j;
}

inline nlohmann::json model_config_json(const VanillaModelConfig& c) {
    nlohmann::json j;
    j["type"] = "vanilla";
    j["frame_len"] = c.frame_len;
    j["classes"] = c.classes;
    j["conv_channels"] = {c.conv_channels[0], c.conv_channels[1], c.conv_channels[2]};
    j["pool"] = c.pool;
    j["dropout"] = c.dropout;
    return j;
}

inline InvariantModelConfig invariant_config_from_json(const nlohmann::json& j) {
    if (j.at("type").get<std::string>() != "invariant")
        throw std::runtime_error("checkpoint: model type mismatch (expected invariant)");
    InvariantModelConfig c;
    c.pad = j.at("pad").get<int>();
    c.stride = j.at("stride").get<int>();
    c.conv_pad = conv_pad_mode_from_string(j.at("conv_pad").get<std::string>());
    c.frame_len = j.at("frame_len").get<int>();
    c.classes = j.at("classes").get<int>();
    const auto ch = j.at("conv_channels").get<std::vector<int>>();
    if (ch.size() != 3) throw std::runtime_error("checkpoint: bad conv_channels");
    c.conv_channels = {ch[0], ch[1], ch[2]};
    return c;
}

inline VanillaModelConfig vanilla_config_from_json(const nlohmann::json& j) {
    if (j.at("type").get<std::string>() != "vanilla")
        throw std::runtime_error("checkpoint: model type mismatch (expected vanilla)");
    VanillaModelConfig c;
    c.frame_len = j.at("frame_len").get<int>();
    c.classes = j.at("classes").get<int>();
    const auto ch = j.at("conv_channels").get<std::vector<int>>();
    if (ch.size() != 3) throw std::runtime_error("checkpoint: bad conv_channels");
    c.conv_channels = {ch[0], ch[1], ch[2]};
    c.pool = j.at("pool").get<int>();
    c.dropout = j.at("dropout").get<double>();
    return c;
}

inline std::string serialize_checkpoint(const nlohmann::json& config,
                                        const std::vector<ParamView<float>>& arrays) {
    std::string out;
    out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::ck_put<std::uint16_t>(out, kCheckpointVersion);
    const std::string cfg = config.dump();
    detail::ck_put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
    out.append(cfg);
    detail::ck_put<std::uint32_t>(out, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        detail::ck_put<std::uint16_t>(out, static_cast<std::uint16_t>(a.name.size()));
        out.append(a.name);
        detail::ck_put<std::uint8_t>(out, static_cast<std::uint8_t>(a.shape.size()));
        for (std::size_t d : a.shape) detail::ck_put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    }
    for (const auto& a : arrays)
        for (std::size_t i = 0; i < a.count(); ++i) detail::ck_put<float>(out, a.data[i]);
    return out;
}

inline CheckpointData deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < sizeof(kCheckpointMagic) + 6 ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    std::size_t pos = sizeof(kCheckpointMagic);
    const auto version = detail::ck_get<std::uint16_t>(bytes, pos);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
    const auto clen = detail::ck_get<std::uint32_t>(bytes, pos);
    if (pos + clen > bytes.size()) throw std::runtime_error("checkpoint: truncated payload");
    CheckpointData data;
    try {
        data.config = nlohmann::json::parse(bytes.substr(pos, clen));
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("checkpoint: corrupt config block");
    }
    pos += clen;
    const auto n = detail::ck_get<std::uint32_t>(bytes, pos);
    std::vector<std::pair<std::string, std::vector<std::size_t>>> index;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto name_len = detail::ck_get<std::uint16_t>(bytes, pos);
        if (pos + name_len > bytes.size()) throw std::runtime_error("checkpoint: truncated payload");
        std::string name = bytes.substr(pos, name_len);
        pos += name_len;
        const auto rank = detail::ck_get<std::uint8_t>(bytes, pos);
        std::vector<std::size_t> shape;
        for (std::uint8_t d = 0; d < rank; ++d)
            shape.push_back(detail::ck_get<std::uint32_t>(bytes, pos));
        index.emplace_back(std::move(name), std::move(shape));
    }
    for (auto& [name, shape] : index) {
        std::size_t count = 1;
        for (std::size_t d : shape) count *= d;
        std::vector<float> values(count);
        for (std::size_t i = 0; i < count; ++i) values[i] = detail::ck_get<float>(bytes, pos);
        data.order.push_back(name);
        data.arrays[name] = {shape, std::move(values)};
    }
    if (pos != bytes.size()) throw std::runtime_error("checkpoint: trailing bytes");
    return data;
}

namespace detail {

template <typename Model>
std::vector<ParamView<float>> all_arrays(Model& m) {
    std::vector<ParamView<float>> arrays = m.params();
    for (auto& b : m.buffers()) arrays.push_back(b);
    return arrays;
}

}  // namespace detail

/// Copy checkpoint arrays into a constructed model, validating the index
/// against the model's expected names and shapes.
template <typename Model>
void load_checkpoint_data(Model& m, const CheckpointData& data) {
    const auto arrays = detail::all_arrays(m);
    if (arrays.size() != data.arrays.size())
        throw std::runtime_error("checkpoint: parameter index size mismatch");
    for (const auto& view : arrays) {
        const auto it = data.arrays.find(view.name);
        if (it == data.arrays.end())
            throw std::runtime_error("checkpoint: missing parameter " + view.name);
        if (it->second.first != view.shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + view.name);
        std::copy(it->second.second.begin(), it->second.second.end(), view.data);
    }
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

inline void save_checkpoint(InvariantModel<float>& m, const std::string& path,
                            const nlohmann::json& extra = {}) {
    nlohmann::json cfg = model_config_json(m.cfg);
    if (!extra.is_null() && !extra.empty()) cfg["meta"] = extra;
    write_file(path, serialize_checkpoint(cfg, detail::all_arrays(m)));
}

inline void save_checkpoint(VanillaModel<float>& m, const std::string& path,
                            const nlohmann::json& extra = {}) {
    nlohmann::json cfg = model_config_json(m.cfg);
    if (!extra.is_null() && !extra.empty()) cfg["meta"] = extra;
    write_file(path, serialize_checkpoint(cfg, detail::all_arrays(m)));
}

inline InvariantModel<float> load_invariant_checkpoint(const std::string& path) {
    const CheckpointData data = deserialize_checkpoint(read_file(path));
    InvariantModel<float> m(invariant_config_from_json(data.config));
    load_checkpoint_data(m, data);
    return m;
}

inline VanillaModel<float> load_vanilla_checkpoint(const std::string& path) {
    const CheckpointData data = deserialize_checkpoint(read_file(path));
    VanillaModel<float> m(vanilla_config_from_json(data.config));
    load_checkpoint_data(m, data);
    return m;
}

inline std::string checkpoint_model_type(const std::string& path) {
    const CheckpointData data = deserialize_checkpoint(read_file(path));
    return data.config.at("type").get<std::string>();
}

}  // namespace dicnn
