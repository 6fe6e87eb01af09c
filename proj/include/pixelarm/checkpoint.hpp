#pragma once

#include <cstring>
#include <sstream>

#include "pixelarm/model.hpp"
#include "pixelarm/optim.hpp"

namespace pixelarm {

// Checkpoint layout:
//   "PXLM1"
//   u32 little-endian byte length of the config block
//   config block: UTF-8 key=value lines (ModelConfig fields plus head=...)
//   payload: parameters as little-endian float32 in tensor_refs order, each
//            tensor in column-major storage order
//   u64 FNV-1a checksum of the payload
//
// Optimizer sidecar (<path>.optim), enabling loss-identical resume:
//   "PXOP1", u64 step, payload (Adam m then v, same layout), u64 checksum.

struct Checkpoint {
    ModelConfig config;
    Parameters<float> params;
};

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint32_t get_u32le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}
inline std::uint64_t get_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline void put_f32le(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32le(out, bits);
}
inline float get_f32le(const unsigned char* p) {
    std::uint32_t bits = get_u32le(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string model_config_text(const ModelConfig& c, HeadKind head) {
    std::ostringstream out;
    out << "n_layers=" << c.n_layers << '\n'
        << "hidden=" << c.hidden << '\n'
        << "n_heads=" << c.n_heads << '\n'
        << "intermediate=" << c.intermediate << '\n'
        << "patch_h=" << c.patch_h << '\n'
        << "patch_w=" << c.patch_w << '\n'
        << "channels=" << c.channels << '\n'
        << "horizon=" << c.horizon << '\n'
        << "temperature=" << detail::format_double(c.temperature) << '\n'
        << "threshold=" << detail::format_double(c.threshold) << '\n'
        << "max_positions=" << c.max_positions << '\n'
        << "norm_epsilon=" << detail::format_double(c.norm_epsilon) << '\n'
        << "head=" << (head == HeadKind::pixel ? "pixel" : "scalar") << '\n';
    return out.str();
}

// Accepts exactly the keys emitted by model_config_text; unknown keys are an
// error naming the key.
inline ModelConfig parse_model_config(
    const std::map<std::string, std::string>& kv, HeadKind* head = nullptr) {
    ModelConfig c;
    if (head) *head = HeadKind::pixel;
    for (const auto& [key, value] : kv) {
        try {
            if (key == "n_layers") c.n_layers = std::stoi(value);
            else if (key == "hidden") c.hidden = std::stoi(value);
            else if (key == "n_heads") c.n_heads = std::stoi(value);
            else if (key == "intermediate") c.intermediate = std::stoi(value);
            else if (key == "patch_h") c.patch_h = std::stoi(value);
            else if (key == "patch_w") c.patch_w = std::stoi(value);
            else if (key == "channels") c.channels = std::stoi(value);
            else if (key == "horizon") c.horizon = std::stoi(value);
            else if (key == "temperature") c.temperature = std::stod(value);
            else if (key == "threshold") c.threshold = std::stod(value);
            else if (key == "max_positions") c.max_positions = std::stoi(value);
            else if (key == "norm_epsilon") c.norm_epsilon = std::stod(value);
            else if (key == "head") {
                if (value != "pixel" && value != "scalar")
                    throw ConfigError("head must be pixel or scalar");
                if (head)
                    *head = value == "pixel" ? HeadKind::pixel
                                             : HeadKind::scalar;
            } else {
                throw ConfigError("unknown model config key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for model config key '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("bad value for model config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::string out("PXLM1");
    const std::string cfg = model_config_text(ckpt.config, ckpt.params.head_kind);
    detail::put_u32le(out, static_cast<std::uint32_t>(cfg.size()));
    out += cfg;

    std::string payload;
    for (const auto& r : tensor_refs(ckpt.params))
        for (std::size_t k = 0; k < r.size; ++k)
            detail::put_f32le(payload, r.data[k]);
    out += payload;
    detail::put_u64le(out, fnv1a64(payload.data(), payload.size()));
    atomic_write_file(path, out);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    const std::string data = read_file(path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    if (data.size() < 9 || data.compare(0, 5, "PXLM1") != 0)
        throw DataError("bad checkpoint magic in " + path);
    const std::uint32_t cfg_len = detail::get_u32le(p + 5);
    if (data.size() < 9 + cfg_len)
        throw DataError("truncated checkpoint header in " + path);
    HeadKind head = HeadKind::pixel;
    ModelConfig cfg =
        parse_model_config(parse_kv_text(data.substr(9, cfg_len)), &head);

    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.params = allocate_parameters<float>(cfg, head);
    std::size_t pos = 9 + cfg_len;
    std::size_t payload_len = 0;
    for (const auto& r : tensor_refs(ckpt.params)) payload_len += 4 * r.size;
    if (data.size() != pos + payload_len + 8)
        throw DataError("checkpoint size mismatch in " + path);
    const std::uint64_t want = fnv1a64(data.data() + pos, payload_len);
    const std::uint64_t got =
        detail::get_u64le(p + pos + payload_len);
    if (want != got) throw DataError("checkpoint checksum mismatch in " + path);
    for (auto& r : tensor_refs(ckpt.params)) {
        for (std::size_t k = 0; k < r.size; ++k) {
            r.data[k] = detail::get_f32le(p + pos);
            pos += 4;
        }
    }
    return ckpt;
}

inline void save_adam_state(const std::string& path,
                            const AdamState<float>& state) {
    std::string out("PXOP1");
    std::string payload;
    detail::put_u64le(payload, static_cast<std::uint64_t>(state.step));
    for (const auto& t : state.m)
        for (float f : t) detail::put_f32le(payload, f);
    for (const auto& t : state.v)
        for (float f : t) detail::put_f32le(payload, f);
    out += payload;
    detail::put_u64le(out, fnv1a64(payload.data(), payload.size()));
    atomic_write_file(path, out);
}

inline AdamState<float> load_adam_state(const std::string& path,
                                        const Parameters<float>& params) {
    const std::string data = read_file(path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    if (data.size() < 21 || data.compare(0, 5, "PXOP1") != 0)
        throw DataError("bad optimizer-state magic in " + path);
    const std::size_t payload_len = data.size() - 5 - 8;
    const std::uint64_t want = fnv1a64(data.data() + 5, payload_len);
    if (want != detail::get_u64le(p + data.size() - 8))
        throw DataError("optimizer-state checksum mismatch in " + path);

    AdamState<float> state;
    state.ensure(params);
    state.step = static_cast<long>(detail::get_u64le(p + 5));
    std::size_t pos = 13;
    auto read_into = [&](std::vector<std::vector<float>>& dst) {
        for (auto& t : dst) {
            for (float& f : t) {
                if (pos + 4 > data.size() - 8)
                    throw DataError("truncated optimizer state in " + path);
                f = detail::get_f32le(p + pos);
                pos += 4;
            }
        }
    };
    read_into(state.m);
    read_into(state.v);
    if (pos != data.size() - 8)
        throw DataError("optimizer-state size mismatch in " + path);
    return state;
}

}  // namespace pixelarm
