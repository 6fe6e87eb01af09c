#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pixelarm/common.hpp"

namespace pixelarm {

// One H x W binary image patch (C is fixed at 1). Row r, column c holds the
// pixel value in {0, 1}; 1 is ink.
using PatchGrid =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline long ink_count(const PatchGrid& p) { return p.cast<long>().sum(); }

inline bool is_binary(const PatchGrid& p) {
    return ((p.array() == 0) || (p.array() == 1)).all();
}

enum class TruncatePolicy { error, truncate };

struct RenderConfig {
    int patch_h = 32;
    int patch_w = 32;
    int channels = 1;
    int max_patches = 360;
    int inter_glyph_gap = 1;
    TruncatePolicy truncate_policy = TruncatePolicy::error;

    void validate() const {
        if (patch_h != 8 && patch_h != 16 && patch_h != 32)
            throw ConfigError("patch_h must be one of 8, 16, 32");
        if (patch_w < 1) throw ConfigError("patch_w must be >= 1");
        if (channels != 1) throw ConfigError("channels is fixed at 1");
        if (max_patches < 1) throw ConfigError("max_patches must be >= 1");
        if (inter_glyph_gap < 0) throw ConfigError("inter_glyph_gap must be >= 0");
    }
};

// Maps a half-open patch index range onto the half-open source character
// (codepoint) range it was rendered from.
struct SpanEntry {
    std::size_t patch_begin = 0;
    std::size_t patch_end = 0;
    std::size_t char_begin = 0;
    std::size_t char_end = 0;
};

struct PatchSequence {
    std::vector<PatchGrid> patches;
    std::string language;  // BCP-47-style tag
    std::vector<SpanEntry> spans;
    RenderConfig config;

    std::size_t size() const { return patches.size(); }
    bool empty() const { return patches.empty(); }
};

}  // namespace pixelarm
