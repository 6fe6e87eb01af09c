#pragma once

#include <sstream>
#include <string>

#include "pixelarm/glyph.hpp"
#include "pixelarm/render.hpp"

#ifndef PIXELARM_FIXTURES_DIR
#define PIXELARM_FIXTURES_DIR "fixtures"
#endif

namespace pixelarm::testing {

inline std::string fixtures_dir() { return PIXELARM_FIXTURES_DIR; }

inline GlyphAtlas ascii_atlas() {
    return load_atlas_file(fixtures_dir() + "/atlas/ascii5x7.atlas");
}

inline GlyphAtlas toy_atlas() {
    return load_atlas_file(fixtures_dir() + "/atlas/toy3x5.atlas");
}

inline GlyphAtlas atlas_from_text(const std::string& text) {
    std::istringstream in(text);
    return load_atlas(in);
}

// 3-glyph fixture used by the hand-computed examples: A is a 5x7 block of
// mostly ink, narrow bar and dot glyphs.
inline GlyphAtlas mini_atlas() {
    return atlas_from_text(
        "ATLAS v1 mini 7\n"
        "GLYPH U+0041 5 7 6\n"
        ".###.\n"
        "#...#\n"
        "#...#\n"
        "#####\n"
        "#...#\n"
        "#...#\n"
        "#...#\n"
        "GLYPH U+0042 5 7 6\n"
        "####.\n"
        "#...#\n"
        "#...#\n"
        "####.\n"
        "#...#\n"
        "#...#\n"
        "####.\n"
        "GLYPH U+002E 5 7 6\n"
        ".....\n"
        ".....\n"
        ".....\n"
        ".....\n"
        ".....\n"
        "..##.\n"
        "..##.\n");
}

inline RenderConfig render_cfg(int hw, int max_patches = 64, int gap = 1) {
    RenderConfig cfg;
    cfg.patch_h = hw;
    cfg.patch_w = hw;
    cfg.max_patches = max_patches;
    cfg.inter_glyph_gap = gap;
    return cfg;
}

}  // namespace pixelarm::testing
