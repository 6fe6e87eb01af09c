#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "pixelarm/common.hpp"

namespace pixelarm {

struct GlyphBitmap {
    int width = 0;
    int height = 0;
    int advance = 0;
    // row-major cells, height*width entries, each 0 or 1
    std::vector<std::uint8_t> cells;

    std::uint8_t at(int row, int col) const {
        return cells[static_cast<std::size_t>(row) * width + col];
    }
    long ink() const {
        long n = 0;
        for (std::uint8_t c : cells) n += c;
        return n;
    }
};

struct GlyphAtlas {
    std::string name;
    int line_height = 0;
    std::map<char32_t, GlyphBitmap> glyphs;

    bool contains(char32_t cp) const { return glyphs.count(cp) != 0; }
    const GlyphBitmap& at(char32_t cp) const;

    // widest advance over all glyphs; 0 for an empty atlas
    int max_advance() const;
    // blank advance used for the space character when the atlas does not
    // define U+0020: ceil(max_advance / 2), at least 1
    int space_advance() const;
};

// Atlas text format:
//   ATLAS v1 <name> <line_height>
//   GLYPH U+XXXX <width> <height> <advance>
//   <height> rows of <width> characters from {., #}
GlyphAtlas load_atlas(std::istream& in);
GlyphAtlas load_atlas_file(const std::string& path);

// Inverse of load_atlas; used by fixture generators and round-trip tests.
std::string atlas_to_text(const GlyphAtlas& atlas);

}  // namespace pixelarm
