#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pixelarm/glyph.hpp"
#include "pixelarm/patch.hpp"

namespace pixelarm {

// Emitted by decode_patches for each all-ink separator patch.
constexpr char32_t kSeparatorMarker = 0x1E;

enum class MissingGlyph {
    error,  // throw DataError
    box     // render an all-ink line_height x max_advance block
};

// Lays glyphs left-to-right on a strip of height patch_h (top-aligned,
// padded below), pen advancing by glyph advance + inter_glyph_gap, then cuts
// the strip into width-patch_w patches. U+0020 without an atlas entry is a
// blank advance of atlas.space_advance().
PatchSequence render_text(std::string_view text, const GlyphAtlas& atlas,
                          const RenderConfig& cfg,
                          MissingGlyph missing = MissingGlyph::error,
                          std::string_view language = "");

// All-ink patch. Delimits sentence pairs in classification inputs and decodes
// to kSeparatorMarker.
PatchGrid separator_patch(const RenderConfig& cfg);

struct PackResult {
    PatchSequence sequence;   // at most cfg.max_patches patches
    PatchSequence remainder;  // carry-over overflow, possibly empty
};

// Renders the single-space-joined concatenation of sentences as one strip
// (no blank patches between sentences) and splits it at max_patches.
PackResult pack_dense(const std::vector<std::string>& sentences,
                      std::string_view language, const GlyphAtlas& atlas,
                      const RenderConfig& cfg);

// pack_dense chained over a whole corpus: consecutive max_patches windows of
// the joined render. The final window may be shorter.
std::vector<PatchSequence> pack_corpus(const std::vector<std::string>& sentences,
                                       std::string_view language,
                                       const GlyphAtlas& atlas,
                                       const RenderConfig& cfg,
                                       MissingGlyph missing = MissingGlyph::error);

struct GlyphMatch {
    char32_t codepoint = 0;
    double confidence = 1.0;  // 1 - hamming / window_area
    long column = 0;          // strip column the match starts at
};

struct DecodeResult {
    std::string text;
    std::vector<GlyphMatch> matches;
};

// Exact template decoding. All-ink patches are segment boundaries emitted as
// kSeparatorMarker; within a segment the decoder walks a pen over the
// reassembled strip, scoring every atlas glyph by Hamming distance over the
// glyph's own window and advancing by the winner's advance + gap. Ties break
// to the lowest codepoint. Never fails: noise decodes to low-confidence
// glyphs. Trailing spaces are not recoverable (their columns are
// indistinguishable from patch padding).
DecodeResult decode_patches(const PatchSequence& seq, const GlyphAtlas& atlas);

inline std::string decode_to_text(const PatchSequence& seq,
                                  const GlyphAtlas& atlas) {
    return decode_patches(seq, atlas).text;
}

// Debug/demo rendering of a patch row as # and . characters.
std::string ascii_art(const std::vector<PatchGrid>& patches);

}  // namespace pixelarm
