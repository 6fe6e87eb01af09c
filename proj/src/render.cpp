#include "pixelarm/render.hpp"

#include <algorithm>
#include <optional>

namespace pixelarm {

namespace {

using Strip = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>;

struct Layout {
    Strip strip;                // patch_h rows x width cols
    std::vector<long> starts;   // pen start per codepoint
    std::vector<long> pen_ends; // pen after each codepoint (advance + gap applied)
    long width = 0;
};

GlyphBitmap box_glyph(const GlyphAtlas& atlas) {
    GlyphBitmap g;
    g.width = std::max(1, atlas.max_advance());
    g.height = atlas.line_height;
    g.advance = g.width;
    g.cells.assign(static_cast<std::size_t>(g.width) * g.height, 1);
    return g;
}

Layout lay_out(const std::vector<char32_t>& cps, const GlyphAtlas& atlas,
               const RenderConfig& cfg, MissingGlyph missing) {
    cfg.validate();
    Layout lay;
    lay.starts.reserve(cps.size());
    lay.pen_ends.reserve(cps.size());

    const int space_adv = atlas.space_advance();
    std::optional<GlyphBitmap> box;

    long pen = 0;
    long paint_end = 0;
    struct Placed {
        const GlyphBitmap* glyph;
        long col;
    };
    std::vector<Placed> placed;
    placed.reserve(cps.size());

    for (char32_t cp : cps) {
        lay.starts.push_back(pen);
        const GlyphBitmap* g = nullptr;
        int advance;
        if (atlas.contains(cp)) {
            g = &atlas.at(cp);
            advance = g->advance;
        } else if (cp == U' ') {
            advance = space_adv;
        } else if (missing == MissingGlyph::box) {
            if (!box) box = box_glyph(atlas);
            g = &*box;
            advance = box->advance;
        } else {
            char buf[64];
            std::snprintf(buf, sizeof buf, "missing glyph for U+%04X",
                          static_cast<unsigned>(cp));
            throw DataError(buf);
        }
        if (g) {
            if (g->height > cfg.patch_h)
                throw DataError("glyph taller than patch height");
            placed.push_back({g, pen});
            paint_end = std::max(paint_end, pen + g->width);
        }
        pen += advance + cfg.inter_glyph_gap;
        lay.pen_ends.push_back(pen);
    }

    lay.width = std::max(pen, paint_end);
    lay.strip.setZero(cfg.patch_h, std::max<long>(lay.width, 0));
    for (const Placed& p : placed) {
        const GlyphBitmap& g = *p.glyph;
        for (int r = 0; r < g.height; ++r)
            for (int c = 0; c < g.width; ++c)
                if (g.at(r, c)) lay.strip(r, p.col + c) = 1;
    }
    return lay;
}

std::vector<PatchGrid> cut_strip(const Strip& strip, const RenderConfig& cfg) {
    std::vector<PatchGrid> patches;
    const long width = strip.cols();
    const long n = (width + cfg.patch_w - 1) / cfg.patch_w;
    patches.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        PatchGrid p = PatchGrid::Zero(cfg.patch_h, cfg.patch_w);
        const long c0 = i * cfg.patch_w;
        const long w = std::min<long>(cfg.patch_w, width - c0);
        p.block(0, 0, cfg.patch_h, w) = strip.block(0, c0, cfg.patch_h, w);
        patches.push_back(std::move(p));
    }
    return patches;
}

// Full (untruncated) render with one span per sentence; sentence_ends are
// codepoint offsets delimiting sentences in cps (for render_text: one end).
PatchSequence render_full(const std::vector<char32_t>& cps,
                          const std::vector<std::size_t>& sentence_ends,
                          const GlyphAtlas& atlas, const RenderConfig& cfg,
                          MissingGlyph missing, std::string_view language) {
    Layout lay = lay_out(cps, atlas, cfg, missing);
    PatchSequence seq;
    seq.language = std::string(language);
    seq.config = cfg;
    seq.patches = cut_strip(lay.strip, cfg);

    std::size_t char_begin = 0;
    std::size_t patch_begin = 0;
    for (std::size_t end : sentence_ends) {
        const long pen_end = end == 0 ? 0 : lay.pen_ends[end - 1];
        std::size_t patch_end =
            std::min(seq.patches.size(),
                     static_cast<std::size_t>((pen_end + cfg.patch_w - 1) /
                                              cfg.patch_w));
        patch_end = std::max(patch_end, patch_begin);
        // the next sentence's span starts one codepoint past the joining space
        std::size_t char_end = end < cps.size() ? end + 1 : end;
        seq.spans.push_back({patch_begin, patch_end, char_begin, char_end});
        patch_begin = patch_end;
        char_begin = char_end;
    }
    if (!seq.spans.empty()) seq.spans.back().patch_end = seq.patches.size();
    return seq;
}

// Keeps patches [begin, end). A span stays with the slice holding its first
// patch (so character totals sum exactly across consecutive windows); patch
// ranges are clipped and rebased, char offsets stay absolute into the joined
// source text.
PatchSequence slice_sequence(const PatchSequence& full, std::size_t begin,
                             std::size_t end) {
    PatchSequence out;
    out.language = full.language;
    out.config = full.config;
    out.patches.assign(full.patches.begin() + static_cast<long>(begin),
                       full.patches.begin() + static_cast<long>(end));
    for (const SpanEntry& s : full.spans) {
        if (s.patch_begin < begin || s.patch_begin >= end) continue;
        const std::size_t pe = std::min(s.patch_end, end);
        out.spans.push_back(
            {s.patch_begin - begin, pe - begin, s.char_begin, s.char_end});
    }
    return out;
}

}  // namespace

PatchSequence render_text(std::string_view text, const GlyphAtlas& atlas,
                          const RenderConfig& cfg, MissingGlyph missing,
                          std::string_view language) {
    std::vector<char32_t> cps = utf8_decode(text);
    std::vector<std::size_t> ends;
    if (!cps.empty()) ends.push_back(cps.size());
    PatchSequence seq = render_full(cps, ends, atlas, cfg, missing, language);
    if (seq.patches.size() > static_cast<std::size_t>(cfg.max_patches)) {
        if (cfg.truncate_policy == TruncatePolicy::error)
            throw DataError("rendered strip exceeds max_patches (" +
                            std::to_string(seq.patches.size()) + " > " +
                            std::to_string(cfg.max_patches) + ")");
        seq = slice_sequence(seq, 0, static_cast<std::size_t>(cfg.max_patches));
    }
    return seq;
}

PatchGrid separator_patch(const RenderConfig& cfg) {
    cfg.validate();
    return PatchGrid::Ones(cfg.patch_h, cfg.patch_w);
}

namespace {

PatchSequence render_joined(const std::vector<std::string>& sentences,
                            std::string_view language, const GlyphAtlas& atlas,
                            const RenderConfig& cfg, MissingGlyph missing) {
    std::vector<char32_t> cps;
    std::vector<std::size_t> ends;
    bool first = true;
    for (const std::string& s : sentences) {
        if (s.empty()) continue;
        if (!first) cps.push_back(U' ');
        std::vector<char32_t> sc = utf8_decode(s);
        cps.insert(cps.end(), sc.begin(), sc.end());
        ends.push_back(cps.size());
        first = false;
    }
    return render_full(cps, ends, atlas, cfg, missing, language);
}

}  // namespace

PackResult pack_dense(const std::vector<std::string>& sentences,
                      std::string_view language, const GlyphAtlas& atlas,
                      const RenderConfig& cfg) {
    PatchSequence full =
        render_joined(sentences, language, atlas, cfg, MissingGlyph::error);
    PackResult out;
    const std::size_t cut =
        std::min(full.patches.size(), static_cast<std::size_t>(cfg.max_patches));
    out.sequence = slice_sequence(full, 0, cut);
    out.remainder = slice_sequence(full, cut, full.patches.size());
    return out;
}

std::vector<PatchSequence> pack_corpus(const std::vector<std::string>& sentences,
                                       std::string_view language,
                                       const GlyphAtlas& atlas,
                                       const RenderConfig& cfg,
                                       MissingGlyph missing) {
    PatchSequence full = render_joined(sentences, language, atlas, cfg, missing);
    std::vector<PatchSequence> out;
    const std::size_t window = static_cast<std::size_t>(cfg.max_patches);
    for (std::size_t b = 0; b < full.patches.size(); b += window)
        out.push_back(
            slice_sequence(full, b, std::min(b + window, full.patches.size())));
    return out;
}

namespace {

struct Candidate {
    char32_t codepoint;
    int width;    // scoring window columns
    int advance;  // pen advance after a match
    const GlyphBitmap* glyph;  // null for the blank space pseudo-candidate
};

// Hamming distance between the strip window starting at col and the
// candidate template (blank below glyph height and beyond strip end).
long window_distance(const Strip& strip, long col, const Candidate& cand) {
    long dist = 0;
    const long rows = strip.rows();
    const long cols = strip.cols();
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cand.width; ++c) {
            const std::uint8_t observed =
                (col + c < cols) ? strip(r, col + c) : 0;
            std::uint8_t expected = 0;
            if (cand.glyph && r < cand.glyph->height && c < cand.glyph->width)
                expected = cand.glyph->at(static_cast<int>(r),
                                          static_cast<int>(c));
            dist += observed != expected;
        }
    }
    return dist;
}

void decode_strip(const Strip& strip, const GlyphAtlas& atlas,
                  const RenderConfig& cfg, long col_offset, DecodeResult& out) {
    std::vector<Candidate> cands;
    cands.reserve(atlas.glyphs.size() + 1);
    for (const auto& [cp, g] : atlas.glyphs) {
        // zero-width glyphs score over their advance so an empty template
        // cannot win every window
        const int w = g.width > 0 ? g.width : g.advance;
        cands.push_back({cp, w, g.advance, g.width > 0 ? &g : nullptr});
    }
    if (!atlas.contains(U' ')) {
        const int adv = atlas.space_advance();
        Candidate space{U' ', adv, adv, nullptr};
        auto it = std::lower_bound(cands.begin(), cands.end(), space,
                                   [](const Candidate& a, const Candidate& b) {
                                       return a.codepoint < b.codepoint;
                                   });
        cands.insert(it, space);
    }
    if (cands.empty()) return;

    const long width = strip.cols();
    long pen = 0;
    while (pen < width) {
        bool rest_blank = true;
        for (long c = pen; c < width && rest_blank; ++c)
            if ((strip.col(c).array() != 0).any()) rest_blank = false;
        if (rest_blank) break;

        const Candidate* best = nullptr;
        long best_dist = 0;
        for (const Candidate& cand : cands) {
            const long d = window_distance(strip, pen, cand);
            if (!best || d < best_dist ||
                (d == best_dist && cand.codepoint < best->codepoint)) {
                best = &cand;
                best_dist = d;
            }
        }
        const double area =
            static_cast<double>(strip.rows()) * std::max(best->width, 1);
        utf8_append(out.text, best->codepoint);
        out.matches.push_back(
            {best->codepoint, 1.0 - static_cast<double>(best_dist) / area,
             col_offset + pen});
        pen += best->advance + cfg.inter_glyph_gap;
    }
}

}  // namespace

DecodeResult decode_patches(const PatchSequence& seq, const GlyphAtlas& atlas) {
    DecodeResult out;
    if (seq.patches.empty()) return out;
    const RenderConfig& cfg = seq.config;
    const long H = seq.patches.front().rows();
    const long W = seq.patches.front().cols();

    std::size_t i = 0;
    while (i < seq.patches.size()) {
        if ((seq.patches[i].array() == 1).all()) {
            utf8_append(out.text, kSeparatorMarker);
            out.matches.push_back(
                {kSeparatorMarker, 1.0, static_cast<long>(i) * W});
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < seq.patches.size() && !(seq.patches[j].array() == 1).all())
            ++j;
        Strip strip(H, static_cast<long>(j - i) * W);
        for (std::size_t k = i; k < j; ++k)
            strip.block(0, static_cast<long>(k - i) * W, H, W) = seq.patches[k];
        decode_strip(strip, atlas, cfg, static_cast<long>(i) * W, out);
        i = j;
    }
    return out;
}

std::string ascii_art(const std::vector<PatchGrid>& patches) {
    if (patches.empty()) return "";
    std::string out;
    const long H = patches.front().rows();
    for (long r = 0; r < H; ++r) {
        for (const PatchGrid& p : patches)
            for (long c = 0; c < p.cols(); ++c)
                out.push_back(p(r, c) ? '#' : '.');
        out.push_back('\n');
    }
    return out;
}

}  // namespace pixelarm
