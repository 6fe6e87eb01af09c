#pragma once

#include "pixelarm/render.hpp"
#include "pixelarm/transformer.hpp"

namespace pixelarm {

enum class StopRule { word_boundary, patch_budget };

struct GenerationConfig {
    int max_new_patches = 8;
    StopRule stop_rule = StopRule::word_boundary;
    // feedback is always the binarized patch
    double temperature = 1.0;
    double threshold = 0.5;

    void validate() const {
        if (max_new_patches < 1)
            throw ConfigError("max_new_patches must be >= 1");
        if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
        if (!(threshold > 0.0 && threshold < 1.0))
            throw ConfigError("threshold must lie in (0, 1)");
    }
};

// Greedy autoregressive decoding: each step takes the first of the L
// predicted patches at the last position, binarizes it, and feeds the bits
// back as context. Returns the new patches only. With
// StopRule::word_boundary the loop stops once the decoded continuation
// contains whitespace after at least one non-blank glyph (atlas required).
template <class S>
PatchSequence generate(const Parameters<S>& params, const ModelConfig& cfg,
                       const PatchSequence& prompt,
                       const GenerationConfig& gcfg,
                       const GlyphAtlas* atlas = nullptr) {
    gcfg.validate();
    if (prompt.empty()) throw DataError("generate: prompt must be nonempty");
    if (params.head_kind != HeadKind::pixel)
        throw ConfigError("generate requires a pixel-head model");
    const long total =
        static_cast<long>(prompt.size()) + gcfg.max_new_patches;
    if (total > cfg.max_positions)
        throw DataError("generate: prompt + max_new_patches exceeds "
                        "max_positions");
    if (gcfg.stop_rule == StopRule::word_boundary && !atlas)
        throw ConfigError("word_boundary stop rule needs an atlas");

    const int pd = cfg.patch_dim();
    const S inv_temp = static_cast<S>(1.0 / gcfg.temperature);
    const S theta = static_cast<S>(gcfg.threshold);

    Mat<S> x(total, pd);
    x.topRows(static_cast<long>(prompt.size())) =
        to_input_matrix<S>(prompt.patches, cfg);

    PatchSequence out;
    out.language = prompt.language;
    out.config = prompt.config;
    for (int n = 0; n < gcfg.max_new_patches; ++n) {
        const long ctx = static_cast<long>(prompt.size()) + n;
        const Mat<S> ctx_x = x.topRows(ctx);
        ForwardTrace<S> t = forward(params, cfg, ctx_x);
        PatchGrid patch(cfg.patch_h, cfg.patch_w);
        for (int k = 0; k < pd; ++k) {
            const S p = sigmoid(t.logits(ctx - 1, k) * inv_temp);
            const std::uint8_t bit = p > theta ? 1 : 0;
            patch(k / cfg.patch_w, k % cfg.patch_w) = bit;
            x(ctx, k) = static_cast<S>(bit);
        }
        out.patches.push_back(std::move(patch));

        if (gcfg.stop_rule == StopRule::word_boundary) {
            const std::string text = decode_to_text(out, *atlas);
            bool seen_glyph = false;
            bool boundary = false;
            for (char32_t cp : utf8_decode(text)) {
                if (cp == U' ') {
                    if (seen_glyph) {
                        boundary = true;
                        break;
                    }
                } else {
                    seen_glyph = true;
                }
            }
            if (boundary) break;
        }
    }
    return out;
}

}  // namespace pixelarm
