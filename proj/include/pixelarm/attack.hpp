#pragma once

#include <map>

#include "pixelarm/evalgen.hpp"

namespace pixelarm {

struct ConfusableMap {
    // base codepoint -> ordered replacement candidates (never the base itself)
    std::map<char32_t, std::vector<char32_t>> entries;

    bool covers(char32_t cp) const {
        auto it = entries.find(cp);
        return it != entries.end() && !it->second.empty();
    }
};

// Text format, one base per line: U+XXXX -> U+YYYY[,U+ZZZZ...]
ConfusableMap load_confusables(std::istream& in);
ConfusableMap load_confusables_file(const std::string& path);

struct AttackConfig {
    double ratio = 0.0;  // in [0, 1]
    std::uint64_t seed = 0;
    // eligibility predicate: letters_only

    void validate() const {
        if (!(ratio >= 0.0 && ratio <= 1.0))
            throw ConfigError("attack ratio must lie in [0, 1]");
    }
};

// Unicode letter predicate over the repertoire this artifact renders (Latin,
// Latin-1/Extended, Greek, Cyrillic, Armenian).
bool is_letter(char32_t cp);

// Replaces exactly round(ratio * |letter positions|) letters, drawn uniformly
// without replacement, each by a uniformly chosen confusable; drawn positions
// without a map entry are skipped and drawing continues. Output codepoint
// count always equals the input's. Errors when letters exist but none is
// covered by the map.
std::string attack(const std::string& text, const ConfusableMap& map,
                   const AttackConfig& cfg);

struct SweepRow {
    double ratio = 0.0;
    double accuracy = 0.0;
    std::size_t items = 0;
    double readable_ratio = 0.0;  // single-lexicon readability fraction
};

// For each ratio (ascending): attack every context with a per-item seed
// (ratio_base XOR item_index), re-render permissively, and score cloze
// accuracy. Deterministic for equal base seeds.
template <class S>
std::vector<SweepRow> sweep(const Parameters<S>& params,
                            const ModelConfig& cfg,
                            const std::vector<ClozeItem>& items,
                            const ConfusableMap& map,
                            const std::vector<double>& ratios,
                            const GlyphAtlas& atlas,
                            const GenerationConfig& gcfg,
                            const std::vector<FrequencyLexicon>& lexicons,
                            std::uint64_t base_seed) {
    for (std::size_t i = 1; i < ratios.size(); ++i)
        if (ratios[i] < ratios[i - 1])
            throw ConfigError("sweep ratios must be sorted ascending");

    std::vector<SweepRow> table;
    for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
        const std::uint64_t ratio_base = mix_seed(base_seed, ri);
        std::vector<ClozeItem> attacked;
        attacked.reserve(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            AttackConfig acfg;
            acfg.ratio = ratios[ri];
            acfg.seed = ratio_base ^ static_cast<std::uint64_t>(i);
            attacked.push_back(
                {attack(items[i].context, map, acfg), items[i].target});
        }
        const ClozeReport report =
            cloze_accuracy(params, cfg, attacked, atlas, gcfg, lexicons,
                           MissingGlyph::box);
        SweepRow row;
        row.ratio = ratios[ri];
        row.accuracy = report.accuracy;
        row.items = report.items;
        if (!report.outcomes.empty()) {
            std::size_t readable = 0;
            for (const ClozeOutcome& o : report.outcomes)
                readable += o.readable.single;
            row.readable_ratio = static_cast<double>(readable) /
                                 static_cast<double>(report.outcomes.size());
        }
        table.push_back(row);
    }
    return table;
}

}  // namespace pixelarm
