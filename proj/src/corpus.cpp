#include "pixelarm/corpus.hpp"

#include <filesystem>
#include <fstream>

namespace pixelarm {

namespace {

struct Block {
    char32_t lo, hi;
};

// Unicode blocks of right-to-left scripts filtered from the corpus. A
// documented superset of "Arabic ... and supplements, Hebrew": Syriac,
// Thaana and N'Ko flow right-to-left as well.
constexpr Block kRtlBlocks[] = {
    {0x0590, 0x05FF},  // Hebrew
    {0x0600, 0x06FF},  // Arabic
    {0x0700, 0x074F},  // Syriac
    {0x0750, 0x077F},  // Arabic Supplement
    {0x0780, 0x07BF},  // Thaana
    {0x07C0, 0x07FF},  // NKo
    {0x0860, 0x086F},  // Syriac Supplement
    {0x0870, 0x089F},  // Arabic Extended-B
    {0x08A0, 0x08FF},  // Arabic Extended-A
    {0xFB1D, 0xFB4F},  // Hebrew Presentation Forms
    {0xFB50, 0xFDFF},  // Arabic Presentation Forms-A
    {0xFE70, 0xFEFF},  // Arabic Presentation Forms-B
    {0x10E60, 0x10E7F},  // Rumi Numeral Symbols
    {0x1EC70, 0x1ECBF},  // Indic Siyaq Numbers
    {0x1EE00, 0x1EEFF},  // Arabic Mathematical Alphabetic Symbols
};

}  // namespace

bool is_rtl_codepoint(char32_t cp) {
    for (const Block& b : kRtlBlocks)
        if (cp >= b.lo && cp <= b.hi) return true;
    return false;
}

FilterDecision filter_rtl(const CorpusSample& sample) {
    for (char32_t cp : utf8_decode(sample.text))
        if (is_rtl_codepoint(cp)) return FilterDecision::discard;
    return FilterDecision::keep;
}

std::vector<CorpusSample> interleave(const std::vector<LanguageStream>& streams,
                                     std::uint64_t seed) {
    (void)seed;
    bool any = false;
    for (const LanguageStream& s : streams) any = any || !s.samples.empty();
    if (!any) throw DataError("interleave: all streams empty");

    std::vector<CorpusSample> out;
    std::vector<std::size_t> next(streams.size(), 0);
    bool emitted = true;
    while (emitted) {
        emitted = false;
        for (std::size_t i = 0; i < streams.size(); ++i) {
            if (next[i] < streams[i].samples.size()) {
                out.push_back(streams[i].samples[next[i]++]);
                emitted = true;
            }
        }
    }
    return out;
}

std::vector<CorpusSample> load_corpus_file(const std::string& path,
                                           const std::string& fallback_language) {
    std::string language = fallback_language;
    {
        std::ifstream side(path + ".lang");
        if (side) {
            std::string tag;
            std::getline(side, tag);
            tag = trim(tag);
            if (!tag.empty()) language = tag;
        }
    }
    if (language.empty())
        throw ConfigError("no language tag for corpus " + path +
                          " (no sidecar " + path + ".lang and no --language)");

    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus: " + path);
    std::vector<CorpusSample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line)
            if (c == '\t' || c == '\r') c = ' ';
        std::string text = trim(line);
        if (text.empty()) continue;
        out.push_back({std::move(text), language,
                       std::filesystem::path(path).filename().string() + ":" +
                           std::to_string(lineno)});
    }
    return out;
}

}  // namespace pixelarm
