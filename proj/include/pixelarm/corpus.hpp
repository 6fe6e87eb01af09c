#pragma once

#include <string>
#include <vector>

#include "pixelarm/common.hpp"

namespace pixelarm {

struct CorpusSample {
    std::string text;      // nonempty after whitespace trim
    std::string language;  // BCP-47-style tag
    std::string source_id;
};

// True iff the codepoint falls in one of the filtered right-to-left script
// blocks (Arabic and its supplements/extensions/presentation forms, Hebrew,
// Syriac, Thaana, N'Ko).
bool is_rtl_codepoint(char32_t cp);

enum class FilterDecision { keep, discard };

// Discards the whole sample if any portion of it is right-to-left.
FilterDecision filter_rtl(const CorpusSample& sample);

// Strict round-robin over the streams in the given order; exhausted streams
// drop out of the rotation. The seed parameter is recorded for provenance
// only: round-robin order is already fully determined.
struct LanguageStream {
    std::string language;
    std::vector<CorpusSample> samples;
};

std::vector<CorpusSample> interleave(const std::vector<LanguageStream>& streams,
                                     std::uint64_t seed);

// One sample per line; blank lines are skipped; interior control whitespace
// (tab, CR) is normalized to a single space. The language comes from a
// `<path>.lang` sidecar when present, otherwise from fallback_language.
std::vector<CorpusSample> load_corpus_file(const std::string& path,
                                           const std::string& fallback_language);

}  // namespace pixelarm
