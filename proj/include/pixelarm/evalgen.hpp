#pragma once

#include <optional>
#include <unordered_set>

#include "pixelarm/checkpoint.hpp"
#include "pixelarm/generate.hpp"

namespace pixelarm {

struct FrequencyLexicon {
    std::string language;
    std::unordered_set<std::string> words;  // lowercase, truncated to top-k

    bool contains(const std::string& w) const { return words.count(w) != 0; }
    std::size_t size() const { return words.size(); }
};

constexpr std::size_t kLexiconDefaultTopK = 333000;

// One word per line, pre-lowercased, most frequent first; keeps the top
// max_words entries.
FrequencyLexicon load_lexicon_file(const std::string& path,
                                   const std::string& language,
                                   std::size_t max_words = kLexiconDefaultTopK);

// Lowercases ASCII and strips terminal punctuation; the comparison rule for
// cloze scoring and lexicon lookups.
std::string normalize_word(std::string_view word);

struct Readability {
    bool single = false;
    bool multi = false;
};

// single: any whitespace-delimited word of text is in the prompt-language
// lexicon (the first entry); multi: in the union of all loaded lexicons.
Readability readability(const std::string& text,
                        const std::vector<FrequencyLexicon>& lexicons);

struct ClozeItem {
    std::string context;
    std::string target;
};

// UTF-8, one item per line: context<TAB>target
std::vector<ClozeItem> load_cloze_file(const std::string& path);

struct ClozeOutcome {
    std::string predicted;
    std::string decoded;
    bool correct = false;
    Readability readable;
};

struct ClozeReport {
    double accuracy = 0.0;
    std::size_t items = 0;  // 0 flags an empty item list
    std::vector<ClozeOutcome> outcomes;
};

// An item is correct iff the first whitespace-delimited word of the decoded
// generation equals the target after lowercasing and terminal-punctuation
// stripping. Undecodable (blank) output counts incorrect.
template <class S>
ClozeReport cloze_accuracy(const Parameters<S>& params, const ModelConfig& cfg,
                           const std::vector<ClozeItem>& items,
                           const GlyphAtlas& atlas,
                           const GenerationConfig& gcfg,
                           const std::vector<FrequencyLexicon>& lexicons = {},
                           MissingGlyph missing = MissingGlyph::error) {
    ClozeReport report;
    report.items = items.size();
    if (items.empty()) return report;

    RenderConfig rcfg;
    rcfg.patch_h = cfg.patch_h;
    rcfg.patch_w = cfg.patch_w;
    rcfg.max_patches = cfg.max_positions;
    std::size_t correct = 0;
    for (const ClozeItem& item : items) {
        const PatchSequence prompt =
            render_text(item.context, atlas, rcfg, missing);
        ClozeOutcome outcome;
        if (!prompt.empty() &&
            static_cast<long>(prompt.size()) + gcfg.max_new_patches <=
                cfg.max_positions) {
            const PatchSequence gen =
                generate(params, cfg, prompt, gcfg, &atlas);
            outcome.decoded = decode_to_text(gen, atlas);
            const std::vector<std::string> words = split_ws(outcome.decoded);
            if (!words.empty()) outcome.predicted = normalize_word(words[0]);
            outcome.correct =
                !outcome.predicted.empty() &&
                outcome.predicted == normalize_word(trim(item.target));
            if (!lexicons.empty())
                outcome.readable = readability(outcome.decoded, lexicons);
        }
        correct += outcome.correct;
        report.outcomes.push_back(std::move(outcome));
    }
    report.accuracy =
        static_cast<double>(correct) / static_cast<double>(items.size());
    return report;
}

// --- separator-patch classification fine-tuning ----------------------------

struct ClassifierHead {
    Mat<float> w;  // n_classes x hidden
    Vec<float> b;  // n_classes
};

struct ClassifyPair {
    std::string text_a;
    std::optional<std::string> text_b;
    int label = 0;
};

struct FinetuneOptions {
    long steps = 200;
    double lr = 3e-5;
    double head_lr = 1e-2;
    bool freeze_backbone = false;
    std::uint64_t seed = 42;
};

struct FinetuneResult {
    ClassifierHead head;
    double train_accuracy = 0.0;
    long truncations = 0;
    double final_loss = 0.0;
};

// Input layout: render(a) ++ separator ++ [render(b) ++ separator]; the
// classifier consumes the hidden state at the final separator position.
// Overlong pairs are truncated from text_b's end first, then text_a's.
inline std::vector<PatchGrid> classification_input(const ClassifyPair& pair,
                                                   const GlyphAtlas& atlas,
                                                   const ModelConfig& cfg,
                                                   long* truncations) {
    RenderConfig rcfg;
    rcfg.patch_h = cfg.patch_h;
    rcfg.patch_w = cfg.patch_w;
    rcfg.max_patches = cfg.max_positions;
    rcfg.truncate_policy = TruncatePolicy::truncate;

    const PatchGrid sep = separator_patch(rcfg);
    const long seps = pair.text_b ? 2 : 1;
    const long budget = cfg.max_positions - seps;

    PatchSequence a = render_text(pair.text_a, atlas, rcfg);
    PatchSequence b;
    if (pair.text_b) b = render_text(*pair.text_b, atlas, rcfg);
    long overflow = static_cast<long>(a.size() + b.size()) - budget;
    if (overflow > 0 && truncations) ++*truncations;
    while (overflow > 0 && !b.patches.empty()) {
        b.patches.pop_back();
        --overflow;
    }
    while (overflow > 0 && !a.patches.empty()) {
        a.patches.pop_back();
        --overflow;
    }

    std::vector<PatchGrid> input = a.patches;
    input.push_back(sep);
    if (pair.text_b) {
        input.insert(input.end(), b.patches.begin(), b.patches.end());
        input.push_back(sep);
    }
    return input;
}

// Embedding consumed by the head: hidden state at the final separator (the
// last position).
template <class S>
Vec<S> classification_embedding(const Parameters<S>& params,
                                const ModelConfig& cfg,
                                const std::vector<PatchGrid>& input) {
    Mat<S> x = to_input_matrix<S>(input, cfg);
    ForwardTrace<S> t = forward(params, cfg, x);
    return t.hidden.row(t.hidden.rows() - 1).transpose();
}

// Softmax cross-entropy head training on fixed embeddings (full-batch
// gradient descent, zero-initialized head). Exposed separately so the head
// machinery is testable on synthetic embeddings.
struct HeadTrainResult {
    ClassifierHead head;
    double final_loss = 0.0;
    double train_accuracy = 0.0;
};

HeadTrainResult train_softmax_head(const Mat<float>& embeddings,
                                   const std::vector<int>& labels,
                                   int n_classes, double lr, long steps);

int head_argmax(const ClassifierHead& head, const Vec<float>& embedding);

// Full-model fine-tuning (default) or frozen-backbone head training.
FinetuneResult finetune_classify(Checkpoint& model,
                                 const std::vector<ClassifyPair>& pairs,
                                 int n_classes, const GlyphAtlas& atlas,
                                 const FinetuneOptions& opt);

}  // namespace pixelarm
