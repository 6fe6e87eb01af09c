#include "pixelarm/evalgen.hpp"

#include <fstream>

#include "pixelarm/transformer.hpp"

namespace pixelarm {

FrequencyLexicon load_lexicon_file(const std::string& path,
                                   const std::string& language,
                                   std::size_t max_words) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon: " + path);
    FrequencyLexicon lex;
    lex.language = language;
    std::string line;
    while (lex.words.size() < max_words && std::getline(in, line)) {
        std::string w = trim(line);
        if (!w.empty()) lex.words.insert(std::move(w));
    }
    return lex;
}

std::string normalize_word(std::string_view word) {
    std::string w = to_lower_ascii(word);
    const std::string punct = ".,!?;:'\"()[]";
    while (!w.empty() && punct.find(w.back()) != std::string::npos)
        w.pop_back();
    return w;
}

Readability readability(const std::string& text,
                        const std::vector<FrequencyLexicon>& lexicons) {
    Readability out;
    if (lexicons.empty()) return out;
    for (const std::string& raw : split_ws(text)) {
        const std::string w = normalize_word(raw);
        if (w.empty()) continue;
        if (lexicons.front().contains(w)) out.single = true;
        for (const FrequencyLexicon& lex : lexicons) {
            if (lex.contains(w)) {
                out.multi = true;
                break;
            }
        }
        if (out.single && out.multi) break;
    }
    return out;
}

std::vector<ClozeItem> load_cloze_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open cloze dataset: " + path);
    std::vector<ClozeItem> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected context<TAB>target");
        items.push_back({line.substr(0, tab), trim(line.substr(tab + 1))});
    }
    return items;
}

namespace {

// softmax cross-entropy loss and dlogits for one row
double softmax_ce(const Vec<float>& logits, int label, Vec<float>& dlogits) {
    const float mx = logits.maxCoeff();
    Vec<float> e = (logits.array() - mx).exp();
    const float denom = e.sum();
    dlogits = e / denom;
    const double loss = -std::log(static_cast<double>(dlogits[label]));
    dlogits[label] -= 1.0f;
    return loss;
}

}  // namespace

HeadTrainResult train_softmax_head(const Mat<float>& embeddings,
                                   const std::vector<int>& labels,
                                   int n_classes, double lr, long steps) {
    if (embeddings.rows() != static_cast<long>(labels.size()))
        throw DataError("train_softmax_head: label count mismatch");
    const long n = embeddings.rows();
    const long d = embeddings.cols();
    HeadTrainResult res;
    res.head.w = Mat<float>::Zero(n_classes, d);
    res.head.b = Vec<float>::Zero(n_classes);

    for (long s = 0; s < steps; ++s) {
        Mat<float> dw = Mat<float>::Zero(n_classes, d);
        Vec<float> db = Vec<float>::Zero(n_classes);
        double loss = 0.0;
        for (long i = 0; i < n; ++i) {
            const Vec<float> emb = embeddings.row(i).transpose();
            Vec<float> logits = res.head.w * emb + res.head.b;
            Vec<float> dl;
            loss += softmax_ce(logits, labels[static_cast<std::size_t>(i)], dl);
            dw += dl * emb.transpose();
            db += dl;
        }
        const float scale = static_cast<float>(lr) / static_cast<float>(n);
        res.head.w -= scale * dw;
        res.head.b -= scale * db;
        res.final_loss = loss / static_cast<double>(n);
    }

    long correct = 0;
    for (long i = 0; i < n; ++i) {
        const Vec<float> emb = embeddings.row(i).transpose();
        if (head_argmax(res.head, emb) == labels[static_cast<std::size_t>(i)])
            ++correct;
    }
    res.train_accuracy = n > 0 ? static_cast<double>(correct) / n : 0.0;
    return res;
}

int head_argmax(const ClassifierHead& head, const Vec<float>& embedding) {
    Vec<float> logits = head.w * embedding + head.b;
    long best = 0;
    logits.maxCoeff(&best);
    return static_cast<int>(best);
}

FinetuneResult finetune_classify(Checkpoint& model,
                                 const std::vector<ClassifyPair>& pairs,
                                 int n_classes, const GlyphAtlas& atlas,
                                 const FinetuneOptions& opt) {
    if (pairs.empty()) throw DataError("finetune_classify: no pairs");
    const ModelConfig& cfg = model.config;
    FinetuneResult res;

    std::vector<std::vector<PatchGrid>> inputs;
    inputs.reserve(pairs.size());
    for (const ClassifyPair& p : pairs)
        inputs.push_back(
            classification_input(p, atlas, cfg, &res.truncations));

    if (opt.freeze_backbone) {
        Mat<float> embs(static_cast<long>(pairs.size()), cfg.hidden);
        for (std::size_t i = 0; i < inputs.size(); ++i)
            embs.row(static_cast<long>(i)) =
                classification_embedding(model.params, cfg, inputs[i])
                    .transpose();
        std::vector<int> labels;
        for (const ClassifyPair& p : pairs) labels.push_back(p.label);
        HeadTrainResult ht = train_softmax_head(embs, labels, n_classes,
                                                opt.head_lr, opt.steps);
        res.head = std::move(ht.head);
        res.final_loss = ht.final_loss;
        res.train_accuracy = ht.train_accuracy;
        return res;
    }

    // Full fine-tuning: AdamW on the backbone (constant lr), plain gradient
    // descent on the zero-initialized head.
    res.head.w = Mat<float>::Zero(n_classes, cfg.hidden);
    res.head.b = Vec<float>::Zero(n_classes);
    TrainConfig tc;  // optimizer constants only (betas, decay, clip, eps)
    tc.seed = opt.seed;
    AdamState<float> state;
    state.ensure(model.params);

    const long n = static_cast<long>(pairs.size());
    for (long s = 0; s < opt.steps; ++s) {
        Parameters<float> grads = zeros_like(model.params);
        Mat<float> dw = Mat<float>::Zero(n_classes, cfg.hidden);
        Vec<float> db = Vec<float>::Zero(n_classes);
        double loss = 0.0;
        for (long i = 0; i < n; ++i) {
            Mat<float> x = to_input_matrix<float>(
                inputs[static_cast<std::size_t>(i)], cfg);
            ForwardTrace<float> t = forward(model.params, cfg, x);
            const long last = t.hidden.rows() - 1;
            const Vec<float> emb = t.hidden.row(last).transpose();
            Vec<float> logits = res.head.w * emb + res.head.b;
            Vec<float> dl;
            loss += softmax_ce(logits,
                               pairs[static_cast<std::size_t>(i)].label, dl);
            dl /= static_cast<float>(n);
            dw += dl * emb.transpose();
            db += dl;
            // only the final separator position feeds the head
            Mat<float> dhidden = Mat<float>::Zero(t.hidden.rows(), cfg.hidden);
            dhidden.row(last) = (res.head.w.transpose() * dl).transpose();
            // reuse backward() by pushing dhidden through the identity part
            // of the head path: logits grad is zero, hidden grad injected
            backward_from_hidden(model.params, cfg, t, dhidden, grads);
        }
        clip_global_norm(grads, tc.grad_clip);
        adamw_step(model.params, grads, state, opt.lr, tc);
        res.head.w -= static_cast<float>(opt.head_lr) * dw;
        res.head.b -= static_cast<float>(opt.head_lr) * db;
        res.final_loss = loss / static_cast<double>(n);
    }

    long correct = 0;
    for (long i = 0; i < n; ++i) {
        const Vec<float> emb = classification_embedding(
            model.params, cfg, inputs[static_cast<std::size_t>(i)]);
        if (head_argmax(res.head, emb) ==
            pairs[static_cast<std::size_t>(i)].label)
            ++correct;
    }
    res.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return res;
}

}  // namespace pixelarm
