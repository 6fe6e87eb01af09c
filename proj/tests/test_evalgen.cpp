#include <doctest.h>

#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "pixelarm/evalgen.hpp"

using namespace pixelarm;
using namespace pixelarm::testing;

namespace {

ModelConfig toy_model_config(int hw = 8) {
    ModelConfig cfg;
    cfg.n_layers = 2;
    cfg.hidden = 16;
    cfg.n_heads = 2;
    cfg.intermediate = 24;
    cfg.patch_h = hw;
    cfg.patch_w = hw;
    cfg.horizon = 1;
    cfg.max_positions = 64;
    return cfg;
}

// model whose pixel head always votes blank
Parameters<float> blank_model(const ModelConfig& cfg) {
    Parameters<float> p = init_parameters<float>(cfg, 2);
    p.w_head.setZero();
    p.b_head.setConstant(-10.0f);
    return p;
}

std::string write_temp(const std::string& name, const std::string& body) {
    auto path = (std::filesystem::temp_directory_path() / name).string();
    atomic_write_file(path, body);
    return path;
}

}  // namespace

TEST_CASE("generate: blank-biased head emits all-blank patches") {
    ModelConfig cfg = toy_model_config();
    Parameters<float> p = blank_model(cfg);
    GlyphAtlas atlas = toy_atlas();
    PatchSequence prompt = render_text("ab", atlas, render_cfg(8, 16));
    GenerationConfig gcfg;
    gcfg.max_new_patches = 4;
    gcfg.stop_rule = StopRule::patch_budget;
    PatchSequence out = generate(p, cfg, prompt, gcfg);
    CHECK(out.size() == 4);
    for (const PatchGrid& g : out.patches) CHECK(ink_count(g) == 0);
}

TEST_CASE("generate: deterministic and feedback uses the binarized patch") {
    ModelConfig cfg = toy_model_config();
    Parameters<float> p = init_parameters<float>(cfg, 3);
    // push some head weights up so outputs are not all blank
    p.b_head.setConstant(0.05f);
    GlyphAtlas atlas = toy_atlas();
    PatchSequence prompt = render_text("abc", atlas, render_cfg(8, 16));
    GenerationConfig gcfg;
    gcfg.max_new_patches = 3;
    gcfg.stop_rule = StopRule::patch_budget;

    PatchSequence g1 = generate(p, cfg, prompt, gcfg);
    PatchSequence g2 = generate(p, cfg, prompt, gcfg);
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g1.patches[i] == g2.patches[i]);
    for (const PatchGrid& g : g1.patches) CHECK(is_binary(g));

    // context-feedback invariant: step k's patch equals the binarized
    // first-horizon slice of the head at the last context position
    Mat<float> x(static_cast<long>(prompt.size()) + 1, cfg.patch_dim());
    x.topRows(static_cast<long>(prompt.size())) =
        to_input_matrix<float>(prompt.patches, cfg);
    ForwardTrace<float> t =
        forward(p, cfg, x.topRows(static_cast<long>(prompt.size())).eval());
    const long last = static_cast<long>(prompt.size()) - 1;
    PatchGrid expect(cfg.patch_h, cfg.patch_w);
    for (int k = 0; k < cfg.patch_dim(); ++k) {
        const float prob = sigmoid(t.logits(last, k) /
                                   static_cast<float>(gcfg.temperature));
        expect(k / cfg.patch_w, k % cfg.patch_w) =
            prob > gcfg.threshold ? 1 : 0;
    }
    CHECK(g1.patches[0] == expect);
}

TEST_CASE("generate: prompt and budget validation") {
    ModelConfig cfg = toy_model_config();
    cfg.max_positions = 6;
    Parameters<float> p = blank_model(cfg);
    GlyphAtlas atlas = toy_atlas();
    GenerationConfig gcfg;
    gcfg.max_new_patches = 4;
    gcfg.stop_rule = StopRule::patch_budget;
    PatchSequence empty;
    CHECK_THROWS_AS(generate(p, cfg, empty, gcfg), DataError);
    PatchSequence prompt = render_text("abcdef", atlas, render_cfg(8, 16));
    REQUIRE(prompt.size() >= 3);
    CHECK_THROWS_AS(generate(p, cfg, prompt, gcfg), DataError);
}

TEST_CASE("readability: lexicon membership rules") {
    FrequencyLexicon en;
    en.language = "en";
    en.words = {"the", "cat"};
    FrequencyLexicon de;
    de.language = "de";
    de.words = {"und"};

    SUBCASE("single-language hit") {
        Readability r = readability("the zebra", {en, de});
        CHECK(r.single);
        CHECK(r.multi);
    }
    SUBCASE("empty text is unreadable") {
        Readability r = readability("", {en, de});
        CHECK(!r.single);
        CHECK(!r.multi);
    }
    SUBCASE("words outside every lexicon") {
        Readability r = readability("zqxv qqq", {en, de});
        CHECK(!r.single);
        CHECK(!r.multi);
    }
    SUBCASE("union catches other-language words") {
        Readability r = readability("und", {en, de});
        CHECK(!r.single);
        CHECK(r.multi);
    }
    SUBCASE("adding a lexicon never flips multi to false") {
        Readability base = readability("und", {en});
        Readability more = readability("und", {en, de});
        CHECK((!base.multi || more.multi));
        CHECK(more.multi);
    }
    SUBCASE("punctuation and case are normalized") {
        Readability r = readability("The cat.", {en});
        CHECK(r.single);
    }
}

TEST_CASE("lexicon loader truncates to top-k") {
    const std::string path =
        write_temp("pixelarm_lex.txt", "alpha\nbeta\ngamma\ndelta\n");
    FrequencyLexicon lex = load_lexicon_file(path, "en", 2);
    CHECK(lex.size() == 2);
    CHECK(lex.contains("alpha"));
    CHECK(lex.contains("beta"));
    CHECK(!lex.contains("gamma"));
    std::filesystem::remove(path);
}

TEST_CASE("cloze: empty item list flags zero items") {
    ModelConfig cfg = toy_model_config();
    Parameters<float> p = blank_model(cfg);
    GlyphAtlas atlas = toy_atlas();
    GenerationConfig gcfg;
    ClozeReport report = cloze_accuracy(p, cfg, {}, atlas, gcfg);
    CHECK(report.items == 0);
    CHECK(report.accuracy == 0.0);
}

TEST_CASE("cloze: all-blank generations score zero") {
    ModelConfig cfg = toy_model_config();
    Parameters<float> p = blank_model(cfg);
    GlyphAtlas atlas = toy_atlas();
    GenerationConfig gcfg;
    gcfg.max_new_patches = 4;
    std::vector<ClozeItem> items = {{"ab cd", "ef"}, {"gh", "ij"}};
    ClozeReport report = cloze_accuracy(p, cfg, items, atlas, gcfg);
    CHECK(report.items == 2);
    CHECK(report.accuracy == 0.0);
    for (const auto& o : report.outcomes) CHECK(o.predicted.empty());
}

TEST_CASE("cloze: scoring is case and punctuation insensitive, target trimmed") {
    CHECK(normalize_word("Dog!") == "dog");
    CHECK(normalize_word("dog") == normalize_word(trim(" dog \t")));
    CHECK(normalize_word("A.B.") == "a.b");  // only terminal punctuation strips
}

TEST_CASE("cloze file loader parses context<TAB>target") {
    const std::string path = write_temp(
        "pixelarm_cloze.tsv", "the cat sat on the\tmat\nab cd\tef\n");
    auto items = load_cloze_file(path);
    REQUIRE(items.size() == 2);
    CHECK(items[0].context == "the cat sat on the");
    CHECK(items[0].target == "mat");
    std::filesystem::remove(path);

    const std::string bad = write_temp("pixelarm_cloze_bad.tsv", "no tab\n");
    CHECK_THROWS_AS(load_cloze_file(bad), DataError);
    std::filesystem::remove(bad);
}

TEST_CASE("classification input layout and separator position") {
    ModelConfig cfg = toy_model_config();
    GlyphAtlas atlas = toy_atlas();
    long truncations = 0;
    SUBCASE("pair gets two separators") {
        ClassifyPair pair{"ab", std::optional<std::string>("cd"), 1};
        auto input = classification_input(pair, atlas, cfg, &truncations);
        REQUIRE(input.size() >= 4);
        CHECK(ink_count(input.back()) == 64);  // final separator is all ink
        long seps = 0;
        for (const auto& p : input) seps += ink_count(p) == 64;
        CHECK(seps == 2);
        CHECK(truncations == 0);
    }
    SUBCASE("single sentence gets one trailing separator") {
        ClassifyPair pair{"ab", std::nullopt, 0};
        auto input = classification_input(pair, atlas, cfg, &truncations);
        CHECK(ink_count(input.back()) == 64);
        long seps = 0;
        for (const auto& p : input) seps += ink_count(p) == 64;
        CHECK(seps == 1);
    }
    SUBCASE("overflow truncates text_b first and is recorded") {
        ModelConfig small = cfg;
        small.max_positions = 6;
        ClassifyPair pair{"abcdef", std::optional<std::string>("ghijkl"), 0};
        auto input = classification_input(pair, atlas, small, &truncations);
        CHECK(static_cast<int>(input.size()) <= small.max_positions);
        CHECK(truncations == 1);
        CHECK(ink_count(input.back()) == 64);
    }
}

TEST_CASE("head training: zero init predicts uniformly at ln 2") {
    Mat<float> embs(4, 3);
    embs << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1;
    std::vector<int> labels = {0, 1, 0, 1};
    HeadTrainResult res = train_softmax_head(embs, labels, 2, 0.0, 1);
    CHECK(res.final_loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("head training: linearly separable embeddings reach 100%") {
    std::mt19937_64 rng(7);
    const int n = 40;
    Mat<float> embs(n, 4);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        labels.push_back(label);
        for (int d = 0; d < 4; ++d)
            embs(i, d) = static_cast<float>(rng() % 100) / 100.0f +
                         (d == 0 ? (label ? 2.0f : -2.0f) : 0.0f);
    }
    HeadTrainResult res = train_softmax_head(embs, labels, 2, 0.5, 300);
    CHECK(res.train_accuracy == doctest::Approx(1.0));
}

TEST_CASE("head training: label permutation permutes predictions") {
    std::mt19937_64 rng(8);
    const int n = 24;
    Mat<float> embs(n, 5);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
        labels.push_back(static_cast<int>(rng() % 3));
        for (int d = 0; d < 5; ++d)
            embs(i, d) = static_cast<float>(rng() % 1000) / 250.0f - 2.0f;
    }
    std::vector<int> permuted;  // swap classes 0 and 2
    for (int l : labels) permuted.push_back(l == 0 ? 2 : l == 2 ? 0 : l);

    HeadTrainResult a = train_softmax_head(embs, labels, 3, 0.2, 150);
    HeadTrainResult b = train_softmax_head(embs, permuted, 3, 0.2, 150);
    for (int i = 0; i < n; ++i) {
        const Vec<float> e = embs.row(i).transpose();
        const int pa = head_argmax(a.head, e);
        const int pb = head_argmax(b.head, e);
        const int expect = pa == 0 ? 2 : pa == 2 ? 0 : pa;
        CHECK(pb == expect);
    }
}

TEST_CASE("finetune_classify: frozen backbone on separable toy pairs") {
    ModelConfig cfg = toy_model_config();
    Checkpoint model;
    model.config = cfg;
    model.params = init_parameters<float>(cfg, 9);
    GlyphAtlas atlas = toy_atlas();
    // visually distinct classes: all-dark words vs airy words
    std::vector<ClassifyPair> pairs;
    for (int i = 0; i < 6; ++i) {
        pairs.push_back({i % 2 ? "mmmm" : "iiii", std::nullopt, i % 2});
    }
    FinetuneOptions opt;
    opt.freeze_backbone = true;
    opt.steps = 5000;
    opt.head_lr = 0.05;
    FinetuneResult res = finetune_classify(model, pairs, 2, atlas, opt);
    CHECK(res.train_accuracy == doctest::Approx(1.0));
}

TEST_CASE("finetune_classify: consumed embedding is sensitive to text_a") {
    ModelConfig cfg = toy_model_config();
    Checkpoint model;
    model.config = cfg;
    model.params = init_parameters<float>(cfg, 10);
    GlyphAtlas atlas = toy_atlas();
    long trunc = 0;
    auto in1 = classification_input({"ab", std::nullopt, 0}, atlas, cfg, &trunc);
    auto in2 = classification_input({"ax", std::nullopt, 0}, atlas, cfg, &trunc);
    Vec<float> e1 = classification_embedding(model.params, cfg, in1);
    Vec<float> e2 = classification_embedding(model.params, cfg, in2);
    CHECK((e1 - e2).norm() > 0.0f);
}

TEST_CASE("finetune_classify: full fine-tuning improves the training loss") {
    ModelConfig cfg = toy_model_config();
    cfg.n_layers = 1;
    Checkpoint model;
    model.config = cfg;
    model.params = init_parameters<float>(cfg, 11);
    GlyphAtlas atlas = toy_atlas();
    std::vector<ClassifyPair> pairs;
    for (int i = 0; i < 4; ++i)
        pairs.push_back({i % 2 ? "abab" : "cdcd", std::nullopt, i % 2});
    FinetuneOptions opt;
    opt.freeze_backbone = false;
    opt.steps = 30;
    opt.lr = 1e-3;
    opt.head_lr = 0.5;
    FinetuneResult res = finetune_classify(model, pairs, 2, atlas, opt);
    CHECK(res.final_loss < std::log(2.0));
    CHECK(res.train_accuracy == doctest::Approx(1.0));
}
