// pixelarm: render text corpora to binary patch shards, train the
// pixel-autoregressive transformer (MLE stage 1, adversarial stage 2),
// generate continuations, and evaluate cloze accuracy, readability and
// robustness under homoglyph attacks.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "pixelarm/attack.hpp"
#include "pixelarm/corpus.hpp"
#include "pixelarm/evalgen.hpp"
#include "pixelarm/manifest.hpp"
#include "pixelarm/train.hpp"

namespace fs = std::filesystem;
using namespace pixelarm;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

// precedence: --seed flag > config-file seed > PIXELARM_SEED > fallback
std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value,
                           const std::map<std::string, std::string>* file_kv,
                           std::uint64_t fallback) {
    if (seed_opt && seed_opt->count() > 0) return flag_value;
    if (file_kv && file_kv->count("seed"))
        return std::stoull(file_kv->at("seed"));
    if (const char* env = std::getenv("PIXELARM_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ConfigError("PIXELARM_SEED is not an integer: " +
                              std::string(env));
        }
    }
    return fallback;
}

ModelConfig load_model_config(const std::string& path) {
    if (path.empty()) return ModelConfig{};
    return parse_model_config(parse_kv_file(path));
}

void check_geometry(const GlyphAtlas& atlas, int patch_h, int patch_w) {
    int tallest = 0;
    for (const auto& [cp, g] : atlas.glyphs) tallest = std::max(tallest, g.height);
    tallest = std::max(tallest, atlas.line_height);
    if (tallest > patch_h)
        throw DataError("geometry mismatch: atlas '" + atlas.name +
                        "' needs height " + std::to_string(tallest) +
                        " but the checkpoint uses " + std::to_string(patch_h) +
                        "x" + std::to_string(patch_w) + " patches");
}

std::map<std::string, std::string> config_snapshot(const ModelConfig& mc,
                                                   HeadKind head) {
    return parse_kv_text(model_config_text(mc, head));
}

void merge_snapshot(std::map<std::string, std::string>& dst,
                    const std::map<std::string, std::string>& src,
                    const std::string& prefix) {
    for (const auto& [k, v] : src) dst[prefix + k] = v;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// ---- render ---------------------------------------------------------------

int cmd_render(const std::string& corpus_path, const std::string& atlas_path,
               const std::string& out_path, const std::string& language,
               int patch_size, int max_patches, int gap,
               std::uint64_t seed) {
    Timer timer;
    GlyphAtlas atlas = load_atlas_file(atlas_path);
    RenderConfig rcfg;
    rcfg.patch_h = patch_size;
    rcfg.patch_w = patch_size;
    rcfg.max_patches = max_patches;
    rcfg.inter_glyph_gap = gap;
    rcfg.validate();
    check_geometry(atlas, rcfg.patch_h, rcfg.patch_w);

    std::vector<CorpusSample> samples = load_corpus_file(corpus_path, language);
    std::size_t dropped = 0;
    std::vector<std::string> kept;
    std::string lang = language;
    for (const CorpusSample& s : samples) {
        lang = s.language;
        if (filter_rtl(s) == FilterDecision::keep)
            kept.push_back(s.text);
        else
            ++dropped;
    }
    std::vector<PatchSequence> sequences =
        kept.empty() ? std::vector<PatchSequence>{}
                     : pack_corpus(kept, lang, atlas, rcfg);
    write_shard(out_path, sequences);

    ShardHeader header = read_shard_header(out_path);
    auto stats = compute_stats({header});
    std::cout << "wrote " << out_path << ": " << header.sequence_count
              << " sequences, " << header.patch_count << " patches, "
              << header.total_chars << " chars";
    if (!stats.empty())
        std::cout << " (" << stats[0].chars_per_patch << " chars/patch)";
    std::cout << "; dropped " << dropped << " RTL samples\n";

    RunManifest m;
    m.command = "render";
    m.config = {{"corpus", corpus_path},
                {"atlas", atlas_path},
                {"language", lang},
                {"patch_size", std::to_string(patch_size)},
                {"max_patches", std::to_string(max_patches)},
                {"inter_glyph_gap", std::to_string(gap)}};
    m.inputs = {corpus_path, atlas_path};
    m.outputs[out_path] = file_checksum(out_path);
    m.seed = seed;
    m.wall_seconds = timer.seconds();
    write_manifest(out_path + ".manifest.json", m);
    return 0;
}

// ---- train ----------------------------------------------------------------

int cmd_train(int stage, const std::string& out_dir,
              const std::vector<std::string>& shard_paths,
              const std::string& train_config_path,
              const std::string& model_config_path,
              const std::string& init_checkpoint, bool resume, long steps,
              long stop_after, const CLI::Option* seed_opt,
              std::uint64_t seed_flag) {
    Timer timer;
    std::map<std::string, std::string> tkv;
    if (!train_config_path.empty()) tkv = parse_kv_file(train_config_path);
    TrainConfig tc = parse_train_config(tkv);
    tc.stage = stage;
    if (steps >= 0) tc.total_steps = steps;
    tc.seed = resolve_seed(seed_opt, seed_flag,
                           train_config_path.empty() ? nullptr : &tkv, tc.seed);

    fs::create_directories(out_dir);

    std::vector<Shard> shards;
    for (const std::string& p : shard_paths) shards.push_back(read_shard(p));
    std::vector<PatchSequence> data = interleave_sequences(shards);

    // --steps 0: initial checkpoint only
    if (tc.total_steps == 0) {
        ModelConfig mc = load_model_config(model_config_path);
        Checkpoint model;
        if (!init_checkpoint.empty()) {
            model = load_checkpoint(init_checkpoint);
        } else {
            model.config = mc;
            model.params = init_parameters<float>(mc, tc.seed);
        }
        const std::string path = checkpoint_path(out_dir, 0);
        save_checkpoint(path, model);
        std::cout << "wrote initial checkpoint " << path << "\n";
        RunManifest m;
        m.command = "train";
        merge_snapshot(m.config,
                       config_snapshot(model.config, model.params.head_kind),
                       "model.");
        m.config["total_steps"] = "0";
        m.outputs[path] = file_checksum(path);
        m.seed = tc.seed;
        m.wall_seconds = timer.seconds();
        write_manifest((fs::path(out_dir) / "manifest.json").string(), m);
        return 0;
    }

    tc.validate();

    Checkpoint model;
    AdamState<float> opt;
    long start_step = 0;
    Checkpoint disc;
    AdamState<float> disc_opt;

    if (resume) {
        ResumePoint rp = find_resume_point(out_dir);
        if (rp.checkpoint_path.empty())
            throw DataError("--resume: no checkpoint found in " + out_dir);
        model = load_checkpoint(rp.checkpoint_path);
        opt = load_adam_state(rp.checkpoint_path + ".optim", model.params);
        start_step = rp.step;
        if (stage == 2) {
            if (rp.disc_path.empty())
                throw DataError("--resume: no discriminator checkpoint in " +
                                out_dir);
            disc = load_checkpoint(rp.disc_path);
            disc_opt = load_adam_state(rp.disc_path + ".optim", disc.params);
        }
    } else if (!init_checkpoint.empty()) {
        model = load_checkpoint(init_checkpoint);
        if (stage == 2) {
            disc.config = model.config;
            disc.params = make_discriminator(model.params, model.config,
                                             mix_seed(tc.seed, 0xD15C));
        }
    } else if (stage == 1) {
        model.config = load_model_config(model_config_path);
        model.params = init_parameters<float>(model.config, tc.seed);
    } else {
        throw ConfigError(
            "stage 2 needs --init-checkpoint (a stage-1 checkpoint) or "
            "--resume");
    }

    const long min_len =
        std::max<long>(stage == 2 ? 2 : 0, model.config.horizon + 1);
    std::vector<PatchSequence> usable;
    for (PatchSequence& s : data)
        if (static_cast<long>(s.size()) >= min_len)
            usable.push_back(std::move(s));
    if (usable.size() != data.size())
        std::cerr << "note: dropped " << data.size() - usable.size()
                  << " sequences shorter than " << min_len << " patches\n";

    std::vector<LossReport> reports;
    if (stage == 1) {
        reports = run_stage1(model, opt, usable, tc, out_dir, start_step,
                             stop_after);
    } else {
        reports = run_stage2(model, opt, disc, disc_opt, usable, tc, out_dir,
                             start_step, stop_after);
    }
    if (!reports.empty())
        std::cout << "step " << reports.back().step
                  << ": rec_loss=" << reports.back().rec_loss
                  << " combined=" << reports.back().combined << "\n";

    const long end_step = reports.empty() ? start_step : reports.back().step;
    RunManifest m;
    m.command = "train";
    merge_snapshot(m.config, parse_kv_text(train_config_text(tc)), "");
    merge_snapshot(m.config,
                   config_snapshot(model.config, model.params.head_kind),
                   "model.");
    m.inputs = shard_paths;
    if (!init_checkpoint.empty()) m.inputs.push_back(init_checkpoint);
    const std::string final_ckpt = checkpoint_path(out_dir, end_step);
    if (fs::exists(final_ckpt)) m.outputs[final_ckpt] = file_checksum(final_ckpt);
    const std::string csv = loss_csv_path(out_dir);
    if (fs::exists(csv)) m.outputs[csv] = file_checksum(csv);
    m.seed = tc.seed;
    m.wall_seconds = timer.seconds();
    write_manifest((fs::path(out_dir) / "manifest.json").string(), m);
    return 0;
}

// ---- generate ---------------------------------------------------------------

int cmd_generate(const std::string& ckpt_path, const std::string& atlas_path,
                 const std::string& prompt_text, int max_new,
                 const std::string& stop_rule, bool art,
                 const std::string& manifest_path) {
    Timer timer;
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    GlyphAtlas atlas = load_atlas_file(atlas_path);
    check_geometry(atlas, ckpt.config.patch_h, ckpt.config.patch_w);

    RenderConfig rcfg;
    rcfg.patch_h = ckpt.config.patch_h;
    rcfg.patch_w = ckpt.config.patch_w;
    rcfg.max_patches = ckpt.config.max_positions;
    PatchSequence prompt = render_text(prompt_text, atlas, rcfg);

    GenerationConfig gcfg;
    gcfg.max_new_patches = max_new;
    gcfg.stop_rule = stop_rule == "budget" ? StopRule::patch_budget
                                           : StopRule::word_boundary;
    gcfg.temperature = ckpt.config.temperature;
    gcfg.threshold = ckpt.config.threshold;

    PatchSequence gen = generate(ckpt.params, ckpt.config, prompt, gcfg, &atlas);
    const std::string text = decode_to_text(gen, atlas);
    std::cout << text << "\n";
    if (art) std::cerr << ascii_art(gen.patches);

    if (!manifest_path.empty()) {
        RunManifest m;
        m.command = "generate";
        m.config = {{"checkpoint", ckpt_path},
                    {"atlas", atlas_path},
                    {"prompt", prompt_text},
                    {"max_new", std::to_string(max_new)},
                    {"stop", stop_rule}};
        m.inputs = {ckpt_path, atlas_path};
        m.wall_seconds = timer.seconds();
        write_manifest(manifest_path, m);
    }
    return 0;
}

// ---- eval / sweep -----------------------------------------------------------

void write_items_csv(const std::string& path, const std::vector<ClozeItem>& items,
                     const ClozeReport& report) {
    std::string out =
        "item_id,predicted,target,correct,readable_single,readable_multi\n";
    for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
        const ClozeOutcome& o = report.outcomes[i];
        out += std::to_string(i) + "," + csv_quote(o.predicted) + "," +
               csv_quote(normalize_word(trim(items[i].target))) + "," +
               (o.correct ? "1" : "0") + "," + (o.readable.single ? "1" : "0") +
               "," + (o.readable.multi ? "1" : "0") + "\n";
    }
    atomic_write_file(path, out);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& table) {
    std::string out = "ratio,accuracy,items,readable_ratio\n";
    char buf[128];
    for (const SweepRow& r : table) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%zu,%.10g\n", r.ratio,
                      r.accuracy, r.items, r.readable_ratio);
        out += buf;
    }
    atomic_write_file(path, out);
}

std::vector<double> parse_ratios(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError("bad attack ratio '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError("no attack ratios given");
    return out;
}

int cmd_eval(const std::string& ckpt_path, const std::string& task_path,
             const std::string& atlas_path,
             const std::vector<std::string>& lexicon_paths,
             const std::string& out_prefix, int max_new,
             const std::string& attack_ratios,
             const std::string& confusables_path, std::uint64_t seed) {
    Timer timer;
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    GlyphAtlas atlas = load_atlas_file(atlas_path);
    check_geometry(atlas, ckpt.config.patch_h, ckpt.config.patch_w);

    std::vector<ClozeItem> items = load_cloze_file(task_path);
    std::vector<FrequencyLexicon> lexicons;
    for (const std::string& p : lexicon_paths) {
        const std::string lang = fs::path(p).stem().string();
        lexicons.push_back(load_lexicon_file(p, lang));
    }

    GenerationConfig gcfg;
    gcfg.max_new_patches = max_new;
    gcfg.temperature = ckpt.config.temperature;
    gcfg.threshold = ckpt.config.threshold;

    ClozeReport report =
        cloze_accuracy(ckpt.params, ckpt.config, items, atlas, gcfg, lexicons);
    std::size_t readable_single = 0, readable_multi = 0;
    for (const ClozeOutcome& o : report.outcomes) {
        readable_single += o.readable.single;
        readable_multi += o.readable.multi;
    }
    std::cout << "items=" << report.items << " accuracy=" << report.accuracy;
    if (!lexicons.empty() && report.items > 0)
        std::cout << " readable_single="
                  << static_cast<double>(readable_single) / report.items
                  << " readable_multi="
                  << static_cast<double>(readable_multi) / report.items;
    if (report.items == 0) std::cout << " (empty item list)";
    std::cout << "\n";

    RunManifest m;
    m.command = "eval";
    m.config = {{"checkpoint", ckpt_path},
                {"task", task_path},
                {"atlas", atlas_path},
                {"max_new", std::to_string(max_new)}};
    m.inputs = {ckpt_path, task_path, atlas_path};
    for (const auto& p : lexicon_paths) m.inputs.push_back(p);
    m.seed = seed;

    if (!out_prefix.empty()) {
        const std::string items_csv = out_prefix + "_items.csv";
        write_items_csv(items_csv, items, report);
        m.outputs[items_csv] = file_checksum(items_csv);
    }
    if (!attack_ratios.empty()) {
        if (confusables_path.empty())
            throw ConfigError("--attack-ratios needs --confusables");
        ConfusableMap map = load_confusables_file(confusables_path);
        std::vector<double> ratios = parse_ratios(attack_ratios);
        auto table = sweep(ckpt.params, ckpt.config, items, map, ratios, atlas,
                           gcfg, lexicons, seed);
        for (const SweepRow& r : table)
            std::cout << "ratio " << r.ratio << ": accuracy=" << r.accuracy
                      << " readable_ratio=" << r.readable_ratio << "\n";
        m.inputs.push_back(confusables_path);
        m.config["attack_ratios"] = attack_ratios;
        if (!out_prefix.empty()) {
            const std::string sweep_csv = out_prefix + "_sweep.csv";
            write_sweep_csv(sweep_csv, table);
            m.outputs[sweep_csv] = file_checksum(sweep_csv);
        }
    }
    m.wall_seconds = timer.seconds();
    if (!out_prefix.empty())
        write_manifest(out_prefix + "_manifest.json", m);
    return 0;
}

int cmd_sweep(const std::string& ckpt_path, const std::string& task_path,
              const std::string& atlas_path,
              const std::string& confusables_path, const std::string& ratios,
              const std::vector<std::string>& lexicon_paths,
              const std::string& out_csv, int max_new, std::uint64_t seed) {
    Timer timer;
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    GlyphAtlas atlas = load_atlas_file(atlas_path);
    check_geometry(atlas, ckpt.config.patch_h, ckpt.config.patch_w);
    std::vector<ClozeItem> items = load_cloze_file(task_path);
    ConfusableMap map = load_confusables_file(confusables_path);
    std::vector<FrequencyLexicon> lexicons;
    for (const std::string& p : lexicon_paths)
        lexicons.push_back(load_lexicon_file(p, fs::path(p).stem().string()));

    GenerationConfig gcfg;
    gcfg.max_new_patches = max_new;
    gcfg.temperature = ckpt.config.temperature;
    gcfg.threshold = ckpt.config.threshold;

    auto table = sweep(ckpt.params, ckpt.config, items, map,
                       parse_ratios(ratios), atlas, gcfg, lexicons, seed);
    for (const SweepRow& r : table)
        std::cout << "ratio " << r.ratio << ": accuracy=" << r.accuracy
                  << " items=" << r.items
                  << " readable_ratio=" << r.readable_ratio << "\n";
    write_sweep_csv(out_csv, table);

    RunManifest m;
    m.command = "sweep";
    m.config = {{"checkpoint", ckpt_path},
                {"task", task_path},
                {"atlas", atlas_path},
                {"confusables", confusables_path},
                {"ratios", ratios},
                {"max_new", std::to_string(max_new)}};
    m.inputs = {ckpt_path, task_path, atlas_path, confusables_path};
    m.outputs[out_csv] = file_checksum(out_csv);
    m.seed = seed;
    m.wall_seconds = timer.seconds();
    write_manifest(out_csv + ".manifest.json", m);
    return 0;
}

int cmd_stats(const std::vector<std::string>& shard_paths,
              const std::string& out_csv) {
    Timer timer;
    std::vector<ShardHeader> headers;
    for (const std::string& p : shard_paths)
        headers.push_back(read_shard_header(p));
    auto stats = compute_stats(headers);
    std::string out = "language,patches,chars,chars_per_patch\n";
    char buf[160];
    for (const LanguageStats& s : stats) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%llu,%.6g\n",
                      s.language.c_str(),
                      static_cast<unsigned long long>(s.patches),
                      static_cast<unsigned long long>(s.chars),
                      s.chars_per_patch);
        out += buf;
    }
    std::cout << out;
    if (!out_csv.empty()) {
        atomic_write_file(out_csv, out);
        RunManifest m;
        m.command = "stats";
        m.inputs = shard_paths;
        m.outputs[out_csv] = file_checksum(out_csv);
        m.wall_seconds = timer.seconds();
        write_manifest(out_csv + ".manifest.json", m);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "pixelarm: pixel-patch autoregressive language modeling (render, "
        "train, generate, eval, sweep, stats)"};
    app.require_subcommand(1);

    // render
    auto* render = app.add_subcommand(
        "render", "Render a text corpus into a bit-packed patch shard");
    std::string r_corpus, r_atlas, r_out, r_language;
    int r_patch = 32;  // rendering default: 32x32 patches
    int r_max = 360;   // 360 patches per packed sequence
    int r_gap = 1;
    std::uint64_t r_seed = 42;
    render->add_option("--corpus", r_corpus,
                       "corpus file, one sample per line (language from "
                       "<corpus>.lang sidecar or --language)")
        ->required();
    render->add_option("--atlas", r_atlas, "glyph atlas file")->required();
    render->add_option("--out", r_out, "output shard path")->required();
    render->add_option("--language", r_language,
                       "language tag fallback when no sidecar exists")
        ->capture_default_str();
    render->add_option("--patch-size", r_patch, "patch height and width")
        ->capture_default_str();
    render->add_option("--max-patches", r_max, "patches per packed sequence")
        ->capture_default_str();
    render->add_option("--gap", r_gap, "inter-glyph gap in pixels")
        ->capture_default_str();
    render->add_option("--seed", r_seed, "seed recorded in the manifest")
        ->capture_default_str();

    // train
    auto* train = app.add_subcommand(
        "train", "Train stage 1 (MLE) or stage 2 (adversarial refinement)");
    int t_stage = 1;
    std::string t_out, t_tcfg, t_mcfg, t_init;
    std::vector<std::string> t_shards;
    bool t_resume = false;
    long t_steps = -1;
    long t_stop_after = 0;
    std::uint64_t t_seed = 42;
    train->add_option("--stage", t_stage, "training stage: 1 or 2")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    train->add_option("--out", t_out, "run directory (checkpoints, losses.csv)")
        ->required();
    train->add_option("--shards", t_shards, "input shard paths")
        ->required()
        ->expected(-1);
    train->add_option("--train-config", t_tcfg,
                      "key=value training config; defaults: batch_size=384, "
                      "peak_lr=3e-4, min_lr=3e-5, warmup_steps=2000, "
                      "total_steps=1000000, beta1=0.9, beta2=0.95, "
                      "weight_decay=0.1, grad_clip=1, adam_epsilon=1e-8, "
                      "lambda_m=9, disc_peak_lr=3e-5, disc_min_lr=3e-6, "
                      "seed=42, checkpoint_every=0");
    train->add_option("--model-config", t_mcfg,
                      "key=value model config; defaults: n_layers=12, "
                      "hidden=768, n_heads=12, intermediate=3072, patch_h=32, "
                      "patch_w=32, channels=1, horizon=2, temperature=1, "
                      "threshold=0.5, max_positions=360, norm_epsilon=1e-05");
    train->add_option("--init-checkpoint", t_init,
                      "checkpoint to start from (required for stage 2)");
    train->add_flag("--resume", t_resume,
                    "continue from the latest checkpoint in --out");
    train->add_option("--steps", t_steps,
                      "override total_steps (0 writes the initial checkpoint "
                      "only)");
    train->add_option("--stop-after", t_stop_after,
                      "simulate an interruption after this step (testing aid)")
        ->capture_default_str();
    auto* t_seed_opt = train->add_option(
        "--seed", t_seed,
        "training seed (default 42; PIXELARM_SEED env is the fallback)");

    // generate
    auto* gen = app.add_subcommand(
        "generate", "Greedy patch generation from a rendered text prompt");
    std::string g_ckpt, g_atlas, g_prompt, g_stop = "word", g_manifest;
    int g_max_new = 8;
    bool g_art = false;
    gen->add_option("--checkpoint", g_ckpt, "model checkpoint")->required();
    gen->add_option("--atlas", g_atlas, "glyph atlas file")->required();
    gen->add_option("--prompt", g_prompt, "prompt text")->required();
    gen->add_option("--max-new", g_max_new, "maximum new patches")
        ->capture_default_str();
    gen->add_option("--stop", g_stop, "stop rule: word or budget")
        ->check(CLI::IsMember({"word", "budget"}))
        ->capture_default_str();
    gen->add_flag("--art", g_art, "also print the generated patches as ASCII");
    gen->add_option("--manifest", g_manifest, "optional manifest path");

    // eval
    auto* eval = app.add_subcommand(
        "eval", "Cloze accuracy, readability and optional attack sweep");
    std::string e_ckpt, e_task, e_atlas, e_out, e_ratios, e_confusables;
    std::vector<std::string> e_lexicons;
    int e_max_new = 8;  // cloze stop-rule budget
    std::uint64_t e_seed = 42;
    eval->add_option("--checkpoint", e_ckpt, "model checkpoint")->required();
    eval->add_option("--task", e_task, "cloze items: context<TAB>target")
        ->required();
    eval->add_option("--atlas", e_atlas, "glyph atlas file")->required();
    eval->add_option("--lexicon", e_lexicons,
                     "frequency lexicons; first is the prompt language")
        ->expected(-1);
    eval->add_option("--out", e_out, "output prefix for CSV files");
    eval->add_option("--max-new", e_max_new, "maximum generated patches")
        ->capture_default_str();
    eval->add_option("--attack-ratios", e_ratios,
                     "comma-separated ratios; adds an attack sweep");
    eval->add_option("--confusables", e_confusables,
                     "confusable table for --attack-ratios");
    auto* e_seed_opt = eval->add_option("--seed", e_seed,
                                        "attack base seed (default 42; "
                                        "PIXELARM_SEED env is the fallback)");

    // sweep
    auto* sw = app.add_subcommand(
        "sweep", "Orthographic attack-ratio sweep over a cloze task");
    std::string s_ckpt, s_task, s_atlas, s_conf, s_ratios = "0,0.1,0.3,0.5";
    std::string s_out;
    std::vector<std::string> s_lexicons;
    int s_max_new = 8;
    std::uint64_t s_seed = 42;
    sw->add_option("--checkpoint", s_ckpt, "model checkpoint")->required();
    sw->add_option("--task", s_task, "cloze items: context<TAB>target")
        ->required();
    sw->add_option("--atlas", s_atlas, "glyph atlas file")->required();
    sw->add_option("--confusables", s_conf, "confusable table")->required();
    sw->add_option("--ratios", s_ratios, "comma-separated ascending ratios")
        ->capture_default_str();
    sw->add_option("--lexicon", s_lexicons, "frequency lexicons")
        ->expected(-1);
    sw->add_option("--out", s_out, "output CSV path")->required();
    sw->add_option("--max-new", s_max_new, "maximum generated patches")
        ->capture_default_str();
    auto* s_seed_opt = sw->add_option("--seed", s_seed,
                                      "attack base seed (default 42; "
                                      "PIXELARM_SEED env is the fallback)");

    // stats
    auto* st = app.add_subcommand("stats", "Per-language shard statistics");
    std::vector<std::string> x_shards;
    std::string x_out;
    st->add_option("--shards", x_shards, "shard paths")->required()->expected(-1);
    st->add_option("--out", x_out, "optional output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2
    }

    try {
        if (*render)
            return cmd_render(r_corpus, r_atlas, r_out, r_language, r_patch,
                              r_max, r_gap, r_seed);
        if (*train)
            return cmd_train(t_stage, t_out, t_shards, t_tcfg, t_mcfg, t_init,
                             t_resume, t_steps, t_stop_after, t_seed_opt,
                             t_seed);
        if (*gen)
            return cmd_generate(g_ckpt, g_atlas, g_prompt, g_max_new, g_stop,
                                g_art, g_manifest);
        if (*eval)
            return cmd_eval(e_ckpt, e_task, e_atlas, e_lexicons, e_out,
                            e_max_new, e_ratios, e_confusables,
                            resolve_seed(e_seed_opt, e_seed, nullptr, 42));
        if (*sw)
            return cmd_sweep(s_ckpt, s_task, s_atlas, s_conf, s_ratios,
                             s_lexicons, s_out, s_max_new,
                             resolve_seed(s_seed_opt, s_seed, nullptr, 42));
        if (*st) return cmd_stats(x_shards, x_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
