#include "pixelarm/train.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "pixelarm/shard.hpp"
#include "pixelarm/transformer.hpp"

namespace pixelarm {

namespace {

std::string fmt_report(const LossReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%ld,%.10g,%.10g,%.10g,%.10g", r.step, r.lr,
                  r.rec_loss, r.disc_loss, r.combined);
    return buf;
}

// Teacher-forced reconstruction gradients for one batch, accumulated into
// grads (mean over all contributing pixels of the batch). Traces and
// per-sequence logit gradients are returned through the out-parameters so
// stage 2 can extend them with the adversarial term before backprop.
struct RecPass {
    double loss = 0.0;
    long pixels = 0;
    std::vector<ForwardTrace<float>> traces;
    std::vector<Mat<float>> dlogits;  // sum-form, caller rescales
};

RecPass rec_forward(const Parameters<float>& params, const ModelConfig& cfg,
                    const std::vector<PatchSequence>& data,
                    const std::vector<std::size_t>& batch) {
    RecPass pass;
    double sum = 0.0;
    for (std::size_t idx : batch) {
        const PatchSequence& seq = data[idx];
        Mat<float> x = to_input_matrix<float>(seq.patches, cfg);
        pass.traces.push_back(forward(params, cfg, x));
        pass.dlogits.emplace_back();
        LossParts parts = loss_rec_parts(pass.traces.back().logits, seq.patches,
                                         cfg, &pass.dlogits.back());
        sum += parts.sum;
        pass.pixels += parts.pixels;
    }
    if (pass.pixels == 0)
        throw DataError("no contributing position in batch (sequences shorter "
                        "than horizon + 1)");
    pass.loss = sum / static_cast<double>(pass.pixels);
    return pass;
}

void maybe_persist(const std::string& out_dir, long step, long total_steps,
                   const TrainConfig& cfg, const Checkpoint& model,
                   const AdamState<float>& opt, const Checkpoint* disc,
                   const AdamState<float>* disc_opt,
                   const std::vector<LossReport>& all_reports) {
    if (out_dir.empty()) return;
    const bool due = (cfg.checkpoint_every > 0 &&
                      step % cfg.checkpoint_every == 0) ||
                     step == total_steps;
    if (!due) return;
    const std::string path = checkpoint_path(out_dir, step);
    save_checkpoint(path, model);
    save_adam_state(path + ".optim", opt);
    if (disc) {
        const std::string dpath = disc_checkpoint_path(out_dir, step);
        save_checkpoint(dpath, *disc);
        save_adam_state(dpath + ".optim", *disc_opt);
    }
    write_loss_csv(loss_csv_path(out_dir), all_reports);
}

std::vector<LossReport> prior_reports(const std::string& out_dir,
                                      long start_step) {
    if (out_dir.empty()) return {};
    const std::string path = loss_csv_path(out_dir);
    if (!std::filesystem::exists(path)) return {};
    std::vector<LossReport> kept;
    for (const LossReport& r : read_loss_csv(path))
        if (r.step <= start_step) kept.push_back(r);
    return kept;
}

}  // namespace

std::vector<LossReport> run_stage1(Checkpoint& model, AdamState<float>& opt,
                                   const std::vector<PatchSequence>& data,
                                   const TrainConfig& cfg,
                                   const std::string& out_dir,
                                   long start_step, long stop_after) {
    cfg.validate();
    model.config.validate();
    if (model.params.head_kind != HeadKind::pixel)
        throw ConfigError("stage 1 requires a pixel-head model");
    if (data.empty()) throw DataError("empty training stream");
    opt.ensure(model.params);

    const long last_step = stop_after > 0
                               ? std::min(stop_after, cfg.total_steps)
                               : cfg.total_steps;
    std::vector<LossReport> all = prior_reports(out_dir, start_step);
    std::vector<LossReport> fresh;
    for (long step = start_step + 1; step <= last_step; ++step) {
        const auto batch = batch_indices(step, data.size(), cfg.batch_size);
        const double lr = lr_at(step, cfg);

        RecPass pass = rec_forward(model.params, model.config, data, batch);
        Parameters<float> grads = zeros_like(model.params);
        const float inv_pixels = 1.0f / static_cast<float>(pass.pixels);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            pass.dlogits[b] *= inv_pixels;
            backward(model.params, model.config, pass.traces[b],
                     pass.dlogits[b], grads);
        }
        clip_global_norm(grads, cfg.grad_clip);
        adamw_step(model.params, grads, opt, lr, cfg);

        LossReport r{step, lr, pass.loss, 0.0, pass.loss};
        fresh.push_back(r);
        all.push_back(r);
        maybe_persist(out_dir, step, cfg.total_steps, cfg, model, opt, nullptr,
                      nullptr, all);
    }
    return fresh;
}

Parameters<float> make_discriminator(const Parameters<float>& gen,
                                     const ModelConfig& cfg,
                                     std::uint64_t seed) {
    Parameters<float> disc = init_parameters<float>(cfg, seed, HeadKind::scalar);
    disc.w_in = gen.w_in;
    disc.b_in = gen.b_in;
    disc.layers = gen.layers;
    disc.final_gain = gen.final_gain;
    return disc;
}

std::vector<LossReport> run_stage2(Checkpoint& gen, AdamState<float>& gen_opt,
                                   Checkpoint& disc, AdamState<float>& disc_opt,
                                   const std::vector<PatchSequence>& data,
                                   const TrainConfig& cfg,
                                   const std::string& out_dir,
                                   long start_step, long stop_after) {
    cfg.validate();
    gen.config.validate();
    if (gen.params.head_kind != HeadKind::pixel)
        throw ConfigError("stage 2 generator requires a pixel head");
    if (disc.params.head_rows() != 1)
        throw ConfigError("stage 2 discriminator requires a scalar head");
    for (const PatchSequence& s : data)
        if (s.patches.size() < 2)
            throw DataError("stage 2 requires sequences of at least 2 patches");
    if (data.empty()) throw DataError("empty training stream");
    gen_opt.ensure(gen.params);
    disc_opt.ensure(disc.params);

    const ModelConfig& cfgm = gen.config;
    const int pd = cfgm.patch_dim();
    const float inv_temp = static_cast<float>(1.0 / cfgm.temperature);
    const float theta = static_cast<float>(cfgm.threshold);

    const long last_step = stop_after > 0
                               ? std::min(stop_after, cfg.total_steps)
                               : cfg.total_steps;
    std::vector<LossReport> all = prior_reports(out_dir, start_step);
    std::vector<LossReport> fresh;
    for (long step = start_step + 1; step <= last_step; ++step) {
        const auto batch = batch_indices(step, data.size(), cfg.batch_size);
        const double lr_g = lr_at(step, cfg);
        const double lr_d = lr_at(step, cfg.disc_peak_lr, cfg.disc_min_lr,
                                  cfg.warmup_steps, cfg.total_steps);

        // Teacher-forced pass; its logits also provide the next-patch
        // prediction at each split point.
        RecPass pass = rec_forward(gen.params, cfgm, data, batch);

        struct Split {
            long prefix_len;           // candidate position, 0-based
            Mat<float> fake_x;         // prefix rows + binarized prediction
            Vec<float> probs;          // pre-binarization probabilities
        };
        std::vector<Split> splits;
        splits.reserve(batch.size());
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const PatchSequence& seq = data[batch[b]];
            const long s = static_cast<long>(seq.patches.size());
            const long p = 1 + static_cast<long>(
                                   mix_seed(cfg.seed, static_cast<std::uint64_t>(step),
                                            b) %
                                   static_cast<std::uint64_t>(s - 1));
            Split sp;
            sp.prefix_len = p;
            sp.probs.resize(pd);
            const auto& logits = pass.traces[b].logits;
            for (int k = 0; k < pd; ++k)
                sp.probs[k] = sigmoid(logits(p - 1, k) * inv_temp);
            sp.fake_x.resize(p + 1, pd);
            sp.fake_x.topRows(p) = pass.traces[b].x.topRows(p);
            for (int k = 0; k < pd; ++k)
                sp.fake_x(p, k) = sp.probs[k] > theta ? 1.0f : 0.0f;
            splits.push_back(std::move(sp));
        }

        // Discriminator update: real next patch vs binarized prediction,
        // both under the same real prefix.
        double disc_loss = 0.0;
        {
            Parameters<float> dgrads = zeros_like(disc.params);
            const float w = 1.0f / (2.0f * static_cast<float>(batch.size()));
            for (std::size_t b = 0; b < batch.size(); ++b) {
                const Split& sp = splits[b];
                Mat<float> real_x =
                    pass.traces[b].x.topRows(sp.prefix_len + 1);
                for (int which = 0; which < 2; ++which) {
                    const Mat<float>& x = which == 0 ? real_x : sp.fake_x;
                    const int target = which == 0 ? 1 : 0;
                    ForwardTrace<float> t = forward(disc.params, cfgm, x);
                    const long last = t.logits.rows() - 1;
                    const float z = t.logits(last, 0);
                    disc_loss += bce_from_logit(z, target);
                    Mat<float> dl = Mat<float>::Zero(t.logits.rows(), 1);
                    dl(last, 0) = (sigmoid(z) - static_cast<float>(target)) * w;
                    backward(disc.params, cfgm, t, dl, dgrads);
                }
            }
            disc_loss /= 2.0 * static_cast<double>(batch.size());
            clip_global_norm(dgrads, cfg.grad_clip);
            adamw_step(disc.params, dgrads, disc_opt, lr_d, cfg);
        }

        // Generator update against the just-updated discriminator. The
        // adversarial gradient reaches the pre-binarization probabilities by
        // straight-through and is skipped entirely at lambda_m = 0 so that
        // path stays bit-identical to stage 1.
        double gen_adv = 0.0;
        Parameters<float> ggrads = zeros_like(gen.params);
        const float inv_pixels = 1.0f / static_cast<float>(pass.pixels);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            Mat<float>& dl = pass.dlogits[b];
            dl *= inv_pixels;
            if (cfg.lambda_m > 0.0) {
                const Split& sp = splits[b];
                ForwardTrace<float> t = forward(disc.params, cfgm, sp.fake_x);
                const long last = t.logits.rows() - 1;
                const float z = t.logits(last, 0);
                gen_adv += bce_from_logit(z, 1);  // -log sigmoid(z)
                Mat<float> ddl = Mat<float>::Zero(t.logits.rows(), 1);
                ddl(last, 0) = sigmoid(z) - 1.0f;
                Parameters<float> scratch = zeros_like(disc.params);
                Mat<float> dx;
                backward(disc.params, cfgm, t, ddl, scratch, &dx);
                const float scale = static_cast<float>(cfg.lambda_m) /
                                    static_cast<float>(batch.size());
                for (int k = 0; k < pd; ++k) {
                    const float pr = sp.probs[k];
                    dl(sp.prefix_len - 1, k) +=
                        scale * dx(last, k) * pr * (1.0f - pr) * inv_temp;
                }
            }
            backward(gen.params, cfgm, pass.traces[b], dl, ggrads);
        }
        if (cfg.lambda_m > 0.0) gen_adv /= static_cast<double>(batch.size());
        clip_global_norm(ggrads, cfg.grad_clip);
        adamw_step(gen.params, ggrads, gen_opt, lr_g, cfg);

        LossReport r{step, lr_g, pass.loss, disc_loss,
                     loss_stage2(pass.loss, gen_adv, cfg.lambda_m)};
        fresh.push_back(r);
        all.push_back(r);
        maybe_persist(out_dir, step, cfg.total_steps, cfg, gen, gen_opt, &disc,
                      &disc_opt, all);
    }
    return fresh;
}

std::string checkpoint_path(const std::string& out_dir, long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ckpt_step%08ld.pxlm", step);
    return (std::filesystem::path(out_dir) / buf).string();
}

std::string disc_checkpoint_path(const std::string& out_dir, long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "disc_step%08ld.pxlm", step);
    return (std::filesystem::path(out_dir) / buf).string();
}

ResumePoint find_resume_point(const std::string& out_dir) {
    ResumePoint rp;
    if (!std::filesystem::is_directory(out_dir)) return rp;
    for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
        const std::string name = entry.path().filename().string();
        long step = 0;
        if (std::sscanf(name.c_str(), "ckpt_step%08ld.pxlm", &step) == 1 &&
            name.size() == std::string("ckpt_step00000000.pxlm").size() &&
            name.ends_with(".pxlm")) {
            if (step > rp.step || rp.checkpoint_path.empty()) {
                rp.step = step;
                rp.checkpoint_path = entry.path().string();
            }
        }
    }
    if (!rp.checkpoint_path.empty()) {
        const std::string dpath = disc_checkpoint_path(out_dir, rp.step);
        if (std::filesystem::exists(dpath)) rp.disc_path = dpath;
    }
    return rp;
}

std::string loss_csv_path(const std::string& out_dir) {
    return (std::filesystem::path(out_dir) / "losses.csv").string();
}

std::vector<LossReport> read_loss_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<LossReport> out;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            continue;  // header
        }
        if (trim(line).empty()) continue;
        LossReport r;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf", &r.step, &r.lr,
                        &r.rec_loss, &r.disc_loss, &r.combined) != 5)
            throw DataError("malformed loss CSV row: " + line);
        out.push_back(r);
    }
    return out;
}

void write_loss_csv(const std::string& path,
                    const std::vector<LossReport>& reports) {
    std::string out = "step,lr,rec_loss,disc_loss,combined\n";
    for (const LossReport& r : reports) {
        out += fmt_report(r);
        out += '\n';
    }
    atomic_write_file(path, out);
}

std::vector<PatchSequence> interleave_sequences(
    const std::vector<Shard>& shards) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const PatchSequence*>> by_lang;
    for (const Shard& sh : shards) {
        if (!by_lang.count(sh.header.language)) order.push_back(sh.header.language);
        auto& bucket = by_lang[sh.header.language];
        for (const PatchSequence& s : sh.sequences) bucket.push_back(&s);
    }
    std::vector<PatchSequence> out;
    std::vector<std::size_t> next(order.size(), 0);
    bool emitted = true;
    while (emitted) {
        emitted = false;
        for (std::size_t i = 0; i < order.size(); ++i) {
            auto& bucket = by_lang[order[i]];
            if (next[i] < bucket.size()) {
                out.push_back(*bucket[next[i]++]);
                emitted = true;
            }
        }
    }
    return out;
}

TrainConfig parse_train_config(const std::map<std::string, std::string>& kv) {
    TrainConfig c;
    for (const auto& [key, value] : kv) {
        try {
            if (key == "stage") c.stage = std::stoi(value);
            else if (key == "peak_lr") c.peak_lr = std::stod(value);
            else if (key == "min_lr") c.min_lr = std::stod(value);
            else if (key == "warmup_steps") c.warmup_steps = std::stol(value);
            else if (key == "total_steps") c.total_steps = std::stol(value);
            else if (key == "batch_size") c.batch_size = std::stoi(value);
            else if (key == "beta1") c.beta1 = std::stod(value);
            else if (key == "beta2") c.beta2 = std::stod(value);
            else if (key == "weight_decay") c.weight_decay = std::stod(value);
            else if (key == "grad_clip") c.grad_clip = std::stod(value);
            else if (key == "adam_epsilon") c.adam_epsilon = std::stod(value);
            else if (key == "lambda_m") c.lambda_m = std::stod(value);
            else if (key == "disc_peak_lr") c.disc_peak_lr = std::stod(value);
            else if (key == "disc_min_lr") c.disc_min_lr = std::stod(value);
            else if (key == "seed") c.seed = std::stoull(value);
            else if (key == "checkpoint_every")
                c.checkpoint_every = std::stol(value);
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for config key '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("bad value for config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

std::string train_config_text(const TrainConfig& c) {
    std::ostringstream out;
    char buf[40];
    auto d = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "stage=" << c.stage << '\n'
        << "peak_lr=" << d(c.peak_lr) << '\n'
        << "min_lr=" << d(c.min_lr) << '\n'
        << "warmup_steps=" << c.warmup_steps << '\n'
        << "total_steps=" << c.total_steps << '\n'
        << "batch_size=" << c.batch_size << '\n'
        << "beta1=" << d(c.beta1) << '\n'
        << "beta2=" << d(c.beta2) << '\n'
        << "weight_decay=" << d(c.weight_decay) << '\n'
        << "grad_clip=" << d(c.grad_clip) << '\n'
        << "adam_epsilon=" << d(c.adam_epsilon) << '\n'
        << "lambda_m=" << d(c.lambda_m) << '\n'
        << "disc_peak_lr=" << d(c.disc_peak_lr) << '\n'
        << "disc_min_lr=" << d(c.disc_min_lr) << '\n'
        << "seed=" << c.seed << '\n'
        << "checkpoint_every=" << c.checkpoint_every << '\n';
    return out.str();
}

}  // namespace pixelarm
