#pragma once

#include <string>
#include <vector>

#include "pixelarm/checkpoint.hpp"
#include "pixelarm/loss.hpp"
#include "pixelarm/optim.hpp"
#include "pixelarm/shard.hpp"

namespace pixelarm {

struct LossReport {
    long step = 0;
    double lr = 0.0;
    double rec_loss = 0.0;
    double disc_loss = 0.0;
    double combined = 0.0;
};

// Batches are consecutive cyclic windows over the (already interleaved)
// sequence stream: a pure function of the step, so runs are resumable and
// byte-reproducible without RNG state in checkpoints.
inline std::vector<std::size_t> batch_indices(long step, std::size_t n_items,
                                              int batch_size) {
    if (n_items == 0) throw DataError("empty training stream");
    std::vector<std::size_t> idx(static_cast<std::size_t>(batch_size));
    const std::uint64_t base =
        static_cast<std::uint64_t>(step - 1) * static_cast<std::uint64_t>(batch_size);
    for (int j = 0; j < batch_size; ++j)
        idx[static_cast<std::size_t>(j)] =
            static_cast<std::size_t>((base + static_cast<std::uint64_t>(j)) % n_items);
    return idx;
}

TrainConfig parse_train_config(const std::map<std::string, std::string>& kv);
std::string train_config_text(const TrainConfig& cfg);

// Round-robin over per-language sequence streams (language order = first
// appearance across the shards); the training-stream counterpart of
// dataops' sample-level interleave.
std::vector<PatchSequence> interleave_sequences(
    const std::vector<Shard>& shards);

// Initializes a discriminator from generator weights: transformer blocks are
// copied, the pixel head is replaced by a freshly initialized scalar head.
Parameters<float> make_discriminator(const Parameters<float>& gen,
                                     const ModelConfig& cfg,
                                     std::uint64_t seed);

// Runs stage-1 MLE steps start_step+1 .. cfg.total_steps with teacher
// forcing. When out_dir is nonempty, maintains out_dir/losses.csv and writes
// checkpoints (ckpt_stepNNNNNNNN.pxlm plus .optim sidecars) every
// cfg.checkpoint_every steps and at the end. Deterministic given cfg.seed
// and the data order. stop_after > 0 aborts the run after that step without
// a final checkpoint, simulating an interruption; the lr schedule still
// follows cfg.total_steps.
std::vector<LossReport> run_stage1(Checkpoint& model, AdamState<float>& opt,
                                   const std::vector<PatchSequence>& data,
                                   const TrainConfig& cfg,
                                   const std::string& out_dir = "",
                                   long start_step = 0, long stop_after = 0);

// Stage-2 adversarial refinement: per step, one discriminator update (real
// next patch vs the generator's binarized prediction, both conditioned on
// the same real prefix) followed by one generator update on
// rec + lambda_m * gen_adv. The generator's adversarial gradient flows
// through the pre-binarization probabilities (straight-through estimator).
// With lambda_m = 0 the generator update is bit-identical to a stage-1 step.
std::vector<LossReport> run_stage2(Checkpoint& gen, AdamState<float>& gen_opt,
                                   Checkpoint& disc, AdamState<float>& disc_opt,
                                   const std::vector<PatchSequence>& data,
                                   const TrainConfig& cfg,
                                   const std::string& out_dir = "",
                                   long start_step = 0, long stop_after = 0);

struct ResumePoint {
    long step = 0;
    std::string checkpoint_path;  // empty when nothing to resume from
    std::string disc_path;        // stage 2 only
};

// Latest ckpt_step*.pxlm in out_dir, if any.
ResumePoint find_resume_point(const std::string& out_dir);

std::string checkpoint_path(const std::string& out_dir, long step);
std::string disc_checkpoint_path(const std::string& out_dir, long step);

// losses.csv helpers (whole-file atomic rewrite keeps interrupted runs
// identical to uninterrupted ones after resume)
std::string loss_csv_path(const std::string& out_dir);
std::vector<LossReport> read_loss_csv(const std::string& path);
void write_loss_csv(const std::string& path,
                    const std::vector<LossReport>& reports);

}  // namespace pixelarm
