#pragma once

#include "pixelarm/transformer.hpp"

namespace pixelarm {

// Numerically stable pixel-wise binary cross-entropy from a raw logit:
// max(z,0) - z*t + log1p(exp(-|z|)).
template <class S>
double bce_from_logit(S z, int target) {
    const double zd = static_cast<double>(z);
    return std::max(zd, 0.0) - zd * target + std::log1p(std::exp(-std::abs(zd)));
}

struct LossParts {
    double sum = 0.0;  // summed over contributing pixels
    long pixels = 0;

    double mean() const { return pixels > 0 ? sum / pixels : 0.0; }
};

// Teacher-forced reconstruction loss. Position i's logits (row i, laid out
// horizon-major then row-major: l*H*W*C + r*W + c) are scored against the
// ground-truth patches i+1 .. i+L; positions whose targets run past the
// sequence end are excluded. When dlogits_sum is given it receives
// d(sum)/d(logits), i.e. sigmoid(z) - t per contributing element (zero for
// excluded positions); divide by the pixel total for the mean gradient.
template <class S>
LossParts loss_rec_parts(const Mat<S>& logits,
                         const std::vector<PatchGrid>& patches,
                         const ModelConfig& cfg,
                         Mat<S>* dlogits_sum = nullptr) {
    const long seq = static_cast<long>(patches.size());
    const long L = cfg.horizon;
    const long pd = cfg.patch_dim();
    if (logits.rows() != seq || logits.cols() != L * pd)
        throw DataError("loss_rec: logits shape mismatch");
    if (dlogits_sum) dlogits_sum->setZero(logits.rows(), logits.cols());

    LossParts parts;
    for (long i = 0; i + L < seq; ++i) {
        for (long l = 0; l < L; ++l) {
            const PatchGrid& target = patches[static_cast<std::size_t>(i + 1 + l)];
            for (int r = 0; r < cfg.patch_h; ++r) {
                for (int c = 0; c < cfg.patch_w; ++c) {
                    const long col = l * pd + r * cfg.patch_w + c;
                    const S z = logits(i, col);
                    const int tgt = target(r, c);
                    parts.sum += bce_from_logit(z, tgt);
                    if (dlogits_sum)
                        (*dlogits_sum)(i, col) =
                            sigmoid(z) - static_cast<S>(tgt);
                }
            }
        }
    }
    parts.pixels = std::max<long>(0, seq - L) * L * pd;
    return parts;
}

// Mean over all contributing pixels. Errors when the sequence is shorter
// than L + 1 (no contributing position).
template <class S>
double loss_rec(const Mat<S>& logits, const std::vector<PatchGrid>& patches,
                const ModelConfig& cfg) {
    LossParts parts = loss_rec_parts(logits, patches, cfg);
    if (parts.pixels == 0)
        throw DataError("loss_rec: no contributing position (sequence shorter "
                        "than horizon + 1)");
    return parts.mean();
}

enum class DiscLabel { real, fake };

// Binary cross-entropy of the discriminator's scalar score for `candidate`
// given the real prefix. The discriminator is a model-module transformer
// whose head emits one logit per position; the score is read at the
// candidate's position.
template <class S>
double loss_disc(const Parameters<S>& disc, const ModelConfig& cfg,
                 const PatchSequence& prefix, const PatchGrid& candidate,
                 DiscLabel label) {
    if (disc.head_rows() != 1)
        throw ConfigError("loss_disc: discriminator must have a scalar head");
    std::vector<PatchGrid> input = prefix.patches;
    input.push_back(candidate);
    Mat<S> x = to_input_matrix<S>(input, cfg);
    ForwardTrace<S> t = forward(disc, cfg, x);
    const S z = t.logits(t.logits.rows() - 1, 0);
    return bce_from_logit(z, label == DiscLabel::real ? 1 : 0);
}

// combined = rec + lambda_m * gen_adv
inline double loss_stage2(double rec, double gen_adv, double lambda_m) {
    return rec + lambda_m * gen_adv;
}

}  // namespace pixelarm
