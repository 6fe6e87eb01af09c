#pragma once

#include <cmath>

#include "pixelarm/model.hpp"

namespace pixelarm {

template <class S>
S sigmoid(S z) {
    if (z >= S(0)) return S(1) / (S(1) + std::exp(-z));
    const S e = std::exp(z);
    return e / (S(1) + e);
}

template <class S>
S silu(S z) {
    return z * sigmoid(z);
}

template <class S>
S silu_grad(S z) {
    const S s = sigmoid(z);
    return s * (S(1) + z * (S(1) - s));
}

// out_j = gain_j * x_j / sqrt(mean(x^2) + eps)
template <class S>
Vec<S> rmsnorm(const Vec<S>& x, const Vec<S>& gain, S eps) {
    const S ms = x.squaredNorm() / static_cast<S>(x.size());
    const S r = S(1) / std::sqrt(ms + eps);
    return (x.array() * gain.array()).matrix() * r;
}

// Row-wise rmsnorm over sequence positions.
template <class S>
Mat<S> rmsnorm_rows(const Mat<S>& x, const Vec<S>& gain, S eps) {
    Mat<S> out(x.rows(), x.cols());
    for (long i = 0; i < x.rows(); ++i) {
        const S ms = x.row(i).squaredNorm() / static_cast<S>(x.cols());
        const S r = S(1) / std::sqrt(ms + eps);
        out.row(i) = (x.row(i).array() * gain.transpose().array()) * r;
    }
    return out;
}

// dx and dgain for y = gain .* x * r, r = (mean(x^2)+eps)^-1/2:
//   dx = gain.*dy*r - x * (dot(gain.*dy, x) * r^3 / n)
template <class S>
void rmsnorm_rows_backward(const Mat<S>& x, const Vec<S>& gain, S eps,
                           const Mat<S>& dy, Mat<S>& dx, Vec<S>& dgain) {
    dx.resize(x.rows(), x.cols());
    const S n = static_cast<S>(x.cols());
    for (long i = 0; i < x.rows(); ++i) {
        const S ms = x.row(i).squaredNorm() / n;
        const S r = S(1) / std::sqrt(ms + eps);
        auto gdy = (dy.row(i).array() * gain.transpose().array());
        const S proj = (gdy * x.row(i).array()).sum() * r * r * r / n;
        dx.row(i) = (gdy * r).matrix() - x.row(i) * proj;
        dgain.array() +=
            (dy.row(i).array() * x.row(i).array()).transpose() * r;
    }
}

// Rotates consecutive pairs (x_2j, x_2j+1) by angle position * base^(-2j/dim),
// base 10000. Angles are computed in double regardless of S.
constexpr double kRopeBase = 10000.0;

template <class S>
Vec<S> rope_rotate(const Vec<S>& x, long position) {
    Vec<S> out(x.size());
    const long dim = x.size();
    for (long j = 0; 2 * j < dim; ++j) {
        const double omega =
            std::pow(kRopeBase, -2.0 * static_cast<double>(j) /
                                    static_cast<double>(dim));
        const double angle = static_cast<double>(position) * omega;
        const S c = static_cast<S>(std::cos(angle));
        const S s = static_cast<S>(std::sin(angle));
        const S x0 = x[2 * j];
        const S x1 = x[2 * j + 1];
        out[2 * j] = c * x0 - s * x1;
        out[2 * j + 1] = s * x0 + c * x1;
    }
    return out;
}

// Precomputed cos/sin tables for a head dimension, rows = positions.
template <class S>
struct RopeTable {
    Mat<S> cos_t, sin_t;  // n_positions x dim/2

    RopeTable(long n_positions, long dim) {
        cos_t.resize(n_positions, dim / 2);
        sin_t.resize(n_positions, dim / 2);
        for (long m = 0; m < n_positions; ++m) {
            for (long j = 0; 2 * j < dim; ++j) {
                const double omega =
                    std::pow(kRopeBase, -2.0 * static_cast<double>(j) /
                                            static_cast<double>(dim));
                const double angle = static_cast<double>(m) * omega;
                cos_t(m, j) = static_cast<S>(std::cos(angle));
                sin_t(m, j) = static_cast<S>(std::sin(angle));
            }
        }
    }

    // rotate rows of a (positions x dim) head block in place
    void apply(Eigen::Ref<Mat<S>> block) const {
        for (long m = 0; m < block.rows(); ++m) {
            for (long j = 0; 2 * j < block.cols(); ++j) {
                const S c = cos_t(m, j);
                const S s = sin_t(m, j);
                const S x0 = block(m, 2 * j);
                const S x1 = block(m, 2 * j + 1);
                block(m, 2 * j) = c * x0 - s * x1;
                block(m, 2 * j + 1) = s * x0 + c * x1;
            }
        }
    }

    // inverse rotation (transpose), for gradients
    void apply_inverse(Eigen::Ref<Mat<S>> block) const {
        for (long m = 0; m < block.rows(); ++m) {
            for (long j = 0; 2 * j < block.cols(); ++j) {
                const S c = cos_t(m, j);
                const S s = sin_t(m, j);
                const S x0 = block(m, 2 * j);
                const S x1 = block(m, 2 * j + 1);
                block(m, 2 * j) = c * x0 + s * x1;
                block(m, 2 * j + 1) = -s * x0 + c * x1;
            }
        }
    }
};

// down( silu(gate(x)) .* up(x) ), no biases; single-vector form.
template <class S>
Vec<S> swiglu_ffn(const Vec<S>& x, const Mat<S>& w_gate, const Mat<S>& w_up,
                  const Mat<S>& w_down) {
    Vec<S> g = w_gate * x;
    Vec<S> u = w_up * x;
    for (long i = 0; i < g.size(); ++i) g[i] = silu(g[i]) * u[i];
    return w_down * g;
}

// Linear projection of flattened {0,1} patch values.
template <class S>
Mat<S> embed_patches(const Mat<S>& x, const Parameters<S>& p) {
    return (x * p.w_in.transpose()).rowwise() + p.b_in.transpose();
}

// Head output for one hidden state: horizon*H*W*C raw logits (or 1 for a
// scalar head).
template <class S>
Vec<S> pixel_head(const Vec<S>& h, const Parameters<S>& p) {
    return p.w_head * h + p.b_head;
}

// p = sigmoid(z / T), elementwise
template <class S, class Derived>
Mat<S> to_probabilities(const Eigen::MatrixBase<Derived>& logits, S temperature) {
    Mat<S> out = logits;
    for (long i = 0; i < out.size(); ++i)
        out.data()[i] = sigmoid<S>(out.data()[i] / temperature);
    return out;
}

// bit = 1 iff probability > theta (strict)
template <class S>
PatchGrid binarize(const Vec<S>& probs, S theta, int patch_h, int patch_w) {
    PatchGrid out(patch_h, patch_w);
    for (int r = 0; r < patch_h; ++r)
        for (int c = 0; c < patch_w; ++c)
            out(r, c) = probs[r * patch_w + c] > theta ? 1 : 0;
    return out;
}

}  // namespace pixelarm
