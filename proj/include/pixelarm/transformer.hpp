#pragma once

#include "pixelarm/ops.hpp"

namespace pixelarm {

template <class S>
struct LayerTrace {
    Mat<S> input;              // block input (positions x hidden)
    Mat<S> n1;                 // first rmsnorm output
    Mat<S> q, k, v;            // q/k post-rotation, heads concatenated
    std::vector<Mat<S>> attn;  // per head: causal softmax probabilities
    Mat<S> attn_out;           // heads concatenated, before the o-projection
    Mat<S> mid;                // input + attention residual
    Mat<S> n2;                 // second rmsnorm output
    Mat<S> gate, up;           // pre-activation FFN branches
    Mat<S> act;                // silu(gate) .* up
};

template <class S>
struct ForwardTrace {
    Mat<S> x;   // input rows (positions x patch_dim)
    Mat<S> h0;  // embedded input
    std::vector<LayerTrace<S>> layers;
    Mat<S> final_in;  // before the final rmsnorm
    Mat<S> hidden;    // h_N^out after the final rmsnorm
    Mat<S> logits;    // positions x head_rows
};

// Full causal forward pass; keeps every activation needed by backward().
template <class S>
ForwardTrace<S> forward(const Parameters<S>& p, const ModelConfig& cfg,
                        const Mat<S>& x) {
    const long seq = x.rows();
    if (seq > cfg.max_positions)
        throw DataError("sequence length " + std::to_string(seq) +
                        " exceeds max_positions " +
                        std::to_string(cfg.max_positions));
    const long d = cfg.hidden;
    const long hd = cfg.head_dim();
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(hd)));
    const S eps = static_cast<S>(cfg.norm_epsilon);
    const RopeTable<S> rope(seq, hd);

    ForwardTrace<S> t;
    t.x = x;
    t.h0 = embed_patches(x, p);
    Mat<S> h = t.h0;
    t.layers.resize(p.layers.size());

    for (std::size_t li = 0; li < p.layers.size(); ++li) {
        const LayerParams<S>& l = p.layers[li];
        LayerTrace<S>& lt = t.layers[li];
        lt.input = h;
        lt.n1 = rmsnorm_rows(h, l.ln1_gain, eps);
        lt.q = lt.n1 * l.wq.transpose();
        lt.k = lt.n1 * l.wk.transpose();
        lt.v = lt.n1 * l.wv.transpose();
        lt.attn.resize(static_cast<std::size_t>(cfg.n_heads));
        lt.attn_out.resize(seq, d);
        for (int hh = 0; hh < cfg.n_heads; ++hh) {
            auto qb = lt.q.block(0, hh * hd, seq, hd);
            auto kb = lt.k.block(0, hh * hd, seq, hd);
            rope.apply(qb);
            rope.apply(kb);
            Mat<S>& A = lt.attn[static_cast<std::size_t>(hh)];
            A = Mat<S>::Zero(seq, seq);
            for (long i = 0; i < seq; ++i) {
                S mx = std::numeric_limits<S>::lowest();
                for (long j = 0; j <= i; ++j) {
                    A(i, j) = qb.row(i).dot(kb.row(j)) * scale;
                    mx = std::max(mx, A(i, j));
                }
                S denom = S(0);
                for (long j = 0; j <= i; ++j) {
                    A(i, j) = std::exp(A(i, j) - mx);
                    denom += A(i, j);
                }
                for (long j = 0; j <= i; ++j) A(i, j) /= denom;
            }
            lt.attn_out.block(0, hh * hd, seq, hd) =
                A * lt.v.block(0, hh * hd, seq, hd);
        }
        h = lt.input + lt.attn_out * l.wo.transpose();
        lt.mid = h;
        lt.n2 = rmsnorm_rows(h, l.ln2_gain, eps);
        lt.gate = lt.n2 * l.w_gate.transpose();
        lt.up = lt.n2 * l.w_up.transpose();
        lt.act.resize(seq, cfg.intermediate);
        for (long i = 0; i < lt.act.size(); ++i)
            lt.act.data()[i] = silu(lt.gate.data()[i]) * lt.up.data()[i];
        h = lt.mid + lt.act * l.w_down.transpose();
    }

    t.final_in = h;
    t.hidden = rmsnorm_rows(h, p.final_gain, eps);
    t.logits = (t.hidden * p.w_head.transpose()).rowwise() +
               p.b_head.transpose();
    return t;
}

// Accumulates parameter gradients into grads (zeros_like or a running
// accumulator) starting from gradients at the final rmsnorm output h_N^out
// (the head is bypassed; used by classification fine-tuning, which reads the
// hidden state directly). When dx is non-null the gradient w.r.t. the input
// rows is written there (used by the straight-through estimator in stage 2).
template <class S>
void backward_from_hidden(const Parameters<S>& p, const ModelConfig& cfg,
                          const ForwardTrace<S>& t, const Mat<S>& dhidden,
                          Parameters<S>& grads, Mat<S>* dx = nullptr) {
    const long seq = t.x.rows();
    const long d = cfg.hidden;
    const long hd = cfg.head_dim();
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(hd)));
    const S eps = static_cast<S>(cfg.norm_epsilon);
    const RopeTable<S> rope(seq, hd);

    Mat<S> dh;
    rmsnorm_rows_backward(t.final_in, p.final_gain, eps, dhidden, dh,
                          grads.final_gain);

    for (long li = static_cast<long>(p.layers.size()) - 1; li >= 0; --li) {
        const LayerParams<S>& l = p.layers[static_cast<std::size_t>(li)];
        const LayerTrace<S>& lt = t.layers[static_cast<std::size_t>(li)];
        LayerParams<S>& gl = grads.layers[static_cast<std::size_t>(li)];

        // FFN: out = mid + act * w_down^T
        gl.w_down += dh.transpose() * lt.act;
        Mat<S> dact = dh * l.w_down;
        Mat<S> dgate(seq, cfg.intermediate), dup(seq, cfg.intermediate);
        for (long i = 0; i < dact.size(); ++i) {
            const S g = lt.gate.data()[i];
            dgate.data()[i] = dact.data()[i] * lt.up.data()[i] * silu_grad(g);
            dup.data()[i] = dact.data()[i] * silu(g);
        }
        gl.w_gate += dgate.transpose() * lt.n2;
        gl.w_up += dup.transpose() * lt.n2;
        Mat<S> dn2 = dgate * l.w_gate + dup * l.w_up;
        Mat<S> dmid_norm;
        rmsnorm_rows_backward(lt.mid, l.ln2_gain, eps, dn2, dmid_norm,
                              gl.ln2_gain);
        Mat<S> dmid = dh + dmid_norm;

        // attention: mid = input + attn_out * wo^T
        gl.wo += dmid.transpose() * lt.attn_out;
        Mat<S> dattn_out = dmid * l.wo;
        Mat<S> dq = Mat<S>::Zero(seq, d);
        Mat<S> dk = Mat<S>::Zero(seq, d);
        Mat<S> dv(seq, d);
        for (int hh = 0; hh < cfg.n_heads; ++hh) {
            const Mat<S>& A = lt.attn[static_cast<std::size_t>(hh)];
            auto dout_h = dattn_out.block(0, hh * hd, seq, hd);
            auto vb = lt.v.block(0, hh * hd, seq, hd);
            auto qb = lt.q.block(0, hh * hd, seq, hd);
            auto kb = lt.k.block(0, hh * hd, seq, hd);
            dv.block(0, hh * hd, seq, hd) = A.transpose() * dout_h;
            Mat<S> dA = dout_h * vb.transpose();
            // softmax rows: ds = A .* (dA - rowdot(dA, A))
            Mat<S> ds(seq, seq);
            for (long i = 0; i < seq; ++i) {
                S dot = S(0);
                for (long j = 0; j <= i; ++j) dot += dA(i, j) * A(i, j);
                for (long j = 0; j < seq; ++j)
                    ds(i, j) = j <= i ? A(i, j) * (dA(i, j) - dot) : S(0);
            }
            dq.block(0, hh * hd, seq, hd) = ds * kb * scale;
            dk.block(0, hh * hd, seq, hd) = ds.transpose() * qb * scale;
            rope.apply_inverse(dq.block(0, hh * hd, seq, hd));
            rope.apply_inverse(dk.block(0, hh * hd, seq, hd));
        }
        gl.wq += dq.transpose() * lt.n1;
        gl.wk += dk.transpose() * lt.n1;
        gl.wv += dv.transpose() * lt.n1;
        Mat<S> dn1 = dq * l.wq + dk * l.wk + dv * l.wv;
        Mat<S> dinput_norm;
        rmsnorm_rows_backward(lt.input, l.ln1_gain, eps, dn1, dinput_norm,
                              gl.ln1_gain);
        dh = dmid + dinput_norm;
    }

    grads.w_in += dh.transpose() * t.x;
    grads.b_in += dh.colwise().sum().transpose();
    if (dx) *dx = dh * p.w_in;
}

// Parameter gradients for the given output-logit gradients.
template <class S>
void backward(const Parameters<S>& p, const ModelConfig& cfg,
              const ForwardTrace<S>& t, const Mat<S>& dlogits,
              Parameters<S>& grads, Mat<S>* dx = nullptr) {
    grads.w_head += dlogits.transpose() * t.hidden;
    grads.b_head += dlogits.colwise().sum().transpose();
    Mat<S> dhidden = dlogits * p.w_head;
    backward_from_hidden(p, cfg, t, dhidden, grads, dx);
}

}  // namespace pixelarm
