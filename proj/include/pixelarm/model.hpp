#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pixelarm/common.hpp"
#include "pixelarm/patch.hpp"

namespace pixelarm {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct ModelConfig {
    int n_layers = 12;
    int hidden = 768;
    int n_heads = 12;
    int intermediate = 3072;
    int patch_h = 32;
    int patch_w = 32;
    int channels = 1;
    int horizon = 2;           // L: future patches predicted per position
    double temperature = 1.0;  // T inside the output sigmoid
    double threshold = 0.5;    // theta for binarization
    int max_positions = 360;
    double norm_epsilon = 1e-5;

    int head_dim() const { return hidden / n_heads; }
    int patch_dim() const { return patch_h * patch_w * channels; }
    int pixel_head_rows() const { return horizon * patch_dim(); }

    void validate() const {
        if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
        if (hidden < 1 || n_heads < 1 || hidden % n_heads != 0)
            throw ConfigError("hidden must be divisible by n_heads");
        if (head_dim() % 2 != 0)
            throw ConfigError("head dim must be even (rotary pairing)");
        if (intermediate < 1) throw ConfigError("intermediate must be >= 1");
        if (horizon < 1) throw ConfigError("horizon must be >= 1");
        if (!(threshold > 0.0 && threshold < 1.0))
            throw ConfigError("threshold must lie in (0, 1)");
        if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
        if (channels != 1) throw ConfigError("channels is fixed at 1");
        if (max_positions < 1) throw ConfigError("max_positions must be >= 1");
        if (!(norm_epsilon > 0.0)) throw ConfigError("norm_epsilon must be > 0");
    }
};

// pixel: head emits horizon*H*W*C logits per position
// scalar: head emits one real/fake logit per position (discriminator)
enum class HeadKind { pixel, scalar };

template <class S>
struct LayerParams {
    Vec<S> ln1_gain, ln2_gain;  // hidden
    Mat<S> wq, wk, wv, wo;      // hidden x hidden
    Mat<S> w_gate, w_up;        // intermediate x hidden
    Mat<S> w_down;              // hidden x intermediate
};

// Attention/FFN projections carry no biases; the input projection and the
// head do.
template <class S>
struct Parameters {
    Mat<S> w_in;  // hidden x patch_dim
    Vec<S> b_in;  // hidden
    std::vector<LayerParams<S>> layers;
    Vec<S> final_gain;  // hidden
    Mat<S> w_head;      // head_rows x hidden
    Vec<S> b_head;      // head_rows

    HeadKind head_kind = HeadKind::pixel;

    int head_rows() const { return static_cast<int>(w_head.rows()); }
};

enum class ParamKind { weight, gain, bias };

template <class S>
struct TensorRef {
    std::string name;
    S* data;
    std::size_t size;
    ParamKind kind;
};

// Fixed traversal order; this order also defines the checkpoint layout
// (each tensor serialized in Eigen column-major storage order).
template <class S>
std::vector<TensorRef<S>> tensor_refs(Parameters<S>& p) {
    std::vector<TensorRef<S>> refs;
    auto add = [&refs](const std::string& name, auto& m, ParamKind kind) {
        refs.push_back({name, m.data(), static_cast<std::size_t>(m.size()), kind});
    };
    add("w_in", p.w_in, ParamKind::weight);
    add("b_in", p.b_in, ParamKind::bias);
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const std::string pre = "layer" + std::to_string(i) + ".";
        LayerParams<S>& l = p.layers[i];
        add(pre + "ln1_gain", l.ln1_gain, ParamKind::gain);
        add(pre + "wq", l.wq, ParamKind::weight);
        add(pre + "wk", l.wk, ParamKind::weight);
        add(pre + "wv", l.wv, ParamKind::weight);
        add(pre + "wo", l.wo, ParamKind::weight);
        add(pre + "ln2_gain", l.ln2_gain, ParamKind::gain);
        add(pre + "w_gate", l.w_gate, ParamKind::weight);
        add(pre + "w_up", l.w_up, ParamKind::weight);
        add(pre + "w_down", l.w_down, ParamKind::weight);
    }
    add("final_gain", p.final_gain, ParamKind::gain);
    add("w_head", p.w_head, ParamKind::weight);
    add("b_head", p.b_head, ParamKind::bias);
    return refs;
}

template <class S>
std::vector<TensorRef<const S>> tensor_refs(const Parameters<S>& p) {
    std::vector<TensorRef<S>> mut =
        tensor_refs(const_cast<Parameters<S>&>(p));
    std::vector<TensorRef<const S>> refs;
    refs.reserve(mut.size());
    for (const TensorRef<S>& r : mut)
        refs.push_back({r.name, r.data, r.size, r.kind});
    return refs;
}

template <class S>
std::size_t parameter_count(const Parameters<S>& p) {
    std::size_t n = 0;
    for (const auto& r : tensor_refs(p)) n += r.size;
    return n;
}

template <class S>
Parameters<S> zeros_like(const Parameters<S>& p) {
    Parameters<S> z;
    z.head_kind = p.head_kind;
    z.w_in = Mat<S>::Zero(p.w_in.rows(), p.w_in.cols());
    z.b_in = Vec<S>::Zero(p.b_in.size());
    z.layers.resize(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const LayerParams<S>& l = p.layers[i];
        LayerParams<S>& o = z.layers[i];
        o.ln1_gain = Vec<S>::Zero(l.ln1_gain.size());
        o.ln2_gain = Vec<S>::Zero(l.ln2_gain.size());
        o.wq = Mat<S>::Zero(l.wq.rows(), l.wq.cols());
        o.wk = Mat<S>::Zero(l.wk.rows(), l.wk.cols());
        o.wv = Mat<S>::Zero(l.wv.rows(), l.wv.cols());
        o.wo = Mat<S>::Zero(l.wo.rows(), l.wo.cols());
        o.w_gate = Mat<S>::Zero(l.w_gate.rows(), l.w_gate.cols());
        o.w_up = Mat<S>::Zero(l.w_up.rows(), l.w_up.cols());
        o.w_down = Mat<S>::Zero(l.w_down.rows(), l.w_down.cols());
    }
    z.final_gain = Vec<S>::Zero(p.final_gain.size());
    z.w_head = Mat<S>::Zero(p.w_head.rows(), p.w_head.cols());
    z.b_head = Vec<S>::Zero(p.b_head.size());
    return z;
}

// dst += a * src, tensor by tensor
template <class S>
void axpy(Parameters<S>& dst, const Parameters<S>& src, S a) {
    auto d = tensor_refs(dst);
    auto s = tensor_refs(src);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t k = 0; k < d[i].size; ++k)
            d[i].data[k] += a * s[i].data[k];
}

// Shape allocation without initialization (checkpoint loading).
template <class S>
Parameters<S> allocate_parameters(const ModelConfig& cfg,
                                  HeadKind head = HeadKind::pixel) {
    cfg.validate();
    Parameters<S> p;
    p.head_kind = head;
    p.w_in.setZero(cfg.hidden, cfg.patch_dim());
    p.b_in.setZero(cfg.hidden);
    p.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    for (LayerParams<S>& l : p.layers) {
        l.ln1_gain.setZero(cfg.hidden);
        l.ln2_gain.setZero(cfg.hidden);
        l.wq.setZero(cfg.hidden, cfg.hidden);
        l.wk.setZero(cfg.hidden, cfg.hidden);
        l.wv.setZero(cfg.hidden, cfg.hidden);
        l.wo.setZero(cfg.hidden, cfg.hidden);
        l.w_gate.setZero(cfg.intermediate, cfg.hidden);
        l.w_up.setZero(cfg.intermediate, cfg.hidden);
        l.w_down.setZero(cfg.hidden, cfg.intermediate);
    }
    p.final_gain.setZero(cfg.hidden);
    const int rows = head == HeadKind::pixel ? cfg.pixel_head_rows() : 1;
    p.w_head.setZero(rows, cfg.hidden);
    p.b_head.setZero(rows);
    return p;
}

// Block weights ~ N(0, 0.02^2); residual-output projections (wo, w_down)
// scaled by 1/sqrt(2*n_layers); norm gains 1; pixel-head bias -2 (blank
// prior: most pixels are background), scalar-head bias 0.
template <class S>
Parameters<S> init_parameters(const ModelConfig& cfg, std::uint64_t seed,
                              HeadKind head = HeadKind::pixel) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.02);
    const double res_scale = 1.0 / std::sqrt(2.0 * cfg.n_layers);
    auto fill = [&](Mat<S>& m, long rows, long cols, double scale) {
        m.resize(rows, cols);
        for (long i = 0; i < m.size(); ++i)
            m.data()[i] = static_cast<S>(dist(rng) * scale);
    };

    Parameters<S> p;
    p.head_kind = head;
    fill(p.w_in, cfg.hidden, cfg.patch_dim(), 1.0);
    p.b_in = Vec<S>::Zero(cfg.hidden);
    p.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    for (LayerParams<S>& l : p.layers) {
        l.ln1_gain = Vec<S>::Ones(cfg.hidden);
        fill(l.wq, cfg.hidden, cfg.hidden, 1.0);
        fill(l.wk, cfg.hidden, cfg.hidden, 1.0);
        fill(l.wv, cfg.hidden, cfg.hidden, 1.0);
        fill(l.wo, cfg.hidden, cfg.hidden, res_scale);
        l.ln2_gain = Vec<S>::Ones(cfg.hidden);
        fill(l.w_gate, cfg.intermediate, cfg.hidden, 1.0);
        fill(l.w_up, cfg.intermediate, cfg.hidden, 1.0);
        fill(l.w_down, cfg.hidden, cfg.intermediate, res_scale);
    }
    p.final_gain = Vec<S>::Ones(cfg.hidden);
    const int rows = head == HeadKind::pixel ? cfg.pixel_head_rows() : 1;
    fill(p.w_head, rows, cfg.hidden, 1.0);
    p.b_head = Vec<S>::Constant(rows, head == HeadKind::pixel
                                          ? static_cast<S>(-2)
                                          : static_cast<S>(0));
    return p;
}

// Flattened {0,1} patch rows (row-major pixel order r*W + c), one sequence
// position per matrix row.
template <class S>
Mat<S> to_input_matrix(const std::vector<PatchGrid>& patches,
                       const ModelConfig& cfg) {
    Mat<S> x(static_cast<long>(patches.size()), cfg.patch_dim());
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const PatchGrid& p = patches[i];
        if (p.rows() != cfg.patch_h || p.cols() != cfg.patch_w)
            throw DataError("patch geometry does not match model config");
        for (long r = 0; r < p.rows(); ++r)
            for (long c = 0; c < p.cols(); ++c)
                x(static_cast<long>(i), r * cfg.patch_w + c) =
                    static_cast<S>(p(r, c));
    }
    return x;
}

template <class S>
Parameters<S> cast_parameters(const Parameters<S>& p) = delete;

template <class To, class From>
Parameters<To> cast_parameters(const Parameters<From>& p) {
    Parameters<To> out;
    out.head_kind = p.head_kind;
    out.w_in = p.w_in.template cast<To>();
    out.b_in = p.b_in.template cast<To>();
    out.layers.resize(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const LayerParams<From>& l = p.layers[i];
        LayerParams<To>& o = out.layers[i];
        o.ln1_gain = l.ln1_gain.template cast<To>();
        o.ln2_gain = l.ln2_gain.template cast<To>();
        o.wq = l.wq.template cast<To>();
        o.wk = l.wk.template cast<To>();
        o.wv = l.wv.template cast<To>();
        o.wo = l.wo.template cast<To>();
        o.w_gate = l.w_gate.template cast<To>();
        o.w_up = l.w_up.template cast<To>();
        o.w_down = l.w_down.template cast<To>();
    }
    out.final_gain = p.final_gain.template cast<To>();
    out.w_head = p.w_head.template cast<To>();
    out.b_head = p.b_head.template cast<To>();
    return out;
}

}  // namespace pixelarm
