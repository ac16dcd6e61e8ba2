// From-scratch convolutional depth regressor: conv -> rectifier -> mean-pool
// stacks followed by fully connected layers ending in one scalar output.
// Exact backpropagation, momentum SGD with weight decay and a linear decay
// schedule, and per-layer freezing for fine-tuning.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/math.hpp"

namespace endo {

struct ConvLayerSpec {
    int out_channels = 0;
    int kernel = 3;   // odd; zero padding kernel/2 keeps geometry simple
    int stride = 1;
    int pool = 1;     // mean-pool factor applied after the rectifier
};

struct NetworkSpec {
    int patch_size = 64;
    int in_channels = 3;
    std::vector<ConvLayerSpec> conv{{16, 3, 1, 2},
                                    {32, 3, 1, 2},
                                    {32, 3, 1, 2},
                                    {64, 3, 1, 2},
                                    {64, 3, 1, 1}};
    std::vector<int> fc{256, 128, 64, 1};
    double init_output_bias = 0.0;  // bias of the final (linear) unit

    int n_layers() const { return static_cast<int>(conv.size() + fc.size()); }
};

// Spatial geometry of one conv layer.
struct ConvDims {
    int in_ch = 0, in_hw = 0;
    int conv_hw = 0;  // after convolution
    int out_hw = 0;   // after pooling
};

inline void validate_spec(const NetworkSpec& spec) {
    if (spec.patch_size < 1) throw ParameterError("patch_size must be >= 1");
    if (spec.in_channels < 1) throw ParameterError("in_channels must be >= 1");
    if (spec.conv.empty() || spec.fc.empty())
        throw ParameterError("spec needs at least one conv and one fc layer");
    if (spec.fc.back() != 1)
        throw ParameterError("final fc layer must have width 1");
    for (const auto& c : spec.conv) {
        if (c.out_channels < 1) throw ParameterError("conv out_channels must be >= 1");
        if (c.kernel < 1 || c.kernel % 2 == 0)
            throw ParameterError("conv kernel must be odd and positive");
        if (c.stride < 1 || c.pool < 1)
            throw ParameterError("conv stride and pool must be >= 1");
    }
    for (int wdt : spec.fc)
        if (wdt < 1) throw ParameterError("fc widths must be >= 1");
}

inline std::vector<ConvDims> conv_geometry(const NetworkSpec& spec) {
    validate_spec(spec);
    std::vector<ConvDims> dims;
    dims.reserve(spec.conv.size());
    int ch = spec.in_channels, hw = spec.patch_size;
    for (const auto& c : spec.conv) {
        ConvDims d;
        d.in_ch = ch;
        d.in_hw = hw;
        int pad = c.kernel / 2;
        d.conv_hw = (hw + 2 * pad - c.kernel) / c.stride + 1;
        if (d.conv_hw < 1) throw ParameterError("conv stride collapses the patch");
        d.out_hw = (d.conv_hw + c.pool - 1) / c.pool;
        dims.push_back(d);
        ch = c.out_channels;
        hw = d.out_hw;
    }
    return dims;
}

inline int flatten_width(const NetworkSpec& spec) {
    auto dims = conv_geometry(spec);
    int hw = dims.back().out_hw;
    return spec.conv.back().out_channels * hw * hw;
}

// ---------------------------------------------------------------------------

struct NetworkWeights {
    NetworkSpec spec;
    // Layer order: conv layers, then fc layers. Conv weights are indexed
    // ((oc*in_ch + ic)*k + ky)*k + kx; fc weights are row-major (out, in).
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<std::uint8_t> trainable;  // per layer
};

enum class TrainablePattern { all, fc_only };

inline void set_trainable(NetworkWeights& w, TrainablePattern pattern) {
    std::size_t n_conv = w.spec.conv.size();
    for (std::size_t l = 0; l < w.trainable.size(); ++l)
        w.trainable[l] = (pattern == TrainablePattern::all || l >= n_conv) ? 1 : 0;
}

// He-style fan-in-scaled uniform initialization, deterministic per seed.
inline NetworkWeights init_weights(const NetworkSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    NetworkWeights w;
    w.spec = spec;
    auto dims = conv_geometry(spec);
    Pcg32 rng = make_stream(seed, 0x696e6974ULL, 0);
    auto fill = [&](std::vector<double>& v, int fan_in) {
        double limit = std::sqrt(6.0 / fan_in);
        for (auto& x : v) x = rng.uniform(-limit, limit);
    };
    for (std::size_t l = 0; l < spec.conv.size(); ++l) {
        const auto& c = spec.conv[l];
        int fan_in = dims[l].in_ch * c.kernel * c.kernel;
        std::vector<double> wt(static_cast<std::size_t>(c.out_channels) *
                               dims[l].in_ch * c.kernel * c.kernel);
        fill(wt, fan_in);
        w.weights.push_back(std::move(wt));
        w.biases.push_back(std::vector<double>(
            static_cast<std::size_t>(c.out_channels), 0.0));
    }
    int in_w = flatten_width(spec);
    for (std::size_t l = 0; l < spec.fc.size(); ++l) {
        int out_w = spec.fc[l];
        std::vector<double> wt(static_cast<std::size_t>(out_w) * in_w);
        fill(wt, in_w);
        w.weights.push_back(std::move(wt));
        w.biases.push_back(std::vector<double>(static_cast<std::size_t>(out_w), 0.0));
        in_w = out_w;
    }
    w.biases.back()[0] = spec.init_output_bias;
    w.trainable.assign(static_cast<std::size_t>(spec.n_layers()), 1);
    return w;
}

// ---------------------------------------------------------------------------

struct ForwardCache {
    // acts[l] = input activation of layer l (acts[0] is the patch);
    // acts[n_layers] would be the scalar output, stored in `output`.
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> conv_z;  // pre-rectifier conv outputs
    std::vector<std::vector<double>> fc_z;    // pre-rectifier fc outputs
    double output = 0.0;
};

namespace detail {

inline void conv_forward(const ConvLayerSpec& c, const ConvDims& d,
                         const std::vector<double>& weight,
                         const std::vector<double>& bias,
                         const double* in, double* z) {
    const int K = c.kernel, pad = K / 2, S = c.stride;
    const int IW = d.in_hw, OW = d.conv_hw, IC = d.in_ch, OC = c.out_channels;
    for (int oc = 0; oc < OC; ++oc) {
        double* zplane = z + static_cast<std::size_t>(oc) * OW * OW;
        double b = bias[static_cast<std::size_t>(oc)];
        for (int i = 0; i < OW * OW; ++i) zplane[i] = b;
        for (int ic = 0; ic < IC; ++ic) {
            const double* iplane = in + static_cast<std::size_t>(ic) * IW * IW;
            const double* wk =
                weight.data() +
                (static_cast<std::size_t>(oc) * IC + ic) * K * K;
            for (int ky = 0; ky < K; ++ky)
                for (int kx = 0; kx < K; ++kx) {
                    double wv = wk[static_cast<std::size_t>(ky) * K + kx];
                    int off_x = kx - pad, off_y = ky - pad;
                    for (int oy = 0; oy < OW; ++oy) {
                        int iy = oy * S + off_y;
                        if (iy < 0 || iy >= IW) continue;
                        const double* irow = iplane + static_cast<std::size_t>(iy) * IW;
                        double* zrow = zplane + static_cast<std::size_t>(oy) * OW;
                        int ox_lo = off_x < 0 ? (-off_x + S - 1) / S : 0;
                        int ox_hi = (IW - 1 - off_x) / S;
                        if (ox_hi > OW - 1) ox_hi = OW - 1;
                        if (S == 1) {
                            const double* ir = irow + off_x;
                            for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                zrow[ox] += wv * ir[ox];
                        } else {
                            for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                zrow[ox] += wv * irow[ox * S + off_x];
                        }
                    }
                }
        }
    }
}

// Rectifier then mean pooling (windows clipped at the border).
inline void relu_pool_forward(const ConvLayerSpec& c, const ConvDims& d, int oc_n,
                              const double* z, double* out) {
    const int CW = d.conv_hw, OW = d.out_hw, P = c.pool;
    for (int oc = 0; oc < oc_n; ++oc) {
        const double* zp = z + static_cast<std::size_t>(oc) * CW * CW;
        double* op = out + static_cast<std::size_t>(oc) * OW * OW;
        for (int py = 0; py < OW; ++py) {
            int y0 = py * P, y1 = std::min(CW, y0 + P);
            for (int px = 0; px < OW; ++px) {
                int x0 = px * P, x1 = std::min(CW, x0 + P);
                double acc = 0.0;
                for (int yy = y0; yy < y1; ++yy)
                    for (int xx = x0; xx < x1; ++xx) {
                        double v = zp[static_cast<std::size_t>(yy) * CW + xx];
                        if (v > 0.0) acc += v;
                    }
                op[static_cast<std::size_t>(py) * OW + px] =
                    acc / ((y1 - y0) * (x1 - x0));
            }
        }
    }
}

}  // namespace detail

// Evaluates the network on one patch (planar layout, in_channels planes of
// patch_size^2 values). Returns the scalar unary output; the cache feeds
// backward().
inline double forward(const NetworkWeights& w, std::span<const float> patch,
                      ForwardCache& cache) {
    const NetworkSpec& spec = w.spec;
    auto dims = conv_geometry(spec);
    std::size_t want = static_cast<std::size_t>(spec.in_channels) *
                       spec.patch_size * spec.patch_size;
    if (patch.size() != want)
        throw ShapeError("patch size does not match the network input shape");

    cache.acts.assign(static_cast<std::size_t>(spec.n_layers()), {});
    cache.conv_z.assign(spec.conv.size(), {});
    cache.fc_z.assign(spec.fc.size(), {});

    cache.acts[0].resize(want);
    for (std::size_t i = 0; i < want; ++i)
        cache.acts[0][i] = static_cast<double>(patch[i]);

    for (std::size_t l = 0; l < spec.conv.size(); ++l) {
        const auto& c = spec.conv[l];
        const auto& d = dims[l];
        cache.conv_z[l].assign(static_cast<std::size_t>(c.out_channels) *
                                   d.conv_hw * d.conv_hw,
                               0.0);
        detail::conv_forward(c, d, w.weights[l], w.biases[l],
                             cache.acts[l].data(), cache.conv_z[l].data());
        std::vector<double> pooled(static_cast<std::size_t>(c.out_channels) *
                                   d.out_hw * d.out_hw);
        detail::relu_pool_forward(c, d, c.out_channels, cache.conv_z[l].data(),
                                  pooled.data());
        cache.acts[l + 1] = std::move(pooled);
    }

    std::size_t base = spec.conv.size();
    for (std::size_t l = 0; l < spec.fc.size(); ++l) {
        const std::vector<double>& a = cache.acts[base + l];
        int in_w = static_cast<int>(a.size());
        int out_w = spec.fc[l];
        std::vector<double> z(static_cast<std::size_t>(out_w));
        const std::vector<double>& W = w.weights[base + l];
        for (int o = 0; o < out_w; ++o) {
            const double* row = W.data() + static_cast<std::size_t>(o) * in_w;
            double acc = w.biases[base + l][static_cast<std::size_t>(o)];
            for (int i = 0; i < in_w; ++i) acc += row[i] * a[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(o)] = acc;
        }
        cache.fc_z[l] = z;
        if (l + 1 < spec.fc.size()) {
            for (auto& v : z) v = v > 0.0 ? v : 0.0;
            cache.acts[base + l + 1] = std::move(z);
        } else {
            cache.output = z[0];
        }
    }
    if (!std::isfinite(cache.output))
        throw DivergenceError("non-finite network output");
    return cache.output;
}

struct NetworkGrads {
    // Same shapes as NetworkWeights for trainable layers; frozen layers keep
    // empty vectors (they receive no gradient entries).
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

inline NetworkGrads make_zero_grads(const NetworkWeights& w) {
    NetworkGrads g;
    g.weights.resize(w.weights.size());
    g.biases.resize(w.biases.size());
    for (std::size_t l = 0; l < w.weights.size(); ++l)
        if (w.trainable[l]) {
            g.weights[l].assign(w.weights[l].size(), 0.0);
            g.biases[l].assign(w.biases[l].size(), 0.0);
        }
    return g;
}

inline void accumulate_grads(NetworkGrads& acc, const NetworkGrads& g) {
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        for (std::size_t i = 0; i < g.weights[l].size(); ++i)
            acc.weights[l][i] += g.weights[l][i];
        for (std::size_t i = 0; i < g.biases[l].size(); ++i)
            acc.biases[l][i] += g.biases[l][i];
    }
}

// Exact gradients of (upstream_grad * output) w.r.t. trainable parameters,
// accumulated into `into`. Backpropagation stops once every remaining
// earlier layer is frozen.
inline void backward(const NetworkWeights& w, const ForwardCache& cache,
                     double upstream_grad, NetworkGrads& into) {
    const NetworkSpec& spec = w.spec;
    if (cache.acts.size() != static_cast<std::size_t>(spec.n_layers()) ||
        cache.conv_z.size() != spec.conv.size() ||
        cache.fc_z.size() != spec.fc.size())
        throw ShapeError("forward cache does not match the network spec");
    auto dims = conv_geometry(spec);
    std::size_t n_conv = spec.conv.size();

    int first_trainable = spec.n_layers();
    for (int l = 0; l < spec.n_layers(); ++l)
        if (w.trainable[static_cast<std::size_t>(l)]) {
            first_trainable = l;
            break;
        }
    if (first_trainable == spec.n_layers() || upstream_grad == 0.0) return;

    // --- fully connected stack ---------------------------------------------
    std::vector<double> dz{upstream_grad};  // gradient w.r.t. fc_z[last]
    for (int l = static_cast<int>(spec.fc.size()) - 1; l >= 0; --l) {
        std::size_t lay = n_conv + static_cast<std::size_t>(l);
        const std::vector<double>& a = cache.acts[lay];
        int in_w = static_cast<int>(a.size());
        int out_w = spec.fc[static_cast<std::size_t>(l)];
        if (l < static_cast<int>(spec.fc.size()) - 1) {
            // dz currently holds grad w.r.t. post-rectifier activation.
            const std::vector<double>& z = cache.fc_z[static_cast<std::size_t>(l)];
            for (int o = 0; o < out_w; ++o)
                if (z[static_cast<std::size_t>(o)] <= 0.0)
                    dz[static_cast<std::size_t>(o)] = 0.0;
        }
        if (w.trainable[lay]) {
            auto& gw = into.weights[lay];
            auto& gb = into.biases[lay];
            for (int o = 0; o < out_w; ++o) {
                double g = dz[static_cast<std::size_t>(o)];
                if (g == 0.0) continue;
                gb[static_cast<std::size_t>(o)] += g;
                double* grow = gw.data() + static_cast<std::size_t>(o) * in_w;
                for (int i = 0; i < in_w; ++i)
                    grow[i] += g * a[static_cast<std::size_t>(i)];
            }
        }
        if (static_cast<int>(lay) == first_trainable) return;
        // Gradient w.r.t. the layer input.
        std::vector<double> da(static_cast<std::size_t>(in_w), 0.0);
        const std::vector<double>& W = w.weights[lay];
        for (int o = 0; o < out_w; ++o) {
            double g = dz[static_cast<std::size_t>(o)];
            if (g == 0.0) continue;
            const double* row = W.data() + static_cast<std::size_t>(o) * in_w;
            for (int i = 0; i < in_w; ++i) da[static_cast<std::size_t>(i)] += g * row[i];
        }
        dz = std::move(da);
    }

    // --- conv stack ---------------------------------------------------------
    // dz now holds the gradient w.r.t. the flattened final conv activation.
    for (int l = static_cast<int>(n_conv) - 1; l >= 0; --l) {
        const auto& c = spec.conv[static_cast<std::size_t>(l)];
        const auto& d = dims[static_cast<std::size_t>(l)];
        const int CW = d.conv_hw, OW = d.out_hw, P = c.pool;
        const std::vector<double>& z = cache.conv_z[static_cast<std::size_t>(l)];
        // Un-pool and apply the rectifier mask: grad w.r.t. conv_z.
        std::vector<double> dzc(z.size(), 0.0);
        for (int oc = 0; oc < c.out_channels; ++oc) {
            const double* zp = z.data() + static_cast<std::size_t>(oc) * CW * CW;
            double* dp = dzc.data() + static_cast<std::size_t>(oc) * CW * CW;
            const double* up = dz.data() + static_cast<std::size_t>(oc) * OW * OW;
            for (int py = 0; py < OW; ++py) {
                int y0 = py * P, y1 = std::min(CW, y0 + P);
                for (int px = 0; px < OW; ++px) {
                    int x0 = px * P, x1 = std::min(CW, x0 + P);
                    double g = up[static_cast<std::size_t>(py) * OW + px] /
                               ((y1 - y0) * (x1 - x0));
                    if (g == 0.0) continue;
                    for (int yy = y0; yy < y1; ++yy)
                        for (int xx = x0; xx < x1; ++xx) {
                            std::size_t at = static_cast<std::size_t>(yy) * CW + xx;
                            if (zp[at] > 0.0) dp[at] += g;
                        }
                }
            }
        }
        const std::vector<double>& in = cache.acts[static_cast<std::size_t>(l)];
        const int K = c.kernel, pad = K / 2, S = c.stride, IW = d.in_hw,
                  IC = d.in_ch;
        if (w.trainable[static_cast<std::size_t>(l)]) {
            auto& gw = into.weights[static_cast<std::size_t>(l)];
            auto& gb = into.biases[static_cast<std::size_t>(l)];
            for (int oc = 0; oc < c.out_channels; ++oc) {
                const double* dzp = dzc.data() + static_cast<std::size_t>(oc) * CW * CW;
                double bacc = 0.0;
                for (int i = 0; i < CW * CW; ++i) bacc += dzp[i];
                gb[static_cast<std::size_t>(oc)] += bacc;
                for (int ic = 0; ic < IC; ++ic) {
                    const double* iplane =
                        in.data() + static_cast<std::size_t>(ic) * IW * IW;
                    double* wk = gw.data() +
                                 (static_cast<std::size_t>(oc) * IC + ic) * K * K;
                    for (int ky = 0; ky < K; ++ky)
                        for (int kx = 0; kx < K; ++kx) {
                            int off_x = kx - pad, off_y = ky - pad;
                            double acc = 0.0;
                            for (int oy = 0; oy < CW; ++oy) {
                                int iy = oy * S + off_y;
                                if (iy < 0 || iy >= IW) continue;
                                const double* irow =
                                    iplane + static_cast<std::size_t>(iy) * IW;
                                const double* drow =
                                    dzp + static_cast<std::size_t>(oy) * CW;
                                int ox_lo = off_x < 0 ? (-off_x + S - 1) / S : 0;
                                int ox_hi = (IW - 1 - off_x) / S;
                                if (ox_hi > CW - 1) ox_hi = CW - 1;
                                if (S == 1) {
                                    const double* ir = irow + off_x;
                                    for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                        acc += drow[ox] * ir[ox];
                                } else {
                                    for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                        acc += drow[ox] * irow[ox * S + off_x];
                                }
                            }
                            wk[static_cast<std::size_t>(ky) * K + kx] += acc;
                        }
                }
            }
        }
        if (l == first_trainable) return;
        // Gradient w.r.t. the layer input (needed by the next layer down).
        std::vector<double> din(in.size(), 0.0);
        const std::vector<double>& W = w.weights[static_cast<std::size_t>(l)];
        for (int oc = 0; oc < c.out_channels; ++oc) {
            const double* dzp = dzc.data() + static_cast<std::size_t>(oc) * CW * CW;
            for (int ic = 0; ic < IC; ++ic) {
                double* iplane = din.data() + static_cast<std::size_t>(ic) * IW * IW;
                const double* wk = W.data() +
                                   (static_cast<std::size_t>(oc) * IC + ic) * K * K;
                for (int ky = 0; ky < K; ++ky)
                    for (int kx = 0; kx < K; ++kx) {
                        double wv = wk[static_cast<std::size_t>(ky) * K + kx];
                        int off_x = kx - pad, off_y = ky - pad;
                        for (int oy = 0; oy < CW; ++oy) {
                            int iy = oy * S + off_y;
                            if (iy < 0 || iy >= IW) continue;
                            double* irow = iplane + static_cast<std::size_t>(iy) * IW;
                            const double* drow = dzp + static_cast<std::size_t>(oy) * CW;
                            int ox_lo = off_x < 0 ? (-off_x + S - 1) / S : 0;
                            int ox_hi = (IW - 1 - off_x) / S;
                            if (ox_hi > CW - 1) ox_hi = CW - 1;
                            if (S == 1) {
                                double* ir = irow + off_x;
                                for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                    ir[ox] += wv * drow[ox];
                            } else {
                                for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                    irow[ox * S + off_x] += wv * drow[ox];
                            }
                        }
                    }
            }
        }
        dz = std::move(din);
    }
}

// ---------------------------------------------------------------------------

struct TrainHyper {
    double lr0 = 2e-4;
    double momentum = 0.8;
    double weight_decay = 5e-4;
    int epochs = 200;
    int lr_decay_start_epoch = 20;
    int batch_size = 16;
    std::uint64_t seed = 0;
};

inline void validate_hyper(const TrainHyper& h) {
    if (!(h.lr0 >= 0.0)) throw ParameterError("lr0 must be non-negative");
    if (h.momentum < 0.0 || h.momentum >= 1.0)
        throw ParameterError("momentum must be in [0,1)");
    if (h.weight_decay < 0.0)
        throw ParameterError("weight_decay must be non-negative");
    if (h.epochs < 1) throw ParameterError("epochs must be >= 1");
    if (h.lr_decay_start_epoch < 0 || h.lr_decay_start_epoch >= h.epochs)
        throw ParameterError("lr_decay_start_epoch must be in [0, epochs)");
    if (h.batch_size < 1) throw ParameterError("batch_size must be >= 1");
}

// lr0 through lr_decay_start_epoch, then linear decay to 0 at the final
// epoch. Epochs are 1-based.
inline double learning_rate(const TrainHyper& h, int epoch) {
    if (epoch <= h.lr_decay_start_epoch) return h.lr0;
    return h.lr0 * (1.0 - static_cast<double>(epoch - h.lr_decay_start_epoch) /
                              (h.epochs - h.lr_decay_start_epoch));
}

struct Velocity {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

inline Velocity make_zero_velocity(const NetworkWeights& w) {
    Velocity v;
    v.weights.resize(w.weights.size());
    v.biases.resize(w.biases.size());
    for (std::size_t l = 0; l < w.weights.size(); ++l) {
        v.weights[l].assign(w.weights[l].size(), 0.0);
        v.biases[l].assign(w.biases[l].size(), 0.0);
    }
    return v;
}

// Classical momentum update with weight decay inside the gradient:
//   v <- momentum*v - lr(epoch)*(grad + weight_decay*w);  w <- w + v
// applied only where trainable. Returns false (and applies nothing) when any
// gradient entry is non-finite, so callers can count rejected updates.
inline bool sgd_step(NetworkWeights& w, const NetworkGrads& g,
                     const TrainHyper& hyper, Velocity& vel, int epoch) {
    validate_hyper(hyper);
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        for (double x : g.weights[l])
            if (!std::isfinite(x)) return false;
        for (double x : g.biases[l])
            if (!std::isfinite(x)) return false;
    }
    double lr = learning_rate(hyper, epoch);
    for (std::size_t l = 0; l < w.weights.size(); ++l) {
        if (!w.trainable[l] || g.weights[l].empty()) continue;
        for (std::size_t i = 0; i < w.weights[l].size(); ++i) {
            double& wi = w.weights[l][i];
            double& vi = vel.weights[l][i];
            vi = hyper.momentum * vi -
                 lr * (g.weights[l][i] + hyper.weight_decay * wi);
            wi += vi;
        }
        for (std::size_t i = 0; i < w.biases[l].size(); ++i) {
            double& bi = w.biases[l][i];
            double& vi = vel.biases[l][i];
            vi = hyper.momentum * vi -
                 lr * (g.biases[l][i] + hyper.weight_decay * bi);
            bi += vi;
        }
    }
    return true;
}

}  // namespace endo
