// Training orchestration: joint unary-network + CRF training on synthetic
// frames, fc-only fine-tuning on multi-style frames sharing per-scene depth,
// MAP depth prediction for full images, and dataset-level evaluation with
// scene-leakage enforcement.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "endodepth/config.hpp"
#include "endodepth/crf.hpp"
#include "endodepth/dataset.hpp"
#include "endodepth/errors.hpp"
#include "endodepth/evaluation.hpp"
#include "endodepth/frame.hpp"
#include "endodepth/network.hpp"
#include "endodepth/parallel.hpp"
#include "endodepth/superpixels.hpp"

namespace endo {

// The trained model: unary network, CRF pairwise weights, the superpixel
// settings it was trained with, and the scene ids it saw (for leakage
// checks at evaluation time).
struct CrfModel {
    NetworkWeights net;
    std::vector<double> beta = std::vector<double>(kSimilarityKinds, 1.0);
    double lambda_theta = 1e-3;
    double lambda_beta = 1e-3;
    SuperpixelSettings sp;
    std::string config_hash = "0";
    std::vector<std::int64_t> train_scene_ids;
    std::vector<std::int64_t> finetune_scene_ids;
};

// ---------------------------------------------------------------------------
// Checkpoint format "EDC1": little-endian binary; weights stored as 32-bit
// floats, metadata as fixed-width integers/doubles. Unknown versions are
// rejected.

namespace detail {

inline void ck_u32(std::string& o, std::uint32_t v) { put_u32(o, v); }

inline void ck_i32(std::string& o, std::int32_t v) {
    put_u32(o, static_cast<std::uint32_t>(v));
}

inline void ck_u64(std::string& o, std::uint64_t v) {
    put_u32(o, static_cast<std::uint32_t>(v & 0xffffffffULL));
    put_u32(o, static_cast<std::uint32_t>(v >> 32));
}

inline void ck_f64(std::string& o, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    ck_u64(o, v);
}

inline void ck_str(std::string& o, const std::string& s) {
    ck_u32(o, static_cast<std::uint32_t>(s.size()));
    o.append(s);
}

struct CkReader {
    const unsigned char* p;
    std::size_t n, at = 0;
    explicit CkReader(const std::string& bytes)
        : p(reinterpret_cast<const unsigned char*>(bytes.data())),
          n(bytes.size()) {}
    void need(std::size_t k) {
        if (at + k > n) throw FormatError("checkpoint truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = get_u32(p + at);
        at += 4;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::uint64_t u64() {
        std::uint64_t lo = u32();
        std::uint64_t hi = u32();
        return lo | (hi << 32);
    }
    double f64() {
        std::uint64_t v = u64();
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
    float f32() {
        need(4);
        float f = get_f32(p + at);
        at += 4;
        return f;
    }
    std::string str() {
        std::uint32_t k = u32();
        if (k > (1u << 20)) throw FormatError("checkpoint string too long");
        need(k);
        std::string s(reinterpret_cast<const char*>(p + at), k);
        at += k;
        return s;
    }
};

}  // namespace detail

inline void save_model(const std::filesystem::path& path, const CrfModel& m) {
    std::string o;
    o.append("EDC1", 4);
    detail::ck_str(o, m.config_hash);
    const NetworkSpec& s = m.net.spec;
    detail::ck_i32(o, s.patch_size);
    detail::ck_i32(o, s.in_channels);
    detail::ck_u32(o, static_cast<std::uint32_t>(s.conv.size()));
    for (const auto& c : s.conv) {
        detail::ck_i32(o, c.out_channels);
        detail::ck_i32(o, c.kernel);
        detail::ck_i32(o, c.stride);
        detail::ck_i32(o, c.pool);
    }
    detail::ck_u32(o, static_cast<std::uint32_t>(s.fc.size()));
    for (int w : s.fc) detail::ck_i32(o, w);
    detail::ck_f64(o, s.init_output_bias);
    detail::ck_u32(o, static_cast<std::uint32_t>(m.net.trainable.size()));
    for (std::uint8_t t : m.net.trainable) o.push_back(static_cast<char>(t));
    for (std::size_t l = 0; l < m.net.weights.size(); ++l) {
        detail::ck_u64(o, m.net.weights[l].size());
        for (double w : m.net.weights[l])
            detail::put_f32(o, static_cast<float>(w));
        detail::ck_u64(o, m.net.biases[l].size());
        for (double b : m.net.biases[l])
            detail::put_f32(o, static_cast<float>(b));
    }
    detail::ck_u32(o, static_cast<std::uint32_t>(m.beta.size()));
    for (double b : m.beta) detail::ck_f64(o, b);
    detail::ck_f64(o, m.lambda_theta);
    detail::ck_f64(o, m.lambda_beta);
    detail::ck_i32(o, m.sp.count);
    detail::ck_f64(o, m.sp.compactness);
    detail::ck_i32(o, m.sp.hist_bins);
    detail::ck_f64(o, m.sp.gamma1);
    detail::ck_f64(o, m.sp.gamma2);
    detail::ck_u32(o, static_cast<std::uint32_t>(m.train_scene_ids.size()));
    for (std::int64_t id : m.train_scene_ids)
        detail::ck_u64(o, static_cast<std::uint64_t>(id));
    detail::ck_u32(o, static_cast<std::uint32_t>(m.finetune_scene_ids.size()));
    for (std::int64_t id : m.finetune_scene_ids)
        detail::ck_u64(o, static_cast<std::uint64_t>(id));
    detail::write_file_atomic(path, o);
}

inline CrfModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(is)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "EDC", 3) != 0)
        throw FormatError("bad checkpoint magic: " + path.string());
    if (bytes[3] != '1')
        throw FormatError("unsupported checkpoint version: " + path.string());
    detail::CkReader r(bytes);
    r.at = 4;
    CrfModel m;
    m.config_hash = r.str();
    NetworkSpec s;
    s.patch_size = r.i32();
    s.in_channels = r.i32();
    std::uint32_t nconv = r.u32();
    if (nconv > 64) throw FormatError("implausible conv layer count");
    s.conv.resize(nconv);
    for (auto& c : s.conv) {
        c.out_channels = r.i32();
        c.kernel = r.i32();
        c.stride = r.i32();
        c.pool = r.i32();
    }
    std::uint32_t nfc = r.u32();
    if (nfc > 64) throw FormatError("implausible fc layer count");
    s.fc.resize(nfc);
    for (auto& w : s.fc) w = r.i32();
    s.init_output_bias = r.f64();
    validate_spec(s);
    m.net.spec = s;
    std::uint32_t nmask = r.u32();
    if (nmask != static_cast<std::uint32_t>(s.n_layers()))
        throw FormatError("trainable mask length mismatch");
    m.net.trainable.resize(nmask);
    for (auto& t : m.net.trainable) {
        r.need(1);
        t = r.p[r.at++];
    }
    // Shape check against the spec while reading the parameter arrays.
    NetworkWeights ref = init_weights(s, 0);
    m.net.weights.resize(ref.weights.size());
    m.net.biases.resize(ref.biases.size());
    for (std::size_t l = 0; l < ref.weights.size(); ++l) {
        std::uint64_t nw = r.u64();
        if (nw != ref.weights[l].size())
            throw FormatError("weight tensor size mismatch in checkpoint");
        m.net.weights[l].resize(nw);
        for (auto& w : m.net.weights[l]) w = static_cast<double>(r.f32());
        std::uint64_t nb = r.u64();
        if (nb != ref.biases[l].size())
            throw FormatError("bias tensor size mismatch in checkpoint");
        m.net.biases[l].resize(nb);
        for (auto& b : m.net.biases[l]) b = static_cast<double>(r.f32());
    }
    std::uint32_t nbeta = r.u32();
    if (nbeta != kSimilarityKinds)
        throw FormatError("beta length mismatch in checkpoint");
    m.beta.resize(nbeta);
    for (auto& b : m.beta) b = r.f64();
    m.lambda_theta = r.f64();
    m.lambda_beta = r.f64();
    m.sp.count = r.i32();
    m.sp.compactness = r.f64();
    m.sp.hist_bins = r.i32();
    m.sp.gamma1 = r.f64();
    m.sp.gamma2 = r.f64();
    std::uint32_t ntr = r.u32();
    if (ntr > (1u << 24)) throw FormatError("implausible scene id count");
    m.train_scene_ids.resize(ntr);
    for (auto& id : m.train_scene_ids) id = static_cast<std::int64_t>(r.u64());
    std::uint32_t nft = r.u32();
    if (nft > (1u << 24)) throw FormatError("implausible scene id count");
    m.finetune_scene_ids.resize(nft);
    for (auto& id : m.finetune_scene_ids) id = static_cast<std::int64_t>(r.u64());
    if (r.at != r.n) throw FormatError("trailing bytes in checkpoint");
    return m;
}

// ---------------------------------------------------------------------------
// Frame preparation: segmentation, neighbor graph, pooled depths, patches.

struct PreparedFrame {
    int scene_id = 0;
    CrfGraph graph;               // restricted to valid superpixels
    std::vector<double> y;        // pooled ground-truth depth per valid node
    std::vector<std::vector<float>> patches;  // network input per valid node
};

// Segments the frame, pools its depth, and keeps the valid-superpixel
// subgraph. Returns nullopt when no superpixel has any valid depth.
inline std::optional<PreparedFrame> prepare_frame(const Frame& f,
                                                  const SuperpixelSettings& sp,
                                                  int patch_size) {
    if (!f.depth) throw ParameterError("frame has no depth map");
    Segmentation seg = segment_slic(f.image, sp.count, sp.compactness);
    SuperpixelGraph graph =
        build_graph(seg, f.image, sp.hist_bins, sp.gamma1, sp.gamma2);
    PooledDepth pooled = pool_depth(seg, *f.depth);
    CrfGraph full = make_crf_graph(graph);
    std::vector<int> kept;
    CrfGraph sub = subgraph(full, pooled.valid, kept);
    if (sub.p == 0) return std::nullopt;
    PreparedFrame out;
    out.scene_id = f.scene_id;
    out.graph = std::move(sub);
    out.y.reserve(kept.size());
    out.patches.reserve(kept.size());
    for (int node : kept) {
        out.y.push_back(pooled.y[static_cast<std::size_t>(node)]);
        out.patches.push_back(extract_patch(f.image, graph, node, patch_size));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training core.

struct TrainOptions {
    TrainHyper hyper;
    CrfParams crf;
    double beta_lr_scale = 1.0;
    int threads = 1;
};

struct EpochRecord {
    int epoch = 0;
    double train_objective = 0.0;  // mean per-node-normalized NLL + regularizers
    double val_objective = 0.0;    // same on the validation split (train if empty)
    double train_rel = 0.0;        // superpixel-level rel of the MAP solution
    double val_rel = 0.0;
};

struct TrainResult {
    CrfModel model;
    std::vector<EpochRecord> log;
    std::int64_t rejected_updates = 0;  // batches skipped on non-finite grads
};

namespace detail {

inline double theta_sq_norm(const NetworkWeights& w) {
    double s = 0.0;
    for (const auto& layer : w.weights)
        for (double x : layer) s += x * x;
    for (const auto& layer : w.biases)
        for (double x : layer) s += x * x;
    return s;
}

// Per-frame loss and gradients, normalized by the frame's node count so
// frames contribute comparably regardless of superpixel count.
struct FrameWork {
    double nll = 0.0;
    double rel = 0.0;  // superpixel-level rel of the MAP solution
    NetworkGrads grads;
    std::array<double, kSimilarityKinds> dbeta{};
};

// Superpixel-level relative error of the (clamped) MAP depths z vs pooled
// ground truth y.
inline double node_rel(std::span<const double> y, std::span<const double> z) {
    double rel = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        rel += std::abs(y[i] - std::max(0.0, z[i])) / y[i];
    return rel / static_cast<double>(y.size());
}

inline void frame_eval(const CrfModel& m, const PreparedFrame& pf,
                       double* nll_out, double* rel_out) {
    std::size_t p = pf.y.size();
    std::vector<double> h(p);
    ForwardCache cache;
    for (std::size_t i = 0; i < p; ++i)
        h[i] = forward(m.net, pf.patches[i], cache);
    *nll_out = nll(pf.y, h, pf.graph, m.beta) / static_cast<double>(p);
    std::vector<double> z = map_infer(h, pf.graph, m.beta);
    *rel_out = node_rel(pf.y, z);
}

inline FrameWork frame_backward(const CrfModel& m, const PreparedFrame& pf,
                                double batch_scale) {
    std::size_t p = pf.y.size();
    std::vector<double> h(p);
    std::vector<ForwardCache> caches(p);
    for (std::size_t i = 0; i < p; ++i)
        h[i] = forward(m.net, pf.patches[i], caches[i]);
    FrameWork out;
    double scale = batch_scale / static_cast<double>(p);
    out.nll = nll(pf.y, h, pf.graph, m.beta) / static_cast<double>(p);
    NllGrad ng = nll_grad(pf.y, h, pf.graph, m.beta);
    out.grads = make_zero_grads(m.net);
    std::vector<double> z(p);
    for (std::size_t i = 0; i < p; ++i) {
        backward(m.net, caches[i], ng.dh[i] * scale, out.grads);
        // dNLL/dh = -2y + 2A^{-1}h, so the MAP solution A^{-1}h falls out of
        // the gradient already computed.
        z[i] = pf.y[i] + 0.5 * ng.dh[i];
    }
    out.rel = node_rel(pf.y, z);
    for (std::size_t k = 0; k < kSimilarityKinds; ++k)
        out.dbeta[k] = ng.dbeta[k] * scale;
    return out;
}

// Mean per-frame objective over a split plus the regularizer terms; also
// reports the mean superpixel-level rel.
inline double split_objective(const CrfModel& m,
                              const std::vector<PreparedFrame>& frames,
                              const TrainOptions& opt, int threads,
                              double* rel_out = nullptr) {
    if (frames.empty()) throw ParameterError("objective over an empty split");
    std::vector<double> nlls(frames.size()), rels(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t i) {
        frame_eval(m, frames[i], &nlls[i], &rels[i]);
    });
    double total = 0.0, rel = 0.0;
    for (double v : nlls) total += v;
    for (double v : rels) rel += v;
    if (rel_out) *rel_out = rel / static_cast<double>(frames.size());
    double b2 = 0.0;
    for (double b : m.beta) b2 += b * b;
    return total / static_cast<double>(frames.size()) +
           0.5 * opt.hyper.weight_decay * theta_sq_norm(m.net) +
           0.5 * opt.crf.lambda_beta * b2;
}

// Shared loop for joint training and fine-tuning. The model's trainable mask
// decides which network layers move; beta always moves (projected at 0).
inline TrainResult run_training(CrfModel model,
                                const std::vector<PreparedFrame>& train,
                                const std::vector<PreparedFrame>& val,
                                const TrainOptions& opt) {
    validate_hyper(opt.hyper);
    validate_crf_params(opt.crf);
    if (train.empty()) throw ParameterError("training split is empty");
    for (double& b : model.beta) b = std::max(0.0, b);

    const std::vector<PreparedFrame>& val_ref = val.empty() ? train : val;
    TrainResult result;
    Velocity vel = make_zero_velocity(model.net);
    std::vector<double> beta_vel(kSimilarityKinds, 0.0);
    double best_val = std::numeric_limits<double>::infinity();
    CrfModel best = model;

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= opt.hyper.epochs; ++epoch) {
        Pcg32 shuffle_rng = make_stream(opt.hyper.seed, 0x65706f6368ULL,
                                        static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u32() % i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_nll = 0.0, epoch_rel = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(opt.hyper.batch_size)) {
            std::size_t bsz = std::min(
                static_cast<std::size_t>(opt.hyper.batch_size),
                order.size() - start);
            std::vector<FrameWork> work(bsz);
            double batch_scale = 1.0 / static_cast<double>(bsz);
            parallel_for(bsz, opt.threads, [&](std::size_t bi) {
                work[bi] = frame_backward(model, train[order[start + bi]],
                                          batch_scale);
            });
            NetworkGrads grads = make_zero_grads(model.net);
            std::array<double, kSimilarityKinds> dbeta{};
            for (std::size_t bi = 0; bi < bsz; ++bi) {
                accumulate_grads(grads, work[bi].grads);
                for (std::size_t k = 0; k < kSimilarityKinds; ++k)
                    dbeta[k] += work[bi].dbeta[k];
                epoch_nll += work[bi].nll;
                epoch_rel += work[bi].rel;
            }
            if (!sgd_step(model.net, grads, opt.hyper, vel, epoch)) {
                ++result.rejected_updates;
                continue;
            }
            double lr = learning_rate(opt.hyper, epoch) * opt.beta_lr_scale;
            bool beta_ok = true;
            for (double g : dbeta)
                if (!std::isfinite(g)) beta_ok = false;
            if (!beta_ok) {
                ++result.rejected_updates;
                continue;
            }
            for (std::size_t k = 0; k < kSimilarityKinds; ++k) {
                double g = dbeta[k] + opt.crf.lambda_beta * model.beta[k];
                beta_vel[k] = opt.hyper.momentum * beta_vel[k] - lr * g;
                model.beta[k] = std::max(0.0, model.beta[k] + beta_vel[k]);
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        double b2 = 0.0;
        for (double b : model.beta) b2 += b * b;
        rec.train_objective =
            epoch_nll / static_cast<double>(train.size()) +
            0.5 * opt.hyper.weight_decay * theta_sq_norm(model.net) +
            0.5 * opt.crf.lambda_beta * b2;
        rec.train_rel = epoch_rel / static_cast<double>(train.size());
        rec.val_objective =
            split_objective(model, val_ref, opt, opt.threads, &rec.val_rel);
        if (!std::isfinite(rec.train_objective) ||
            !std::isfinite(rec.val_objective))
            throw DivergenceError("objective diverged at epoch " +
                                  std::to_string(epoch));
        result.log.push_back(rec);
        if (rec.val_objective < best_val) {
            best_val = rec.val_objective;
            best = model;
        }
    }
    result.model = std::move(best);
    return result;
}

inline std::vector<PreparedFrame> prepare_frames(
    const std::vector<Frame>& frames, const SuperpixelSettings& sp,
    int patch_size, int threads) {
    std::vector<std::optional<PreparedFrame>> slots(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t i) {
        slots[i] = prepare_frame(frames[i], sp, patch_size);
    });
    std::vector<PreparedFrame> out;
    out.reserve(frames.size());
    for (auto& s : slots)
        if (s) out.push_back(std::move(*s));
    return out;
}

inline std::vector<std::int64_t> scene_id_list(const std::vector<Frame>& a,
                                               const std::vector<Frame>& b) {
    std::set<std::int64_t> ids;
    for (const auto& f : a) ids.insert(f.scene_id);
    for (const auto& f : b) ids.insert(f.scene_id);
    return std::vector<std::int64_t>(ids.begin(), ids.end());
}

}  // namespace detail

// Joint training of the unary network and the CRF pairwise weights on
// synthetic frames. Validation frames drive best-checkpoint selection (the
// train split is used when none are given). Deterministic per seed.
inline TrainResult train_joint(const std::vector<Frame>& train_frames,
                               const std::vector<Frame>& val_frames,
                               const NetworkSpec& spec, const TrainOptions& opt,
                               const SuperpixelSettings& sp,
                               const std::string& config_hash_hex) {
    if (train_frames.empty()) throw ParameterError("training dataset is empty");
    validate_spec(spec);
    CrfModel model;
    model.net = init_weights(spec, opt.hyper.seed);
    set_trainable(model.net, TrainablePattern::all);
    model.beta = opt.crf.beta;
    model.lambda_theta = opt.crf.lambda_theta;
    model.lambda_beta = opt.crf.lambda_beta;
    model.sp = sp;
    model.config_hash = config_hash_hex;
    model.train_scene_ids = detail::scene_id_list(train_frames, val_frames);

    auto train_prep = detail::prepare_frames(train_frames, sp, spec.patch_size,
                                             opt.threads);
    auto val_prep =
        detail::prepare_frames(val_frames, sp, spec.patch_size, opt.threads);
    if (train_prep.empty())
        throw ParameterError("no training frame has valid superpixels");
    TrainResult r = detail::run_training(std::move(model), train_prep, val_prep, opt);
    r.model.train_scene_ids = detail::scene_id_list(train_frames, val_frames);
    return r;
}

// Fine-tuning: freezes the conv stack (fc layers and beta keep training) and
// continues at a reduced learning rate on the style-variant frames, each
// paired with its scene's shared depth. Zero epochs returns the base model
// with only the trainable mask changed.
inline TrainResult finetune(const CrfModel& base,
                            const std::vector<Frame>& ft_frames,
                            const std::vector<Frame>& val_frames,
                            const TrainOptions& opt) {
    if (ft_frames.empty()) throw ParameterError("fine-tuning dataset is empty");
    CrfModel model = base;
    set_trainable(model.net, TrainablePattern::fc_only);
    model.finetune_scene_ids = detail::scene_id_list(ft_frames, val_frames);
    if (opt.hyper.epochs == 0) {
        TrainResult r;
        r.model = std::move(model);
        return r;
    }
    auto train_prep = detail::prepare_frames(ft_frames, model.sp,
                                             model.net.spec.patch_size,
                                             opt.threads);
    auto val_prep = detail::prepare_frames(val_frames, model.sp,
                                           model.net.spec.patch_size,
                                           opt.threads);
    if (train_prep.empty())
        throw ParameterError("no fine-tuning frame has valid superpixels");
    std::vector<std::int64_t> ft_ids = model.finetune_scene_ids;
    TrainResult r = detail::run_training(std::move(model), train_prep, val_prep, opt);
    r.model.finetune_scene_ids = std::move(ft_ids);
    return r;
}

// MAP depth prediction for one image: segment, evaluate the unary network on
// every superpixel patch, solve the CRF, and broadcast the per-superpixel
// depths to pixels. Output clamped to >= 0; every pixel is valid (sentinel
// -1 is never produced).
inline DepthMap predict_depth(const CrfModel& m, const ImageRGB& image,
                              int threads = 1) {
    Segmentation seg = segment_slic(image, m.sp.count, m.sp.compactness);
    SuperpixelGraph graph =
        build_graph(seg, image, m.sp.hist_bins, m.sp.gamma1, m.sp.gamma2);
    CrfGraph cg = make_crf_graph(graph);
    std::size_t p = graph.nodes.size();
    std::vector<double> h(p);
    parallel_for(p, threads, [&](std::size_t i) {
        std::vector<float> patch =
            extract_patch(image, graph, static_cast<int>(i),
                          m.net.spec.patch_size);
        ForwardCache cache;
        h[i] = forward(m.net, patch, cache);
    });
    std::vector<double> y = map_infer(h, cg, m.beta);
    DepthMap out(image.width, image.height, -1.0f);
    for (int py = 0; py < image.height; ++py)
        for (int px = 0; px < image.width; ++px) {
            int label = seg.labels[static_cast<std::size_t>(py) * image.width + px];
            out.at(px, py) = static_cast<float>(
                std::max(0.0, y[static_cast<std::size_t>(label)]));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset evaluation.

struct FrameMetrics {
    int scene_id = 0, style_id = 0, pose_index = 0;
    MetricsReport report;
};

struct DatasetMetrics {
    MetricsReport pooled;  // all valid pixels concatenated across frames
    std::vector<FrameMetrics> per_frame;
};

// Evaluates the model on one manifest split. Frames' scenes must be disjoint
// from every scene the model saw in training or fine-tuning.
inline DatasetMetrics evaluate_dataset(const CrfModel& m,
                                       const std::filesystem::path& dataset_dir,
                                       const Manifest& manifest,
                                       const std::string& split,
                                       int threads = 1) {
    auto records = split_records(manifest, split);
    if (records.empty())
        throw ParameterError("split '" + split + "' has no frames");
    std::set<std::int64_t> seen(m.train_scene_ids.begin(),
                                m.train_scene_ids.end());
    seen.insert(m.finetune_scene_ids.begin(), m.finetune_scene_ids.end());
    for (const auto* r : records)
        if (seen.count(r->scene_id))
            throw LeakageError("scene " + std::to_string(r->scene_id) +
                               " was used in training");

    std::map<std::string, std::shared_ptr<const DepthMap>> depth_cache;
    DatasetMetrics out;
    MetricsAccumulator acc;
    for (const auto* rec : records) {
        Frame f = load_frame(dataset_dir, *rec, &depth_cache);
        DepthMap est = predict_depth(m, f.image, threads);
        MetricsAccumulator frame_acc;
        frame_acc.add_pixels(*f.depth, est);
        acc.add_pixels(*f.depth, est);
        if (!frame_acc.empty()) {
            FrameMetrics fm;
            fm.scene_id = rec->scene_id;
            fm.style_id = rec->style_id;
            fm.pose_index = rec->pose_index;
            fm.report = frame_acc.finalize();
            out.per_frame.push_back(fm);
        }
    }
    out.pooled = acc.finalize();
    out.pooled.dataset_id = manifest.name;
    out.pooled.model_id = m.config_hash;
    return out;
}

// Structured text record of an evaluation, stable across reruns.
inline std::string metrics_record(const DatasetMetrics& dm,
                                  const std::string& method,
                                  const std::string& training,
                                  const std::string& fine_tuning) {
    std::ostringstream os;
    char buf[96];
    os << "EDMETRICS 1\n";
    os << "dataset " << dm.pooled.dataset_id << "\n";
    os << "model " << dm.pooled.model_id << "\n";
    os << "n_samples " << dm.pooled.n_samples << "\n";
    os << "n_clamped " << dm.pooled.n_clamped << "\n";
    std::snprintf(buf, sizeof(buf), "rel %.9g\nlog10 %.9g\nrms %.9g\n",
                  dm.pooled.rel, dm.pooled.log10, dm.pooled.rms);
    os << buf;
    os << "table Method, Training, Fine-Tuning, rel, log10, rms\n";
    os << "table " << metrics_table_row(method, training, fine_tuning, dm.pooled)
       << "\n";
    for (const auto& fm : dm.per_frame) {
        std::snprintf(buf, sizeof(buf), "frame %d %d %d %.9g %.9g %.9g %lld\n",
                      fm.scene_id, fm.style_id, fm.pose_index, fm.report.rel,
                      fm.report.log10, fm.report.rms,
                      static_cast<long long>(fm.report.n_samples));
        os << buf;
    }
    return os.str();
}

}  // namespace endo
