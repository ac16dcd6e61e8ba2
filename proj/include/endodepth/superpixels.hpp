// Superpixel segmentation (SLIC-style k-means), the CRF neighbor graph with
// pairwise similarity matrices, depth pooling, and patch extraction.
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/image.hpp"
#include "endodepth/math.hpp"

namespace endo {

struct Segmentation {
    int width = 0, height = 0;
    int count = 0;                // number of superpixels p
    std::vector<std::int32_t> labels;  // per pixel, 0..p-1, row-major
};

// SLIC-style segmentation: k-means over (intensity, x, y) with grid seeding,
// 10 iterations, then connectivity enforcement that merges orphan fragments
// into their largest neighboring region. Deterministic for fixed inputs.
inline Segmentation segment_slic(const ImageRGB& image, int target_count,
                                 double compactness = 0.2) {
    if (image.width < 1 || image.height < 1)
        throw ParameterError("cannot segment an empty image");
    const int w = image.width, h = image.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (target_count < 1) throw ParameterError("target_count must be >= 1");
    if (static_cast<std::size_t>(target_count) > n)
        throw ParameterError("target_count exceeds pixel count");
    if (!(compactness > 0.0)) throw ParameterError("compactness must be positive");

    std::vector<double> intensity(n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            intensity[static_cast<std::size_t>(y) * w + x] = pixel_intensity(image, x, y);

    // Seed grid sized to roughly target_count cells, never exceeding n.
    int nsx = static_cast<int>(std::ceil(
        std::sqrt(static_cast<double>(target_count) * w / h)));
    nsx = std::clamp(nsx, 1, w);
    int nsy = static_cast<int>(std::ceil(static_cast<double>(target_count) / nsx));
    nsy = std::clamp(nsy, 1, h);
    while (static_cast<std::size_t>(nsx) * nsy > n && nsy > 1) --nsy;
    const int k = nsx * nsy;
    const double sx = static_cast<double>(w) / nsx;
    const double sy = static_cast<double>(h) / nsy;

    struct Center {
        double ci, cx, cy;
    };
    std::vector<Center> centers(static_cast<std::size_t>(k));
    for (int iy = 0; iy < nsy; ++iy)
        for (int ix = 0; ix < nsx; ++ix) {
            double px = (ix + 0.5) * sx, py = (iy + 0.5) * sy;
            int qx = std::min(w - 1, static_cast<int>(px));
            int qy = std::min(h - 1, static_cast<int>(py));
            centers[static_cast<std::size_t>(iy) * nsx + ix] = {
                intensity[static_cast<std::size_t>(qy) * w + qx], px, py};
        }

    std::vector<std::int32_t> labels(n, -1);
    std::vector<double> best(n);
    const double half_x = sx, half_y = sy;  // search window half-extents
    for (int iter = 0; iter < 10; ++iter) {
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
        std::fill(labels.begin(), labels.end(), -1);
        for (int c = 0; c < k; ++c) {
            const Center& ct = centers[static_cast<std::size_t>(c)];
            int x0 = std::max(0, static_cast<int>(std::floor(ct.cx - half_x)));
            int x1 = std::min(w - 1, static_cast<int>(std::ceil(ct.cx + half_x)));
            int y0 = std::max(0, static_cast<int>(std::floor(ct.cy - half_y)));
            int y1 = std::min(h - 1, static_cast<int>(std::ceil(ct.cy + half_y)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    std::size_t idx = static_cast<std::size_t>(y) * w + x;
                    double di = intensity[idx] - ct.ci;
                    double dx = (x + 0.5 - ct.cx) / sx;
                    double dy = (y + 0.5 - ct.cy) / sy;
                    double d2 = di * di +
                                compactness * compactness * (dx * dx + dy * dy);
                    if (d2 < best[idx]) {
                        best[idx] = d2;
                        labels[idx] = static_cast<std::int32_t>(c);
                    }
                }
        }
        // Pixels outside every search window fall back to the nearest seed
        // cell, which is always a valid assignment.
        for (std::size_t idx = 0; idx < n; ++idx)
            if (labels[idx] < 0) {
                int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
                int ix = std::min(nsx - 1, static_cast<int>(x / sx));
                int iy = std::min(nsy - 1, static_cast<int>(y / sy));
                labels[idx] = static_cast<std::int32_t>(iy * nsx + ix);
            }
        // Update step: means over assigned pixels; empty clusters persist.
        std::vector<double> sum_i(static_cast<std::size_t>(k), 0.0);
        std::vector<double> sum_x(static_cast<std::size_t>(k), 0.0);
        std::vector<double> sum_y(static_cast<std::size_t>(k), 0.0);
        std::vector<std::int64_t> cnt(static_cast<std::size_t>(k), 0);
        for (std::size_t idx = 0; idx < n; ++idx) {
            std::size_t c = static_cast<std::size_t>(labels[idx]);
            sum_i[c] += intensity[idx];
            sum_x[c] += static_cast<double>(idx % w) + 0.5;
            sum_y[c] += static_cast<double>(idx / w) + 0.5;
            cnt[c] += 1;
        }
        for (int c = 0; c < k; ++c)
            if (cnt[static_cast<std::size_t>(c)] > 0) {
                double inv = 1.0 / cnt[static_cast<std::size_t>(c)];
                centers[static_cast<std::size_t>(c)] = {
                    sum_i[static_cast<std::size_t>(c)] * inv,
                    sum_x[static_cast<std::size_t>(c)] * inv,
                    sum_y[static_cast<std::size_t>(c)] * inv};
            }
    }

    // --- connectivity enforcement -----------------------------------------
    // Connected components of the label map (4-connectivity).
    std::vector<std::int32_t> comp(n, -1);
    std::vector<std::int64_t> comp_size;
    std::vector<std::int32_t> comp_label;
    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        std::int32_t cid = static_cast<std::int32_t>(comp_size.size());
        comp_size.push_back(0);
        comp_label.push_back(labels[start]);
        comp[start] = cid;
        queue.push_back(start);
        while (!queue.empty()) {
            std::size_t idx = queue.front();
            queue.pop_front();
            comp_size[static_cast<std::size_t>(cid)] += 1;
            int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
            const int nx4[4] = {x - 1, x + 1, x, x};
            const int ny4[4] = {y, y, y - 1, y + 1};
            for (int d = 0; d < 4; ++d) {
                if (nx4[d] < 0 || nx4[d] >= w || ny4[d] < 0 || ny4[d] >= h) continue;
                std::size_t nidx = static_cast<std::size_t>(ny4[d]) * w + nx4[d];
                if (comp[nidx] < 0 && labels[nidx] == labels[start]) {
                    comp[nidx] = cid;
                    queue.push_back(nidx);
                }
            }
        }
    }
    const int ncomp = static_cast<int>(comp_size.size());

    // Keeper = the largest component of each label (ties: lowest comp id).
    std::vector<std::int32_t> keeper_of_label(static_cast<std::size_t>(k), -1);
    for (int c = 0; c < ncomp; ++c) {
        std::int32_t lab = comp_label[static_cast<std::size_t>(c)];
        std::int32_t cur = keeper_of_label[static_cast<std::size_t>(lab)];
        if (cur < 0 || comp_size[static_cast<std::size_t>(c)] >
                           comp_size[static_cast<std::size_t>(cur)])
            keeper_of_label[static_cast<std::size_t>(lab)] = c;
    }

    // Component adjacency.
    std::vector<std::pair<std::int32_t, std::int32_t>> adj_pairs;
    for (std::size_t idx = 0; idx < n; ++idx) {
        int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
        if (x + 1 < w) {
            std::int32_t a = comp[idx], b = comp[idx + 1];
            if (a != b) adj_pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
        if (y + 1 < h) {
            std::int32_t a = comp[idx], b = comp[idx + static_cast<std::size_t>(w)];
            if (a != b) adj_pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(adj_pairs.begin(), adj_pairs.end());
    adj_pairs.erase(std::unique(adj_pairs.begin(), adj_pairs.end()), adj_pairs.end());
    std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(ncomp));
    for (auto [a, b] : adj_pairs) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }

    // Union-find over components; orphans merge into their largest neighbor
    // until only keepers remain as roots.
    std::vector<std::int32_t> parent(static_cast<std::size_t>(ncomp));
    for (int c = 0; c < ncomp; ++c) parent[static_cast<std::size_t>(c)] = c;
    auto find_root = [&](std::int32_t c) {
        while (parent[static_cast<std::size_t>(c)] != c) {
            parent[static_cast<std::size_t>(c)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(c)])];
            c = parent[static_cast<std::size_t>(c)];
        }
        return c;
    };
    auto is_keeper = [&](std::int32_t c) {
        return keeper_of_label[static_cast<std::size_t>(comp_label[
                   static_cast<std::size_t>(c)])] == c;
    };
    std::vector<std::int64_t> root_size = comp_size;
    for (bool merged = true; merged;) {
        merged = false;
        for (int c = 0; c < ncomp; ++c) {
            std::int32_t root = find_root(c);
            if (root != c || is_keeper(root)) continue;
            // Largest adjacent root (ties: lowest root id), found through the
            // original component adjacency lifted to current roots.
            std::int32_t target = -1;
            std::int64_t target_size = -1;
            for (std::int32_t m = 0; m < ncomp; ++m) {
                if (find_root(m) != root) continue;
                for (std::int32_t nb : adj[static_cast<std::size_t>(m)]) {
                    std::int32_t nroot = find_root(nb);
                    if (nroot == root) continue;
                    std::int64_t sz = root_size[static_cast<std::size_t>(nroot)];
                    if (sz > target_size ||
                        (sz == target_size && nroot < target)) {
                        target = nroot;
                        target_size = sz;
                    }
                }
            }
            if (target < 0) continue;  // component spans the whole image
            parent[static_cast<std::size_t>(root)] = target;
            root_size[static_cast<std::size_t>(target)] += root_size[
                static_cast<std::size_t>(root)];
            merged = true;
        }
    }

    // Compact relabeling by first pixel occurrence in raster order.
    Segmentation seg;
    seg.width = w;
    seg.height = h;
    seg.labels.assign(n, -1);
    std::vector<std::int32_t> new_label(static_cast<std::size_t>(ncomp), -1);
    std::int32_t next_label = 0;
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::int32_t root = find_root(comp[idx]);
        if (new_label[static_cast<std::size_t>(root)] < 0)
            new_label[static_cast<std::size_t>(root)] = next_label++;
        seg.labels[idx] = new_label[static_cast<std::size_t>(root)];
    }
    seg.count = next_label;
    return seg;
}

// ---------------------------------------------------------------------------
// Neighbor graph with K = 2 similarity kinds: mean intensity and normalized
// grayscale histogram, both as exp(-gamma * squared L2 feature distance).

inline constexpr int kSimilarityKinds = 2;

struct SuperpixelNode {
    double centroid_x = 0.0, centroid_y = 0.0;  // pixel units
    int bbox_x0 = 0, bbox_y0 = 0, bbox_x1 = 0, bbox_y1 = 0;
    std::int64_t pixel_count = 0;
    double mean_intensity = 0.0;
    std::vector<double> histogram;  // normalized, sums to 1
};

struct SuperpixelGraph {
    int width = 0, height = 0;
    int count = 0;
    std::vector<std::int32_t> labels;
    std::vector<SuperpixelNode> nodes;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // i < j, sorted
    std::vector<double> s1;  // mean-intensity similarity per edge
    std::vector<double> s2;  // histogram similarity per edge

    double similarity(int kind, std::size_t edge_index) const {
        return kind == 0 ? s1[edge_index] : s2[edge_index];
    }
};

inline SuperpixelGraph build_graph(const Segmentation& seg, const ImageRGB& image,
                                   int hist_bins = 16, double gamma1 = 10.0,
                                   double gamma2 = 5.0) {
    if (seg.width != image.width || seg.height != image.height)
        throw ShapeError("segmentation and image dimensions differ");
    if (seg.count < 1) throw ParameterError("segmentation has no superpixels");
    if (hist_bins < 1) throw ParameterError("hist_bins must be >= 1");
    const int w = seg.width, h = seg.height, p = seg.count;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (seg.labels.size() != n) throw ShapeError("label map size mismatch");

    SuperpixelGraph g;
    g.width = w;
    g.height = h;
    g.count = p;
    g.labels = seg.labels;
    g.nodes.assign(static_cast<std::size_t>(p), SuperpixelNode{});
    for (auto& node : g.nodes) {
        node.histogram.assign(static_cast<std::size_t>(hist_bins), 0.0);
        node.bbox_x0 = w;
        node.bbox_y0 = h;
        node.bbox_x1 = -1;
        node.bbox_y1 = -1;
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::int32_t lab = seg.labels[static_cast<std::size_t>(y) * w + x];
            if (lab < 0 || lab >= p)
                throw ShapeError("label outside [0, count)");
            SuperpixelNode& node = g.nodes[static_cast<std::size_t>(lab)];
            double inten = pixel_intensity(image, x, y);
            node.pixel_count += 1;
            node.centroid_x += x;
            node.centroid_y += y;
            node.mean_intensity += inten;
            int bin = std::min(hist_bins - 1,
                               static_cast<int>(inten * hist_bins));
            node.histogram[static_cast<std::size_t>(std::max(0, bin))] += 1.0;
            node.bbox_x0 = std::min(node.bbox_x0, x);
            node.bbox_y0 = std::min(node.bbox_y0, y);
            node.bbox_x1 = std::max(node.bbox_x1, x);
            node.bbox_y1 = std::max(node.bbox_y1, y);
        }
    for (auto& node : g.nodes) {
        if (node.pixel_count == 0)
            throw ShapeError("empty superpixel in label map");
        double inv = 1.0 / static_cast<double>(node.pixel_count);
        node.centroid_x *= inv;
        node.centroid_y *= inv;
        node.mean_intensity *= inv;
        for (auto& b : node.histogram) b *= inv;
    }

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::int32_t a = seg.labels[static_cast<std::size_t>(y) * w + x];
            if (x + 1 < w) {
                std::int32_t b = seg.labels[static_cast<std::size_t>(y) * w + x + 1];
                if (a != b) g.edges.emplace_back(std::min(a, b), std::max(a, b));
            }
            if (y + 1 < h) {
                std::int32_t b =
                    seg.labels[static_cast<std::size_t>(y + 1) * w + x];
                if (a != b) g.edges.emplace_back(std::min(a, b), std::max(a, b));
            }
        }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

    g.s1.reserve(g.edges.size());
    g.s2.reserve(g.edges.size());
    for (auto [i, j] : g.edges) {
        const SuperpixelNode& a = g.nodes[static_cast<std::size_t>(i)];
        const SuperpixelNode& b = g.nodes[static_cast<std::size_t>(j)];
        double di = a.mean_intensity - b.mean_intensity;
        g.s1.push_back(std::exp(-gamma1 * di * di));
        double dh2 = 0.0;
        for (int bin = 0; bin < hist_bins; ++bin) {
            double d = a.histogram[static_cast<std::size_t>(bin)] -
                       b.histogram[static_cast<std::size_t>(bin)];
            dh2 += d * d;
        }
        g.s2.push_back(std::exp(-gamma2 * dh2));
    }
    return g;
}

// ---------------------------------------------------------------------------

struct PooledDepth {
    std::vector<double> y;        // mean depth per superpixel (mm)
    std::vector<std::uint8_t> valid;  // 0 when every pixel was sentinel
};

// Mean ground-truth depth per superpixel, ignoring sentinel pixels.
// Superpixels with no valid pixel are flagged invalid (y = 0).
inline PooledDepth pool_depth(const Segmentation& seg, const DepthMap& depth) {
    if (seg.width != depth.width || seg.height != depth.height)
        throw ShapeError("segmentation and depth dimensions differ");
    PooledDepth out;
    out.y.assign(static_cast<std::size_t>(seg.count), 0.0);
    out.valid.assign(static_cast<std::size_t>(seg.count), 0);
    std::vector<std::int64_t> cnt(static_cast<std::size_t>(seg.count), 0);
    for (int y = 0; y < seg.height; ++y)
        for (int x = 0; x < seg.width; ++x) {
            float d = depth.at(x, y);
            if (d == depth.sentinel) continue;
            std::int32_t lab = seg.labels[static_cast<std::size_t>(y) * seg.width + x];
            out.y[static_cast<std::size_t>(lab)] += d;
            cnt[static_cast<std::size_t>(lab)] += 1;
        }
    for (int i = 0; i < seg.count; ++i)
        if (cnt[static_cast<std::size_t>(i)] > 0) {
            out.y[static_cast<std::size_t>(i)] /=
                static_cast<double>(cnt[static_cast<std::size_t>(i)]);
            out.valid[static_cast<std::size_t>(i)] = 1;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Patch extraction: square crop centered on the superpixel centroid with
// side 1.2x the bounding-box long side, edge-replicated at image borders,
// bilinearly resized to patch_size. Output layout is planar: 3 channel
// planes of patch_size rows each (channel, then row, then column).

inline std::vector<float> extract_patch(const ImageRGB& image,
                                        const SuperpixelGraph& graph, int i,
                                        int patch_size) {
    if (i < 0 || i >= graph.count)
        throw ParameterError("superpixel index out of range");
    if (patch_size < 1) throw ParameterError("patch_size must be >= 1");
    const SuperpixelNode& node = graph.nodes[static_cast<std::size_t>(i)];
    int long_side = std::max(node.bbox_x1 - node.bbox_x0 + 1,
                             node.bbox_y1 - node.bbox_y0 + 1);
    int side = std::max(1, static_cast<int>(std::lround(1.2 * long_side)));
    int cx = static_cast<int>(std::lround(node.centroid_x));
    int cy = static_cast<int>(std::lround(node.centroid_y));
    int x_lo = cx - side / 2;
    int y_lo = cy - side / 2;
    std::vector<float> patch(static_cast<std::size_t>(patch_size) * patch_size * 3);
    double scale = static_cast<double>(side) / patch_size;
    std::size_t plane = static_cast<std::size_t>(patch_size) * patch_size;
    for (int py = 0; py < patch_size; ++py) {
        double sy = y_lo + (py + 0.5) * scale - 0.5;
        for (int px = 0; px < patch_size; ++px) {
            double sx = x_lo + (px + 0.5) * scale - 0.5;
            Vec3 v = sample_bilinear(image, sx, sy);
            std::size_t at = static_cast<std::size_t>(py) * patch_size + px;
            patch[at] = static_cast<float>(v.x);
            patch[plane + at] = static_cast<float>(v.y);
            patch[2 * plane + at] = static_cast<float>(v.z);
        }
    }
    return patch;
}

}  // namespace endo
