// Depth-error metrics (rel, log10, rms) and pixel-weighted pooling across
// frames. Ground-truth pixels must be positive; estimates are clamped at
// 1e-6 inside the log10 term only, with a counted diagnostic.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/image.hpp"

namespace endo {

struct MetricsReport {
    double rel = 0.0;
    double log10 = 0.0;
    double rms = 0.0;  // same units as the depths (mm)
    std::int64_t n_samples = 0;
    std::int64_t n_clamped = 0;  // estimates clamped at 1e-6 in the log10 term
    std::string dataset_id;
    std::string model_id;
};

inline constexpr double kLogClamp = 1e-6;

inline MetricsReport compute_metrics(std::span<const double> y_gt,
                                     std::span<const double> y_est) {
    if (y_gt.size() != y_est.size())
        throw ShapeError("ground truth and estimate lengths differ");
    if (y_gt.empty()) throw ParameterError("metrics need at least one sample");
    double rel = 0.0, l10 = 0.0, sq = 0.0;
    std::int64_t clamped = 0;
    for (std::size_t i = 0; i < y_gt.size(); ++i) {
        double gt = y_gt[i], est = y_est[i];
        if (!(gt > 0.0) || !std::isfinite(gt))
            throw ParameterError("ground-truth depths must be positive");
        if (!std::isfinite(est))
            throw ParameterError("estimates must be finite");
        double d = gt - est;
        rel += std::abs(d) / gt;
        sq += d * d;
        double e = est;
        if (e < kLogClamp) {
            e = kLogClamp;
            ++clamped;
        }
        l10 += std::abs(std::log10(gt) - std::log10(e));
    }
    double n = static_cast<double>(y_gt.size());
    MetricsReport r;
    r.rel = rel / n;
    r.log10 = l10 / n;
    r.rms = std::sqrt(sq / n);
    r.n_samples = static_cast<std::int64_t>(y_gt.size());
    r.n_clamped = clamped;
    return r;
}

// Accumulates (gt, est) pixel pairs across frames; valid pixels only. The
// pooled report concatenates all pixels and computes the metrics once, so
// frames contribute in proportion to their valid-pixel counts.
struct MetricsAccumulator {
    std::vector<double> gt, est;

    void add_pixels(const DepthMap& gt_map, const DepthMap& est_map) {
        if (gt_map.width != est_map.width || gt_map.height != est_map.height)
            throw ShapeError("depth map dimensions differ");
        for (std::size_t i = 0; i < gt_map.data.size(); ++i) {
            float g = gt_map.data[i];
            if (g == gt_map.sentinel) continue;  // excluded: no valid depth
            gt.push_back(static_cast<double>(g));
            est.push_back(static_cast<double>(est_map.data[i]));
        }
    }

    bool empty() const { return gt.empty(); }

    MetricsReport finalize() const {
        if (gt.empty())
            throw ParameterError("no valid pixels accumulated for metrics");
        return compute_metrics(gt, est);
    }
};

// One row shaped like the performance tables: Method, Training, Fine-Tuning,
// rel, log10, rms.
inline std::string metrics_table_row(const std::string& method,
                                     const std::string& training,
                                     const std::string& fine_tuning,
                                     const MetricsReport& m) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.4f, %.4f, %.4f", m.rel, m.log10, m.rms);
    return method + ", " + training + ", " + fine_tuning + ", " + buf;
}

}  // namespace endo
