// Linear-light RGB images, depth maps, tone mapping, and resampling.
#pragma once

#include <cstdint>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/math.hpp"

namespace endo {

// Row-major RGB image; values are display-referred in [0,1] after tone
// mapping, or linear radiance while rendering.
struct ImageRGB {
    int width = 0, height = 0;
    std::vector<float> data;  // size width*height*3, channel fastest

    ImageRGB() = default;
    ImageRGB(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1) throw ParameterError("image size must be positive");
        data.assign(static_cast<std::size_t>(w) * h * 3, 0.0f);
    }
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * 3 + c;
    }
    float& at(int x, int y, int c) { return data[index(x, y, c)]; }
    float at(int x, int y, int c) const { return data[index(x, y, c)]; }
    Vec3 pixel(int x, int y) const {
        return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
    }
    void set_pixel(int x, int y, Vec3 v) {
        at(x, y, 0) = static_cast<float>(v.x);
        at(x, y, 1) = static_cast<float>(v.y);
        at(x, y, 2) = static_cast<float>(v.z);
    }
};

// Per-pixel scene depth along the primary ray, in mm. Pixels whose ray never
// reaches the opacity threshold store the sentinel value exactly.
struct DepthMap {
    int width = 0, height = 0;
    float sentinel = 0.0f;
    std::vector<float> data;  // size width*height, row-major

    DepthMap() = default;
    DepthMap(int w, int h, float sentinel_value)
        : width(w), height(h), sentinel(sentinel_value) {
        if (w < 1 || h < 1) throw ParameterError("depth map size must be positive");
        data.assign(static_cast<std::size_t>(w) * h, sentinel_value);
    }
    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    bool is_valid(int x, int y) const { return at(x, y) != sentinel; }
};

// Reinhard tone curve followed by gamma 2.2 encoding; maps [0,inf) -> [0,1).
inline double tone_map(double linear, double exposure = 1.0) {
    double e = std::fmax(0.0, linear) * exposure;
    return std::pow(e / (1.0 + e), 1.0 / 2.2);
}

inline Vec3 tone_map(Vec3 linear, double exposure = 1.0) {
    return {tone_map(linear.x, exposure), tone_map(linear.y, exposure),
            tone_map(linear.z, exposure)};
}

// Inverse of tone_map for encoded values in [0,1).
inline double tone_map_inverse(double encoded, double exposure = 1.0) {
    double s = std::pow(clamp(encoded, 0.0, 1.0 - 1e-12), 2.2);
    return s / ((1.0 - s) * exposure);
}

// Mean of the three channel values; used as the scalar intensity feature.
inline double pixel_intensity(const ImageRGB& img, int x, int y) {
    return (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3.0;
}

// Bilinear sample with edge replication; (sx, sy) in pixel-center coords.
inline Vec3 sample_bilinear(const ImageRGB& img, double sx, double sy) {
    sx = clamp(sx, 0.0, img.width - 1.0);
    sy = clamp(sy, 0.0, img.height - 1.0);
    int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
    if (x0 > img.width - 2) x0 = img.width > 1 ? img.width - 2 : 0;
    if (y0 > img.height - 2) y0 = img.height > 1 ? img.height - 2 : 0;
    int x1 = img.width > 1 ? x0 + 1 : x0;
    int y1 = img.height > 1 ? y0 + 1 : y0;
    double fx = sx - x0, fy = sy - y0;
    Vec3 a = lerp(img.pixel(x0, y0), img.pixel(x1, y0), fx);
    Vec3 b = lerp(img.pixel(x0, y1), img.pixel(x1, y1), fx);
    return lerp(a, b, fy);
}

}  // namespace endo
