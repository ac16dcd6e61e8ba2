// Shared utilities for the unit test suite.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "endodepth/image.hpp"
#include "endodepth/math.hpp"
#include "endodepth/volume.hpp"

namespace testutil {

// Unique scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("endodepth_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline double rel_err(double a, double b) {
    double denom = std::fmax(std::fabs(a), std::fabs(b));
    if (denom == 0.0) return 0.0;
    return std::fabs(a - b) / denom;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
}

// Uniform-density volume over a box with x/y centered and z from 0.
inline endo::DensityVolume uniform_volume(int nx, int ny, int nz,
                                          double spacing, float value) {
    endo::DensityVolume v;
    v.nx = nx;
    v.ny = ny;
    v.nz = nz;
    v.spacing_mm = spacing;
    v.origin = {-0.5 * (nx - 1) * spacing, -0.5 * (ny - 1) * spacing, 0.0};
    v.data.assign(static_cast<std::size_t>(nx) * ny * nz, value);
    return v;
}

// Density ramp along z crossing 0.5 exactly at z = wall_z; linear over
// [wall_z - w/2, wall_z + w/2] so trilinear sampling reproduces it exactly.
inline endo::DensityVolume wall_volume(int nx, int ny, int nz, double spacing,
                                       double wall_z, double w) {
    endo::DensityVolume v = uniform_volume(nx, ny, nz, spacing, 0.0f);
    for (int k = 0; k < nz; ++k) {
        double z = k * spacing;
        double d = endo::clamp((z - wall_z) / w + 0.5, 0.0, 1.0);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                v.data[v.index(i, j, k)] = static_cast<float>(d);
    }
    return v;
}

// Straight open tube: no folds, no curvature.
inline endo::ColonParams straight_colon() {
    endo::ColonParams p;
    p.radius_mm = 9.0;
    p.length_mm = 80.0;
    p.fold_amplitude_mm = 0.0;
    p.fold_period_mm = 7.0;
    p.centerline_curvature = 0.0;
    p.wall_thickness_mm = 1.2;
    p.seed = 42;
    return p;
}

inline endo::ImageRGB constant_image(int w, int h, double value) {
    endo::ImageRGB img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set_pixel(x, y, {value, value, value});
    return img;
}

}  // namespace testutil
