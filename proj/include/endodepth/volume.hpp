// Scalar density volumes and the procedural colon phantom that fills them.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/math.hpp"

namespace endo {

// ---------------------------------------------------------------------------
// Node-centered scalar grid. Node (i,j,k) sits at world position
// origin + spacing*(i,j,k); values are linear density in [0,1] stored as f32
// at index i + nx*(j + ny*k) (x varies fastest). Points outside the node
// bounding box sample to 0 (vacuum).

struct DensityVolume {
    int nx = 0, ny = 0, nz = 0;
    double spacing_mm = 1.0;
    Vec3 origin{0.0, 0.0, 0.0};
    std::vector<float> data;

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nx) *
                   (static_cast<std::size_t>(j) +
                    static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
    }
    float& at(int i, int j, int k) { return data[index(i, j, k)]; }
    float at(int i, int j, int k) const { return data[index(i, j, k)]; }

    Vec3 extent_mm() const {
        return {(nx - 1) * spacing_mm, (ny - 1) * spacing_mm, (nz - 1) * spacing_mm};
    }
    Vec3 max_corner() const { return origin + extent_mm(); }
    // Length of the node bounding box diagonal; used as the miss sentinel.
    double diagonal_mm() const { return norm(extent_mm()); }
};

inline void validate_volume_dims(int nx, int ny, int nz, double spacing_mm) {
    if (nx < 2 || ny < 2 || nz < 2)
        throw ParameterError("volume dimensions must be at least 2 per axis");
    if (!(spacing_mm > 0.0) || !std::isfinite(spacing_mm))
        throw ParameterError("voxel spacing must be positive");
}

// Trilinear interpolation of the density field at world point p; 0 outside.
inline double sample_density(const DensityVolume& v, Vec3 p) {
    double rx = (p.x - v.origin.x) / v.spacing_mm;
    double ry = (p.y - v.origin.y) / v.spacing_mm;
    double rz = (p.z - v.origin.z) / v.spacing_mm;
    if (rx < 0.0 || ry < 0.0 || rz < 0.0 || rx > v.nx - 1 || ry > v.ny - 1 ||
        rz > v.nz - 1)
        return 0.0;
    int i0 = static_cast<int>(rx), j0 = static_cast<int>(ry), k0 = static_cast<int>(rz);
    if (i0 > v.nx - 2) i0 = v.nx - 2;
    if (j0 > v.ny - 2) j0 = v.ny - 2;
    if (k0 > v.nz - 2) k0 = v.nz - 2;
    double fx = rx - i0, fy = ry - j0, fz = rz - k0;
    const float* d = v.data.data();
    std::size_t base = v.index(i0, j0, k0);
    std::size_t sy = static_cast<std::size_t>(v.nx);
    std::size_t sz = sy * static_cast<std::size_t>(v.ny);
    double c000 = d[base], c100 = d[base + 1];
    double c010 = d[base + sy], c110 = d[base + sy + 1];
    double c001 = d[base + sz], c101 = d[base + sz + 1];
    double c011 = d[base + sy + sz], c111 = d[base + sy + sz + 1];
    double c00 = lerp(c000, c100, fx), c10 = lerp(c010, c110, fx);
    double c01 = lerp(c001, c101, fx), c11 = lerp(c011, c111, fx);
    return lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz);
}

// Central-difference gradient of the sampled field (step = spacing/2).
inline Vec3 density_gradient(const DensityVolume& v, Vec3 p) {
    double h = 0.5 * v.spacing_mm;
    double inv = 1.0 / (2.0 * h);
    return {(sample_density(v, {p.x + h, p.y, p.z}) -
             sample_density(v, {p.x - h, p.y, p.z})) * inv,
            (sample_density(v, {p.x, p.y + h, p.z}) -
             sample_density(v, {p.x, p.y - h, p.z})) * inv,
            (sample_density(v, {p.x, p.y, p.z + h}) -
             sample_density(v, {p.x, p.y, p.z - h})) * inv};
}

// Ray / node-bounding-box intersection. Returns false on a miss, otherwise
// [t0, t1] is the parametric overlap (t0 clamped to at least 0).
inline bool intersect_volume(const DensityVolume& v, Vec3 o, Vec3 dir,
                             double& t0, double& t1) {
    Vec3 lo = v.origin, hi = v.max_corner();
    t0 = 0.0;
    t1 = std::numeric_limits<double>::infinity();
    const double od[3] = {o.x, o.y, o.z};
    const double dd[3] = {dir.x, dir.y, dir.z};
    const double lod[3] = {lo.x, lo.y, lo.z};
    const double hid[3] = {hi.x, hi.y, hi.z};
    for (int a = 0; a < 3; ++a) {
        if (dd[a] == 0.0) {
            if (od[a] < lod[a] || od[a] > hid[a]) return false;
            continue;
        }
        double inv = 1.0 / dd[a];
        double ta = (lod[a] - od[a]) * inv;
        double tb = (hid[a] - od[a]) * inv;
        if (ta > tb) std::swap(ta, tb);
        if (ta > t0) t0 = ta;
        if (tb < t1) t1 = tb;
        if (t0 > t1) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Procedural colon phantom: a curved tube with sinusoidal ring folds. The
// wall is a smoothstep shell of width wall_thickness_mm around the (possibly
// fold-modulated) tube radius, so the 0.5 iso-level sits exactly at the
// local radius. The tube axis is the volume z axis.

struct ColonParams {
    double radius_mm = 9.0;
    double length_mm = 80.0;
    double fold_amplitude_mm = 1.5;
    double fold_period_mm = 7.0;
    double centerline_curvature = 0.15;  // max slope of the centerline
    double wall_thickness_mm = 1.2;
    std::uint64_t seed = 1;
};

inline void validate_colon_params(const ColonParams& p) {
    if (!(p.radius_mm > 0.0)) throw ParameterError("radius_mm must be positive");
    if (!(p.length_mm > 0.0)) throw ParameterError("length_mm must be positive");
    if (p.fold_amplitude_mm < 0.0 || p.fold_amplitude_mm >= p.radius_mm)
        throw ParameterError("fold_amplitude_mm must be in [0, radius_mm)");
    if (!(p.fold_period_mm > 0.0))
        throw ParameterError("fold_period_mm must be positive");
    if (p.centerline_curvature < 0.0)
        throw ParameterError("centerline_curvature must be non-negative");
    if (!(p.wall_thickness_mm > 0.0) || p.wall_thickness_mm > p.radius_mm)
        throw ParameterError("wall_thickness_mm must be in (0, radius_mm]");
}

namespace detail {
struct ColonPhases {
    double bend0, bend1, fold;
};
inline ColonPhases colon_phases(std::uint64_t seed) {
    std::uint64_t s = hash_combine(seed, 0x636f6c6fULL);
    auto angle = [&s]() { return splitmix64(s) * 0x1p-64 * 2.0 * kPi; };
    ColonPhases ph{};
    ph.bend0 = angle();
    ph.bend1 = angle();
    ph.fold = angle();
    return ph;
}
}  // namespace detail

// Centerline point at axial coordinate t (mm); starts at (0,0,0) for t = 0.
inline Vec3 colon_centerline(const ColonParams& p, double t) {
    auto ph = detail::colon_phases(p.seed);
    double amp = p.centerline_curvature * p.length_mm / (2.0 * kPi);
    double w = 2.0 * kPi / p.length_mm;
    double cx = amp * (std::sin(w * t + ph.bend0) - std::sin(ph.bend0));
    double cy = 0.5 * amp * (std::sin(0.5 * w * t + ph.bend1) - std::sin(ph.bend1));
    return {cx, cy, t};
}

// Unit tangent of the centerline at axial coordinate t.
inline Vec3 colon_tangent(const ColonParams& p, double t) {
    auto ph = detail::colon_phases(p.seed);
    double amp = p.centerline_curvature * p.length_mm / (2.0 * kPi);
    double w = 2.0 * kPi / p.length_mm;
    return normalize(Vec3{amp * w * std::cos(w * t + ph.bend0),
                          0.25 * amp * w * std::cos(0.5 * w * t + ph.bend1), 1.0});
}

// Local tube radius including the ring-fold modulation.
inline double colon_local_radius(const ColonParams& p, double z) {
    auto ph = detail::colon_phases(p.seed);
    return p.radius_mm +
           p.fold_amplitude_mm * std::sin(2.0 * kPi * z / p.fold_period_mm + ph.fold);
}

// Analytic density of the phantom at world point q.
inline double colon_density(const ColonParams& p, Vec3 q) {
    Vec3 c = colon_centerline(p, q.z);
    double dx = q.x - c.x, dy = q.y - c.y;
    double d = std::sqrt(dx * dx + dy * dy) - colon_local_radius(p, q.z);
    return smoothstep01((d + 0.5 * p.wall_thickness_mm) / p.wall_thickness_mm);
}

// Rasterize the phantom into a node-centered grid. The volume is centered on
// x = y = 0 with z spanning [0, (nz-1)*spacing]. Throws GeometryError when
// the tube cross-section or length does not fit inside the grid.
inline DensityVolume make_colon_volume(const ColonParams& p, int nx, int ny,
                                       int nz, double spacing_mm) {
    validate_colon_params(p);
    validate_volume_dims(nx, ny, nz, spacing_mm);
    DensityVolume v;
    v.nx = nx;
    v.ny = ny;
    v.nz = nz;
    v.spacing_mm = spacing_mm;
    v.origin = {-0.5 * (nx - 1) * spacing_mm, -0.5 * (ny - 1) * spacing_mm, 0.0};

    double amp = p.centerline_curvature * p.length_mm / (2.0 * kPi);
    double reach = 2.0 * amp + p.radius_mm + p.fold_amplitude_mm +
                   0.5 * p.wall_thickness_mm;
    if (reach > 0.5 * (nx - 1) * spacing_mm || reach > 0.5 * (ny - 1) * spacing_mm)
        throw GeometryError("tube cross-section exceeds volume x/y extent");
    if (p.length_mm > (nz - 1) * spacing_mm)
        throw GeometryError("tube length exceeds volume z extent");

    v.data.resize(static_cast<std::size_t>(nx) * ny * nz);
    for (int k = 0; k < nz; ++k) {
        double z = k * spacing_mm;
        Vec3 c = colon_centerline(p, z);
        double r = colon_local_radius(p, z);
        for (int j = 0; j < ny; ++j) {
            double y = v.origin.y + j * spacing_mm;
            double dy = y - c.y;
            float* row = v.data.data() + v.index(0, j, k);
            for (int i = 0; i < nx; ++i) {
                double x = v.origin.x + i * spacing_mm;
                double dx = x - c.x;
                double d = std::sqrt(dx * dx + dy * dy) - r;
                row[i] = static_cast<float>(
                    smoothstep01((d + 0.5 * p.wall_thickness_mm) / p.wall_thickness_mm));
            }
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Raw grid exchange format. Layout:
//   header line  "DVOL nx ny nz spacing_mm\n"  (ASCII, spacing printed %.9g)
//   payload      nx*ny*nz little-endian f32, x fastest, then y, then z
// The world origin is not stored; imported grids are placed at the canonical
// origin (x/y centered, z starting at 0).

inline void save_dvol(const std::string& path, const DensityVolume& v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    char header[128];
    std::snprintf(header, sizeof(header), "DVOL %d %d %d %.9g\n", v.nx, v.ny,
                  v.nz, v.spacing_mm);
    out << header;
    out.write(reinterpret_cast<const char*>(v.data.data()),
              static_cast<std::streamsize>(v.data.size() * sizeof(float)));
    if (!out) throw IoError("short write: " + path);
}

inline DensityVolume load_dvol(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("missing header: " + path);
    char magic[6] = {};
    int nx = 0, ny = 0, nz = 0;
    double spacing = 0.0;
    if (std::sscanf(line.c_str(), "%5s %d %d %d %lf", magic, &nx, &ny, &nz,
                    &spacing) != 5 ||
        std::string(magic) != "DVOL")
        throw FormatError("bad grid header: " + path);
    validate_volume_dims(nx, ny, nz, spacing);
    DensityVolume v;
    v.nx = nx;
    v.ny = ny;
    v.nz = nz;
    v.spacing_mm = spacing;
    v.origin = {-0.5 * (nx - 1) * spacing, -0.5 * (ny - 1) * spacing, 0.0};
    v.data.resize(static_cast<std::size_t>(nx) * ny * nz);
    in.read(reinterpret_cast<char*>(v.data.data()),
            static_cast<std::streamsize>(v.data.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(v.data.size() * sizeof(float)))
        throw FormatError("truncated grid payload: " + path);
    for (float f : v.data)
        if (!(f >= 0.0f && f <= 1.0f))
            throw FormatError("density outside [0,1]: " + path);
    return v;
}

}  // namespace endo
