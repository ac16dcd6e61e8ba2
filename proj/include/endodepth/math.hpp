// Small vector/quaternion math and the deterministic counter-based RNG.
#pragma once

#include <cmath>
#include <cstdint>

#include "endodepth/errors.hpp"

namespace endo {

inline constexpr double kPi = 3.14159265358979323846;

inline double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Hermite smoothstep mapped over [0,1]; inputs outside the unit interval clamp.
inline double smoothstep01(double t) {
    t = clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// ---------------------------------------------------------------------------
// Vec3

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator*(double s, Vec3 a) { return a * s; }
inline Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, Vec3 b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, Vec3 b) { a = a - b; return a; }
inline Vec3& operator*=(Vec3& a, double s) { a = a * s; return a; }

// Component-wise product (used for spectral throughput).
inline Vec3 mul(Vec3 a, Vec3 b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(Vec3 a) { return dot(a, a); }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(Vec3 a) {
    double n = norm(a);
    return n > 0.0 ? a / n : Vec3{0.0, 0.0, 0.0};
}
inline Vec3 lerp(Vec3 a, Vec3 b, double t) { return a + (b - a) * t; }
inline double max_component(Vec3 a) { return std::fmax(a.x, std::fmax(a.y, a.z)); }
inline bool is_finite(Vec3 a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Orthonormal basis around a unit vector n (branchless Duff et al. build).
inline void orthonormal_basis(Vec3 n, Vec3& t, Vec3& b) {
    double sign = n.z >= 0.0 ? 1.0 : -1.0;
    double a = -1.0 / (sign + n.z);
    double c = n.x * n.y * a;
    t = {1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
    b = {c, sign + n.y * n.y * a, -n.y};
}

// ---------------------------------------------------------------------------
// Quaternion (w, x, y, z), unit quaternions represent rotations.

struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
};

inline Quat operator*(Quat a, Quat b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quat normalize(Quat q) {
    double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    if (n <= 0.0) throw ParameterError("cannot normalize zero quaternion");
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

inline Vec3 rotate(Quat q, Vec3 v) {
    Vec3 u{q.x, q.y, q.z};
    Vec3 t = 2.0 * cross(u, v);
    return v + q.w * t + cross(u, t);
}

inline Quat quat_from_axis_angle(Vec3 axis, double angle_rad) {
    Vec3 a = normalize(axis);
    double h = 0.5 * angle_rad;
    double s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
}

// Quaternion mapping local axes (X, Y, Z columns) into world space.
// Columns must form a right-handed orthonormal basis.
inline Quat quat_from_basis(Vec3 X, Vec3 Y, Vec3 Z) {
    double m00 = X.x, m01 = Y.x, m02 = Z.x;
    double m10 = X.y, m11 = Y.y, m12 = Z.y;
    double m20 = X.z, m21 = Y.z, m22 = Z.z;
    double tr = m00 + m11 + m22;
    Quat q;
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q = {0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s};
    } else if (m00 > m11 && m00 > m22) {
        double s = std::sqrt(1.0 + m00 - m11 - m22) * 2.0;
        q = {(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s};
    } else if (m11 > m22) {
        double s = std::sqrt(1.0 + m11 - m00 - m22) * 2.0;
        q = {(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s};
    } else {
        double s = std::sqrt(1.0 + m22 - m00 - m11) * 2.0;
        q = {(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s};
    }
    return normalize(q);
}

// ---------------------------------------------------------------------------
// Deterministic RNG. Streams are derived from (seed, a, b, c) counters with
// splitmix64, so results do not depend on scheduling or evaluation order.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_u64(std::uint64_t a) {
    std::uint64_t s = a;
    return splitmix64(s);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
    std::uint64_t h = splitmix64(s);
    s ^= b;
    return h ^ splitmix64(s);
}

// PCG32 (O'Neill): 64-bit state, 32-bit output, period 2^64 per stream.
struct Pcg32 {
    std::uint64_t state = 0x853c49e6748fea9bULL;
    std::uint64_t inc = 0xda3e39cb94b95bdbULL;

    Pcg32() = default;
    Pcg32(std::uint64_t seed, std::uint64_t seq) {
        state = 0u;
        inc = (seq << 1u) | 1u;
        next_u32();
        state += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state;
        state = old * 6364136223846793005ULL + inc;
        std::uint32_t xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // Uniform double in [0, 1).
    double uniform() { return next_u32() * 0x1p-32; }
    // Uniform double in (0, 1); safe as argument of log().
    double uniform_pos() { return (next_u32() + 0.5) * 0x1p-32; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

// Stream keyed by an ordered tuple; used for per-pixel / per-item streams.
inline Pcg32 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return Pcg32(hash_combine(hash_combine(seed, a), b),
                 hash_combine(a, b) | 1u);
}

}  // namespace endo
