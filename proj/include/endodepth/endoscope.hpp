// Virtual endoscope: wide-angle distorted pinhole camera, co-moving point
// lights with inverse-square falloff, and centerline flythrough trajectories.
#pragma once

#include <cstdint>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/math.hpp"
#include "endodepth/volume.hpp"

namespace endo {

// Camera convention: +z is the optical axis, +x points right in the image,
// +y points down (pixel v grows downward). Sensor coordinates (u,v) are
// continuous with pixel (i,j) centered at (i+0.5, j+0.5); the closed domain
// is [0,width] x [0,height].
struct EndoscopeCamera {
    int width = 64, height = 64;
    double fov_deg = 120.0;           // horizontal field of view
    double principal_u = -1.0;        // <0 means width/2
    double principal_v = -1.0;        // <0 means height/2
    double k1 = -0.05;                // radial distortion coefficient

    double pu() const { return principal_u < 0.0 ? 0.5 * width : principal_u; }
    double pv() const { return principal_v < 0.0 ? 0.5 * height : principal_v; }
    double focal_px() const {
        return 0.5 * width / std::tan(0.5 * fov_deg * kPi / 180.0);
    }
};

inline void validate_camera(const EndoscopeCamera& c) {
    if (c.width < 1 || c.height < 1)
        throw ParameterError("camera resolution must be positive");
    if (!(c.fov_deg > 0.0) || !(c.fov_deg < 180.0))
        throw ParameterError("field of view must be in (0, 180) degrees");
    // The distortion factor 1 + k1*r^2 must stay positive over the sensor so
    // ray directions never flip; r is bounded by the sensor corner.
    double cu = std::fmax(c.pu(), c.width - c.pu());
    double cv = std::fmax(c.pv(), c.height - c.pv());
    double r2 = (cu * cu + cv * cv) / (c.focal_px() * c.focal_px());
    if (1.0 + c.k1 * r2 <= 0.0)
        throw ParameterError("distortion coefficient k1 folds the sensor corner");
}

struct Pose {
    Vec3 position{0.0, 0.0, 0.0};
    Quat orientation;  // camera-to-world rotation
};

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length
};

// Ray through sensor position (u,v). Radial distortion acts on normalized
// image coordinates: x_d = x_n * (1 + k1 * r^2).
inline Ray generate_ray(const EndoscopeCamera& cam, const Pose& pose, double u,
                        double v) {
    if (u < 0.0 || u > cam.width || v < 0.0 || v > cam.height)
        throw ParameterError("sensor coordinates outside the sensor domain");
    double f = cam.focal_px();
    double xn = (u - cam.pu()) / f;
    double yn = (v - cam.pv()) / f;
    double s = 1.0 + cam.k1 * (xn * xn + yn * yn);
    Vec3 dir_cam{xn * s, yn * s, 1.0};
    return {pose.position, normalize(rotate(pose.orientation, dir_cam))};
}

// Point light rigidly attached to the camera.
struct Light {
    Vec3 offset{0.0, 0.0, 0.0};  // position in the camera frame, mm
    double power = 350.0;        // radiant power, W
    Vec3 color{1.0, 1.0, 1.0};
};

struct LightRig {
    std::vector<Light> lights;
};

inline void validate_light_rig(const LightRig& rig) {
    if (rig.lights.size() < 2 || rig.lights.size() > 3)
        throw ParameterError("light rig must carry 2 or 3 lights");
    for (const auto& l : rig.lights)
        if (!(l.power > 0.0)) throw ParameterError("light power must be positive");
}

inline LightRig default_light_rig(double power = 350.0) {
    LightRig rig;
    rig.lights.push_back({{+1.5, 0.0, 0.0}, power, {1.0, 1.0, 1.0}});
    rig.lights.push_back({{-1.5, 0.0, 0.0}, power, {1.0, 1.0, 1.0}});
    return rig;
}

// Distance below which the inverse-square law is clamped (mm), so lights
// touching the mucosa cannot produce unbounded irradiance.
inline constexpr double kMinLightDistance = 0.1;

struct LightSample {
    double irradiance = 0.0;  // W/mm^2 at the receiving point
    Vec3 direction;           // unit vector from the point toward the light
    double distance = 0.0;    // mm
    Vec3 color{1.0, 1.0, 1.0};
};

inline Vec3 light_world_position(const Light& l, const Pose& pose) {
    return pose.position + rotate(pose.orientation, l.offset);
}

// Unoccluded irradiance of every light of the rig at world point p.
inline std::vector<LightSample> light_irradiance(const LightRig& rig,
                                                 const Pose& pose, Vec3 p) {
    std::vector<LightSample> out;
    out.reserve(rig.lights.size());
    for (const auto& l : rig.lights) {
        Vec3 lp = light_world_position(l, pose);
        Vec3 to = lp - p;
        double d = norm(to);
        double deff = std::fmax(d, kMinLightDistance);
        LightSample s;
        s.irradiance = l.power / (4.0 * kPi * deff * deff);
        s.direction = d > 0.0 ? to / d : Vec3{0.0, 0.0, 1.0};
        s.distance = d;
        s.color = l.color;
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Flythrough trajectory. Poses are spread along the tube axis over
// [0, 0.9*length]; the orientation aligns the optical axis with the local
// centerline tangent. jitter_scale in [0,1] blends in a deterministic random
// radial offset (bounded away from the wall) and an angular perturbation of
// up to 30 degrees.

inline std::vector<Pose> make_trajectory(const ColonParams& params, int n_poses,
                                         std::uint64_t seed,
                                         double jitter_scale = 1.0) {
    validate_colon_params(params);
    if (n_poses < 1) throw ParameterError("trajectory needs at least one pose");
    if (jitter_scale < 0.0 || jitter_scale > 1.0)
        throw ParameterError("jitter_scale must be in [0,1]");
    std::vector<Pose> poses;
    poses.reserve(static_cast<std::size_t>(n_poses));
    double t_max = 0.9 * params.length_mm;
    double max_radial =
        0.5 * std::fmax(0.0, params.radius_mm - params.fold_amplitude_mm -
                                 0.5 * params.wall_thickness_mm);
    for (int i = 0; i < n_poses; ++i) {
        double t = n_poses == 1 ? 0.0 : t_max * i / (n_poses - 1);
        Vec3 forward = colon_tangent(params, t);
        Vec3 ref{0.0, 1.0, 0.0};  // world down as the image-down reference
        Vec3 right = normalize(cross(ref, forward));
        if (norm(right) == 0.0) right = {1.0, 0.0, 0.0};
        Vec3 down = cross(forward, right);
        Pose pose;
        pose.position = colon_centerline(params, t);
        pose.orientation = quat_from_basis(right, down, forward);
        if (jitter_scale > 0.0) {
            Pcg32 rng = make_stream(seed, 0x74726a31ULL, static_cast<std::uint64_t>(i));
            double ang = rng.uniform() * 2.0 * kPi;
            double rad = rng.uniform() * max_radial * jitter_scale;
            pose.position += right * (rad * std::cos(ang)) + down * (rad * std::sin(ang));
            Vec3 axis{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                      rng.uniform(-1.0, 1.0)};
            if (norm(axis) < 1e-9) axis = {0.0, 0.0, 1.0};
            double angle = rng.uniform() * (30.0 * kPi / 180.0) * jitter_scale;
            pose.orientation =
                normalize(quat_from_axis_angle(axis, angle) * pose.orientation);
        }
        poses.push_back(pose);
    }
    return poses;
}

}  // namespace endo
