// Fast deterministic renderer: first-surface ray marching with local
// Lambertian shading. Produces the synthetic training images and their
// exact first-hit depth maps.
#pragma once

#include <optional>

#include "endodepth/endoscope.hpp"
#include "endodepth/frame.hpp"
#include "endodepth/image.hpp"
#include "endodepth/math.hpp"
#include "endodepth/parallel.hpp"
#include "endodepth/volume.hpp"

namespace endo {

struct SurfaceHit {
    double t = 0.0;   // distance along the (unit) ray direction, mm
    Vec3 position;
    Vec3 normal;      // unit, opposes the density gradient (faces the lumen)
};

// Finds the first upward crossing of density = iso along the ray, marching
// at half-voxel steps and refining the bracket by bisection. Returns nullopt
// when the ray misses the volume or never reaches the iso level. If the ray
// already starts at density >= iso the starting point is reported as the hit.
inline std::optional<SurfaceHit> march_first_surface(const DensityVolume& vol,
                                                     Vec3 origin, Vec3 dir,
                                                     double iso = 0.5,
                                                     double max_t = -1.0) {
    double t0, t1;
    if (!intersect_volume(vol, origin, dir, t0, t1)) return std::nullopt;
    if (max_t > 0.0 && t1 > max_t) t1 = max_t;
    if (t1 <= t0) return std::nullopt;
    double step = 0.5 * vol.spacing_mm;
    auto rho = [&](double t) { return sample_density(vol, origin + dir * t); };

    double t_prev = t0;
    double d_prev = rho(t_prev);
    double lo = 0.0, hi = 0.0;
    bool bracketed = false;
    if (d_prev >= iso) {
        SurfaceHit hit;
        hit.t = t_prev;
        hit.position = origin + dir * t_prev;
        hit.normal = -normalize(density_gradient(vol, hit.position));
        return hit;
    }
    for (double t = t_prev + step; t_prev < t1; t += step) {
        if (t > t1) t = t1;
        double d = rho(t);
        if (d >= iso) {
            lo = t_prev;
            hi = t;
            bracketed = true;
            break;
        }
        if (t >= t1) break;
        t_prev = t;
        d_prev = d;
    }
    if (!bracketed) return std::nullopt;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        if (rho(mid) >= iso)
            hi = mid;
        else
            lo = mid;
    }
    SurfaceHit hit;
    hit.t = 0.5 * (lo + hi);
    hit.position = origin + dir * hit.t;
    hit.normal = -normalize(density_gradient(vol, hit.position));
    return hit;
}

struct RasterParams {
    double surface_iso = 0.5;
    double surface_albedo = 0.75;  // gray Lambertian reflectance
    double exposure = 1.0;
};

// Renders one grayscale frame plus its first-hit depth map. The miss
// sentinel is the volume diagonal. Deterministic for fixed inputs and any
// thread count. Identifier fields of the Frame are left for the caller.
inline Frame render_raster_frame(const DensityVolume& vol,
                                 const EndoscopeCamera& cam,
                                 const LightRig& rig, const Pose& pose,
                                 const RasterParams& params = {},
                                 int threads = 1) {
    validate_camera(cam);
    validate_light_rig(rig);
    float sentinel = static_cast<float>(vol.diagonal_mm());
    Frame frame;
    frame.image = ImageRGB(cam.width, cam.height);
    auto depth = std::make_shared<DepthMap>(cam.width, cam.height, sentinel);
    frame.renderer = RendererKind::raster;
    parallel_for(static_cast<std::size_t>(cam.height), threads, [&](std::size_t row) {
        int y = static_cast<int>(row);
        for (int x = 0; x < cam.width; ++x) {
            Ray ray = generate_ray(cam, pose, x + 0.5, y + 0.5);
            auto hit = march_first_surface(vol, ray.origin, ray.dir,
                                           params.surface_iso);
            if (!hit) continue;
            double radiance = 0.0;
            for (const auto& ls : light_irradiance(rig, pose, hit->position)) {
                double cosine = dot(hit->normal, ls.direction);
                if (cosine > 0.0)
                    radiance += params.surface_albedo * cosine * ls.irradiance;
            }
            double v = tone_map(radiance, params.exposure);
            frame.image.set_pixel(x, y, {v, v, v});
            depth->at(x, y) = static_cast<float>(hit->t);
        }
    });
    frame.depth = std::move(depth);
    return frame;
}

}  // namespace endo
