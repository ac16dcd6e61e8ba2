// Monte Carlo volumetric path tracer: delta tracking through the density
// volume, next-event estimation toward the endoscope lights, HG phase
// scattering, and an embedded iso-surface with a Lambertian+specular BRDF.
// Depth maps come from a deterministic accumulated-opacity threshold on the
// primary ray, so they are independent of the stochastic radiance estimate.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "endodepth/endoscope.hpp"
#include "endodepth/frame.hpp"
#include "endodepth/image.hpp"
#include "endodepth/math.hpp"
#include "endodepth/optics.hpp"
#include "endodepth/parallel.hpp"
#include "endodepth/phase.hpp"
#include "endodepth/volume.hpp"

namespace endo {

// One appearance preset. Styles rendered as a set must share the extinction
// (sigma_t) profile of their transfer functions; color, scattering albedo,
// surface reflectance, lighting tint and exposure are free per style.
struct RenderStyle {
    int style_id = 1;
    TransferFunction transfer;
    Vec3 light_color{1.0, 1.0, 1.0};
    double surface_roughness = 0.5;  // in [0,1]
    double specular_weight = 0.2;    // in [0,1]
    double exposure = 1.0;
};

inline void validate_style(const RenderStyle& s) {
    s.transfer.validate();
    if (s.surface_roughness < 0.0 || s.surface_roughness > 1.0)
        throw ParameterError("surface_roughness must be in [0,1]");
    if (s.specular_weight < 0.0 || s.specular_weight > 1.0)
        throw ParameterError("specular_weight must be in [0,1]");
    if (!(s.exposure > 0.0)) throw ParameterError("exposure must be positive");
    if (s.light_color.x < 0.0 || s.light_color.y < 0.0 || s.light_color.z < 0.0)
        throw ParameterError("light_color must be non-negative");
}

struct PathTracerConfig {
    int spp = 8;
    int max_bounces = 6;
    int rr_start_bounce = 3;
    double opacity_threshold = 0.95;
    std::uint64_t seed = 0;
    double max_distance_mm = 0.0;  // <=0: volume diagonal
    double march_step_mm = 0.0;    // <=0: half the voxel spacing
    double surface_iso = 0.5;
};

inline void validate_path_config(const PathTracerConfig& c) {
    if (c.spp < 1) throw ParameterError("spp must be at least 1");
    if (c.max_bounces < 1) throw ParameterError("max_bounces must be at least 1");
    if (c.rr_start_bounce < 0)
        throw ParameterError("rr_start_bounce must be non-negative");
    if (!(c.opacity_threshold > 0.0) || !(c.opacity_threshold < 1.0))
        throw ParameterError("opacity_threshold must be in (0,1)");
    if (!(c.surface_iso > 0.0) || !(c.surface_iso < 1.0))
        throw ParameterError("surface_iso must be in (0,1)");
}

inline double resolve_march_step(const DensityVolume& vol,
                                 const PathTracerConfig& c) {
    return c.march_step_mm > 0.0 ? c.march_step_mm : 0.5 * vol.spacing_mm;
}

inline double resolve_max_distance(const DensityVolume& vol,
                                   const PathTracerConfig& c) {
    return c.max_distance_mm > 0.0 ? c.max_distance_mm : vol.diagonal_mm();
}

// ---------------------------------------------------------------------------
// exp(-optical depth) between two points, by midpoint ray marching of the
// sigma_t field at the given step. Outside the volume the medium is vacuum.
inline double transmittance(const DensityVolume& vol, const TransferFunction& tf,
                            Vec3 x, Vec3 x_prime, double step) {
    if (!(step > 0.0)) throw ParameterError("march step must be positive");
    Vec3 diff = x_prime - x;
    double dist = norm(diff);
    if (dist <= 0.0) return 1.0;
    Vec3 dir = diff / dist;
    double t0, t1;
    if (!intersect_volume(vol, x, dir, t0, t1)) return 1.0;
    if (t1 > dist) t1 = dist;
    if (t1 <= t0) return 1.0;
    double tau = 0.0;
    int n = static_cast<int>(std::ceil((t1 - t0) / step));
    double h = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) {
        double tm = t0 + (i + 0.5) * h;
        tau += tf.eval(sample_density(vol, x + dir * tm)).sigma_t() * h;
    }
    return std::exp(-tau);
}

// ---------------------------------------------------------------------------
// Deterministic opacity-threshold depth along a ray: the distance at which
// accumulated opacity 1 - exp(-integral of sigma_t) first reaches the
// threshold, found by midpoint marching with linear interpolation inside the
// crossing segment. nullopt when the threshold is never reached.
inline std::optional<double> opacity_depth(const DensityVolume& vol,
                                           const TransferFunction& tf, Ray ray,
                                           const PathTracerConfig& config) {
    validate_path_config(config);
    double step = resolve_march_step(vol, config);
    double max_d = resolve_max_distance(vol, config);
    double tau_target = -std::log(1.0 - config.opacity_threshold);
    double t0, t1;
    if (!intersect_volume(vol, ray.origin, ray.dir, t0, t1)) return std::nullopt;
    if (t1 > max_d) t1 = max_d;
    if (t1 <= t0) return std::nullopt;
    int n = static_cast<int>(std::ceil((t1 - t0) / step));
    double h = (t1 - t0) / n;
    double tau = 0.0;
    for (int i = 0; i < n; ++i) {
        double ta = t0 + i * h;
        double sigma =
            tf.eval(sample_density(vol, ray.origin + ray.dir * (ta + 0.5 * h)))
                .sigma_t();
        double dtau = sigma * h;
        if (tau + dtau >= tau_target) {
            double frac = dtau > 0.0 ? (tau_target - tau) / dtau : 1.0;
            return ta + frac * h;
        }
        tau += dtau;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Path tracing internals.

namespace detail {

enum class FlightKind { escaped, medium, surface };

struct FlightEvent {
    FlightKind kind = FlightKind::escaped;
    double t = 0.0;
    OpticalProperties props;  // medium events only
};

// One free flight by delta tracking against the global sigma_t majorant.
// Collision candidates at density >= iso become surface events, located by
// bisecting the bracket between the last known sub-iso point and the
// candidate. The flight starts below iso (callers offset surface origins).
inline FlightEvent free_flight(const DensityVolume& vol,
                               const TransferFunction& tf, Ray ray,
                               double majorant, double iso, double max_d,
                               Pcg32& rng) {
    FlightEvent ev;
    double t0, t1;
    if (!intersect_volume(vol, ray.origin, ray.dir, t0, t1)) return ev;
    if (t1 > max_d) t1 = max_d;
    if (t1 <= t0 || majorant <= 0.0) return ev;
    auto rho_at = [&](double t) {
        return sample_density(vol, ray.origin + ray.dir * t);
    };
    double t_below = t0;
    double t = t0;
    for (;;) {
        t -= std::log(rng.uniform_pos()) / majorant;
        if (t >= t1) return ev;
        double rho = rho_at(t);
        if (rho >= iso) {
            double lo = t_below, hi = t;
            for (int it = 0; it < 40; ++it) {
                double mid = 0.5 * (lo + hi);
                if (rho_at(mid) >= iso)
                    hi = mid;
                else
                    lo = mid;
            }
            ev.kind = FlightKind::surface;
            ev.t = 0.5 * (lo + hi);
            return ev;
        }
        t_below = t;
        OpticalProperties props = tf.eval(rho);
        if (rng.uniform() * majorant < props.sigma_t()) {
            ev.kind = FlightKind::medium;
            ev.t = t;
            ev.props = props;
            return ev;
        }
    }
}

// Normalized Blinn specular lobe; exponent derived from roughness.
inline double blinn_exponent(double roughness) {
    double r = clamp(roughness, 0.05, 1.0);
    return std::fmax(0.0, 2.0 / (r * r) - 2.0);
}

inline double blinn_lobe(double n_dot_h, double exponent) {
    if (n_dot_h <= 0.0) return 0.0;
    return (exponent + 8.0) / (8.0 * kPi) * std::pow(n_dot_h, exponent);
}

}  // namespace detail

struct TraceResult {
    Vec3 radiance;                 // linear RGB estimate of one path sample
    std::optional<double> depth;   // deterministic opacity-threshold depth
    bool rejected = false;         // radiance was non-finite and discarded
};

// Traces one radiance sample for `ray` and evaluates the deterministic
// opacity depth of the same ray. `tf` is the medium transfer driving both
// transport and depth; for plain single-style rendering pass style.transfer.
inline TraceResult trace_path(const DensityVolume& vol,
                              const TransferFunction& tf,
                              const RenderStyle& style,
                              const EndoscopeCamera& cam, const LightRig& rig,
                              const Pose& pose, Ray ray,
                              const PathTracerConfig& config, Pcg32& rng) {
    (void)cam;  // scene framing is already baked into the ray
    validate_path_config(config);
    TraceResult result;
    result.depth = opacity_depth(vol, tf, ray, config);

    double majorant = tf.max_sigma_t();
    double iso = config.surface_iso;
    double max_d = resolve_max_distance(vol, config);
    double step = resolve_march_step(vol, config);
    double surface_offset = 0.05 * vol.spacing_mm;

    Vec3 L{0.0, 0.0, 0.0};
    Vec3 throughput{1.0, 1.0, 1.0};
    Ray current = ray;
    for (int bounce = 0; bounce < config.max_bounces; ++bounce) {
        detail::FlightEvent ev = detail::free_flight(vol, tf, current, majorant,
                                                     iso, max_d, rng);
        if (ev.kind == detail::FlightKind::escaped) break;
        Vec3 x = current.origin + current.dir * ev.t;

        if (ev.kind == detail::FlightKind::medium) {
            const OpticalProperties& props = ev.props;
            double sigma_t = props.sigma_t();
            double scatter_albedo = sigma_t > 0.0 ? props.sigma_s / sigma_t : 0.0;
            throughput = mul(throughput, props.albedo * scatter_albedo);
            // Next-event estimation toward every light.
            for (const auto& ls : light_irradiance(rig, pose, x)) {
                double phase = hg_pdf(props.phase_g, dot(current.dir, ls.direction));
                if (phase <= 0.0 || ls.irradiance <= 0.0) continue;
                Vec3 lp = x + ls.direction * ls.distance;
                double tr = transmittance(vol, tf, x, lp, step);
                Vec3 tint = mul(ls.color, style.light_color);
                L += mul(throughput, tint) * (phase * tr * ls.irradiance);
            }
            current = {x, hg_sample(props.phase_g, current.dir, rng)};
        } else {
            // Embedded iso-surface interaction.
            Vec3 n = -normalize(density_gradient(vol, x));
            if (norm2(n) == 0.0) break;
            if (dot(n, current.dir) > 0.0) n = -n;
            Vec3 base_color = tf.eval(iso).albedo;
            double kd = 1.0 - style.specular_weight;
            double ks = style.specular_weight;
            double exponent = detail::blinn_exponent(style.surface_roughness);
            Vec3 wo = -current.dir;
            for (const auto& ls : light_irradiance(rig, pose, x)) {
                double cos_l = dot(n, ls.direction);
                if (cos_l <= 0.0 || ls.irradiance <= 0.0) continue;
                Vec3 h = normalize(ls.direction + wo);
                double spec = detail::blinn_lobe(dot(n, h), exponent);
                Vec3 f = base_color * (kd / kPi) + Vec3{1.0, 1.0, 1.0} * (ks * spec);
                Vec3 lp = x + ls.direction * ls.distance;
                double tr = transmittance(vol, tf, x, lp, step);
                Vec3 tint = mul(ls.color, style.light_color);
                L += mul(mul(throughput, tint), f) * (cos_l * tr * ls.irradiance);
            }
            // Cosine-hemisphere continuation; BRDF/pdf weight = pi * f.
            double u1 = rng.uniform(), u2 = rng.uniform();
            double r = std::sqrt(u1);
            double phi = 2.0 * kPi * u2;
            Vec3 tb, bb;
            orthonormal_basis(n, tb, bb);
            Vec3 wi = normalize(tb * (r * std::cos(phi)) + bb * (r * std::sin(phi)) +
                                n * std::sqrt(std::fmax(0.0, 1.0 - u1)));
            Vec3 hh = normalize(wi + wo);
            double spec = detail::blinn_lobe(dot(n, hh), exponent);
            Vec3 weight = base_color * kd + Vec3{1.0, 1.0, 1.0} * (ks * spec * kPi);
            throughput = mul(throughput, weight);
            current = {x + wi * surface_offset, wi};
        }

        if (max_component(throughput) <= 0.0) break;
        if (bounce + 1 >= config.rr_start_bounce) {
            double q = clamp(max_component(throughput), 0.05, 0.95);
            if (rng.uniform() >= q) break;
            throughput = throughput / q;
        }
    }

    if (!is_finite(L) || L.x < 0.0 || L.y < 0.0 || L.z < 0.0) {
        result.rejected = true;
        result.radiance = {0.0, 0.0, 0.0};
        return result;
    }
    result.radiance = L;
    return result;
}

struct RenderDiagnostics {
    std::uint64_t total_samples = 0;
    std::uint64_t rejected_samples = 0;
};

struct CinematicFrameResult {
    Frame frame;
    RenderDiagnostics diagnostics;
};

namespace detail {

// Shared worker: renders one style image against a precomputed depth map.
inline CinematicFrameResult render_one_style(
    const DensityVolume& vol, const EndoscopeCamera& cam, const LightRig& rig,
    const Pose& pose, const RenderStyle& style,
    const std::shared_ptr<const DepthMap>& depth, const PathTracerConfig& config,
    int threads) {
    CinematicFrameResult out;
    out.frame.image = ImageRGB(cam.width, cam.height);
    out.frame.depth = depth;
    out.frame.renderer = RendererKind::cinematic;
    out.frame.style_id = style.style_id;
    out.frame.seed = config.seed;
    std::vector<std::uint64_t> rejected_per_row(
        static_cast<std::size_t>(cam.height), 0);
    parallel_for(static_cast<std::size_t>(cam.height), threads, [&](std::size_t row) {
        int y = static_cast<int>(row);
        for (int x = 0; x < cam.width; ++x) {
            std::uint64_t pixel_index =
                static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(cam.width) +
                static_cast<std::uint64_t>(x);
            Pcg32 rng = make_stream(config.seed, 0x70617468ULL, pixel_index);
            Ray ray = generate_ray(cam, pose, x + 0.5, y + 0.5);
            Vec3 accum{0.0, 0.0, 0.0};
            int accepted = 0;
            for (int s = 0; s < config.spp; ++s) {
                TraceResult tr = trace_path(vol, style.transfer, style, cam, rig,
                                            pose, ray, config, rng);
                if (tr.rejected) {
                    rejected_per_row[row] += 1;
                } else {
                    accum += tr.radiance;
                    ++accepted;
                }
            }
            Vec3 radiance = accepted > 0 ? accum / accepted : Vec3{0.0, 0.0, 0.0};
            out.frame.image.set_pixel(x, y, tone_map(radiance, style.exposure));
        }
    });
    for (std::uint64_t r : rejected_per_row) out.diagnostics.rejected_samples += r;
    out.diagnostics.total_samples = static_cast<std::uint64_t>(cam.width) *
                                    static_cast<std::uint64_t>(cam.height) *
                                    static_cast<std::uint64_t>(config.spp);
    return out;
}

inline std::shared_ptr<DepthMap> depth_from_opacity(const DensityVolume& vol,
                                                    const TransferFunction& tf,
                                                    const EndoscopeCamera& cam,
                                                    const Pose& pose,
                                                    const PathTracerConfig& config,
                                                    int threads) {
    float sentinel = static_cast<float>(vol.diagonal_mm());
    auto depth = std::make_shared<DepthMap>(cam.width, cam.height, sentinel);
    parallel_for(static_cast<std::size_t>(cam.height), threads, [&](std::size_t row) {
        int y = static_cast<int>(row);
        for (int x = 0; x < cam.width; ++x) {
            Ray ray = generate_ray(cam, pose, x + 0.5, y + 0.5);
            auto d = opacity_depth(vol, tf, ray, config);
            if (d) depth->at(x, y) = static_cast<float>(*d);
        }
    });
    return depth;
}

}  // namespace detail

// Renders one style. Depth comes from the deterministic opacity threshold of
// the primary rays, so it is bit-identical for any spp and thread count.
inline CinematicFrameResult render_cinematic_frame(
    const DensityVolume& vol, const EndoscopeCamera& cam, const LightRig& rig,
    const Pose& pose, const RenderStyle& style, const PathTracerConfig& config,
    int threads = 1) {
    validate_camera(cam);
    validate_light_rig(rig);
    validate_style(style);
    validate_path_config(config);
    auto depth = detail::depth_from_opacity(vol, style.transfer, cam, pose,
                                            config, threads);
    return detail::render_one_style(vol, cam, rig, pose, style, depth, config,
                                    threads);
}

struct StyleSetResult {
    std::vector<Frame> frames;  // one per style, all sharing one DepthMap
    RenderDiagnostics diagnostics;
};

// Renders every style against one shared depth map. Styles must agree on the
// extinction profile of their transfer functions. All styles reuse the same
// per-pixel RNG streams (shared sigma_t makes the flight geometry identical,
// only shading differs), so a singleton set reproduces
// render_cinematic_frame bit for bit.
inline StyleSetResult render_style_set(const DensityVolume& vol,
                                       const EndoscopeCamera& cam,
                                       const LightRig& rig, const Pose& pose,
                                       const std::vector<RenderStyle>& styles,
                                       const PathTracerConfig& config,
                                       int threads = 1) {
    if (styles.empty()) throw ParameterError("style set must not be empty");
    validate_camera(cam);
    validate_light_rig(rig);
    validate_path_config(config);
    for (const auto& s : styles) validate_style(s);
    for (std::size_t i = 1; i < styles.size(); ++i)
        if (!same_sigma_t_profile(styles[0].transfer, styles[i].transfer))
            throw ConsistencyError(
                "style transfer functions disagree on the sigma_t profile");
    auto depth = detail::depth_from_opacity(vol, styles[0].transfer, cam, pose,
                                            config, threads);
    StyleSetResult out;
    out.frames.reserve(styles.size());
    for (const auto& style : styles) {
        CinematicFrameResult r = detail::render_one_style(vol, cam, rig, pose,
                                                          style, depth, config,
                                                          threads);
        out.diagnostics.total_samples += r.diagnostics.total_samples;
        out.diagnostics.rejected_samples += r.diagnostics.rejected_samples;
        out.frames.push_back(std::move(r.frame));
    }
    return out;
}

}  // namespace endo
