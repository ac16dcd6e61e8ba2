// Optical material properties and the density -> properties transfer function.
#pragma once

#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/math.hpp"

namespace endo {

// Per-point medium coefficients (units 1/mm) plus a spectral scattering tint.
struct OpticalProperties {
    double sigma_s = 0.0;     // scattering coefficient
    double sigma_a = 0.0;     // absorption coefficient
    double phase_g = 0.0;     // Henyey-Greenstein anisotropy, |g| < 1
    Vec3 albedo{1.0, 1.0, 1.0};  // spectral tint applied on scatter/reflection

    double sigma_t() const { return sigma_s + sigma_a; }
};

inline OpticalProperties lerp(const OpticalProperties& a,
                              const OpticalProperties& b, double t) {
    OpticalProperties r;
    r.sigma_s = lerp(a.sigma_s, b.sigma_s, t);
    r.sigma_a = lerp(a.sigma_a, b.sigma_a, t);
    r.phase_g = lerp(a.phase_g, b.phase_g, t);
    r.albedo = lerp(a.albedo, b.albedo, t);
    return r;
}

// Piecewise-linear map from density in [0,1] to optical properties. The
// breakpoint list must start at density 0, end at density 1, and be strictly
// increasing in density.
struct TransferFunction {
    struct Breakpoint {
        double density = 0.0;
        OpticalProperties props;
    };
    std::vector<Breakpoint> points;

    void validate() const {
        if (points.size() < 2)
            throw ParameterError("transfer function needs at least 2 breakpoints");
        if (points.front().density != 0.0 || points.back().density != 1.0)
            throw ParameterError("transfer function must span densities [0,1]");
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& bp = points[i];
            if (i > 0 && !(bp.density > points[i - 1].density))
                throw ParameterError("breakpoint densities must strictly increase");
            if (bp.props.sigma_s < 0.0 || bp.props.sigma_a < 0.0)
                throw ParameterError("scattering coefficients must be non-negative");
            if (!(std::fabs(bp.props.phase_g) < 1.0))
                throw ParameterError("phase anisotropy must satisfy |g| < 1");
            const Vec3& a = bp.props.albedo;
            if (a.x < 0.0 || a.x > 1.0 || a.y < 0.0 || a.y > 1.0 || a.z < 0.0 ||
                a.z > 1.0)
                throw ParameterError("albedo components must be in [0,1]");
        }
    }

    // Piecewise-linear evaluation; density clamps to [0,1].
    OpticalProperties eval(double density) const {
        double d = clamp(density, 0.0, 1.0);
        std::size_t hi = 1;
        while (hi + 1 < points.size() && points[hi].density < d) ++hi;
        const auto& a = points[hi - 1];
        const auto& b = points[hi];
        double t = (d - a.density) / (b.density - a.density);
        return lerp(a.props, b.props, clamp(t, 0.0, 1.0));
    }

    // Upper bound of sigma_t over all densities (exact for piecewise linear).
    double max_sigma_t() const {
        double m = 0.0;
        for (const auto& bp : points) m = std::fmax(m, bp.props.sigma_t());
        return m;
    }
};

// True when two transfer functions produce the same extinction profile:
// identical breakpoint densities and sigma_t values within tol.
inline bool same_sigma_t_profile(const TransferFunction& a,
                                 const TransferFunction& b,
                                 double tol = 1e-9) {
    if (a.points.size() != b.points.size()) return false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (std::fabs(a.points[i].density - b.points[i].density) > tol) return false;
        if (std::fabs(a.points[i].props.sigma_t() - b.points[i].props.sigma_t()) > tol)
            return false;
    }
    return true;
}

}  // namespace endo
