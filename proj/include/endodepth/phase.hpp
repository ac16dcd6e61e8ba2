// Henyey-Greenstein phase function: density, inverse-CDF sampling.
#pragma once

#include "endodepth/errors.hpp"
#include "endodepth/math.hpp"

namespace endo {

// p(cos_theta) = (1 - g^2) / (4 pi (1 + g^2 - 2 g cos_theta)^{3/2});
// integrates to 1 over the sphere. g = 0 is isotropic, g -> 1 forward.
inline double hg_pdf(double g, double cos_theta) {
    if (!(std::fabs(g) < 1.0))
        throw ParameterError("phase anisotropy must satisfy |g| < 1");
    double c = clamp(cos_theta, -1.0, 1.0);
    double denom = 1.0 + g * g - 2.0 * g * c;
    return (1.0 - g * g) / (4.0 * kPi * denom * std::sqrt(denom));
}

// Inverse CDF in cos_theta for a uniform u in [0,1); u=0 maps to cos=-1.
inline double hg_sample_cos(double g, double u) {
    if (!(std::fabs(g) < 1.0))
        throw ParameterError("phase anisotropy must satisfy |g| < 1");
    if (std::fabs(g) < 1e-9) return clamp(2.0 * u - 1.0, -1.0, 1.0);
    double s = (1.0 - g * g) / (1.0 - g + 2.0 * g * u);
    return clamp((1.0 + g * g - s * s) / (2.0 * g), -1.0, 1.0);
}

// Samples an outgoing unit direction for propagation direction dir_in.
inline Vec3 hg_sample(double g, Vec3 dir_in, Pcg32& rng) {
    double cos_theta = hg_sample_cos(g, rng.uniform());
    double sin_theta = std::sqrt(std::fmax(0.0, 1.0 - cos_theta * cos_theta));
    double phi = 2.0 * kPi * rng.uniform();
    Vec3 t, b;
    orthonormal_basis(dir_in, t, b);
    return normalize(t * (sin_theta * std::cos(phi)) +
                     b * (sin_theta * std::sin(phi)) + dir_in * cos_theta);
}

}  // namespace endo
