#include "spiralforge/tube.hpp"
#include "spiralforge/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace spiralforge {

Vec3 tube_map(const SpiralSpec& spec, double x, double y, double z) {
    return spec.B(z) * (spec.anchor(z) + Vec3(x, y, 0));
}

Mat3 tube_jacobian(const SpiralSpec& spec, double x, double y, double z) {
    Mat3 inner = Mat3::Identity();
    inner.col(2) += spec.K * Vec3(x, y, 0);
    return spec.B(z) * inner;
}

double tube_jacobian_det(const SpiralSpec& spec, double x, double y, double z) {
    const Vec3 ge3 = spec.G * Vec3(0, 0, 1);
    return std::exp(3 * spec.delta * spec.xi * z) * spec.frame0.determinant() *
           (1.0 - spec.delta * (ge3(0) * x + ge3(1) * y));
}

static void require_xi(const SpiralSpec& spec) {
    if (!spec.has_dilation())
        throw Error(ErrorCode::unsupported_parameter, "xi = 0: the embedding bound is not available");
}

static double cone_factor(const SpiralSpec& spec) {
    const double x2 = spec.xi * spec.xi;
    return std::sqrt((spec.tau0 * spec.tau0 + x2) / (spec.rho0 * spec.rho0 + x2));
}

double axis_norm(const SpiralSpec& spec, double z) {
    require_xi(spec);
    return std::exp(spec.delta * spec.xi * z) / (spec.delta * std::abs(spec.xi)) * cone_factor(spec);
}

double alpha_bound(const SpiralSpec& spec) {
    require_xi(spec);
    return std::tanh(M_PI * std::abs(spec.xi) / (2 * spec.rho0));
}

double tube_radius(const SpiralSpec& spec, double alpha) {
    require_xi(spec);
    return alpha / (spec.delta * std::abs(spec.xi)) * cone_factor(spec);
}

double max_embed_ell(const SpiralSpec& spec) {
    require_xi(spec);
    if (!(spec.rho0 > 0)) throw Error(ErrorCode::unsupported_parameter, "rho0 must be positive");
    return tube_radius(spec, alpha_bound(spec));
}

InjectivityReport check_injectivity(const SpiralSpec& spec, double radius, int n_samples,
                                    std::uint64_t seed, double z_span_turns) {
    InjectivityReport rep;
    rep.min_separation = std::numeric_limits<double>::infinity();
    const double period = 2 * M_PI / (spec.delta * spec.rho0);
    const double zlo = -0.5 * z_span_turns * period, zhi = 0.5 * z_span_turns * period;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const int per_cell = std::max(1, n_samples / 27);
    const int n_scan = std::max(64, int(400 * z_span_turns));
    const double dz = (zhi - zlo) / n_scan;

    auto plane_offset = [&](const Vec3& q, double z) {
        return (q - gamma_point(spec, z)).dot(spec.frame(z).col(2));
    };

    for (int cell = 0; cell < 27; ++cell) {
        const int ir = cell % 3, ia = (cell / 3) % 3, iz = cell / 9;
        for (int k = 0; k < per_cell; ++k) {
            const double ur = (ir + uni(rng)) / 3, ua = (ia + uni(rng)) / 3, uz = (iz + uni(rng)) / 3;
            const double r = radius * std::sqrt(ur), ang = 2 * M_PI * ua;
            const double z = zlo + (zhi - zlo) * uz;
            const Vec3 q = tube_map(spec, r * std::cos(ang), r * std::sin(ang), z);
            ++rep.samples;
            double prev_z = zlo, prev_f = plane_offset(q, zlo);
            for (int i = 1; i <= n_scan; ++i) {
                const double zi = zlo + i * dz;
                const double fi = plane_offset(q, zi);
                if ((prev_f <= 0) != (fi <= 0)) {
                    double a = prev_z, b = zi, fa = prev_f;
                    for (int it = 0; it < 60; ++it) {
                        const double m = 0.5 * (a + b);
                        const double fm = plane_offset(q, m);
                        if ((fa <= 0) == (fm <= 0)) {
                            a = m;
                            fa = fm;
                        } else {
                            b = m;
                        }
                    }
                    const double zr = 0.5 * (a + b);
                    if (std::abs(zr - z) >= 0.5 * period) {
                        ++rep.far_slices;
                        const double gap =
                            (q - gamma_point(spec, zr)).norm() * std::exp(-spec.delta * spec.xi * zr) - radius;
                        rep.min_separation = std::min(rep.min_separation, gap);
                    }
                }
                prev_z = zi;
                prev_f = fi;
            }
        }
    }
    rep.injective = rep.min_separation > 1e-6 * radius;
    return rep;
}

}  // namespace spiralforge
