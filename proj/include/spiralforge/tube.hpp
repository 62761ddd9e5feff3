#pragma once

#include "spiralforge/spiral.hpp"

#include <cstdint>

namespace spiralforge {

// M(x, y, z) = gamma(z) + e^{delta xi z} (x e1(z) + y e2(z)).
Vec3 tube_map(const SpiralSpec& spec, double x, double y, double z);
// Exact derivative of tube_map; columns are d/dx, d/dy, d/dz.
Mat3 tube_jacobian(const SpiralSpec& spec, double x, double y, double z);
// det DM = e^{3 delta xi z} (1 - delta <G e3, (x, y, 0)>).
double tube_jacobian_det(const SpiralSpec& spec, double x, double y, double z);
// |M(0, 0, z)| = e^{delta xi z}/(delta |xi|) sqrt((tau0^2 + xi^2)/(rho0^2 + xi^2)).
double axis_norm(const SpiralSpec& spec, double z);

double alpha_bound(const SpiralSpec& spec);
double tube_radius(const SpiralSpec& spec, double alpha);
double max_embed_ell(const SpiralSpec& spec);

struct InjectivityReport {
    bool injective = true;
    // Smallest gap, in units of the local scale e^{delta xi z}, between a
    // sample and a tube slice at least half a turn away. Infinite when no
    // such slice passes through any sample.
    double min_separation = 0;
    int samples = 0;
    int far_slices = 0;
};

InjectivityReport check_injectivity(const SpiralSpec& spec, double radius, int n_samples,
                                    std::uint64_t seed = 1, double z_span_turns = 2.0);

}  // namespace spiralforge
