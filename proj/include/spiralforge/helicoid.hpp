#pragma once

#include "spiralforge/grid.hpp"
#include "spiralforge/jet.hpp"

namespace spiralforge {

// F(s, theta) = sinh(s) sin(theta) e_x + sinh(s) cos(theta) e_y + theta e_z.
Vec3 helicoid_point(double s, double theta);
Jet helicoid_jet(double s, double theta, int order = 2);

struct CutoffSpec {
    double a, b;
};

// psi_0 and its first two derivatives; psi_0 = 0 on (-inf, -1], 1 on [1, inf).
std::array<double, 3> cutoff_base(double t);
double cutoff(const CutoffSpec& c, double t);
std::array<double, 3> cutoff_derivs(const CutoffSpec& c, double t);

// cosh^2(s) L_F u = u_ss + u_thth + 2 sech^2(s) u.
GridFn stability_apply(const CylinderGrid& g, const GridFn& u);

enum class Axis { x, y, z };

double kernel_fn(Axis which, double s, double theta);
GridFn kernel_grid(const CylinderGrid& g, Axis which);

// u_x = psi cos(theta) cosh(s)/(4 pi), u_y = psi sin(theta) cosh(s)/(4 pi),
// u_z = psi s/(4 pi), with psi(s) = psi[1,2](|s|).
double substitute_fn(Axis which, double s, double theta);
GridFn substitute_grid(const CylinderGrid& g, Axis which);
// w = cosh^2 L_F u through the discrete operator on the given grid.
GridFn substitute_image(const CylinderGrid& g, Axis which);
// w from exact derivatives of the cutoff.
double substitute_image_exact(Axis which, double s, double theta);

// Integral of kappa_i w_j over |s| <= s_max with the exact w, by Simpson in s
// and the trapezoid rule in theta.
double kernel_pairing(Axis kappa, Axis w, double s_max, int n_s = 16384, int n_theta = 16);
double kernel_pairing(Axis which, double s_max);

struct GaussMapValue {
    Vec3 normal;
    double conformal_factor;
};

GaussMapValue gauss_map(double s, double theta);

}  // namespace spiralforge
