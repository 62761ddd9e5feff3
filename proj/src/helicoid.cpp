#include "spiralforge/helicoid.hpp"
#include "spiralforge/errors.hpp"

#include <cmath>

namespace spiralforge {

Vec3 helicoid_point(double s, double theta) {
    return Vec3(std::sinh(s) * std::sin(theta), std::sinh(s) * std::cos(theta), theta);
}

Jet helicoid_jet(double s, double theta, int order) {
    const double sh = std::sinh(s), ch = std::cosh(s), st = std::sin(theta), ct = std::cos(theta);
    const Vec3 P(sh * st, sh * ct, 0), Ps(ch * st, ch * ct, 0);
    const Vec3 Pt(sh * ct, -sh * st, 0), Pst(ch * ct, -ch * st, 0);
    Jet j;
    j.d1 = {Ps, Pt + Vec3(0, 0, 1)};
    j.d2 = {P, -P, Pst, Pst};
    if (order >= 3) {
        j.d3 = {Ps, Pt, -Ps, -Pt};
        j.has_d3 = true;
    }
    return j;
}

std::array<double, 3> cutoff_base(double t) {
    if (t <= -1) return {0, 0, 0};
    if (t >= 1) return {1, 0, 0};
    auto f = [](double x) { return std::exp(-1 / x); };
    const double x = t + 1, y = 1 - t;
    const double A = f(x), Bv = f(y);
    const double A1 = A / (x * x), B1 = -Bv / (y * y);
    const double A2 = A * (1 / (x * x * x * x) - 2 / (x * x * x));
    const double B2 = Bv * (1 / (y * y * y * y) - 2 / (y * y * y));
    const double S = A + Bv;
    const double num1 = A1 * Bv - A * B1;
    const double d1 = num1 / (S * S);
    const double d2 = (A2 * Bv - A * B2) / (S * S) - 2 * num1 * (A1 + B1) / (S * S * S);
    return {A / S, d1, d2};
}

static void check_cutoff(const CutoffSpec& c) {
    if (c.a == c.b) throw Error(ErrorCode::invalid_cutoff, "cutoff endpoints coincide");
}

double cutoff(const CutoffSpec& c, double t) { return cutoff_derivs(c, t)[0]; }

std::array<double, 3> cutoff_derivs(const CutoffSpec& c, double t) {
    check_cutoff(c);
    const double k = 6.0 / (c.b - c.a);
    const auto v = cutoff_base(-3 + k * (t - c.a));
    return {v[0], k * v[1], k * k * v[2]};
}

GridFn stability_apply(const CylinderGrid& g, const GridFn& u) {
    if (!g.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "stability_apply: shape differs from grid");
    GridFn out = d_ss(g, u) + d_thetatheta(u);
    for (int i = 0; i < g.rows(); ++i) {
        const double sech = 1 / std::cosh(g.s[i]);
        out.row(i) += 2 * sech * sech * u.row(i);
    }
    return out;
}

double kernel_fn(Axis which, double s, double theta) {
    switch (which) {
    case Axis::x: return std::cos(theta) / std::cosh(s);
    case Axis::y: return std::sin(theta) / std::cosh(s);
    case Axis::z: return std::tanh(s);
    }
    return 0;
}

GridFn kernel_grid(const CylinderGrid& g, Axis which) {
    return g.sample([which](double s, double t) { return kernel_fn(which, s, t); });
}

static constexpr CutoffSpec kSubstituteCutoff{1.0, 2.0};

double substitute_fn(Axis which, double s, double theta) {
    const double psi = cutoff(kSubstituteCutoff, std::abs(s)) / (4 * M_PI);
    switch (which) {
    case Axis::x: return psi * std::cos(theta) * std::cosh(s);
    case Axis::y: return psi * std::sin(theta) * std::cosh(s);
    case Axis::z: return psi * s;
    }
    return 0;
}

GridFn substitute_grid(const CylinderGrid& g, Axis which) {
    return g.sample([which](double s, double t) { return substitute_fn(which, s, t); });
}

GridFn substitute_image(const CylinderGrid& g, Axis which) {
    return stability_apply(g, substitute_grid(g, which));
}

double substitute_image_exact(Axis which, double s, double theta) {
    const auto p = cutoff_derivs(kSubstituteCutoff, std::abs(s));
    const double sg = s < 0 ? -1.0 : 1.0;
    const double psi = p[0], ps = sg * p[1], pss = p[2];
    const double ch = std::cosh(s), sh = std::sinh(s);
    const double radial = pss * ch + 2 * ps * sh + 2 * psi / ch;
    switch (which) {
    case Axis::x: return radial * std::cos(theta) / (4 * M_PI);
    case Axis::y: return radial * std::sin(theta) / (4 * M_PI);
    case Axis::z: return (pss * s + 2 * ps + 2 * psi * s / (ch * ch)) / (4 * M_PI);
    }
    return 0;
}

double kernel_pairing(Axis kappa, Axis w, double s_max, int n_s, int n_theta) {
    const CylinderGrid g = make_grid(n_s, n_theta, s_max);
    const GridFn wg = g.sample([w](double s, double t) { return substitute_image_exact(w, s, t); });
    return inner(g, kernel_grid(g, kappa), wg);
}

double kernel_pairing(Axis which, double s_max) { return kernel_pairing(which, which, s_max); }

GaussMapValue gauss_map(double s, double theta) {
    const double ch = std::cosh(s);
    return {Vec3(-std::cos(theta) / ch, std::sin(theta) / ch, std::tanh(s)), 1 / (ch * ch * ch * ch)};
}

}  // namespace spiralforge
