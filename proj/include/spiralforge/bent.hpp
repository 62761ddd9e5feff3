#pragma once

#include "spiralforge/grid.hpp"
#include "spiralforge/spiral.hpp"

#include <vector>

namespace spiralforge {

// Data of the normalized bent helicoid at one point: normalized first and
// second derivatives of G and the normalized unit normal with its
// derivatives up to order two.
struct PointGeometry {
    Vec3 a, b;          // d_s, D_theta
    Vec3 a_s, Da, Db;   // second derivatives: ss, s theta, theta theta
    Vec3 n, n_s, n_t, n_ss, n_st, n_tt;
};

PointGeometry point_geometry(const Mat3& K, double s, double theta);

// Derivatives of a scalar graph function at a point.
struct GraphDerivs {
    double w = 0, w_s = 0, w_t = 0, w_ss = 0, w_st = 0, w_tt = 0;
};

// Normalized jet of G + e^{delta xi theta} w nu_G.
Jet graph_jet(const PointGeometry& p, const Mat3& K, const GraphDerivs& d);
// The perturbation part of graph_jet.
Jet graph_perturbation(const PointGeometry& p, const Mat3& K, const GraphDerivs& d);

Vec3 bent_point(const SpiralSpec& spec, double s, double theta);
Jet bent_jet(const SpiralSpec& spec, double s, double theta, int order = 2);
// e^{-delta xi theta} R(theta) applied to bent_jet.
Jet normalized_jet(const SpiralSpec& spec, double s, double theta, int order = 2);
Vec3 reference_point(double delta_xi, double s, double theta);
Jet reference_jet(double delta_xi, double s, double theta, int order = 2);

struct U0Profile {
    Profile u;
    double residual = 0;
    double c_hat = 0;  // sup |u| / (|delta xi| s^2)
    int iterations = 0;
};

// Odd solution of the theta-independent minimal graph equation over G_0
// on the grid's s-nodes, normalized by u'(0) = 0.
U0Profile solve_u0(double delta_xi, const CylinderGrid& g);
U0Profile solve_u0(double delta_xi, double ell, int n_s);

class BentSurface {
public:
    BentSurface(const SpiralSpec& spec, double ell, int n_s, int n_theta);

    const SpiralSpec& spec() const { return spec_; }
    const CylinderGrid& grid() const { return grid_; }
    double ell() const { return ell_; }
    const PointGeometry& at(int i, int j) const { return geom_[std::size_t(i) * grid_.cols() + j]; }

    void set_u0(const U0Profile& p);
    void clear_u0();
    const Profile& u0() const { return u0_; }
    GridFn u0_grid() const;

    // cosh^2(s) H(grad G + E[u + u0]) in the normalized gauge.
    GridFn q_operator(const GridFn& u) const;
    // Same with u0 left out.
    GridFn q_raw(const GridFn& w) const;
    // Points of G + e^{delta xi theta} w nu_G, w including u0 if set.
    std::vector<Vec3> graph_points(const GridFn& u, int turns = 0) const;
    Vec3 graph_point(int i, int j, double w, int turns = 0) const;

private:
    SpiralSpec spec_;
    double ell_;
    CylinderGrid grid_;
    std::vector<PointGeometry> geom_;
    Profile u0_;
};

}  // namespace spiralforge
