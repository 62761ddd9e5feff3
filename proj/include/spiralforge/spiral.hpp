#pragma once

#include "spiralforge/jet.hpp"

namespace spiralforge {

struct SpiralParams {
    double a = 0, b = 0, c = 1;
};

struct CurveInvariants {
    double speed, curvature, torsion;
};

// phi[a,b,c](t) = e^{at} e_r(ct) + (b/a) e^{at} e_z; for |a| < 1e-12 the
// limit form e_r(ct) + b t e_z is used.
Vec3 spiral_point(const SpiralParams& p, double t);
CurveInvariants spiral_invariants(const SpiralParams& p, double t);

struct ScaledSpiral {
    SpiralParams params;
    double scale;
};

ScaledSpiral invariants_to_spiral(double kappa0, double tau0, double xi);

Mat3 rodrigues(const Mat3& generator, double t);
// Axis vector w of an antisymmetric matrix, so that m v = w x v.
Vec3 axis_vector(const Mat3& m);

struct MatrixInvariants {
    double kappa0, tau0;
};

MatrixInvariants matrix_invariants(const Mat3& r);

// Generator whose frame at z = 0 is (-N, -B, T): e3' = -kappa0 e1.
Mat3 frenet_generator(double kappa0, double tau0);

// Curve data for e_i' = delta R_ij e_j, gamma' = e^{delta xi z} e3.
// As a matrix with columns e_i the frame is frame0 exp(delta z G), G = R^T;
// frame0 defaults to the identity.
struct SpiralSpec {
    Mat3 R = Mat3::Zero();
    Mat3 G = Mat3::Zero();  // R^T, acting on frame columns
    double delta = 0;
    double xi = 0;
    Mat3 frame0 = Mat3::Identity();

    double kappa0 = 0, tau0 = 0, rho0 = 0;
    double a_star = 0, b_star = 0, c_star = 0;  // unscaled; multiply by delta for gamma
    Mat3 K = Mat3::Zero();                      // delta (xi I + G)
    Vec3 c0 = Vec3::Zero();                     // gamma(z) = B(z) (c0 + z c1)
    Vec3 c1 = Vec3::Zero();

    // B(z) = e^{delta xi z} e(z).
    Mat3 frame(double z) const;
    Mat3 B(double z) const;
    Vec3 anchor(double z) const { return c0 + z * c1; }
    bool has_dilation() const;
    // Similarity x -> lambda Q x + t carrying G(s, theta) to G(s, theta + 2 pi).
    double sim_scale() const;
    Mat3 sim_rotation() const;
    Vec3 sim_translation() const;
};

SpiralSpec make_spiral_spec(const Mat3& R, double delta, double xi, const Mat3& frame0 = Mat3::Identity());

Mat3 frame_at(const SpiralSpec& spec, double z);
Vec3 gamma_point(const SpiralSpec& spec, double z);
Mat3 rotation_R(const SpiralSpec& spec, double theta);

}  // namespace spiralforge
