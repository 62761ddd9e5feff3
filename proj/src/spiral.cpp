#include "spiralforge/spiral.hpp"
#include "spiralforge/errors.hpp"

#include <cmath>

namespace spiralforge {

Vec3 spiral_point(const SpiralParams& p, double t) {
    const double ct = std::cos(p.c * t), st = std::sin(p.c * t);
    if (std::abs(p.a) < 1e-12) return Vec3(ct, st, p.b * t);
    const double e = std::exp(p.a * t);
    return Vec3(e * ct, e * st, e * p.b / p.a);
}

CurveInvariants spiral_invariants(const SpiralParams& p, double t) {
    const double a2 = p.a * p.a, b2 = p.b * p.b, c2 = p.c * p.c;
    const double n2 = a2 + b2 + c2;
    const double e = std::exp(p.a * t);
    return {std::sqrt(n2) * e, std::sqrt(a2 * c2 + c2 * c2) / n2 / e, p.b * p.c / n2 / e};
}

ScaledSpiral invariants_to_spiral(double kappa0, double tau0, double xi) {
    if (!(kappa0 > 0)) throw Error(ErrorCode::invalid_invariants, "kappa0 must be positive");
    const double rho2 = kappa0 * kappa0 + tau0 * tau0;
    SpiralParams p{xi, (tau0 / kappa0) * std::sqrt(rho2 + xi * xi), std::sqrt(rho2)};
    const double n = std::sqrt(p.a * p.a + p.b * p.b + p.c * p.c);
    return {p, 1.0 / n};
}

Vec3 axis_vector(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 rodrigues(const Mat3& g, double t) {
    const double rho = axis_vector(g).norm();
    if (rho == 0.0) return Mat3::Identity();
    const double x = t * rho;
    const double s = std::sin(x) / rho;
    const double h = std::sin(0.5 * x);
    const double c = 2.0 * h * h / (rho * rho);
    return Mat3::Identity() + s * g + c * (g * g);
}

MatrixInvariants matrix_invariants(const Mat3& r) {
    if ((r + r.transpose()).norm() > 1e-12 * (1.0 + r.norm()))
        throw Error(ErrorCode::invalid_invariants, "generator is not antisymmetric");
    const Vec3 e3(0, 0, 1);
    const Vec3 re3 = r * e3;
    const double k2 = re3.squaredNorm();
    if (k2 < 1e-28) throw Error(ErrorCode::degenerate_axis, "R e3 = 0 gives a straight axis");
    const Vec3 r2e3 = r * re3;
    return {std::sqrt(k2), e3.cross(r2e3).dot(re3) / k2};
}

Mat3 frenet_generator(double kappa0, double tau0) {
    Mat3 r;
    r << 0, tau0, kappa0,
        -tau0, 0, 0,
        -kappa0, 0, 0;
    return r;
}

SpiralSpec make_spiral_spec(const Mat3& R, double delta, double xi, const Mat3& frame0) {
    if (!(delta > 0)) throw Error(ErrorCode::invalid_invariants, "delta must be positive");
    if ((frame0.transpose() * frame0 - Mat3::Identity()).norm() > 1e-12)
        throw Error(ErrorCode::invalid_invariants, "initial frame is not orthonormal");
    SpiralSpec s;
    s.R = R;
    s.G = R.transpose();
    s.delta = delta;
    s.xi = xi;
    s.frame0 = frame0;
    const auto mi = matrix_invariants(R);
    s.kappa0 = mi.kappa0;
    s.tau0 = mi.tau0;
    s.rho0 = std::hypot(mi.kappa0, mi.tau0);
    const auto sp = invariants_to_spiral(s.kappa0, s.tau0, xi);
    s.a_star = sp.params.a;
    s.b_star = sp.params.b;
    s.c_star = sp.params.c;
    s.K = delta * (xi * Mat3::Identity() + s.G);
    const Vec3 e3(0, 0, 1);
    if (s.has_dilation()) {
        s.c0 = s.K.fullPivLu().solve(e3);
        s.c1.setZero();
    } else {
        const Vec3 w = axis_vector(s.G);
        const double rho2 = w.squaredNorm();
        const Vec3 par = w * (w.dot(e3) / rho2);
        const Vec3 perp = e3 - par;
        s.c0 = -(s.G * perp) / (delta * rho2);
        s.c1 = par;
    }
    return s;
}

bool SpiralSpec::has_dilation() const { return std::abs(delta * xi) > 1e-14; }

Mat3 SpiralSpec::frame(double z) const { return frame0 * rodrigues(G, delta * z); }

Mat3 SpiralSpec::B(double z) const { return std::exp(delta * xi * z) * frame(z); }

double SpiralSpec::sim_scale() const { return std::exp(2 * M_PI * delta * xi); }

Mat3 SpiralSpec::sim_rotation() const { return rodrigues(G, 2 * M_PI * delta); }

Vec3 SpiralSpec::sim_translation() const { return 2 * M_PI * c1; }

Mat3 frame_at(const SpiralSpec& spec, double z) { return spec.frame(z); }

Vec3 gamma_point(const SpiralSpec& spec, double z) { return spec.B(z) * spec.anchor(z); }

Mat3 rotation_R(const SpiralSpec& spec, double theta) { return spec.frame(theta).transpose(); }

}  // namespace spiralforge
