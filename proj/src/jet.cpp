#include "spiralforge/jet.hpp"
#include "spiralforge/errors.hpp"

#include <cmath>

namespace spiralforge {

const char* error_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_immersion: return "invalid-immersion";
    case ErrorCode::invalid_variation: return "invalid-variation";
    case ErrorCode::invalid_invariants: return "invalid-invariants";
    case ErrorCode::degenerate_axis: return "degenerate-axis";
    case ErrorCode::unsupported_parameter: return "unsupported-parameter";
    case ErrorCode::invalid_cutoff: return "invalid-cutoff";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::graph_too_large: return "graph-too-large";
    case ErrorCode::no_u0_profile: return "no-u0-profile";
    case ErrorCode::rejected_parameters: return "rejected-parameters";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::io: return "io";
    case ErrorCode::internal: return "internal-error";
    }
    return "unknown";
}

Jet Jet::scaled(double c) const {
    Jet r = *this;
    for (auto& v : r.d1) v *= c;
    for (auto& v : r.d2) v *= c;
    for (auto& v : r.d3) v *= c;
    return r;
}

Jet Jet::rotated(const Mat3& m) const {
    Jet r = *this;
    for (auto& v : r.d1) v = m * v;
    for (auto& v : r.d2) v = m * v;
    for (auto& v : r.d3) v = m * v;
    return r;
}

Jet Jet::operator+(const Jet& o) const {
    Jet r = *this;
    for (int i = 0; i < 2; ++i) r.d1[i] += o.d1[i];
    for (int i = 0; i < 4; ++i) r.d2[i] += o.d2[i];
    for (int i = 0; i < 4; ++i) r.d3[i] += o.d3[i];
    r.has_d3 = has_d3 && o.has_d3;
    return r;
}

Jet Jet::operator-(const Jet& o) const { return *this + o.scaled(-1.0); }

double Jet::norm() const {
    double s = 0;
    for (const auto& v : d1) s += v.squaredNorm();
    for (const auto& v : d2) s += v.squaredNorm();
    return std::sqrt(s);
}

double aspect_ratio(const Jet& j) {
    const Vec3& a = j.d1[0];
    const Vec3& b = j.d1[1];
    const double n2 = a.squaredNorm() + b.squaredNorm();
    if (!(n2 > 0)) throw Error(ErrorCode::invalid_immersion, "zero first derivatives");
    const double det = a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b);
    return 2.0 * std::sqrt(std::max(det, 0.0)) / n2;
}

static void require_immersion(const Jet& j) {
    if (aspect_ratio(j) < kDegenerateAspect)
        throw Error(ErrorCode::invalid_immersion, "jet is degenerate (aspect ratio below 1e-10)");
}

Vec3 unit_normal(const Jet& j) {
    require_immersion(j);
    return j.d1[0].cross(j.d1[1]).normalized();
}

double mean_curvature(const Jet& j) {
    require_immersion(j);
    const Vec3& a = j.d1[0];
    const Vec3& b = j.d1[1];
    const Vec3 nu = a.cross(b).normalized();
    const double g11 = a.dot(a), g12 = a.dot(b), g22 = b.dot(b);
    const double det = g11 * g22 - g12 * g12;
    const double A11 = nu.dot(j.d2[0]);
    const double A22 = nu.dot(j.d2[1]);
    const double A12 = 0.5 * (nu.dot(j.d2[2]) + nu.dot(j.d2[3]));
    return (g22 * A11 - 2.0 * g12 * A12 + g11 * A22) / det;
}

double evaluate(Quantity q, const Jet& j) {
    switch (q) {
    case Quantity::aspect_ratio: return aspect_ratio(j);
    case Quantity::mean_curvature: return mean_curvature(j);
    case Quantity::normal_x: return unit_normal(j)(0);
    case Quantity::normal_y: return unit_normal(j)(1);
    case Quantity::normal_z: return unit_normal(j)(2);
    }
    throw Error(ErrorCode::internal, "unknown quantity");
}

std::array<double, 4> path_derivatives(const JetFunctional& phi, const Jet& j, const Variation& e) {
    const double en = e.norm();
    std::array<double, 4> d{phi(j), 0.0, 0.0, 0.0};
    if (en == 0.0) return d;
    const double h = 1e-3 * j.norm() / en;
    auto f = [&](int k) {
        const Jet p = j + e.scaled(k * h);
        if (aspect_ratio(p) < kDegenerateAspect)
            throw Error(ErrorCode::invalid_variation, "difference stencil leaves the immersion set");
        return phi(p);
    };
    const double fm3 = f(-3), fm2 = f(-2), fm1 = f(-1), f0 = d[0], f1 = f(1), f2 = f(2), f3 = f(3);
    d[1] = (-f2 + 8 * f1 - 8 * fm1 + fm2) / (12 * h);
    d[2] = (-f2 + 16 * f1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h);
    d[3] = (fm3 / 8 - fm2 + 13 * fm1 / 8 - 13 * f1 / 8 + f2 - f3 / 8) / (h * h * h);
    return d;
}

double taylor_remainder(const JetFunctional& phi, const Jet& j, const Variation& e, int k) {
    if (k < 0 || k > 3) throw Error(ErrorCode::internal, "taylor order must be 0..3");
    if (e.norm() == 0.0) return 0.0;
    constexpr int n_check = 32;
    for (int i = 0; i <= n_check; ++i) {
        if (aspect_ratio(j + e.scaled(double(i) / n_check)) < kDegenerateAspect)
            throw Error(ErrorCode::invalid_variation, "path j + sigma e leaves the immersion set");
    }
    const auto d = path_derivatives(phi, j, e);
    double poly = 0.0, fact = 1.0;
    for (int i = 0; i <= k; ++i) {
        if (i > 0) fact *= i;
        poly += d[i] / fact;
    }
    return phi(j + e) - poly;
}

double taylor_remainder(Quantity q, const Jet& j, const Variation& e, int k) {
    return taylor_remainder([q](const Jet& x) { return evaluate(q, x); }, j, e, k);
}

}  // namespace spiralforge
