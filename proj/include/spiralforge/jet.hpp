#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>

namespace spiralforge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// First and second partials of a surface map at a point.
// d2 is ordered (11, 22, 12, 21). d3 is (111, 112, 122, 222) and only
// filled by producers that request order 3.
struct Jet {
    std::array<Vec3, 2> d1{Vec3::Zero(), Vec3::Zero()};
    std::array<Vec3, 4> d2{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    std::array<Vec3, 4> d3{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    bool has_d3 = false;

    Jet scaled(double c) const;
    Jet rotated(const Mat3& r) const;
    Jet operator+(const Jet& o) const;
    Jet operator-(const Jet& o) const;
    Jet operator*(double c) const { return scaled(c); }
    // |(d1, d2)| as a flat Euclidean vector.
    double norm() const;
};

using Variation = Jet;

inline constexpr double kDegenerateAspect = 1e-10;

double aspect_ratio(const Jet& j);
Vec3 unit_normal(const Jet& j);
// H = g^{ij} A_ij with A_ij = nu . d2_ij and nu = d1[0] x d1[1] normalized.
// The unit sphere graph z = sqrt(1 - x^2 - y^2) has H = -2 at the pole.
double mean_curvature(const Jet& j);

enum class Quantity { aspect_ratio, mean_curvature, normal_x, normal_y, normal_z };

double evaluate(Quantity q, const Jet& j);

using JetFunctional = std::function<double(const Jet&)>;

// Derivatives of sigma -> phi(j + sigma e) at sigma = 0, orders 0..3, by
// fourth-order central differences with sigma|e| = 1e-3 |j|.
std::array<double, 4> path_derivatives(const JetFunctional& phi, const Jet& j, const Variation& e);

double taylor_remainder(const JetFunctional& phi, const Jet& j, const Variation& e, int k);
double taylor_remainder(Quantity q, const Jet& j, const Variation& e, int k);

}  // namespace spiralforge
