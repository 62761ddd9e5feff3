#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <functional>
#include <vector>

namespace spiralforge {

// Rows index s_i = -s_max + i h (i = 0..n_s), columns index
// theta_j = -pi + 2 pi j / n_theta. Theta is periodic.
using GridFn = Eigen::MatrixXd;
using Profile = Eigen::VectorXd;

struct CylinderGrid {
    int n_s = 0;
    int n_theta = 0;
    double s_max = 0;
    double h = 0;
    std::vector<double> s;
    std::vector<double> theta;

    int rows() const { return n_s + 1; }
    int cols() const { return n_theta; }
    int center() const { return n_s / 2; }
    GridFn zeros() const { return GridFn::Zero(rows(), cols()); }
    GridFn sample(const std::function<double(double, double)>& f) const;
    Profile sample_s(const std::function<double(double)>& f) const;
    bool same_shape(const GridFn& u) const { return u.rows() == rows() && u.cols() == cols(); }
};

CylinderGrid make_grid(int n_s, int n_theta, double s_max);

bool is_power_of_two(int n);

// Fourth-order differences in s with one-sided closure at both ends.
Eigen::SparseMatrix<double> first_difference_matrix(int n, double h);
Eigen::SparseMatrix<double> second_difference_matrix(int n, double h);

Profile d_s(const CylinderGrid& g, const Profile& u);
Profile d_ss(const CylinderGrid& g, const Profile& u);
GridFn d_s(const CylinderGrid& g, const GridFn& u);
GridFn d_ss(const CylinderGrid& g, const GridFn& u);
// Exact trigonometric differentiation in theta.
GridFn d_theta(const GridFn& u);
GridFn d_thetatheta(const GridFn& u);

// Complex Fourier coefficients per row, column k holding mode k (k <= n/2)
// or k - n (k > n/2).
Eigen::MatrixXcd theta_forward(const GridFn& u);
GridFn theta_inverse(const Eigen::MatrixXcd& c);
int theta_mode(int k, int n);

double sup_norm(const GridFn& u);
// Simpson in s, trapezoid in theta over the whole grid.
double integrate(const CylinderGrid& g, const GridFn& f);
double inner(const CylinderGrid& g, const GridFn& a, const GridFn& b);
std::vector<double> simpson_weights(int n_s, double h);

// Cumulative integral from the center node outwards, fourth order.
Profile cumulative_from_center(const CylinderGrid& g, const Profile& f);

int thread_count();
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace spiralforge
