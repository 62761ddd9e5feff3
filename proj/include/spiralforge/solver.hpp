#pragma once

#include "spiralforge/bent.hpp"
#include "spiralforge/helicoid.hpp"
#include "spiralforge/verify.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <vector>

namespace spiralforge {

struct MeridianSplit {
    Profile mean;  // (1/2pi) integral over theta
    GridFn ring;   // zero average along meridians
};

MeridianSplit meridian_split(const GridFn& E);

// v(s) = tanh(s) int_0^s tanh^{-2}(s') int_0^{s'} tanh(s'') E(s'') ds'' ds',
// the solution of v'' + 2 sech^2(s) v = E with v(0) = v'(0) = 0, by nested
// adaptive quadrature.
double invert_mean_at(const std::function<double(double)>& E, double s);
// The same formula with fourth-order cumulative quadrature on the grid.
Profile invert_mean_quadrature(const CylinderGrid& g, const Profile& E);

// Exact inverse of the discrete operator d_ss + 2 sech^2 on rows 1..n_s-1
// with v(0) = v'(0) = 0. Ends are left free.
class MeanInverse {
public:
    explicit MeanInverse(const CylinderGrid& g);
    Profile operator()(const Profile& E) const;

private:
    CylinderGrid grid_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

Profile invert_mean(const CylinderGrid& g, const Profile& E);

struct Orthogonalized {
    GridFn perp;
    double b_x = 0, b_y = 0;
};

struct LinearSolution {
    GridFn v;
    double b_x = 0, b_y = 0;
};

// Discrete inverse of cosh^2 L_F on a cylinder grid, with Dirichlet data at
// both ends of the s-range for the theta-dependent modes.
class LinearSolver {
public:
    explicit LinearSolver(const CylinderGrid& g);

    const CylinderGrid& grid() const { return grid_; }
    const GridFn& w(Axis a) const { return a == Axis::x ? w_x_ : w_y_; }
    const GridFn& u(Axis a) const { return a == Axis::x ? u_x_ : u_y_; }
    // cos/sin theta times the discrete mode-one near-kernel profile, which
    // tends to sech s away from the ends.
    const GridFn& kappa(Axis a) const { return a == Axis::x ? k_x_ : k_y_; }
    const Profile& kernel_profile() const { return kernel_profile_; }
    // Trapezoid pairing with kappa(a); the ends carry no weight.
    double pairing(const GridFn& f, Axis a) const;
    const Eigen::Matrix2d& gram() const { return gram_; }

    Orthogonalized orthogonalize(const GridFn& ring) const;
    GridFn invert_perp(const GridFn& perp) const;
    LinearSolution linear_solve(const GridFn& E) const;
    // cosh^2 L_F v - (E - b_x w_x - b_y w_y) on rows 1..n_s-1.
    double residual(const GridFn& E, const LinearSolution& sol) const;

private:
    CylinderGrid grid_;
    MeanInverse mean_;
    GridFn w_x_, w_y_, u_x_, u_y_, k_x_, k_y_;
    Profile kernel_profile_;
    Eigen::Matrix2d gram_;
    std::vector<std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>>> modes_;
};

struct SolverState {
    GridFn v;
    double b_x = 0, b_y = 0;
};

struct StepResult {
    SolverState next;          // Psi(state), undamped
    double update_norm = 0;    // sup of Psi(state) - state
    double interior_residual = 0;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 50;
    double damping = 1.0;
    int anderson_depth = 5;
    double eps1 = 0.25;
    int embed_pairs = 10000;
    std::uint64_t seed = 1;
    bool check_embedding = true;
};

class FixedPointProblem {
public:
    FixedPointProblem(const BentSurface& surface, const LinearSolver& solver);

    const Profile& psi() const { return psi_; }
    const Profile& psi_wide() const { return psi_wide_; }
    GridFn graph_function(const SolverState& st) const;
    GridFn interior_mask() const;
    double interior_sup(const GridFn& q) const;
    StepResult psi_step(const SolverState& st) const;

private:
    const BentSurface& surface_;
    const LinearSolver& solver_;
    Profile psi_, psi_wide_;
    std::vector<int> interior_rows_;
};

struct SolveResult {
    SolveReport report;
    SolverState state;
    std::shared_ptr<BentSurface> surface;
    GridFn graph;  // psi v + b_x u_x + b_y u_y, without u0
    bool converged = false;
};

void check_parameter_gate(const SpiralSpec& spec, double ell, double eps1);

SolveResult solve_minimal(const SpiralSpec& spec, double ell, int n_s, int n_theta, const SolveOptions& opt);

}  // namespace spiralforge
