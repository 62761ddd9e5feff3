#pragma once

#include "spiralforge/bent.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace spiralforge {

enum class EmbedVerdict { certified, sampled_ok, not_certified };

const char* verdict_name(EmbedVerdict v);

struct SolveReport {
    std::vector<double> residual_history;  // interior sup|Q| before each step
    std::vector<double> update_history;
    std::vector<double> damping_history;
    double final_interior_residual = 0;
    double b_x = 0, b_y = 0;
    double norm_v = 0;     // cosh^{3/4}-weighted sup of v
    double norm_v_c2 = 0;  // same weight, values and derivatives up to order two
    double zeta = 0;       // max(norm_v_c2, |b_x|, |b_y|) / (delta ell^{1/4} rho0)
    EmbedVerdict embed_verdict = EmbedVerdict::not_certified;
    double embed_min_ratio = 0;
    double self_similarity_defect = 0;
    double u0_residual = 0;
    double u0_c_hat = 0;
    int iterations = 0;
    bool converged = false;
    double runtime = 0;
};

// Largest |G_w(s, theta + 2 pi) - (lambda Q G_w(s, theta) + t)| e^{-delta xi theta}
// over the grid; u excludes the surface's u0, which is added.
double check_self_similarity(const BentSurface& surface, const GridFn& u);

// Sampled points on a (rows x cols) parameter lattice. Columns wrap when
// periodic is set.
struct SampleSheet {
    int rows = 0, cols = 0;
    bool periodic = false;
    std::vector<double> s, theta;
    std::vector<Vec3> points;  // row-major

    const Vec3& at(int i, int j) const { return points[std::size_t(i) * cols + j]; }
};

SampleSheet surface_sheet(const BentSurface& surface, const GridFn& u, int max_rows = 257, int periods = 3);
// (sin theta, sin theta cos theta, s): the curves theta = 0 and theta = pi coincide.
SampleSheet figure_eight_sheet(int rows, int cols);

struct CollisionReport {
    bool collision = false;
    // Smallest |p - q| / (0.5 max(edge_p, edge_q)) over tested pairs;
    // a value below one is a collision.
    double min_ratio = 0;
    std::array<double, 2> first{0, 0}, second{0, 0};  // (s, theta) of the worst pair
    long long pairs_tested = 0;
};

// Neighbourhood search over every sample plus n_random seeded random pairs.
// Pairs within `exclusion` lattice cells in both directions are skipped.
CollisionReport find_collision(const SampleSheet& sheet, int n_random, std::uint64_t seed, int exclusion = 3);

struct EmbedResult {
    EmbedVerdict verdict = EmbedVerdict::not_certified;
    bool formula_ok = false;
    CollisionReport sampled;
};

EmbedResult check_embedded(const BentSurface& surface, const GridFn& u, bool converged, int n_random = 10000,
                           std::uint64_t seed = 1);

// sup_i cosh^{-rho}(s_i) (|u| + |u_s| + |u_theta| + ...) up to derivative order k.
double weighted_norm(const CylinderGrid& g, const GridFn& u, double rho, int k);

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;  // 0-based
    std::vector<double> s, theta, h_abs, u;
};

// Stride sample of the solver grid with res_s rows and res_theta columns
// per period, repeated over `periods` turns.
Mesh build_mesh(const BentSurface& surface, const GridFn& u, int res_s, int res_theta, int periods = 1);
void write_obj(const Mesh& mesh, const std::string& path);
void write_csv(const Mesh& mesh, const std::string& path);
std::vector<Vec3> read_obj_vertices(const std::string& path);
// Writes <stem>.obj and <stem>.csv.
Mesh export_mesh(const BentSurface& surface, const GridFn& u, const std::string& stem, int res_s, int res_theta,
                 int periods = 1);

}  // namespace spiralforge
