// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include "fd_oracle.hpp"
#include "spiralforge/bent.hpp"
#include "spiralforge/helicoid.hpp"
#include "spiralforge/jet.hpp"
#include "spiralforge/solver.hpp"
#include "spiralforge/spiral.hpp"
#include "spiralforge/tube.hpp"
#include "spiralforge/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace spiralforge;
using LD = long double;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s criterion %d: %s | %s\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

SpiralSpec demo(double delta = 1e-3) { return make_spiral_spec(frenet_generator(1, 0), delta, 1); }

oracle::V3<LD> spiral_ld(const SpiralParams& p, LD t) {
    const LD a = p.a, b = p.b, c = p.c;
    const LD ct = std::cos(c * t), st = std::sin(c * t);
    if (std::abs(a) < 1e-12L) return {ct, st, b * t};
    const LD e = std::exp(a * t);
    return {e * ct, e * st, e * b / a};
}

Mat3 fd_jacobian(const SpiralSpec& s, double x, double y, double z) {
    Mat3 J;
    const double h = 1e-3;
    const auto col = [&](const Vec3& d) {
        const auto f = [&](double t) { return tube_map(s, x + t * d(0), y + t * d(1), z + t * d(2)); };
        return Vec3((-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h));
    };
    J.col(0) = col(Vec3(1, 0, 0));
    J.col(1) = col(Vec3(0, 1, 0));
    J.col(2) = col(Vec3(0, 0, 1));
    return J;
}

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1), tt(-5, 5);
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
        const SpiralParams p{u(rng), u(rng), 0.3 + std::abs(u(rng))};
        const double t = tt(rng);
        const LD h = 0.02L / (1 + std::abs(p.a) + std::abs(p.c));
        const auto o = oracle::frenet<LD>([&](LD x) { return spiral_ld(p, x); }, LD(t), h);
        const auto c = spiral_invariants(p, t);
        const double scale = double(o.curvature) + std::abs(double(o.torsion));
        worst = std::max({worst, std::abs(c.speed - double(o.speed)) / double(o.speed),
                          std::abs(c.curvature - double(o.curvature)) / scale,
                          std::abs(c.torsion - double(o.torsion)) / scale});
    }
    const double dt = seconds_since(t0);
    report(1, worst <= 1e-8 && dt < 5, "closed-form invariants vs finite-difference Frenet oracle",
           fmt("50 samples, max rel err %.2e, %.3f s", worst, dt));
}

void criterion_2() {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> tt(-5, 5);
    const SpiralParams p{0.4, -0.7, 1.3};
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const double t = tt(rng);
        const Vec3 lhs = std::exp(2 * M_PI * p.a / p.c) * spiral_point(p, t);
        const Vec3 rhs = spiral_point(p, t + 2 * M_PI / p.c);
        worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
    }
    report(2, worst <= 1e-12, "spiral periodicity", fmt("20 samples, max rel err %.2e", worst));
}

void criterion_3() {
    const auto s = make_spiral_spec(frenet_generator(1, 0.3), 0.01, 1);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-3, 3), zz(-100, 100);
    double axis = 0, fd = 0, off = 0;
    for (int k = 0; k < 30; ++k) {
        const double x = u(rng), y = u(rng), z = zz(rng);
        const double e3 = std::exp(3 * 0.01 * z);
        axis = std::max(axis, std::abs(tube_jacobian(s, 0, 0, z).determinant() - e3) / e3);
        const Mat3 J = tube_jacobian(s, x, y, z), Jfd = fd_jacobian(s, x, y, z);
        fd = std::max(fd, (J - Jfd).norm() / J.norm());
        off = std::max(off, std::abs(Jfd.determinant() - e3) / e3);
    }
    const bool ok = axis <= 1e-12 && fd <= 1e-8 && off <= 1e-12;
    report(3, ok, "det DM = e^{3 delta xi z}",
           fmt("on-axis rel err %.2e, FD Jacobian agreement %.2e, off-axis rel err %.2e (identity only holds on "
               "the axis; off the axis det DM = e^{3 delta xi z}(1 - delta <G e3, (x,y,0)>))",
               axis, fd, off));
}

void criterion_4() {
    double worst = 0;
    for (double tau0 : {0.0, 0.5, -2.0})
        for (double xi : {1.0, -0.4})
            for (double z : {-50.0, 0.0, 60.0}) {
                const double delta = 0.01, rho2 = 1 + tau0 * tau0;
                const auto s = make_spiral_spec(frenet_generator(1, tau0), delta, xi);
                const double expect = std::exp(delta * xi * z) / (delta * std::abs(xi)) *
                                      std::sqrt((tau0 * tau0 + xi * xi) / (rho2 + xi * xi));
                worst = std::max(worst, std::abs(tube_map(s, 0, 0, z).norm() - expect) / expect);
            }
    report(4, worst <= 1e-10, "axis norm |M(0,0,z)|", fmt("18 samples, max rel err %.2e", worst));
}

void criterion_5() {
    double worst = 0, shrink = 1e300;
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        double e[2];
        for (int k = 0; k < 2; ++k) {
            const auto g = make_grid(1024 << k, 16, 6.0);
            e[k] = sup_norm(stability_apply(g, kernel_grid(g, a)));
        }
        worst = std::max(worst, e[0]);
        shrink = std::min(shrink, e[0] / e[1]);
    }
    report(5, worst <= 1e-4 && shrink >= 3.5, "kernel annihilation",
           fmt("sup at N_s=1024 %.2e, smallest shrink under doubling %.1fx", worst, shrink));
}

void criterion_6() {
    const Axis axes[3] = {Axis::x, Axis::y, Axis::z};
    double worst = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(kernel_pairing(axes[i], axes[j], 10) - (i == j)));
    report(6, worst <= 1e-6, "kernel pairing = delta_ij at s_max = 10", fmt("max deviation %.2e", worst));
}

void criterion_7() {
    const double S = std::acosh(32.0);
    const std::vector<std::function<double(double)>> suite = {
        [S](double s) {
            const double a = 8 / (S * S), e = std::exp(-a * s * s);
            return e * (2 - 10 * a * s * s + 4 * a * a * s * s * s * s) + 2 * s * s * e / (std::cosh(s) * std::cosh(s));
        },
        [](double s) { return 2 * s / (std::cosh(s) * std::cosh(s)); },
        [](double s) { return std::sin(2 * s) + 0.1 * s * s; },
        [](double s) { return std::exp(-s * s); },
    };
    double worst_res = 0, worst_shrink = 1e300, worst_exact = 0;
    for (const auto& E : suite) {
        double r[2];
        for (int k = 0; k < 2; ++k) {
            const auto g = make_grid(512 << k, 4, S);
            const Profile e = g.sample_s(E);
            const GridFn eg = e.replicate(1, g.cols());
            const auto interior = [&](const Profile& v) {
                return sup_norm((stability_apply(g, v.replicate(1, g.cols())) - eg).middleRows(1, g.n_s - 1)) /
                       (1 + e.cwiseAbs().maxCoeff());
            };
            r[k] = interior(invert_mean_quadrature(g, e));
            worst_exact = std::max(worst_exact, interior(invert_mean(g, e)));
        }
        worst_res = std::max(worst_res, r[1]);
        worst_shrink = std::min(worst_shrink, r[0] / r[1]);
    }
    report(7, worst_res <= 1e-4 && worst_shrink >= 3.5 && worst_exact <= 1e-9, "mean inverse reproduces E",
           fmt("4 profiles: integral formula residual %.2e at N_s=1024, shrink %.1fx; discrete inverse %.2e",
               worst_res, worst_shrink, worst_exact));
}

void criterion_8() {
    const double S = std::acosh(32.0);
    BentSurface surf(demo(), 32, 2048, 64);
    surf.set_u0(solve_u0(1e-3, surf.grid()));
    const auto& g = surf.grid();
    const LinearSolver ls(g);
    const GridFn psi = g.sample([&](double s, double) { return cutoff({S, std::acosh(16.0)}, std::abs(s)); });
    const std::vector<GridFn> rhs = {
        psi.cwiseProduct(surf.q_operator(g.zeros())),
        psi.cwiseProduct(g.sample([](double s, double t) {
            return std::tanh(s) + std::cos(t) * std::exp(-s * s) + std::sin(t) / std::cosh(s) + 0.3 * std::cos(4 * t);
        })),
    };
    double worst = 0;
    for (const auto& E : rhs) {
        const auto sol = ls.linear_solve(E);
        const GridFn r = stability_apply(g, sol.v) - (E - sol.b_x * ls.w(Axis::x) - sol.b_y * ls.w(Axis::y));
        worst = std::max({worst, ls.residual(E, sol), sup_norm(r.middleRows(1, g.n_s - 1))});
    }
    report(8, worst <= 1e-6, "total linear inverse at 2048 x 64, ell = 32", fmt("residual %.2e", worst));
}

void criterion_9() {
    double sup[3];
    const double deltas[3] = {1e-2, 5e-3, 2.5e-3};
    for (int k = 0; k < 3; ++k) {
        BentSurface surf(demo(deltas[k]), 32, 1024, 64);
        surf.set_u0(solve_u0(deltas[k], surf.grid()));
        sup[k] = sup_norm(surf.q_operator(surf.grid().zeros()));
    }
    const double r1 = sup[1] / sup[0], r2 = sup[2] / sup[1];
    report(9, r1 >= 0.35 && r1 <= 0.65 && r2 >= 0.35 && r2 <= 0.65, "Q[0] scaling in delta",
           fmt("sup Q[0] %.3e %.3e %.3e, ratios %.3f %.3f", sup[0], sup[1], sup[2], r1, r2));
}

SolveResult demo_result;

void criterion_10() {
    SolveOptions opt;
    const auto t0 = std::chrono::steady_clock::now();
    demo_result = solve_minimal(demo(), 32, 1024, 64, opt);
    const double dt = seconds_since(t0);
    const auto& rep = demo_result.report;
    bool ok = demo_result.converged && rep.final_interior_residual <= 1e-8 && rep.iterations <= 50 && dt < 60;
    std::ostringstream d;
    d << fmt("%d iterations, residual %.2e, %.1f s, b = (%.4e, %.4e);", rep.iterations, rep.final_interior_residual,
             dt, rep.b_x, rep.b_y);
    // O(delta): each norm divided by delta must not grow as delta halves.
    double nv[3], bx[3], by[3];
    nv[0] = rep.norm_v, bx[0] = std::abs(rep.b_x), by[0] = std::abs(rep.b_y);
    SolveOptions quiet;
    quiet.check_embedding = false;
    for (int k = 1; k < 3; ++k) {
        const auto r = solve_minimal(demo(1e-3 / (1 << k)), 32, 1024, 64, quiet);
        ok = ok && r.converged;
        nv[k] = r.report.norm_v, bx[k] = std::abs(r.report.b_x), by[k] = std::abs(r.report.b_y);
    }
    d << " halving ratios";
    for (auto* q : {nv, bx, by})
        for (int k = 0; k < 2; ++k) {
            const double ratio = q[k + 1] / q[k];
            d << fmt(" %.3f", ratio);
            ok = ok && ratio <= 0.6;
        }
    d << " (norm_v, |b_x|, |b_y|)";
    report(10, ok, "end-to-end demo solve and O(delta) norms", d.str());
}

void criterion_11() {
    const double tol = 1e-8;
    const double d = demo_result.surface ? check_self_similarity(*demo_result.surface, demo_result.graph) : 1e300;
    report(11, d <= 10 * tol, "self-similarity of the solved surface", fmt("defect %.2e", d));
}

void criterion_12() {
    const auto& surf = *demo_result.surface;
    const double bound = max_embed_ell(surf.spec());
    const auto rep = find_collision(surface_sheet(surf, demo_result.graph), 10000, 1);
    const auto ctrl = find_collision(figure_eight_sheet(41, 64), 10000, 7);
    const bool ok = surf.ell() <= bound && !rep.collision && ctrl.collision;
    report(12, ok, "sampled embeddedness and self-intersecting control",
           fmt("ell %.1f <= bound %.1f, solved surface min ratio %.3f over %lld pairs, control min ratio %.3f", surf.ell(),
               bound, rep.min_ratio, rep.pairs_tested, ctrl.min_ratio));
}

void criterion_13() {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0, 1);
    const auto random_jet = [&] {
        Jet e;
        for (auto& v : e.d1) v = Vec3(n(rng), n(rng), n(rng));
        for (auto& v : e.d2) v = Vec3(n(rng), n(rng), n(rng));
        e.d2[3] = e.d2[2];
        return e;
    };
    // A sample whose leading coefficient c_{k+1} is accidentally tiny next to
    // the others only reaches its asymptotic order below rounding; those are
    // screened out and counted.
    const double scale = 1e-3;
    double worst = 0;
    int fits = 0, screened = 0;
    for (Quantity q : {Quantity::mean_curvature, Quantity::aspect_ratio, Quantity::normal_x, Quantity::normal_y,
                       Quantity::normal_z})
        for (int trial = 0; trial < 20; ++trial) {
            const Jet j = random_jet();
            Variation e = random_jet();
            e = e.scaled(scale * j.norm() / e.norm());
            const auto d = path_derivatives([q](const Jet& x) { return evaluate(q, x); }, j, e);
            double c[4], cmax = 0;
            for (int m = 1; m <= 3; ++m) {
                c[m] = std::abs(d[m]) / (std::tgamma(m + 1) * std::pow(scale, m));
                cmax = std::max(cmax, c[m]);
            }
            for (int k = 0; k <= 2; ++k) {
                if (c[k + 1] < 0.05 * cmax) {
                    ++screened;
                    continue;
                }
                const double r1 = std::abs(taylor_remainder(q, j, e, k));
                const double r2 = std::abs(taylor_remainder(q, j, e.scaled(0.5), k));
                worst = std::max(worst, std::abs(std::log2(r1 / r2) - (k + 1)) / (k + 1));
                ++fits;
            }
        }
    const bool ok = worst <= 0.2 && screened * 10 <= fits + screened;
    report(13, ok, "Taylor remainder orders k + 1 on random jets",
           fmt("%d fits, %d non-generic samples screened, max rel exponent error %.3f", fits, screened, worst));
}

}  // namespace

int main() {
    const std::vector<void (*)()> all = {criterion_1, criterion_2, criterion_3,  criterion_4,  criterion_5,
                                         criterion_6, criterion_7, criterion_8,  criterion_9,  criterion_10,
                                         criterion_11, criterion_12, criterion_13};
    for (std::size_t k = 0; k < all.size(); ++k) {
        try {
            all[k]();
        } catch (const std::exception& e) {
            report(int(k) + 1, false, "error", e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, all.size());
    return failures == 0 ? 0 : 1;
}
