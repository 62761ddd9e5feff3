#include "spiralforge/bent.hpp"
#include "spiralforge/errors.hpp"
#include "spiralforge/helicoid.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace spiralforge {

namespace {

// Partial derivatives of P(s, theta) = sinh(s) (sin theta, cos theta, 0).
Vec3 P_deriv(int a, int k, double s, double theta) {
    const double hs = (a % 2 == 0) ? std::sinh(s) : std::cosh(s);
    double ct, st;
    switch (k % 4) {
    case 0: st = std::sin(theta); ct = std::cos(theta); break;
    case 1: st = std::cos(theta); ct = -std::sin(theta); break;
    case 2: st = -std::sin(theta); ct = -std::cos(theta); break;
    default: st = -std::cos(theta); ct = std::sin(theta); break;
    }
    return Vec3(hs * st, hs * ct, 0);
}

struct Bending {
    Mat3 K;
    Vec3 c0, c1;
};

Bending bending_of(const SpiralSpec& spec) { return {spec.K, spec.c0, spec.c1}; }

Bending reference_bending(double dxi) {
    if (std::abs(dxi) > 1e-14) return {dxi * Mat3::Identity(), Vec3(0, 0, 1 / dxi), Vec3::Zero()};
    return {Mat3::Zero(), Vec3::Zero(), Vec3(0, 0, 1)};
}

Vec3 W_deriv(const Bending& bd, int a, int k, double s, double theta) {
    Vec3 v = P_deriv(a, k, s, theta);
    if (a == 0 && k == 0) v += bd.c0 + theta * bd.c1;
    if (a == 0 && k == 1) v += bd.c1;
    return v;
}

// sum_k C(b,k) K^{b-k} d_s^a d_theta^k W
Vec3 normalized_deriv(const Bending& bd, int a, int b, double s, double theta) {
    static const int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    Vec3 out = Vec3::Zero();
    for (int k = 0; k <= b; ++k) {
        Vec3 term = W_deriv(bd, a, k, s, theta);
        for (int p = 0; p < b - k; ++p) term = bd.K * term;
        out += binom[b][k] * term;
    }
    return out;
}

Jet normalized_jet_of(const Bending& bd, double s, double theta, int order) {
    Jet j;
    j.d1 = {normalized_deriv(bd, 1, 0, s, theta), normalized_deriv(bd, 0, 1, s, theta)};
    const Vec3 st = normalized_deriv(bd, 1, 1, s, theta);
    j.d2 = {normalized_deriv(bd, 2, 0, s, theta), normalized_deriv(bd, 0, 2, s, theta), st, st};
    if (order >= 3) {
        j.d3 = {normalized_deriv(bd, 3, 0, s, theta), normalized_deriv(bd, 2, 1, s, theta),
                normalized_deriv(bd, 1, 2, s, theta), normalized_deriv(bd, 0, 3, s, theta)};
        j.has_d3 = true;
    }
    return j;
}

}  // namespace

PointGeometry point_geometry(const Mat3& K, double s, double theta) {
    auto P = [&](int a, int k) { return P_deriv(a, k, s, theta); };
    PointGeometry g;
    const Vec3 e3(0, 0, 1);
    const Vec3 a = P(1, 0);
    const Vec3 b = e3 + K * P(0, 0) + P(0, 1);
    const Vec3 a_s = P(2, 0), a_t = P(1, 1), a_ss = P(3, 0), a_st = P(2, 1), a_tt = P(1, 2);
    const Vec3 b_s = K * P(1, 0) + P(1, 1);
    const Vec3 b_t = K * P(0, 1) + P(0, 2);
    const Vec3 b_ss = K * P(2, 0) + P(2, 1);
    const Vec3 b_st = K * P(1, 1) + P(1, 2);
    const Vec3 b_tt = K * P(0, 2) + P(0, 3);
    g.a = a;
    g.b = b;
    g.a_s = a_s;
    g.Da = K * a + a_t;
    g.Db = K * b + b_t;

    const Vec3 N = a.cross(b);
    const Vec3 Ns = a_s.cross(b) + a.cross(b_s);
    const Vec3 Nt = a_t.cross(b) + a.cross(b_t);
    const Vec3 Nss = a_ss.cross(b) + 2 * a_s.cross(b_s) + a.cross(b_ss);
    const Vec3 Nst = a_st.cross(b) + a_s.cross(b_t) + a_t.cross(b_s) + a.cross(b_st);
    const Vec3 Ntt = a_tt.cross(b) + 2 * a_t.cross(b_t) + a.cross(b_tt);
    const double r = N.norm();
    const Vec3 n = N / r;
    const double rs = n.dot(Ns), rt = n.dot(Nt);
    const Vec3 ns = (Ns - n * rs) / r, nt = (Nt - n * rt) / r;
    const double rss = ns.dot(Ns) + n.dot(Nss);
    const double rst = nt.dot(Ns) + n.dot(Nst);
    const double rtt = nt.dot(Nt) + n.dot(Ntt);
    g.n = n;
    g.n_s = ns;
    g.n_t = nt;
    g.n_ss = (Nss - 2 * ns * rs - n * rss) / r;
    g.n_st = (Nst - ns * rt - nt * rs - n * rst) / r;
    g.n_tt = (Ntt - 2 * nt * rt - n * rtt) / r;
    return g;
}

Jet graph_perturbation(const PointGeometry& p, const Mat3& K, const GraphDerivs& d) {
    const Vec3 f = d.w * p.n;
    const Vec3 fs = d.w_s * p.n + d.w * p.n_s;
    const Vec3 ft = d.w_t * p.n + d.w * p.n_t;
    const Vec3 fss = d.w_ss * p.n + 2 * d.w_s * p.n_s + d.w * p.n_ss;
    const Vec3 fst = d.w_st * p.n + d.w_s * p.n_t + d.w_t * p.n_s + d.w * p.n_st;
    const Vec3 ftt = d.w_tt * p.n + 2 * d.w_t * p.n_t + d.w * p.n_tt;
    Jet e;
    e.d1 = {fs, K * f + ft};
    const Vec3 mixed = K * fs + fst;
    e.d2 = {fss, K * (K * f) + 2 * (K * ft) + ftt, mixed, mixed};
    return e;
}

Jet graph_jet(const PointGeometry& p, const Mat3& K, const GraphDerivs& d) {
    Jet j;
    j.d1 = {p.a, p.b};
    j.d2 = {p.a_s, p.Db, p.Da, p.Da};
    return j + graph_perturbation(p, K, d);
}

Vec3 bent_point(const SpiralSpec& spec, double s, double theta) {
    return spec.B(theta) * (spec.anchor(theta) + P_deriv(0, 0, s, theta));
}

Jet normalized_jet(const SpiralSpec& spec, double s, double theta, int order) {
    return normalized_jet_of(bending_of(spec), s, theta, order);
}

Jet bent_jet(const SpiralSpec& spec, double s, double theta, int order) {
    return normalized_jet(spec, s, theta, order).rotated(spec.B(theta));
}

Vec3 reference_point(double dxi, double s, double theta) {
    const Bending bd = reference_bending(dxi);
    return std::exp(dxi * theta) * (bd.c0 + theta * bd.c1 + P_deriv(0, 0, s, theta));
}

Jet reference_jet(double dxi, double s, double theta, int order) {
    return normalized_jet_of(reference_bending(dxi), s, theta, order).scaled(std::exp(dxi * theta));
}

U0Profile solve_u0(double dxi, double ell, int n_s) {
    if (!(ell > 1)) throw Error(ErrorCode::rejected_parameters, "ell must exceed 1");
    return solve_u0(dxi, make_grid(n_s, 4, std::acosh(ell)));
}

U0Profile solve_u0(double dxi, const CylinderGrid& g) {
    const int n = g.n_s, c = g.center(), m = n - c;
    const Mat3 K = dxi * Mat3::Identity();
    std::vector<PointGeometry> geo(n + 1);
    for (int i = 0; i <= n; ++i) geo[i] = point_geometry(K, g.s[i], 0.0);
    const auto D1 = first_difference_matrix(n, g.h);
    const auto D2 = second_difference_matrix(n, g.h);

    auto pointwise = [&](int i, double w, double ws, double wss) {
        GraphDerivs d;
        d.w = w;
        d.w_s = ws;
        d.w_ss = wss;
        const double ch = std::cosh(g.s[i]);
        return ch * ch * mean_curvature(graph_jet(geo[i], K, d));
    };
    auto expand = [&](const Eigen::VectorXd& half) {
        Profile u = Profile::Zero(n + 1);
        for (int k = 1; k <= m; ++k) {
            u(c + k) = half(k - 1);
            u(c - k) = -half(k - 1);
        }
        return u;
    };
    // Rows 0..m-2: equation at nodes c+1..n-1. Row m-1: u'(0) = 0.
    auto residual = [&](const Eigen::VectorXd& half, Profile* u1, Profile* u2) {
        const Profile u = expand(half);
        const Profile d1 = D1 * u, d2 = D2 * u;
        Eigen::VectorXd r(m);
        for (int k = 1; k < m; ++k) r(k - 1) = pointwise(c + k, u(c + k), d1(c + k), d2(c + k));
        r(m - 1) = d1(c);
        if (u1) *u1 = d1;
        if (u2) *u2 = d2;
        return r;
    };
    auto eq_sup = [&](const Eigen::VectorXd& r) { return r.head(m - 1).cwiseAbs().maxCoeff(); };

    U0Profile out;
    Eigen::VectorXd half = Eigen::VectorXd::Zero(m);
    Profile u1, u2;
    Eigen::VectorXd r = residual(half, &u1, &u2);
    double rn = r.norm();
    constexpr double tol = 1e-10;
    int it = 0;
    for (; it < 60 && (eq_sup(r) > tol || std::abs(r(m - 1)) > tol); ++it) {
        const Profile u = expand(half);
        std::vector<Eigen::Triplet<double>> trip;
        for (int k = 1; k < m; ++k) {
            const int i = c + k;
            const double w = u(i), ws = u1(i), wss = u2(i);
            auto partial = [&](int which) {
                const double base = which == 0 ? w : (which == 1 ? ws : wss);
                const double eps = 1e-6 * (1 + std::abs(base));
                double p[2];
                for (int sgn = 0; sgn < 2; ++sgn) {
                    const double dv = sgn ? eps : -eps;
                    p[sgn] = pointwise(i, w + (which == 0 ? dv : 0), ws + (which == 1 ? dv : 0),
                                       wss + (which == 2 ? dv : 0));
                }
                return (p[1] - p[0]) / (2 * eps);
            };
            const double fu = partial(0), fd = partial(1), fdd = partial(2);
            auto put = [&](int full_col, double v) {
                if (full_col == c || v == 0) return;
                if (full_col > c) trip.emplace_back(k - 1, full_col - c - 1, v);
                else trip.emplace_back(k - 1, c - full_col - 1, -v);
            };
            put(i, fu);
            for (int col = std::max(0, i - 5); col <= std::min(n, i + 5); ++col) {
                put(col, fd * D1.coeff(i, col) + fdd * D2.coeff(i, col));
            }
        }
        for (int col = c - 2; col <= c + 2; ++col) {
            const double v = D1.coeff(c, col);
            if (col > c) trip.emplace_back(m - 1, col - c - 1, v);
            else if (col < c) trip.emplace_back(m - 1, c - col - 1, -v);
        }
        Eigen::SparseMatrix<double> J(m, m);
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw Error(ErrorCode::no_u0_profile, "singular Newton matrix");
        const Eigen::VectorXd step = lu.solve(-r);
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            const Eigen::VectorXd trial = half + lambda * step;
            Profile t1, t2;
            Eigen::VectorXd rt;
            try {
                rt = residual(trial, &t1, &t2);
            } catch (const Error&) {
                lambda *= 0.5;
                continue;
            }
            if (rt.allFinite() && rt.norm() < rn) {
                half = trial;
                r = rt;
                rn = rt.norm();
                u1 = t1;
                u2 = t2;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (!(eq_sup(r) <= tol && std::abs(r(m - 1)) <= tol))
        throw Error(ErrorCode::no_u0_profile, "Newton iteration stalled at residual " + std::to_string(eq_sup(r)));
    out.u = expand(half);
    out.residual = eq_sup(r);
    out.iterations = it;
    double ch = 0;
    if (std::abs(dxi) > 0) {
        for (int i = 0; i <= n; ++i)
            if (i != c) ch = std::max(ch, std::abs(out.u(i)) / (std::abs(dxi) * g.s[i] * g.s[i]));
    }
    out.c_hat = ch;
    return out;
}

BentSurface::BentSurface(const SpiralSpec& spec, double ell, int n_s, int n_theta)
    : spec_(spec), ell_(ell), grid_(make_grid(n_s, n_theta, std::acosh(ell))) {
    geom_.resize(std::size_t(grid_.rows()) * grid_.cols());
    parallel_for(grid_.rows(), [&](int i) {
        for (int j = 0; j < grid_.cols(); ++j)
            geom_[std::size_t(i) * grid_.cols() + j] = point_geometry(spec_.K, grid_.s[i], grid_.theta[j]);
    });
    u0_ = Profile::Zero(grid_.rows());
}

void BentSurface::set_u0(const U0Profile& p) {
    if (p.u.size() != grid_.rows()) throw Error(ErrorCode::grid_mismatch, "u0 profile length");
    u0_ = p.u;
}

void BentSurface::clear_u0() { u0_ = Profile::Zero(grid_.rows()); }

GridFn BentSurface::u0_grid() const { return u0_.replicate(1, grid_.cols()); }

GridFn BentSurface::q_operator(const GridFn& u) const {
    if (!grid_.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "q_operator");
    return q_raw(u + u0_grid());
}

GridFn BentSurface::q_raw(const GridFn& w) const {
    if (!grid_.same_shape(w)) throw Error(ErrorCode::grid_mismatch, "q_raw");
    const GridFn ws = d_s(grid_, w), wss = d_ss(grid_, w);
    const GridFn wt = d_theta(w), wtt = d_thetatheta(w), wst = d_theta(ws);
    GridFn q(grid_.rows(), grid_.cols());
    parallel_for(grid_.rows(), [&](int i) {
        const double ch = std::cosh(grid_.s[i]);
        for (int j = 0; j < grid_.cols(); ++j) {
            GraphDerivs d{w(i, j), ws(i, j), wt(i, j), wss(i, j), wst(i, j), wtt(i, j)};
            const Jet jet = graph_jet(at(i, j), spec_.K, d);
            if (aspect_ratio(jet) < kDegenerateAspect)
                throw Error(ErrorCode::graph_too_large, "graph leaves the immersion set");
            q(i, j) = ch * ch * mean_curvature(jet);
        }
    });
    return q;
}

Vec3 BentSurface::graph_point(int i, int j, double w, int turns) const {
    const double th = grid_.theta[j] + 2 * M_PI * turns;
    const PointGeometry& p = at(i, j);
    return spec_.B(th) * (spec_.anchor(th) + P_deriv(0, 0, grid_.s[i], th) + w * p.n);
}

std::vector<Vec3> BentSurface::graph_points(const GridFn& u, int turns) const {
    std::vector<Vec3> pts;
    pts.reserve(std::size_t(grid_.rows()) * grid_.cols());
    for (int i = 0; i < grid_.rows(); ++i)
        for (int j = 0; j < grid_.cols(); ++j) pts.push_back(graph_point(i, j, u(i, j) + u0_(i), turns));
    return pts;
}

}  // namespace spiralforge
