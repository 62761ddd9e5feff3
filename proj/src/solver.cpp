#include "spiralforge/solver.hpp"
#include "spiralforge/errors.hpp"
#include "spiralforge/tube.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <deque>

namespace spiralforge {

MeridianSplit meridian_split(const GridFn& E) {
    MeridianSplit out;
    out.mean = E.rowwise().mean();
    out.ring = E.colwise() - out.mean;
    return out;
}

double invert_mean_at(const std::function<double(double)>& E, double s) {
    using boost::math::quadrature::gauss_kronrod;
    if (s == 0) return 0;
    const double e0 = E(0);
    auto inner = [&](double t) {
        if (std::abs(t) < 1e-6) return 0.5 * e0;
        const double I = gauss_kronrod<double, 31>::integrate(
            [&](double r) { return std::tanh(r) * E(r); }, 0.0, t, 12, 1e-13);
        const double th = std::tanh(t);
        return I / (th * th);
    };
    return std::tanh(s) * gauss_kronrod<double, 31>::integrate(inner, 0.0, s, 12, 1e-12);
}

Profile invert_mean_quadrature(const CylinderGrid& g, const Profile& E) {
    if (E.size() != g.rows()) throw Error(ErrorCode::grid_mismatch, "invert_mean_quadrature");
    const int c = g.center();
    Profile th(g.rows());
    for (int i = 0; i < g.rows(); ++i) th(i) = std::tanh(g.s[i]);
    const Profile I = cumulative_from_center(g, th.cwiseProduct(E));
    Profile J(g.rows());
    for (int i = 0; i < g.rows(); ++i) J(i) = i == c ? 0.5 * E(c) : I(i) / (th(i) * th(i));
    return th.cwiseProduct(cumulative_from_center(g, J));
}

MeanInverse::MeanInverse(const CylinderGrid& g) : grid_(g) {
    const int n = g.n_s, c = g.center();
    const auto D1 = first_difference_matrix(n, g.h);
    const auto D2 = second_difference_matrix(n, g.h);
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < D2.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(D2, k); it; ++it) {
            const int r = int(it.row());
            if (r >= 1 && r < n) trip.emplace_back(r, int(it.col()), it.value());
        }
    for (int r = 1; r < n; ++r) {
        const double sech = 1 / std::cosh(g.s[r]);
        trip.emplace_back(r, r, 2 * sech * sech);
    }
    // Row 0 carries v(0) = 0 and row n carries v'(0) = 0.
    trip.emplace_back(0, c, 1.0);
    for (int col = c - 2; col <= c + 2; ++col) trip.emplace_back(n, col, D1.coeff(c, col));
    Eigen::SparseMatrix<double> A(n + 1, n + 1);
    A.setFromTriplets(trip.begin(), trip.end());
    lu_.compute(A);
    if (lu_.info() != Eigen::Success) throw Error(ErrorCode::internal, "mean-mode system is singular");
}

Profile MeanInverse::operator()(const Profile& E) const {
    if (E.size() != grid_.rows()) throw Error(ErrorCode::grid_mismatch, "invert_mean");
    Profile rhs = E;
    rhs(0) = 0;
    rhs(grid_.n_s) = 0;
    return lu_.solve(rhs);
}

Profile invert_mean(const CylinderGrid& g, const Profile& E) { return MeanInverse(g)(E); }

LinearSolver::LinearSolver(const CylinderGrid& g) : grid_(g), mean_(g) {
    w_x_ = substitute_image(g, Axis::x);
    w_y_ = substitute_image(g, Axis::y);
    u_x_ = substitute_grid(g, Axis::x);
    u_y_ = substitute_grid(g, Axis::y);
    const int n = g.n_s, m = n - 1;
    const auto D2 = second_difference_matrix(n, g.h);
    std::vector<Eigen::Triplet<double>> base;
    for (int k = 0; k < D2.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(D2, k); it; ++it) {
            const int r = int(it.row()), col = int(it.col());
            if (r >= 1 && r <= m && col >= 1 && col <= m) base.emplace_back(r - 1, col - 1, it.value());
        }
    modes_.resize(g.n_theta / 2 + 1);
    parallel_for(g.n_theta / 2, [&](int idx) {
        const int mode = idx + 1;
        auto trip = base;
        for (int r = 1; r <= m; ++r) {
            const double sech = 1 / std::cosh(g.s[r]);
            trip.emplace_back(r - 1, r - 1, 2 * sech * sech - double(mode) * mode);
        }
        Eigen::SparseMatrix<double> A(m, m);
        A.setFromTriplets(trip.begin(), trip.end());
        auto lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        lu->compute(A);
        if (lu->info() != Eigen::Success)
            throw Error(ErrorCode::internal, "mode " + std::to_string(mode) + " system is singular");
        modes_[mode] = std::move(lu);
    });

    // Mode-one profile of the kernel functionals: the near-null left vector
    // of the Dirichlet system, scaled to 1 at s = 0 like sech. Pairing with
    // it by the trapezoid sum over rows 1..n_s-1 annihilates the weak
    // direction of the mode-one solve exactly.
    std::vector<Eigen::Triplet<double>> tt;
    for (const auto& t : base) tt.emplace_back(t.col(), t.row(), t.value());
    for (int r = 1; r <= m; ++r) {
        const double sech = 1 / std::cosh(g.s[r]);
        tt.emplace_back(r - 1, r - 1, 2 * sech * sech - 1);
    }
    Eigen::SparseMatrix<double> At(m, m);
    At.setFromTriplets(tt.begin(), tt.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> adj(At);
    if (adj.info() != Eigen::Success) throw Error(ErrorCode::internal, "mode 1 adjoint system is singular");
    Eigen::VectorXd left(m);
    for (int r = 1; r <= m; ++r) left(r - 1) = 1 / std::cosh(g.s[r]);
    for (int it = 0; it < 4; ++it) left = adj.solve(left).normalized();
    Profile prof = Profile::Zero(g.rows());
    prof.segment(1, m) = left / left(g.center() - 1);
    kernel_profile_ = prof;
    k_x_ = g.sample([](double, double t) { return std::cos(t); }).array().colwise() * prof.array();
    k_y_ = g.sample([](double, double t) { return std::sin(t); }).array().colwise() * prof.array();
    gram_ << pairing(w_x_, Axis::x), pairing(w_y_, Axis::x), pairing(w_x_, Axis::y), pairing(w_y_, Axis::y);
    if (std::abs(gram_.determinant()) < 1e-8) throw Error(ErrorCode::internal, "singular kernel pairing matrix");
}

double LinearSolver::pairing(const GridFn& f, Axis a) const {
    if (!grid_.same_shape(f)) throw Error(ErrorCode::grid_mismatch, "pairing");
    return f.cwiseProduct(kappa(a)).sum() * grid_.h * (2 * M_PI / grid_.n_theta);
}

Orthogonalized LinearSolver::orthogonalize(const GridFn& ring) const {
    const Eigen::Vector2d p(pairing(ring, Axis::x), pairing(ring, Axis::y));
    const Eigen::Vector2d b = gram_.lu().solve(p);
    return {ring - b(0) * w_x_ - b(1) * w_y_, b(0), b(1)};
}

GridFn LinearSolver::invert_perp(const GridFn& perp) const {
    if (!grid_.same_shape(perp)) throw Error(ErrorCode::grid_mismatch, "invert_perp");
    const int n = grid_.n_s, nt = grid_.n_theta;
    const Eigen::MatrixXcd c = theta_forward(perp);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(c.rows(), c.cols());
    parallel_for(nt / 2, [&](int idx) {
        const int k = idx + 1;
        const Eigen::VectorXd re = c.col(k).segment(1, n - 1).real();
        const Eigen::VectorXd im = c.col(k).segment(1, n - 1).imag();
        const Eigen::VectorXd xr = modes_[k]->solve(re);
        const Eigen::VectorXd xi = modes_[k]->solve(im);
        for (int r = 1; r < n; ++r) {
            const std::complex<double> v(xr(r - 1), xi(r - 1));
            out(r, k) = v;
            if (k != nt - k) out(r, nt - k) = std::conj(v);
        }
    });
    return theta_inverse(out);
}

LinearSolution LinearSolver::linear_solve(const GridFn& E) const {
    if (!grid_.same_shape(E)) throw Error(ErrorCode::grid_mismatch, "linear_solve");
    const MeridianSplit split = meridian_split(E);
    const Orthogonalized orth = orthogonalize(split.ring);
    LinearSolution sol;
    sol.v = invert_perp(orth.perp);
    sol.v.colwise() += mean_(split.mean);
    sol.b_x = orth.b_x;
    sol.b_y = orth.b_y;
    return sol;
}

double LinearSolver::residual(const GridFn& E, const LinearSolution& sol) const {
    const GridFn r = stability_apply(grid_, sol.v) - (E - sol.b_x * w_x_ - sol.b_y * w_y_);
    return sup_norm(r.middleRows(1, grid_.n_s - 1));
}

FixedPointProblem::FixedPointProblem(const BentSurface& surface, const LinearSolver& solver)
    : surface_(surface), solver_(solver) {
    const CylinderGrid& g = surface.grid();
    const double ell = surface.ell();
    const CutoffSpec inner_cut{std::acosh(ell / 2), std::acosh(ell / 4)};
    const CutoffSpec outer_cut{std::acosh(ell), std::acosh(ell / 2)};
    psi_ = g.sample_s([&](double s) { return cutoff(inner_cut, std::abs(s)); });
    psi_wide_ = g.sample_s([&](double s) { return cutoff(outer_cut, std::abs(s)); });
    for (int i = 0; i < g.rows(); ++i)
        if (std::cosh(g.s[i]) <= ell / 4) interior_rows_.push_back(i);
}

GridFn FixedPointProblem::graph_function(const SolverState& st) const {
    GridFn u = st.v.array().colwise() * psi_.array();
    u += st.b_x * solver_.u(Axis::x) + st.b_y * solver_.u(Axis::y);
    return u;
}

GridFn FixedPointProblem::interior_mask() const {
    GridFn m = surface_.grid().zeros();
    for (int i : interior_rows_) m.row(i).setOnes();
    return m;
}

double FixedPointProblem::interior_sup(const GridFn& q) const {
    double r = 0;
    for (int i : interior_rows_) r = std::max(r, q.row(i).cwiseAbs().maxCoeff());
    return r;
}

StepResult FixedPointProblem::psi_step(const SolverState& st) const {
    const GridFn q = surface_.q_operator(graph_function(st));
    const GridFn E = q.array().colwise() * psi_wide_.array();
    const LinearSolution sol = solver_.linear_solve(E);
    StepResult out;
    out.interior_residual = interior_sup(q);
    out.next.v = GridFn(st.v.array().colwise() * psi_.array()) - sol.v;
    out.next.b_x = st.b_x - sol.b_x;
    out.next.b_y = st.b_y - sol.b_y;
    out.update_norm = std::max({sup_norm(out.next.v - st.v), std::abs(out.next.b_x - st.b_x),
                                std::abs(out.next.b_y - st.b_y)});
    return out;
}

void check_parameter_gate(const SpiralSpec& spec, double ell, double eps1) {
    if (!(ell > 16))
        throw Error(ErrorCode::rejected_parameters, "ell must exceed 16 (got " + std::to_string(ell) + ")");
    const double gate = spec.delta * (1 + spec.rho0 + std::abs(spec.xi)) * ell;
    if (!(gate <= eps1))
        throw Error(ErrorCode::rejected_parameters, "delta (1 + |R| + |xi|) ell = " + std::to_string(gate) +
                                                        " exceeds eps1 = " + std::to_string(eps1));
}

SolveResult solve_minimal(const SpiralSpec& spec, double ell, int n_s, int n_theta, const SolveOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    check_parameter_gate(spec, ell, opt.eps1);
    if (!(opt.damping > 0 && opt.damping <= 1))
        throw Error(ErrorCode::rejected_parameters, "damping must lie in (0, 1]");
    if (opt.anderson_depth < 0) throw Error(ErrorCode::rejected_parameters, "anderson_depth must be non-negative");

    SolveResult res;
    res.surface = std::make_shared<BentSurface>(spec, ell, n_s, n_theta);
    BentSurface& surf = *res.surface;
    const CylinderGrid& g = surf.grid();
    const U0Profile u0 = solve_u0(spec.delta * spec.xi, g);
    surf.set_u0(u0);
    const LinearSolver solver(g);
    const FixedPointProblem fp(surf, solver);

    SolveReport& rep = res.report;
    rep.u0_residual = u0.residual;
    rep.u0_c_hat = u0.c_hat;
    const int N = int(g.rows() * g.cols());
    const auto pack = [N](const SolverState& x) {
        Eigen::VectorXd out(N + 2);
        out.head(N) = Eigen::Map<const Eigen::VectorXd>(x.v.data(), N);
        out(N) = x.b_x;
        out(N + 1) = x.b_y;
        return out;
    };
    const auto unpack = [&](const Eigen::VectorXd& x) {
        SolverState out{g.zeros(), x(N), x(N + 1)};
        Eigen::Map<Eigen::VectorXd>(out.v.data(), N) = x.head(N);
        return out;
    };

    // Anderson mixing over the last `depth` differences; depth 0 is damped
    // Picard iteration with lambda adapted to the residual.
    Eigen::VectorXd x = pack({g.zeros(), 0, 0});
    std::deque<Eigen::VectorXd> xs, fs;
    double lambda = opt.damping, prev = INFINITY;
    Eigen::VectorXd last_good = x;
    for (int it = 0;; ++it) {
        StepResult step;
        try {
            step = fp.psi_step(unpack(x));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::graph_too_large || xs.empty()) throw;
            x = last_good;
            xs.clear();
            fs.clear();
            lambda = std::max(lambda / 2, 1.0 / 64);
            continue;
        }
        last_good = x;
        rep.residual_history.push_back(step.interior_residual);
        rep.update_history.push_back(step.update_norm);
        if (step.update_norm <= opt.tol && step.interior_residual <= opt.tol) {
            res.converged = true;
            break;
        }
        if (it >= opt.max_iter) break;
        const Eigen::VectorXd f = pack(step.next) - x;
        if (opt.anderson_depth == 0) {
            if (step.interior_residual > prev) lambda = std::max(lambda / 2, 1.0 / 64);
            else lambda = std::min(opt.damping, lambda * 1.5);
            prev = step.interior_residual;
            x += lambda * f;
        } else {
            xs.push_back(x);
            fs.push_back(f);
            if (int(xs.size()) > opt.anderson_depth + 1) {
                xs.pop_front();
                fs.pop_front();
            }
            Eigen::VectorXd next = x + lambda * f;
            const int m = int(xs.size()) - 1;
            if (m > 0) {
                Eigen::MatrixXd dX(N + 2, m), dF(N + 2, m);
                for (int k = 0; k < m; ++k) {
                    dX.col(k) = xs[k + 1] - xs[k];
                    dF.col(k) = fs[k + 1] - fs[k];
                }
                const Eigen::VectorXd gamma = dF.colPivHouseholderQr().solve(f);
                next -= (dX + lambda * dF) * gamma;
            }
            x = next;
        }
        rep.damping_history.push_back(lambda);
        rep.iterations = it + 1;
    }
    const SolverState st = unpack(x);
    res.state = st;
    res.graph = fp.graph_function(st);

    rep.final_interior_residual = rep.residual_history.back();
    rep.converged = res.converged;
    rep.b_x = st.b_x;
    rep.b_y = st.b_y;
    rep.norm_v = weighted_norm(g, st.v, 0.75, 0);
    rep.norm_v_c2 = weighted_norm(g, st.v, 0.75, 2);
    const double unit = spec.delta * std::pow(ell, 0.25) * spec.rho0;
    rep.zeta = unit > 0 ? std::max({rep.norm_v_c2, std::abs(st.b_x), std::abs(st.b_y)}) / unit : 0;
    rep.self_similarity_defect = check_self_similarity(surf, res.graph);
    if (opt.check_embedding) {
        const EmbedResult emb = check_embedded(surf, res.graph, res.converged, opt.embed_pairs, opt.seed);
        rep.embed_verdict = emb.verdict;
        rep.embed_min_ratio = emb.sampled.min_ratio;
    }
    rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace spiralforge
