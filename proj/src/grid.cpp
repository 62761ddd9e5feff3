#include "spiralforge/grid.hpp"
#include "spiralforge/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

namespace spiralforge {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

CylinderGrid make_grid(int n_s, int n_theta, double s_max) {
    if (n_s < 8 || n_s % 2 != 0) throw Error(ErrorCode::grid_mismatch, "n_s must be even and at least 8");
    if (!is_power_of_two(n_theta) || n_theta < 4)
        throw Error(ErrorCode::grid_mismatch, "n_theta must be a power of two, at least 4");
    if (!(s_max > 0)) throw Error(ErrorCode::grid_mismatch, "s_max must be positive");
    CylinderGrid g;
    g.n_s = n_s;
    g.n_theta = n_theta;
    g.s_max = s_max;
    g.h = 2 * s_max / n_s;
    g.s.resize(n_s + 1);
    for (int i = 0; i <= n_s; ++i) g.s[i] = -s_max + i * g.h;
    g.s[n_s / 2] = 0.0;
    g.theta.resize(n_theta);
    for (int j = 0; j < n_theta; ++j) g.theta[j] = -M_PI + 2 * M_PI * j / n_theta;
    return g;
}

GridFn CylinderGrid::sample(const std::function<double(double, double)>& f) const {
    GridFn u(rows(), cols());
    for (int i = 0; i < rows(); ++i)
        for (int j = 0; j < cols(); ++j) u(i, j) = f(s[i], theta[j]);
    return u;
}

Profile CylinderGrid::sample_s(const std::function<double(double)>& f) const {
    Profile u(rows());
    for (int i = 0; i < rows(); ++i) u(i) = f(s[i]);
    return u;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_row(Triplets& t, int row, int first, std::initializer_list<double> c, double scale) {
    int k = first;
    for (double v : c) t.emplace_back(row, k++, v * scale);
}

}  // namespace

Eigen::SparseMatrix<double> first_difference_matrix(int n, double h) {
    const int m = n + 1;
    Triplets t;
    const double sc = 1.0 / (12 * h);
    add_row(t, 0, 0, {-25, 48, -36, 16, -3}, sc);
    add_row(t, 1, 0, {-3, -10, 18, -6, 1}, sc);
    for (int i = 2; i <= n - 2; ++i) add_row(t, i, i - 2, {1, -8, 0, 8, -1}, sc);
    add_row(t, n - 1, n - 4, {-1, 6, -18, 10, 3}, sc);
    add_row(t, n, n - 4, {3, -16, 36, -48, 25}, sc);
    Eigen::SparseMatrix<double> d(m, m);
    d.setFromTriplets(t.begin(), t.end());
    return d;
}

Eigen::SparseMatrix<double> second_difference_matrix(int n, double h) {
    const int m = n + 1;
    Triplets t;
    const double sc = 1.0 / (12 * h * h);
    add_row(t, 0, 0, {45, -154, 214, -156, 61, -10}, sc);
    add_row(t, 1, 0, {10, -15, -4, 14, -6, 1}, sc);
    for (int i = 2; i <= n - 2; ++i) add_row(t, i, i - 2, {-1, 16, -30, 16, -1}, sc);
    add_row(t, n - 1, n - 5, {1, -6, 14, -4, -15, 10}, sc);
    add_row(t, n, n - 5, {-10, 61, -156, 214, -154, 45}, sc);
    Eigen::SparseMatrix<double> d(m, m);
    d.setFromTriplets(t.begin(), t.end());
    return d;
}

Profile d_s(const CylinderGrid& g, const Profile& u) { return first_difference_matrix(g.n_s, g.h) * u; }
Profile d_ss(const CylinderGrid& g, const Profile& u) { return second_difference_matrix(g.n_s, g.h) * u; }

GridFn d_s(const CylinderGrid& g, const GridFn& u) {
    if (!g.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "d_s");
    return first_difference_matrix(g.n_s, g.h) * u;
}

GridFn d_ss(const CylinderGrid& g, const GridFn& u) {
    if (!g.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "d_ss");
    return second_difference_matrix(g.n_s, g.h) * u;
}

int theta_mode(int k, int n) { return k <= n / 2 ? k : k - n; }

Eigen::MatrixXcd theta_forward(const GridFn& u) {
    Eigen::FFT<double> fft;
    const int n = int(u.cols());
    Eigen::MatrixXcd c(u.rows(), n);
    std::vector<double> in(n);
    std::vector<std::complex<double>> out;
    for (int i = 0; i < u.rows(); ++i) {
        for (int j = 0; j < n; ++j) in[j] = u(i, j);
        fft.fwd(out, in);
        for (int j = 0; j < n; ++j) c(i, j) = out[j];
    }
    return c;
}

GridFn theta_inverse(const Eigen::MatrixXcd& c) {
    Eigen::FFT<double> fft;
    const int n = int(c.cols());
    GridFn u(c.rows(), n);
    std::vector<std::complex<double>> in(n);
    std::vector<double> out;
    for (int i = 0; i < c.rows(); ++i) {
        for (int j = 0; j < n; ++j) in[j] = c(i, j);
        fft.inv(out, in);
        for (int j = 0; j < n; ++j) u(i, j) = out[j];
    }
    return u;
}

GridFn d_theta(const GridFn& u) {
    Eigen::MatrixXcd c = theta_forward(u);
    const int n = int(u.cols());
    for (int k = 0; k < n; ++k) {
        const int m = theta_mode(k, n);
        const std::complex<double> f = (2 * k == n) ? 0.0 : std::complex<double>(0, m);
        c.col(k) *= f;
    }
    return theta_inverse(c);
}

GridFn d_thetatheta(const GridFn& u) {
    Eigen::MatrixXcd c = theta_forward(u);
    const int n = int(u.cols());
    for (int k = 0; k < n; ++k) {
        const int m = theta_mode(k, n);
        c.col(k) *= -double(m) * m;
    }
    return theta_inverse(c);
}

double sup_norm(const GridFn& u) { return u.size() ? u.cwiseAbs().maxCoeff() : 0.0; }

std::vector<double> simpson_weights(int n_s, double h) {
    std::vector<double> w(n_s + 1);
    for (int i = 0; i <= n_s; ++i) w[i] = (i == 0 || i == n_s) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (auto& x : w) x *= h / 3;
    return w;
}

double integrate(const CylinderGrid& g, const GridFn& f) {
    if (!g.same_shape(f)) throw Error(ErrorCode::grid_mismatch, "integrate");
    const auto w = simpson_weights(g.n_s, g.h);
    double total = 0;
    for (int i = 0; i < g.rows(); ++i) total += w[i] * f.row(i).sum();
    return total * 2 * M_PI / g.n_theta;
}

double inner(const CylinderGrid& g, const GridFn& a, const GridFn& b) {
    return integrate(g, a.cwiseProduct(b));
}

Profile cumulative_from_center(const CylinderGrid& g, const Profile& f) {
    const int n = g.n_s, c = g.center();
    const double h = g.h;
    auto cell = [&](int k) {
        if (k == 0) return h * (9 * f(0) + 19 * f(1) - 5 * f(2) + f(3)) / 24;
        if (k == n - 1) return h * (f(n - 3) - 5 * f(n - 2) + 19 * f(n - 1) + 9 * f(n)) / 24;
        return h * (-f(k - 1) + 13 * f(k) + 13 * f(k + 1) - f(k + 2)) / 24;
    };
    Profile out = Profile::Zero(n + 1);
    for (int i = c + 1; i <= n; ++i) out(i) = out(i - 1) + cell(i - 1);
    for (int i = c - 1; i >= 0; --i) out(i) = out(i + 1) - cell(i);
    return out;
}

int thread_count() {
    int n = int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("SPIRALFORGE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

void parallel_for(int n, const std::function<void(int)>& body) {
    const int t = std::min(thread_count(), n);
    if (t <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += t) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace spiralforge
