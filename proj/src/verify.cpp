#include "spiralforge/verify.hpp"
#include "spiralforge/errors.hpp"
#include "spiralforge/tube.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_map>

namespace spiralforge {

const char* verdict_name(EmbedVerdict v) {
    switch (v) {
    case EmbedVerdict::certified: return "certified";
    case EmbedVerdict::sampled_ok: return "sampled-ok";
    case EmbedVerdict::not_certified: return "not-certified";
    }
    return "unknown";
}

double check_self_similarity(const BentSurface& surface, const GridFn& u) {
    const CylinderGrid& g = surface.grid();
    if (!g.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "check_self_similarity");
    const SpiralSpec& spec = surface.spec();
    const double lam = spec.sim_scale();
    const Mat3 Q = spec.sim_rotation();
    const Vec3 t = spec.sim_translation();
    std::vector<double> row_max(g.rows(), 0.0);
    parallel_for(g.rows(), [&](int i) {
        for (int j = 0; j < g.cols(); ++j) {
            const double w = u(i, j) + surface.u0()(i);
            const Vec3 p0 = surface.graph_point(i, j, w, 0);
            const Vec3 p1 = surface.graph_point(i, j, w, 1);
            const double d = (p1 - (lam * (Q * p0) + t)).norm() * std::exp(-spec.delta * spec.xi * g.theta[j]);
            row_max[i] = std::max(row_max[i], d);
        }
    });
    return *std::max_element(row_max.begin(), row_max.end());
}

SampleSheet surface_sheet(const BentSurface& surface, const GridFn& u, int max_rows, int periods) {
    const CylinderGrid& g = surface.grid();
    if (!g.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "surface_sheet");
    const int R = std::min(std::max(max_rows, 2), g.rows());
    std::vector<int> rows(R);
    for (int k = 0; k < R; ++k) rows[k] = int(std::lround(double(k) * g.n_s / (R - 1)));
    SampleSheet sh;
    sh.rows = R;
    sh.cols = g.cols() * periods;
    const int first_turn = -(periods / 2);
    for (int i : rows) sh.s.push_back(g.s[i]);
    for (int t = 0; t < periods; ++t)
        for (int j = 0; j < g.cols(); ++j) sh.theta.push_back(g.theta[j] + 2 * M_PI * (first_turn + t));
    sh.points.resize(std::size_t(sh.rows) * sh.cols);
    parallel_for(R, [&](int r) {
        const int i = rows[r];
        for (int t = 0; t < periods; ++t)
            for (int j = 0; j < g.cols(); ++j)
                sh.points[std::size_t(r) * sh.cols + t * g.cols() + j] =
                    surface.graph_point(i, j, u(i, j) + surface.u0()(i), first_turn + t);
    });
    return sh;
}

SampleSheet figure_eight_sheet(int rows, int cols) {
    SampleSheet sh;
    sh.rows = rows;
    sh.cols = cols;
    sh.periodic = true;
    for (int i = 0; i < rows; ++i) sh.s.push_back(-1 + 2.0 * i / (rows - 1));
    for (int j = 0; j < cols; ++j) sh.theta.push_back(-M_PI + 2 * M_PI * j / cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double th = sh.theta[j];
            sh.points.emplace_back(std::sin(th), std::sin(th) * std::cos(th), sh.s[i]);
        }
    return sh;
}

namespace {

struct Cell {
    long long x, y, z;
    bool operator==(const Cell& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
    std::size_t operator()(const Cell& c) const {
        std::uint64_t h = std::uint64_t(c.x) * 0x9E3779B97F4A7C15ULL;
        h ^= std::uint64_t(c.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
        h ^= std::uint64_t(c.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
        return std::size_t(h);
    }
};

Cell cell_of(const Vec3& p, double size) {
    return {(long long)std::floor(p.x() / size), (long long)std::floor(p.y() / size),
            (long long)std::floor(p.z() / size)};
}

struct Candidate {
    double ratio = std::numeric_limits<double>::infinity();
    int p = -1, q = -1;
};

}  // namespace

CollisionReport find_collision(const SampleSheet& sh, int n_random, std::uint64_t seed, int exclusion) {
    const int n = sh.rows * sh.cols;
    auto near = [&](int p, int q) {
        const int di = std::abs(p / sh.cols - q / sh.cols);
        int dj = std::abs(p % sh.cols - q % sh.cols);
        if (sh.periodic) dj = std::min(dj, sh.cols - dj);
        return di <= exclusion && dj <= exclusion;
    };
    std::vector<double> radius(n, 0.0);
    for (int i = 0; i < sh.rows; ++i)
        for (int j = 0; j < sh.cols; ++j) {
            double e = 0;
            auto take = [&](int a, int b) {
                if (a < 0 || a >= sh.rows) return;
                if (sh.periodic) b = (b + sh.cols) % sh.cols;
                if (b < 0 || b >= sh.cols) return;
                e = std::max(e, (sh.at(a, b) - sh.at(i, j)).norm());
            };
            take(i - 1, j);
            take(i + 1, j);
            take(i, j - 1);
            take(i, j + 1);
            radius[std::size_t(i) * sh.cols + j] = 0.5 * e;
        }

    std::vector<int> level(n);
    std::unordered_map<int, std::unordered_map<Cell, std::vector<int>, CellHash>> tables;
    for (int p = 0; p < n; ++p) {
        level[p] = int(std::ceil(std::log2(std::max(radius[p], 1e-300))));
        tables[level[p]];
    }
    for (auto& [lv, table] : tables) {
        const double size = std::ldexp(1.0, lv);
        for (int p = 0; p < n; ++p) table[cell_of(sh.points[p], size)].push_back(p);
    }

    auto ratio = [&](int p, int q) {
        const double r = std::max(radius[p], radius[q]);
        const double d = (sh.points[p] - sh.points[q]).norm();
        return r > 0 ? d / r : std::numeric_limits<double>::infinity();
    };

    const int blocks = 64;
    std::vector<Candidate> best(blocks);
    std::vector<long long> counts(blocks, 0);
    parallel_for(blocks, [&](int b) {
        for (int p = b; p < n; p += blocks) {
            const auto& table = tables.at(level[p]);
            const Cell c = cell_of(sh.points[p], std::ldexp(1.0, level[p]));
            for (long long dx = -1; dx <= 1; ++dx)
                for (long long dy = -1; dy <= 1; ++dy)
                    for (long long dz = -1; dz <= 1; ++dz) {
                        const auto it = table.find({c.x + dx, c.y + dy, c.z + dz});
                        if (it == table.end()) continue;
                        for (int q : it->second) {
                            if (q == p || near(p, q)) continue;
                            ++counts[b];
                            const double r = ratio(p, q);
                            if (r < best[b].ratio) best[b] = {r, p, q};
                        }
                    }
        }
    });

    Candidate worst;
    CollisionReport rep;
    for (int b = 0; b < blocks; ++b) {
        rep.pairs_tested += counts[b];
        if (best[b].ratio < worst.ratio) worst = best[b];
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int k = 0; k < n_random; ++k) {
        const int p = pick(rng), q = pick(rng);
        if (p == q || near(p, q)) continue;
        ++rep.pairs_tested;
        const double r = ratio(p, q);
        if (r < worst.ratio) worst = {r, p, q};
    }
    rep.min_ratio = worst.ratio;
    rep.collision = worst.ratio < 1;
    if (worst.p >= 0) {
        rep.first = {sh.s[worst.p / sh.cols], sh.theta[worst.p % sh.cols]};
        rep.second = {sh.s[worst.q / sh.cols], sh.theta[worst.q % sh.cols]};
    }
    return rep;
}

EmbedResult check_embedded(const BentSurface& surface, const GridFn& u, bool converged, int n_random,
                           std::uint64_t seed) {
    EmbedResult out;
    try {
        out.formula_ok = surface.ell() <= max_embed_ell(surface.spec());
    } catch (const Error&) {
        out.formula_ok = false;
    }
    out.sampled = find_collision(surface_sheet(surface, u), n_random, seed);
    if (out.formula_ok && converged) out.verdict = EmbedVerdict::certified;
    else if (!out.sampled.collision) out.verdict = EmbedVerdict::sampled_ok;
    else out.verdict = EmbedVerdict::not_certified;
    return out;
}

double weighted_norm(const CylinderGrid& g, const GridFn& u, double rho, int k) {
    if (!g.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "weighted_norm");
    GridFn total = u.cwiseAbs();
    if (k >= 1) {
        const GridFn us = d_s(g, u);
        total += us.cwiseAbs() + d_theta(u).cwiseAbs();
        if (k >= 2) total += d_ss(g, u).cwiseAbs() + d_theta(us).cwiseAbs() + d_thetatheta(u).cwiseAbs();
    }
    double out = 0;
    for (int i = 0; i < g.rows(); ++i)
        out = std::max(out, std::pow(std::cosh(g.s[i]), -rho) * total.row(i).maxCoeff());
    return out;
}

Mesh build_mesh(const BentSurface& surface, const GridFn& u, int res_s, int res_theta, int periods) {
    const CylinderGrid& g = surface.grid();
    if (!g.same_shape(u)) throw Error(ErrorCode::grid_mismatch, "build_mesh");
    if (res_s < 2 || res_s > g.rows() || res_theta < 1 || res_theta > g.cols() || periods < 1)
        throw Error(ErrorCode::grid_mismatch, "mesh resolution exceeds the solver grid");
    const SpiralSpec& spec = surface.spec();
    const GridFn q = surface.q_operator(u);
    std::vector<int> rows(res_s), cols(res_theta);
    for (int k = 0; k < res_s; ++k) rows[k] = int(std::lround(double(k) * g.n_s / (res_s - 1)));
    for (int k = 0; k < res_theta; ++k) cols[k] = k * g.n_theta / res_theta;
    const int C = res_theta * periods;
    Mesh m;
    for (int r = 0; r < res_s; ++r) {
        const int i = rows[r];
        const double ch = std::cosh(g.s[i]);
        for (int t = 0; t < periods; ++t)
            for (int j : cols) {
                const double w = u(i, j) + surface.u0()(i);
                const double th = g.theta[j] + 2 * M_PI * t;
                m.vertices.push_back(surface.graph_point(i, j, w, t));
                m.s.push_back(g.s[i]);
                m.theta.push_back(th);
                m.h_abs.push_back(std::abs(q(i, j)) / (std::exp(spec.delta * spec.xi * th) * ch * ch));
                m.u.push_back(w);
            }
    }
    for (int r = 0; r + 1 < res_s; ++r)
        for (int c = 0; c + 1 < C; ++c) {
            const int a = r * C + c, b = (r + 1) * C + c;
            m.faces.push_back({a, b, b + 1});
            m.faces.push_back({a, b + 1, a + 1});
        }
    return m;
}

namespace {

struct File {
    std::FILE* f;
    std::string path;
    File(const std::string& p) : f(std::fopen(p.c_str(), "w")), path(p) {
        if (!f) throw Error(ErrorCode::io, "cannot open " + p + " for writing");
    }
    ~File() {
        if (f) std::fclose(f);
    }
    void close() {
        const bool bad = std::ferror(f) != 0;
        const int rc = std::fclose(f);
        f = nullptr;
        if (bad || rc != 0) throw Error(ErrorCode::io, "write failed for " + path);
    }
};

}  // namespace

void write_obj(const Mesh& mesh, const std::string& path) {
    File out(path);
    for (const Vec3& v : mesh.vertices) std::fprintf(out.f, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    for (const auto& f : mesh.faces) std::fprintf(out.f, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out.close();
}

void write_csv(const Mesh& mesh, const std::string& path) {
    File out(path);
    std::fprintf(out.f, "s,theta,H_abs,u\n");
    for (std::size_t k = 0; k < mesh.vertices.size(); ++k)
        std::fprintf(out.f, "%.17g,%.17g,%.17g,%.17g\n", mesh.s[k], mesh.theta[k], mesh.h_abs[k], mesh.u[k]);
    out.close();
}

std::vector<Vec3> read_obj_vertices(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path + " for reading");
    std::vector<Vec3> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.size() < 2 || line[0] != 'v' || line[1] != ' ') continue;
        const char* p = line.c_str() + 2;
        char* end = nullptr;
        Vec3 v;
        for (int k = 0; k < 3; ++k) {
            v[k] = std::strtod(p, &end);
            if (end == p) throw Error(ErrorCode::io, "malformed vertex in " + path);
            p = end;
        }
        out.push_back(v);
    }
    return out;
}

Mesh export_mesh(const BentSurface& surface, const GridFn& u, const std::string& stem, int res_s, int res_theta,
                 int periods) {
    Mesh m = build_mesh(surface, u, res_s, res_theta, periods);
    write_obj(m, stem + ".obj");
    write_csv(m, stem + ".csv");
    return m;
}

}  // namespace spiralforge
