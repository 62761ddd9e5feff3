#include "spiralforge/config.hpp"
#include "spiralforge/errors.hpp"
#include "spiralforge/solver.hpp"
#include "spiralforge/tube.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

namespace spiralforge {

namespace {

using json = nlohmann::ordered_json;

json config_json(const RunConfig& c) {
    json j;
    j["kappa0"] = c.kappa0;
    j["tau0"] = c.tau0;
    j["xi"] = c.xi;
    j["delta"] = c.delta;
    if (c.r_entries) j["r"] = {(*c.r_entries)[0], (*c.r_entries)[1], (*c.r_entries)[2]};
    j["ell"] = c.ell;
    j["n_s"] = c.n_s;
    j["n_theta"] = c.n_theta;
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["damping"] = c.damping;
    j["anderson_depth"] = c.anderson_depth;
    j["eps1"] = c.eps1;
    j["seed"] = c.seed;
    j["embed_pairs"] = c.embed_pairs;
    j["res_s"] = c.mesh_res_s;
    j["res_theta"] = c.mesh_res_theta;
    j["periods"] = c.mesh_periods;
    j["output_dir"] = c.output_dir;
    return j;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json embed_bound_json(const SpiralSpec& spec) {
    try {
        return max_embed_ell(spec);
    } catch (const Error&) {
        return nullptr;
    }
}

json report_json(const RunConfig& c, const SpiralSpec& spec, const SolveReport& r) {
    json j;
    j["config"] = config_json(c);
    json d;
    d["rho0"] = spec.rho0;
    d["gate"] = spec.delta * (1 + spec.rho0 + std::abs(spec.xi)) * c.ell;
    d["max_embed_ell"] = embed_bound_json(spec);
    j["derived"] = d;
    json s;
    s["converged"] = r.converged;
    s["iterations"] = r.iterations;
    s["final_interior_residual"] = r.final_interior_residual;
    s["residual_history"] = r.residual_history;
    s["update_history"] = r.update_history;
    s["damping_history"] = r.damping_history;
    s["b_x"] = r.b_x;
    s["b_y"] = r.b_y;
    s["norm_v"] = r.norm_v;
    s["norm_v_c2"] = r.norm_v_c2;
    s["zeta"] = r.zeta;
    s["embed_verdict"] = verdict_name(r.embed_verdict);
    s["embed_min_ratio"] = finite_or_null(r.embed_min_ratio);
    s["self_similarity_defect"] = r.self_similarity_defect;
    s["u0_residual"] = r.u0_residual;
    s["u0_c_hat"] = r.u0_c_hat;
    j["report"] = s;
    return j;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
    out << text;
    out.close();
    if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

SolveResult solve(const RunConfig& c, std::ostream& out, bool embed) {
    validate(c);
    SolveOptions opt;
    opt.tol = c.tol;
    opt.max_iter = c.max_iter;
    opt.damping = c.damping;
    opt.anderson_depth = c.anderson_depth;
    opt.eps1 = c.eps1;
    opt.seed = c.seed;
    opt.embed_pairs = c.embed_pairs;
    opt.check_embedding = embed;
    SolveResult res = solve_minimal(spec_of(c), c.ell, c.n_s, c.n_theta, opt);
    const SolveReport& r = res.report;
    out << std::setprecision(6);
    for (std::size_t k = 0; k < r.residual_history.size(); ++k)
        out << "iter " << k << "  interior sup|Q| " << r.residual_history[k] << "  update " << r.update_history[k]
            << "\n";
    out << (res.converged ? "converged" : "not converged") << " after " << r.iterations << " steps in "
        << r.runtime << " s\n";
    return res;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->code()) {
        case ErrorCode::rejected_parameters:
        case ErrorCode::unsupported_parameter:
        case ErrorCode::invalid_invariants:
        case ErrorCode::degenerate_axis:
        case ErrorCode::grid_mismatch: return 2;
        case ErrorCode::io: return 4;
        default: return 3;
        }
    }
    return 3;
}

int run_spiral(const RunConfig& c, std::ostream& out) {
    validate(c);
    const SpiralSpec spec = spec_of(c);
    const ScaledSpiral sp = invariants_to_spiral(spec.kappa0, spec.tau0, spec.xi);
    const CurveInvariants ci = spiral_invariants(sp.params, 0.0);
    out << std::setprecision(10);
    out << "generator R\n" << spec.R << "\n";
    out << "kappa0 " << spec.kappa0 << "\ntau0 " << spec.tau0 << "\nrho0 " << spec.rho0 << "\nxi " << spec.xi
        << "\ndelta " << spec.delta << "\n";
    out << "spiral a b c " << sp.params.a << " " << sp.params.b << " " << sp.params.c << "  scale " << sp.scale
        << "\n";
    out << "spiral speed/curvature/torsion at t=0 " << ci.speed << " " << ci.curvature << " " << ci.torsion << "\n";
    out << "similarity scale " << spec.sim_scale() << "  rotation angle " << 2 * M_PI * spec.delta * spec.rho0
        << "\n";
    if (spec.has_dilation()) {
        const double alpha = alpha_bound(spec);
        out << "alpha " << alpha << "  tube radius " << tube_radius(spec, alpha) << "  max embed ell "
            << max_embed_ell(spec) << "\n";
    } else {
        out << "no dilation: embeddedness bound unavailable\n";
    }
    out << std::setw(8) << "z" << std::setw(20) << "|gamma(z)|" << std::setw(20) << "axis norm" << std::setw(20)
        << "e^{delta xi z}" << "\n";
    for (int k = -4; k <= 4; ++k) {
        const double z = k * M_PI / 2;
        out << std::setw(8) << z << std::setw(20) << gamma_point(spec, z).norm() << std::setw(20)
            << (spec.has_dilation() ? axis_norm(spec, z) : NAN) << std::setw(20) << std::exp(spec.delta * spec.xi * z)
            << "\n";
    }
    return 0;
}

int run_solve(const RunConfig& c, std::ostream& out) {
    ensure_dir(c.output_dir);
    const SolveResult res = solve(c, out, true);
    const std::string base = c.output_dir + "/";
    write_text(base + "report.json", report_json(c, res.surface->spec(), res.report).dump(2) + "\n");
    write_text(base + "config.ini", to_ini(c));
    export_mesh(*res.surface, res.graph, base + "surface", c.mesh_res_s, c.mesh_res_theta, c.mesh_periods);
    out << "embed verdict " << verdict_name(res.report.embed_verdict) << "\nself-similarity defect "
        << res.report.self_similarity_defect << "\nwrote " << base << "report.json, surface.obj, surface.csv\n";
    return res.converged ? 0 : 3;
}

int run_check_embed(const RunConfig& c, std::ostream& out) {
    ensure_dir(c.output_dir);
    const SolveResult res = solve(c, out, false);
    const EmbedResult e = check_embedded(*res.surface, res.graph, res.converged, c.embed_pairs, c.seed);
    json j;
    j["config"] = config_json(c);
    j["max_embed_ell"] = embed_bound_json(res.surface->spec());
    j["formula_ok"] = e.formula_ok;
    j["verdict"] = verdict_name(e.verdict);
    j["collision"] = e.sampled.collision;
    j["min_ratio"] = finite_or_null(e.sampled.min_ratio);
    j["pairs_tested"] = e.sampled.pairs_tested;
    j["closest_pair"] = {e.sampled.first, e.sampled.second};
    write_text(c.output_dir + "/embed.json", j.dump(2) + "\n");
    out << "verdict " << verdict_name(e.verdict) << "  min ratio " << e.sampled.min_ratio << "  pairs "
        << e.sampled.pairs_tested << "\n";
    if (!res.converged) return 3;
    return e.sampled.collision ? 1 : 0;
}

int run_export(const RunConfig& c, std::ostream& out) {
    ensure_dir(c.output_dir);
    const SolveResult res = solve(c, out, false);
    const Mesh m = export_mesh(*res.surface, res.graph, c.output_dir + "/surface", c.mesh_res_s, c.mesh_res_theta,
                               c.mesh_periods);
    out << "wrote " << m.vertices.size() << " vertices, " << m.faces.size() << " faces\n";
    return res.converged ? 0 : 3;
}

}  // namespace spiralforge
