#include "spiralforge/config.hpp"
#include "spiralforge/errors.hpp"
#include "spiralforge/grid.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace spiralforge {

namespace {

namespace pt = boost::property_tree;

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size() || !std::isfinite(x))
        throw Error(ErrorCode::rejected_parameters, key + ": not a finite number: '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw Error(ErrorCode::rejected_parameters, key + ": not an integer: '" + v + "'");
    return x;
}

struct Parser {
    RunConfig cfg;
    std::array<std::optional<double>, 3> r;
    bool kappa_set = false, tau_set = false;
    std::set<std::string> given;

    struct Key {
        const char* section;
        std::function<void(const std::string&)> set;
    };
    std::map<std::string, Key> keys;

    Parser() {
        auto dbl = [this](const char* name, double& field) {
            return [this, name, &field](const std::string& v) { field = to_double(name, v); };
        };
        auto num = [this](const char* name, int& field) {
            return [name, &field](const std::string& v) {
                const long long x = to_int(name, v);
                if (x < INT32_MIN || x > INT32_MAX) throw Error(ErrorCode::rejected_parameters, std::string(name) + ": out of range");
                field = int(x);
            };
        };
        keys = {
            {"kappa0", {"curve", [this](const std::string& v) { cfg.kappa0 = to_double("kappa0", v); kappa_set = true; }}},
            {"tau0", {"curve", [this](const std::string& v) { cfg.tau0 = to_double("tau0", v); tau_set = true; }}},
            {"xi", {"curve", dbl("xi", cfg.xi)}},
            {"delta", {"curve", dbl("delta", cfg.delta)}},
            {"r12", {"curve", [this](const std::string& v) { r[0] = to_double("r12", v); }}},
            {"r13", {"curve", [this](const std::string& v) { r[1] = to_double("r13", v); }}},
            {"r23", {"curve", [this](const std::string& v) { r[2] = to_double("r23", v); }}},
            {"ell", {"domain", dbl("ell", cfg.ell)}},
            {"n_s", {"domain", num("n_s", cfg.n_s)}},
            {"n_theta", {"domain", num("n_theta", cfg.n_theta)}},
            {"tol", {"solver", dbl("tol", cfg.tol)}},
            {"max_iter", {"solver", num("max_iter", cfg.max_iter)}},
            {"damping", {"solver", dbl("damping", cfg.damping)}},
            {"anderson_depth", {"solver", num("anderson_depth", cfg.anderson_depth)}},
            {"eps1", {"solver", dbl("eps1", cfg.eps1)}},
            {"seed", {"run", [this](const std::string& v) {
                          const long long s = to_int("seed", v);
                          if (s < 0) throw Error(ErrorCode::rejected_parameters, "seed must be non-negative");
                          cfg.seed = std::uint64_t(s);
                      }}},
            {"output_dir", {"run", [this](const std::string& v) { cfg.output_dir = v; }}},
            {"embed_pairs", {"run", num("embed_pairs", cfg.embed_pairs)}},
            {"res_s", {"export", num("res_s", cfg.mesh_res_s)}},
            {"res_theta", {"export", num("res_theta", cfg.mesh_res_theta)}},
            {"periods", {"export", num("periods", cfg.mesh_periods)}},
        };
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        const auto it = keys.find(key);
        if (it == keys.end()) throw Error(ErrorCode::rejected_parameters, "unknown key '" + key + "'");
        if (!section.empty() && section != it->second.section)
            throw Error(ErrorCode::rejected_parameters, "key '" + key + "' belongs to section [" +
                                                            it->second.section + "], not [" + section + "]");
        it->second.set(value);
        given.insert(key);
    }

    bool is_section(const std::string& name) const {
        for (const auto& [k, v] : keys)
            if (name == v.section) return true;
        return false;
    }
};

ParsedConfig parse_stream(std::istream& in, const std::string& origin,
                          const std::map<std::string, std::string>& overrides) {
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::rejected_parameters, origin + ": " + e.what());
    }
    Parser p;
    for (const auto& [name, node] : tree) {
        if (!node.empty()) {
            if (!p.is_section(name)) throw Error(ErrorCode::rejected_parameters, "unknown section [" + name + "]");
            for (const auto& [key, leaf] : node) p.set(name, key, leaf.data());
        } else if (!(p.is_section(name) && node.data().empty())) {
            p.set("", name, node.data());
        }
    }
    for (const auto& [key, value] : overrides) p.set("", key, value);

    ParsedConfig out;
    const int given = int(p.r[0].has_value()) + int(p.r[1].has_value()) + int(p.r[2].has_value());
    if (given != 0 && given != 3)
        throw Error(ErrorCode::rejected_parameters, "an explicit generator needs all of r12, r13, r23");
    if (given == 3) {
        p.cfg.r_entries = std::array<double, 3>{*p.r[0], *p.r[1], *p.r[2]};
        MatrixInvariants inv{};
        try {
            inv = matrix_invariants(generator_of(p.cfg));
        } catch (const Error& e) {
            throw Error(ErrorCode::rejected_parameters, std::string("explicit generator: ") + e.what());
        }
        auto differs = [](double x, double y) { return std::abs(x - y) > 1e-9 * std::max(1.0, std::abs(y)); };
        if ((p.kappa_set && differs(inv.kappa0, p.cfg.kappa0)) || (p.tau_set && differs(inv.tau0, p.cfg.tau0))) {
            std::ostringstream w;
            w.precision(12);
            w << "explicit generator has kappa0 = " << inv.kappa0 << ", tau0 = " << inv.tau0
              << "; declared kappa0 = " << p.cfg.kappa0 << ", tau0 = " << p.cfg.tau0 << " are ignored";
            out.warnings.push_back(w.str());
        }
        p.cfg.kappa0 = inv.kappa0;
        p.cfg.tau0 = inv.tau0;
    }
    // Unset mesh sizes follow a coarse grid down.
    if (!p.given.count("res_s")) p.cfg.mesh_res_s = std::min(p.cfg.mesh_res_s, p.cfg.n_s + 1);
    if (!p.given.count("res_theta")) p.cfg.mesh_res_theta = std::min(p.cfg.mesh_res_theta, p.cfg.n_theta);
    validate(p.cfg);
    out.config = p.cfg;
    return out;
}

}  // namespace

ParsedConfig parse_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    if (path.empty()) {
        std::istringstream empty;
        return parse_stream(empty, "<defaults>", overrides);
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open config " + path);
    return parse_stream(in, path, overrides);
}

ParsedConfig parse_config_text(const std::string& text, const std::map<std::string, std::string>& overrides) {
    std::istringstream in(text);
    return parse_stream(in, "<text>", overrides);
}

void validate(const RunConfig& c) {
    auto reject = [](const std::string& m) { throw Error(ErrorCode::rejected_parameters, m); };
    auto str = [](double x) {
        std::ostringstream o;
        o << x;
        return o.str();
    };
    if (!(c.kappa0 > 0)) reject("kappa0 > 0 is required (got " + str(c.kappa0) + ")");
    if (!(c.delta > 0)) reject("delta > 0 is required (got " + str(c.delta) + ")");
    if (!(c.ell > 16)) reject("ell > 16 is required (got " + str(c.ell) + ")");
    if (!is_power_of_two(c.n_theta) || c.n_theta < 4)
        reject("n_theta must be a power of two, at least 4 (got " + std::to_string(c.n_theta) + ")");
    if (c.n_s < 8 || c.n_s % 2) reject("n_s must be even and at least 8 (got " + std::to_string(c.n_s) + ")");
    if (!(c.tol > 0)) reject("tol must be positive");
    if (c.max_iter < 1) reject("max_iter must be at least 1");
    if (!(c.damping > 0 && c.damping <= 1)) reject("damping must lie in (0, 1]");
    if (c.anderson_depth < 0 || c.anderson_depth > 20) reject("anderson_depth must lie in [0, 20]");
    if (!(c.eps1 > 0)) reject("eps1 must be positive");
    if (c.embed_pairs < 0) reject("embed_pairs must be non-negative");
    if (c.mesh_res_s < 2 || c.mesh_res_s > c.n_s + 1) reject("res_s must lie in [2, n_s + 1]");
    if (c.mesh_res_theta < 1 || c.mesh_res_theta > c.n_theta) reject("res_theta must lie in [1, n_theta]");
    if (c.mesh_periods < 1) reject("periods must be at least 1");
    if (c.output_dir.empty()) reject("output_dir must not be empty");
}

Mat3 generator_of(const RunConfig& c) {
    if (!c.r_entries) return frenet_generator(c.kappa0, c.tau0);
    const auto& r = *c.r_entries;
    Mat3 R;
    R << 0, r[0], r[1], -r[0], 0, r[2], -r[1], -r[2], 0;
    return R;
}

SpiralSpec spec_of(const RunConfig& c) { return make_spiral_spec(generator_of(c), c.delta, c.xi); }

std::string to_ini(const RunConfig& c) {
    std::ostringstream o;
    o.precision(17);
    o << "[curve]\nkappa0 = " << c.kappa0 << "\ntau0 = " << c.tau0 << "\nxi = " << c.xi << "\ndelta = " << c.delta
      << "\n";
    if (c.r_entries)
        o << "r12 = " << (*c.r_entries)[0] << "\nr13 = " << (*c.r_entries)[1] << "\nr23 = " << (*c.r_entries)[2]
          << "\n";
    o << "\n[domain]\nell = " << c.ell << "\nn_s = " << c.n_s << "\nn_theta = " << c.n_theta << "\n";
    o << "\n[solver]\ntol = " << c.tol << "\nmax_iter = " << c.max_iter << "\ndamping = " << c.damping
      << "\nanderson_depth = " << c.anderson_depth << "\neps1 = " << c.eps1 << "\n";
    o << "\n[run]\nseed = " << c.seed << "\noutput_dir = " << c.output_dir << "\nembed_pairs = " << c.embed_pairs
      << "\n";
    o << "\n[export]\nres_s = " << c.mesh_res_s << "\nres_theta = " << c.mesh_res_theta
      << "\nperiods = " << c.mesh_periods << "\n";
    return o.str();
}

}  // namespace spiralforge
