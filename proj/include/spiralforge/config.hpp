#pragma once

#include "spiralforge/spiral.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace spiralforge {

struct RunConfig {
    double kappa0 = 1, tau0 = 0, xi = 1, delta = 1e-3, ell = 32;
    int n_s = 1024, n_theta = 64;
    double tol = 1e-8;
    int max_iter = 50;
    double damping = 1.0;
    int anderson_depth = 5;
    double eps1 = 0.25;
    std::uint64_t seed = 1;
    int embed_pairs = 10000;
    int mesh_res_s = 64, mesh_res_theta = 64, mesh_periods = 1;
    std::string output_dir = "spiralforge_out";
    // Off-diagonal entries R12, R13, R23 of an explicit generator.
    std::optional<std::array<double, 3>> r_entries;
};

struct ParsedConfig {
    RunConfig config;
    std::vector<std::string> warnings;
};

// Reads an INI file (may be empty for defaults), then applies overrides.
// Keys may sit at top level or in their section:
//   [curve] kappa0 tau0 xi delta r12 r13 r23
//   [domain] ell n_s n_theta
//   [solver] tol max_iter damping anderson_depth eps1
//   [run] seed output_dir embed_pairs
//   [export] res_s res_theta periods
ParsedConfig parse_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});
ParsedConfig parse_config_text(const std::string& text, const std::map<std::string, std::string>& overrides = {});

// Throws rejected_parameters naming the violated hypothesis.
void validate(const RunConfig& c);

Mat3 generator_of(const RunConfig& c);
SpiralSpec spec_of(const RunConfig& c);

// key = value lines with sections, in a fixed order.
std::string to_ini(const RunConfig& c);

// Subcommands. Return the process exit status:
// 0 ok, 2 rejected parameters, 3 non-convergence, 4 I/O.
int run_spiral(const RunConfig& c, std::ostream& out);
int run_solve(const RunConfig& c, std::ostream& out);
int run_check_embed(const RunConfig& c, std::ostream& out);
int run_export(const RunConfig& c, std::ostream& out);
int exit_code_for(const std::exception& e);

}  // namespace spiralforge
