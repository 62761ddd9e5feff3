#include "spiralforge/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

using namespace spiralforge;

int main(int argc, char** argv) {
    CLI::App app{"spiralforge: minimal disks with logarithmic-spiral axes"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::map<std::string, std::optional<std::string>> flags = {
        {"kappa0", {}}, {"tau0", {}},    {"xi", {}},       {"delta", {}},    {"ell", {}},  {"n_s", {}},
        {"n_theta", {}}, {"tol", {}},    {"max_iter", {}}, {"damping", {}},  {"eps1", {}}, {"seed", {}},
        {"anderson_depth", {}},
        {"output_dir", {}},
    };
    const std::map<std::string, std::string> flag_names = {
        {"kappa0", "--kappa0"}, {"tau0", "--tau0"},     {"xi", "--xi"},         {"delta", "--delta"},
        {"ell", "--ell"},       {"n_s", "--ns"},        {"n_theta", "--ntheta"}, {"tol", "--tol"},
        {"max_iter", "--max-iter"}, {"damping", "--damping"}, {"eps1", "--eps1"}, {"seed", "--seed"},
        {"anderson_depth", "--anderson-depth"},
        {"output_dir", "--out"},
    };

    int status = 0;
    auto add = [&](const char* name, const char* help, int (*fn)(const RunConfig&, std::ostream&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "INI configuration file");
        for (auto& [key, flag] : flag_names) sub->add_option(flag, flags[key], "override " + key);
        sub->callback([&, fn] {
            std::map<std::string, std::string> overrides;
            for (const auto& [key, v] : flags)
                if (v) overrides[key] = *v;
            try {
                const ParsedConfig pc = parse_config(config_path, overrides);
                for (const auto& w : pc.warnings) std::cerr << "warning: " << w << "\n";
                status = fn(pc.config, std::cout);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                status = exit_code_for(e);
            }
        });
    };
    add("spiral", "print the curve invariants table", run_spiral);
    add("solve", "solve for the minimal graph and write report, mesh and CSV", run_solve);
    add("check-embed", "solve and run the embeddedness checks", run_check_embed);
    add("export", "solve and write the mesh and CSV only", run_export);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return status;
}
