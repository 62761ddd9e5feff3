#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spiralforge/config.hpp"
#include "spiralforge/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spiralforge;

namespace {

std::string scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "spiralforge_test_config" / name;
    std::filesystem::remove_all(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ErrorCode code_of(const std::string& text, const std::map<std::string, std::string>& ov = {}) {
    try {
        parse_config_text(text, ov);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected rejection of: " << text);
    return ErrorCode::internal;
}

std::string message_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal file fills defaults") {
    const auto pc = parse_config_text("kappa0 = 1\nxi = 1\ndelta = 1e-3\nell = 32\n");
    const RunConfig& c = pc.config;
    CHECK(pc.warnings.empty());
    CHECK(c.kappa0 == 1);
    CHECK(c.tau0 == 0);
    CHECK(c.delta == 1e-3);
    CHECK(c.ell == 32);
    CHECK(c.n_s == 1024);
    CHECK(c.n_theta == 64);
    CHECK(c.tol == 1e-8);
    CHECK(c.max_iter == 50);
    CHECK(c.seed == 1);
    CHECK_FALSE(c.r_entries.has_value());
    const auto sectioned = parse_config_text("[curve]\nkappa0 = 1\nxi = 1\ndelta = 1e-3\n[domain]\nell = 32\n");
    CHECK(to_ini(sectioned.config) == to_ini(c));
    CHECK(to_ini(parse_config_text("").config) == to_ini(RunConfig{}));
    // Unset mesh sizes shrink with the grid; explicit ones are checked.
    const auto coarse = parse_config_text("[domain]\nn_s = 32\nn_theta = 16\n").config;
    CHECK(coarse.mesh_res_s == 33);
    CHECK(coarse.mesh_res_theta == 16);
    CHECK(code_of("[domain]\nn_theta = 16\n[export]\nres_theta = 64\n") == ErrorCode::rejected_parameters);
}

TEST_CASE("hypothesis violations are rejected by name") {
    CHECK(code_of("ell = 8\n") == ErrorCode::rejected_parameters);
    CHECK(message_of("ell = 8\n").find("ell > 16") != std::string::npos);
    CHECK(message_of("ell = 16\n").find("ell > 16") != std::string::npos);
    CHECK(message_of("kappa0 = 0\n").find("kappa0 > 0") != std::string::npos);
    CHECK(message_of("delta = -1e-3\n").find("delta > 0") != std::string::npos);
    CHECK(message_of("[domain]\nn_theta = 48\n").find("power of two") != std::string::npos);
    CHECK(code_of("damping = 1.5\n") == ErrorCode::rejected_parameters);
    CHECK(code_of("[export]\nres_s = 5000\n") == ErrorCode::rejected_parameters);
}

TEST_CASE("unknown and malformed keys are rejected") {
    CHECK(message_of("kapa0 = 1\n").find("unknown key 'kapa0'") != std::string::npos);
    CHECK(message_of("[mesh]\nres_s = 4\n").find("unknown section") != std::string::npos);
    CHECK(message_of("[domain]\nxi = 1\n").find("belongs to section [curve]") != std::string::npos);
    CHECK(code_of("delta = small\n") == ErrorCode::rejected_parameters);
    CHECK(code_of("delta = 1e-3x\n") == ErrorCode::rejected_parameters);
    CHECK(code_of("n_s = 10.5\n") == ErrorCode::rejected_parameters);
    CHECK(code_of("seed = -3\n") == ErrorCode::rejected_parameters);
    CHECK(code_of("delta = inf\n") == ErrorCode::rejected_parameters);
    CHECK(code_of("", {{"bogus", "1"}}) == ErrorCode::rejected_parameters);
    CHECK(code_of("[curve\nxi = 1\n") == ErrorCode::rejected_parameters);
}

TEST_CASE("overrides beat the file") {
    const auto pc = parse_config_text("[curve]\ndelta = 1e-3\n[domain]\nell = 32\n",
                                      {{"delta", "5e-4"}, {"ell", "40"}, {"n_theta", "32"}, {"output_dir", "x"}});
    CHECK(pc.config.delta == 5e-4);
    CHECK(pc.config.ell == 40);
    CHECK(pc.config.n_theta == 32);
    CHECK(pc.config.output_dir == "x");
    CHECK(code_of("ell = 32\n", {{"ell", "8"}}) == ErrorCode::rejected_parameters);
}

TEST_CASE("explicit generator entries") {
    const Mat3 R = frenet_generator(1.5, 0.4);
    std::ostringstream t;
    t.precision(17);
    t << "r12 = " << R(0, 1) << "\nr13 = " << R(0, 2) << "\nr23 = " << R(1, 2) << "\n";
    auto pc = parse_config_text(t.str());
    CHECK(pc.warnings.empty());
    CHECK(pc.config.kappa0 == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(pc.config.tau0 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK((generator_of(pc.config) - R).norm() == 0.0);

    pc = parse_config_text("kappa0 = 1.5\ntau0 = 0.4\n" + t.str());
    CHECK(pc.warnings.empty());
    pc = parse_config_text("kappa0 = 2\n" + t.str());
    REQUIRE(pc.warnings.size() == 1);
    CHECK(pc.warnings[0].find("kappa0") != std::string::npos);
    CHECK(pc.config.kappa0 == doctest::Approx(1.5).epsilon(1e-12));

    CHECK(code_of("r12 = 1\nr13 = 0\n") == ErrorCode::rejected_parameters);
    CHECK(code_of("r12 = 0\nr13 = 0\nr23 = 0\n") == ErrorCode::rejected_parameters);

    // The SpiralSpec built from explicit entries equals the Frenet one.
    const auto s1 = spec_of(pc.config);
    const auto s2 = make_spiral_spec(R, pc.config.delta, pc.config.xi);
    CHECK((s1.R - s2.R).norm() == 0.0);
    CHECK(s1.rho0 == doctest::Approx(std::hypot(1.5, 0.4)).epsilon(1e-14));
}

TEST_CASE("to_ini round trips and is deterministic") {
    RunConfig c;
    c.kappa0 = 1.25;
    c.tau0 = -0.3;
    c.xi = 0.7;
    c.delta = 1.0 / 3000;
    c.ell = 24.5;
    c.n_s = 512;
    c.n_theta = 32;
    c.tol = 3e-9;
    c.seed = 42;
    c.output_dir = "somewhere";
    c.mesh_periods = 2;
    c.mesh_res_theta = 32;
    const std::string a = to_ini(c);
    CHECK(a == to_ini(c));
    const RunConfig back = parse_config_text(a).config;
    CHECK(to_ini(back) == a);
    CHECK(back.delta == c.delta);
    CHECK(back.tau0 == c.tau0);
    CHECK(back.seed == 42);

    const Mat3 R = frenet_generator(1, 0.2);
    c.r_entries = std::array<double, 3>{R(0, 1), R(0, 2), R(1, 2)};
    c.kappa0 = 1;
    c.tau0 = 0.2;
    const RunConfig back2 = parse_config_text(to_ini(c)).config;
    REQUIRE(back2.r_entries.has_value());
    CHECK(*back2.r_entries == *c.r_entries);
}

TEST_CASE("config files and I/O errors") {
    const std::string dir = scratch("files");
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/c.ini");
        f << "[curve]\nkappa0 = 1\ndelta = 2e-3\n";
    }
    CHECK(parse_config(dir + "/c.ini").config.delta == 2e-3);
    CHECK(parse_config("", {{"xi", "0.5"}}).config.xi == 0.5);
    try {
        parse_config(dir + "/missing.ini");
        FAIL("expected an I/O error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
        CHECK(std::string(e.what()).find("missing.ini") != std::string::npos);
    }
}

TEST_CASE("exit codes per failure class") {
    CHECK(exit_code_for(Error(ErrorCode::rejected_parameters, "")) == 2);
    CHECK(exit_code_for(Error(ErrorCode::io, "")) == 4);
    CHECK(exit_code_for(Error(ErrorCode::no_u0_profile, "")) == 3);
    CHECK(exit_code_for(Error(ErrorCode::graph_too_large, "")) == 3);
    CHECK(exit_code_for(std::runtime_error("x")) == 3);
}

TEST_CASE("spiral subcommand prints the invariants table") {
    std::ostringstream out;
    CHECK(run_spiral(parse_config_text("tau0 = 0.5\n").config, out) == 0);
    const std::string s = out.str();
    CHECK(s.find("kappa0 1") != std::string::npos);
    CHECK(s.find("tau0 0.5") != std::string::npos);
    CHECK(s.find("max embed ell") != std::string::npos);
    std::ostringstream flat;
    CHECK(run_spiral(parse_config_text("xi = 0\n").config, flat) == 0);
    CHECK(flat.str().find("no dilation") != std::string::npos);
}

TEST_CASE("solve writes deterministic reports that embed the config") {
    std::map<std::string, std::string> ov = {{"n_s", "512"}, {"n_theta", "64"}, {"embed_pairs", "1000"}};
    const std::string a = scratch("a"), b = scratch("b");
    ov["output_dir"] = a;
    std::ostringstream sink;
    CHECK(run_solve(parse_config_text("", ov).config, sink) == 0);
    ov["output_dir"] = b;
    CHECK(run_solve(parse_config_text("", ov).config, sink) == 0);
    std::string ra = slurp(a + "/report.json"), rb = slurp(b + "/report.json");
    REQUIRE_FALSE(ra.empty());
    const auto ja = nlohmann::json::parse(ra);
    CHECK(ja["config"]["n_s"] == 512);
    CHECK(ja["config"]["delta"] == 1e-3);
    CHECK(ja["report"]["converged"] == true);
    CHECK(ja["report"]["final_interior_residual"].get<double>() <= 1e-8);
    CHECK(ja["report"]["embed_verdict"] == "certified");
    CHECK(ja["report"]["residual_history"].size() >= 1);
    ra.replace(ra.find(a), a.size(), "");
    rb.replace(rb.find(b), b.size(), "");
    CHECK(ra == rb);
    CHECK(slurp(a + "/surface.obj") == slurp(b + "/surface.obj"));
    CHECK(parse_config(a + "/config.ini").config.n_s == 512);
}

TEST_CASE("non-convergence and unwritable output") {
    std::ostringstream sink;
    auto c = parse_config_text("", {{"n_s", "256"}, {"n_theta", "32"}, {"max_iter", "1"},
                                    {"output_dir", scratch("short")}})
                 .config;
    CHECK(run_solve(c, sink) == 3);
    c.output_dir = "/proc/spiralforge_cannot_write";
    try {
        run_solve(c, sink);
        FAIL("expected an I/O error");
    } catch (const Error& e) {
        CHECK(exit_code_for(e) == 4);
    }
}
