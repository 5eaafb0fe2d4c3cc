// test_io.cpp - absorption ingestion, configuration, writers and CLI exit codes
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vrte/cli.hpp"
#include "vrte/scenario_io.hpp"

using namespace vrte;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("kappa table ingestion") {
    {
        std::istringstream is("# comment\n1.0 0.5\n2.0 0.5\n10.0 0.5\n");
        const KappaTable t = load_kappa(is, 1e-3);
        CHECK(t.at_nu(1.0) == Catch::Approx(0.5));    // lambda = 3
        CHECK(t.at_nu(0.05) == Catch::Approx(0.5));   // clamped beyond 10 um
        CHECK(t.at_wavelength(1.5) == Catch::Approx(0.5));
    }
    {
        std::istringstream is("\n# only comments\n");
        CHECK_THROWS_AS(load_kappa(is), DataError);
    }
    {
        std::istringstream is("1.0 0.5\n2.0 oops\n");
        try {
            load_kappa(is);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    {
        std::istringstream is("2.0 0.5\n1.0 0.5\n");
        CHECK_THROWS_AS(load_kappa(is), DataError);
    }
    {
        // flooring contract
        std::istringstream is("1.0 0.0\n5.0 0.0\n");
        const KappaTable t = load_kappa(is, 1e-3);
        CHECK(t.at_wavelength(2.5) == 1e-3);
    }
    CHECK_THROWS_AS(load_kappa("data/no_such_file.txt"), DataError);
}

TEST_CASE("co2 modifier") {
    const KappaTable t = load_kappa("data/kappa_gemini.txt");

    // zero level: identity on sampled wavelengths
    const KappaTable id = apply_co2(t, Co2Modifier{14.0, 18.0, 0.0});
    for (double lam : {0.5, 5.0, 13.0, 15.0, 17.9, 25.0})
        CHECK(id.at_wavelength(lam) == Catch::Approx(t.at_wavelength(lam)).margin(1e-12));

    // plateau: exactly level inside the band, untouched outside
    const KappaTable k1 = apply_co2(t, Co2Modifier{14.0, 18.0, 0.5});
    for (double lam : {14.0, 15.5, 17.2, 18.0})
        CHECK(k1.at_wavelength(lam) - t.at_wavelength(lam) == Catch::Approx(0.5).margin(1e-9));
    for (double lam : {0.5, 8.0, 13.9, 18.1, 25.0})
        CHECK(k1.at_wavelength(lam) - t.at_wavelength(lam) ==
              Catch::Approx(0.0).margin(1e-9));

    // band outside the table range is a configuration error
    CHECK_THROWS_AS(apply_co2(t, Co2Modifier{0.01, 18.0, 0.5}), ConfigError);
    CHECK_THROWS_AS(apply_co2(t, Co2Modifier{14.0, 50.0, 0.5}), ConfigError);
}

TEST_CASE("config parsing, presets and round trip") {
    std::istringstream is(
        "# case 1 experiment\n"
        "case = case1\n"
        "grid.z_nodes = 80\n"
        "kappa.source = constant\n"
        "kappa.constant = 0.7\n"
        "profile.kind = cloud\n"
        "profile.eps = 0.01\n"
        "solver.tol = 2e-4\n");
    const RunConfig c = parse_config(is);
    CHECK(c.boundary.c_S == 0.0);  // case1 preset
    CHECK(c.boundary.c_E == 2.5);
    CHECK(c.z_nodes == 80);
    CHECK(c.kappa_constant == 0.7);
    CHECK(c.tol == 2e-4);

    // explicit keys override the preset regardless of order
    std::istringstream is2("boundary.c_S = 1e-5\ncase = case1\n");
    CHECK(parse_config(is2).boundary.c_S == 1e-5);

    std::istringstream is3("case = case2\n");
    const RunConfig c2 = parse_config(is3);
    CHECK(c2.boundary.c_E == 0.0);
    CHECK(c2.boundary.c_S == 2e-5);

    // round trip preserves every semantic field
    const std::string ser = serialize_config(c);
    std::istringstream is4(ser);
    const RunConfig rt = parse_config(is4);
    CHECK(serialize_config(rt) == ser);
    CHECK(config_hash(rt) == config_hash(c));

    // errors
    std::istringstream bad1("nonsense line\n");
    CHECK_THROWS_AS(parse_config(bad1), ConfigError);
    std::istringstream bad2("unknown.key = 1\n");
    CHECK_THROWS_AS(parse_config(bad2), ConfigError);
    std::istringstream bad3("solver.tol = not_a_number\n");
    CHECK_THROWS_AS(parse_config(bad3), ConfigError);
    std::istringstream bad4("case = case9\n");
    CHECK_THROWS_AS(parse_config(bad4), ConfigError);
}

TEST_CASE("scenario construction from config") {
    RunConfig c;
    c.kappa_source = "file";
    c.kappa_file = "data/kappa_gemini.txt";
    c.co2_level = 0.15;
    const AtmosphereScenario s = make_scenario(c);
    CHECK(s.nz() == 100);
    CHECK(s.nnu() == 128);
    // the CO2 plateau is present in the band
    const double lam = 16.0;
    const double base = load_kappa("data/kappa_gemini.txt").at_wavelength(lam);
    CHECK(s.kappa.value(nu_from_wavelength_um(lam)) == Catch::Approx(base + 0.15));

    RunConfig bad = c;
    bad.kappa_shape = "quadratic";
    CHECK_THROWS_AS(make_scenario(bad), ConfigError);
}

TEST_CASE("scenario with a tabulated refractive profile") {
    std::filesystem::create_directories("build/io_prof");
    {
        std::ofstream os("build/io_prof/profile.txt");
        os << "0.0 1.0\n0.45 1.0\n0.5 1.008\n0.9 1.002\n1.0 1.0\n";
    }
    RunConfig c;
    c.z_nodes = 30;
    c.nu_nodes = 16;
    c.profile_kind = "table";
    c.profile_file = "build/io_prof/profile.txt";
    const AtmosphereScenario s = make_scenario(c);
    CHECK(s.profile(0.5) == Catch::Approx(1.008));
    CHECK(s.profile(0.7) == Catch::Approx(1.005));
    CHECK(admissibility(0.5, s.profile).mu_star_sq > 0.0);
    std::filesystem::remove_all("build/io_prof");
}

TEST_CASE("deterministic outputs") {
    // two identical small solves must produce byte-identical tables
    RunConfig c;
    c.z_nodes = 40;
    c.nu_nodes = 24;
    c.kappa_source = "constant";
    c.kappa_constant = 0.5;
    c.n_kappa = 4;
    const AtmosphereScenario s = make_scenario(c);
    const SolveOptions opt = make_solve_options(c);

    std::filesystem::create_directories("build/io_a");
    std::filesystem::create_directories("build/io_b");
    const SolveResult ra = solve(s, opt);
    write_outputs("build/io_a", s, ra, c);
    const SolveResult rb = solve(s, opt);
    write_outputs("build/io_b", s, rb, c);
    for (const char* f :
         {"temperature.txt", "spectra_z0.txt", "spectra_zZ.txt", "convergence.txt",
          "diagnostic.txt"}) {
        INFO(f);
        CHECK(slurp(std::string("build/io_a/") + f) == slurp(std::string("build/io_b/") + f));
    }
    std::filesystem::remove_all("build/io_a");
    std::filesystem::remove_all("build/io_b");
}

TEST_CASE("K0 clamp flag") {
    RunConfig c;
    c.z_nodes = 40;
    c.nu_nodes = 24;
    c.kappa_source = "constant";
    c.n_kappa = 4;
    const AtmosphereScenario s = make_scenario(c);
    const SolveResult r = solve(s, make_solve_options(c));

    std::filesystem::create_directories("build/io_c");
    write_spectra("build/io_c/raw.txt", s, r.state, s.nz() - 1, false, 0);
    write_spectra("build/io_c/clamped.txt", s, r.state, s.nz() - 1, true, 0);
    // parse the K0 column back and verify the clamp floor
    auto min_k0 = [](const std::string& path) {
        std::ifstream is(path);
        std::string line;
        double mn = 1e300;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            double lam, nu, j0, k0;
            ls >> lam >> nu >> j0 >> k0;
            mn = std::min(mn, k0);
        }
        return mn;
    };
    CHECK(min_k0("build/io_c/clamped.txt") >= -2e-6);
    CHECK(min_k0("build/io_c/raw.txt") <= min_k0("build/io_c/clamped.txt"));
    std::filesystem::remove_all("build/io_c");
}

TEST_CASE("cli exit codes") {
    auto run = [](std::initializer_list<const char*> args) {
        std::vector<const char*> v{"vrte"};
        v.insert(v.end(), args.begin(), args.end());
        return run_cli(static_cast<int>(v.size()), v.data());
    };
    CHECK(run({"verify", "--quick"}) == 0);
    CHECK(run({"nonsense"}) == 1);
    CHECK(run({"solve", "--config", "configs/no_such.cfg"}) == 1);
    CHECK(run({"solve", "--bogus-flag"}) == 1);
    CHECK(run({"diag", "--config", "configs/case1_k05.cfg", "--out", "build/io_diag"}) == 0);
    CHECK(std::filesystem::exists("build/io_diag/diagnostic.txt"));
    std::filesystem::remove_all("build/io_diag");

    // config error: malformed file
    std::filesystem::create_directories("build/io_cli");
    {
        std::ofstream os("build/io_cli/bad.cfg");
        os << "solver.kernel = warp\n";
    }
    CHECK(run({"solve", "--config", "build/io_cli/bad.cfg"}) == 1);

    // numerical failure: an iteration cap too small to converge exits 2
    {
        std::ofstream os("build/io_cli/stall.cfg");
        os << "grid.z_nodes = 30\ngrid.nu_nodes = 12\n"
           << "kappa.source = constant\nkappa.constant = 0.5\n"
           << "table.n_kappa = 4\nsolver.max_iter = 2\n"
           << "out = build/io_cli/out\n";
    }
    CHECK(run({"solve", "--config", "build/io_cli/stall.cfg"}) == 2);

    // polarized boundaries are an unsupported configuration
    {
        std::ofstream os("build/io_cli/pol.cfg");
        os << "grid.z_nodes = 30\ngrid.nu_nodes = 12\n"
           << "kappa.source = constant\nkappa.constant = 0.5\n"
           << "boundary.polarized = true\nout = build/io_cli/out\n";
    }
    CHECK(run({"solve", "--config", "build/io_cli/pol.cfg"}) == 1);

    // surface export through the CLI, with the cloud bump flag
    {
        std::ofstream os("build/io_cli/rec.cfg");
        os << "grid.z_nodes = 40\ngrid.nu_nodes = 16\n"
           << "kappa.source = constant\nkappa.constant = 0.5\n"
           << "table.n_kappa = 4\nreconstruct.n_mu = 120\n"
           << "out = build/io_cli/rec\n";
    }
    CHECK(run({"reconstruct", "--config", "build/io_cli/rec.cfg", "--nu", "0.1436", "--eps",
               "0.01"}) == 0);
    CHECK(std::filesystem::exists("build/io_cli/rec/stokes_I.txt"));
    CHECK(std::filesystem::exists("build/io_cli/rec/stokes_Q.txt"));
    std::filesystem::remove_all("build/io_cli");
}
