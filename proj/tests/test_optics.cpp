// test_optics.cpp - direction transport and admissibility cones
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "vrte/optics.hpp"
#include "vrte/scenario.hpp"

using namespace vrte;

TEST_CASE("eta transport") {
    const auto flat = RefractiveProfile::constant();
    const auto cloud = RefractiveProfile::cloud_slab(0.01);

    // constant index: direction is conserved
    for (double mu : {-0.9, -0.2, 0.1, 0.7}) {
        const auto m = eta(mu, 0.2, 0.8, flat);
        REQUIRE(m.has_value());
        CHECK(*m == Catch::Approx(mu));
    }
    // mu = +-1 transports to itself on any profile
    CHECK(eta(1.0, 0.6, 0.9, cloud).value() == Catch::Approx(1.0));
    CHECK(eta(-1.0, 0.6, 0.9, cloud).value() == Catch::Approx(-1.0));

    // inside the slab, mu^2 = 0.019 cannot escape: 1 - (1 - mu^2)(1.01)^2 < 0
    const double mu = std::sqrt(0.019);
    CHECK(1.0 - (1.0 - 0.019) * 1.01 * 1.01 < 0.0);
    CHECK_FALSE(eta(mu, 0.6, 0.9, cloud).has_value());
}

TEST_CASE("eta round trip property") {
    const auto cloud = RefractiveProfile::cloud_slab(0.01);
    for (double z : {0.1, 0.55, 0.65, 0.95}) {
        const auto cone = admissibility(z, cloud);
        for (int j = 1; j <= 20; ++j) {
            const double mu = cone.mu_hi + (1.0 - cone.mu_hi) * j / 21.0;
            for (double zp : {0.05, 0.55, 0.69, 1.0}) {
                const auto m = eta(mu, z, zp, cloud);
                REQUIRE(m.has_value());
                const auto back = eta(*m, zp, z, cloud);
                REQUIRE(back.has_value());
                CHECK(std::abs(*back - mu) < 1e-12);
            }
        }
    }
}

TEST_CASE("eta_h approximation") {
    const auto flat = RefractiveProfile::constant();
    // printed formula with n ratio 0.99
    auto prof = RefractiveProfile::from_table({{0.0, 1.0}, {1.0, 1.0 / 0.99}});
    // here n(z')/n(z) with z' = 0, z = 1 gives 0.99
    CHECK(eta_h(0.5, 1.0, 0.0, prof) == Catch::Approx(0.5 * 0.99).epsilon(1e-9));
    CHECK(eta_h(0.5, 0.3, 0.7, flat) == Catch::Approx(0.5));

    // at mu = 0 the approximation is 0 while eta reaches the threshold value
    const auto up = RefractiveProfile::from_table({{0.0, 1.0}, {1.0, 1.02}});
    CHECK(eta_h(0.0, 0.0, 1.0, up) == 0.0);
    const auto exact = eta(0.0, 0.0, 1.0, up);
    REQUIRE(exact.has_value());  // going into higher n is always allowed
    CHECK(*exact == Catch::Approx(std::sqrt(1.0 - 1.0 / (1.02 * 1.02))));

    // pointwise gap bound: |eta - eta_h| <= sqrt(max(0, 1 - n_zp^2/n_z^2))
    const auto cloud = RefractiveProfile::cloud_slab(0.01);
    for (double z : {0.55, 0.6, 0.65}) {
        for (double zp : {0.1, 0.92}) {
            const double nz = cloud(z), nzp = cloud(zp);
            const double gap = std::sqrt(std::max(0.0, 1.0 - nzp * nzp / (nz * nz)));
            const auto cone = admissibility(z, cloud);
            for (int j = 1; j <= 30; ++j) {
                const double mu = cone.mu_hi + (1.0 - cone.mu_hi) * j / 31.0;
                const auto e = eta(mu, z, zp, cloud);
                REQUIRE(e.has_value());
                CHECK(std::abs(*e - eta_h(mu, z, zp, cloud)) <= gap + 1e-12);
            }
        }
    }
}

TEST_CASE("admissibility cones") {
    const auto flat = RefractiveProfile::constant();
    const auto c = admissibility(0.5, flat);
    CHECK(c.mu_star_sq == 0.0);
    CHECK(c.mu_hi == 0.0);

    const auto cloud = RefractiveProfile::cloud_slab(0.01);
    const auto in = admissibility(0.6, cloud);
    CHECK(in.mu_star_sq == Catch::Approx(1.0 - 1.0 / (1.01 * 1.01)));  // ~0.0197
    CHECK(in.mu_hi == Catch::Approx(std::sqrt(0.019704)).epsilon(1e-3));
    CHECK(in.mu_lo == Catch::Approx(-in.mu_hi));

    const auto out = admissibility(0.2, cloud);
    CHECK(out.mu_star_sq == 0.0);

    // cone threshold is nondecreasing in eps
    double prev = -1.0;
    for (double eps : {0.0, 0.005, 0.01, 0.02, 0.03}) {
        const auto p = RefractiveProfile::cloud_slab(eps);
        const double ms = admissibility(0.6, p).mu_star_sq;
        CHECK(ms >= prev);
        prev = ms;
    }

    // boundary ties are inadmissible
    CHECK_FALSE(in.admissible(in.mu_hi));
    CHECK(in.admissible(in.mu_hi + 1e-9));
}

TEST_CASE("admissibility propagation on lattices") {
    const auto grid = AtmosphereScenario::uniform_grid(100);
    const auto flat = RefractiveProfile::constant();
    auto rep = check_propagation(flat, grid, 50);
    CHECK(rep.ok());
    CHECK(rep.violations == 0);

    for (double eps : {0.01, 0.03}) {
        const auto cloud = RefractiveProfile::cloud_slab(eps);
        rep = check_propagation(cloud, grid, 50);
        INFO("eps = " << eps);
        CHECK(rep.ok());
        CHECK(rep.checked > 0);
    }

    // directions inside the cone gap are skipped, not counted as violations
    const auto cloud = RefractiveProfile::cloud_slab(0.01);
    const auto cone = admissibility(0.6, cloud);
    CHECK_FALSE(cone.admissible(0.5 * cone.mu_hi));
}

TEST_CASE("tabulated profile") {
    auto p = RefractiveProfile::from_table({{0.0, 1.0}, {0.5, 1.02}, {1.0, 1.0}});
    CHECK(p(0.0) == 1.0);
    CHECK(p(0.25) == Catch::Approx(1.01));
    CHECK(p(0.75) == Catch::Approx(1.01));
    CHECK(p(2.0) == 1.0);  // clamped

    CHECK_THROWS_AS(RefractiveProfile::from_table({{0.0, 0.9}, {1.0, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RefractiveProfile::from_table({{0.5, 1.0}, {0.5, 1.1}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RefractiveProfile::from_table({{0.5, 1.0}}), std::invalid_argument);
}
