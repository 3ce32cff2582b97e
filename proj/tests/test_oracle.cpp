#include <cmath>

#include "doctest.h"
#include "divopt/oracle.hpp"
#include "support.hpp"

using namespace divopt;

namespace {

// Both-positive set with a gap in the domain of the first family.
ModelParams gap_instance(double beta) {
    return ModelParams({0.883246, 0.111377}, {0.670451, 0.31801}, 2.55078, 0.505669, beta);
}

}  // namespace

TEST_CASE("zero-drift toy matches the solver") {
    ScaleContext c(ModelParams({0.0, 1.0}, {0.0, 1.0}, 1.0, 0.5, 0.2));
    auto sol = solve_barriers(c);
    auto o = grid_maximize_zeta(c);
    auto cmp = compare_solver_oracle(c, sol, o);
    CHECK(cmp.value_ok);
    CHECK(cmp.argmax_ok);
    CHECK(o.argmaxes.front().pair.z1 <= o.spacing_z1);
}

TEST_CASE("zeta vanishes on the boundary row and is nonnegative inside") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        auto p = testing::random_params(rng);
        ScaleContext c(p);
        const double hi = search_bound(c, convexity_profile(p, c.constants(), classify_case(p, c.constants())));
        for (int i = 0; i < 50; ++i) {
            const double z1 = u(rng) * (hi - p.beta());
            // The numerator is zero up to the rounding of z1 + beta.
            const double ulp = 4e-16 * (z1 + p.beta());
            const double edge = zeta(c, z1, z1 + p.beta());
            CHECK(std::fabs(edge) * (c.g(z1 + p.beta()) - c.g(z1)) <= ulp);
            const double z2 = z1 + p.beta() + u(rng) * (hi - z1 - p.beta());
            const double v = zeta(c, z1, z2);
            CHECK(std::isfinite(v));
            CHECK(v * (c.g(z2) - c.g(z1)) >= -ulp);
        }
    }
}

TEST_CASE("nonpositive drifts put the oracle lower barrier at zero") {
    for (auto [mup, mum] : {std::pair{0.0, 0.0}, {-0.3, -0.1}, {-0.1, -0.4}}) {
        ScaleContext c(ModelParams({mup, 0.8}, {mum, 0.5}, 1.5, 0.1, 0.3));
        auto o = grid_maximize_zeta(c);
        CHECK(o.argmaxes.front().pair.z1 <= o.spacing_z1);
    }
}

TEST_CASE("twin maximizers at the gap of the first family") {
    ScaleContext c0(gap_instance(1.0));
    auto profile = convexity_profile(c0.params(), c0.constants(), classify_case(c0.params(), c0.constants()));
    REQUIRE(profile.signs.size() == 4);
    TwoHumpFamilies fam(c0, profile);
    const double beta_star = fam.omega_a(fam.family_gap_start());
    MESSAGE("twin level beta* = ", beta_star);

    ScaleContext c(gap_instance(beta_star));
    auto sol = solve_barriers(c);
    CHECK(sol.degenerate);
    REQUIRE(sol.pairs.size() == 2);
    const double zA = zeta(c, sol.pairs[0].z1, sol.pairs[0].z2);
    const double zB = zeta(c, sol.pairs[1].z1, sol.pairs[1].z2);
    CHECK(std::fabs(zA - zB) <= 1e-6 * std::max(zA, zB));

    auto o = grid_maximize_zeta(c);
    REQUIRE(o.argmaxes.size() >= 2);
    CHECK(std::fabs(o.argmaxes[0].zeta - o.argmaxes[1].zeta) <= 1e-6 * o.argmaxes[0].zeta);
    CHECK(std::fabs(o.argmaxes[0].pair.z2 - o.argmaxes[1].pair.z2) > 0.1);
    auto cmp = compare_solver_oracle(c, sol, o);
    CHECK(cmp.value_ok);
    CHECK(cmp.argmax_ok);
}

TEST_CASE("beta near the switch level of the second family") {
    ScaleContext c0(gap_instance(1.0));
    auto profile = convexity_profile(c0.params(), c0.constants(), classify_case(c0.params(), c0.constants()));
    TwoHumpFamilies fam(c0, profile);
    const double level = fam.omega_b(fam.x_switch());
    for (double f : {1.0 - 1e-6, 1.0 + 1e-6}) {
        ScaleContext c(gap_instance(level * f));
        auto sol = solve_barriers(c);
        CHECK_FALSE(sol.candidates.empty());
        auto cmp = compare_solver_oracle(c, sol, grid_maximize_zeta(c));
        CHECK(cmp.value_ok);
        CHECK(cmp.argmax_ok);
    }
}

TEST_CASE("explicit lattice and evaluation count") {
    ScaleContext c(ModelParams({0.1, 0.1}, {0.5, 0.5}, 1.0, 0.05, 0.5));
    GridSpec spec;
    spec.z1_hi = 1.0;
    spec.z2_hi = 3.0;
    spec.n1 = 100;
    spec.n2 = 200;
    auto o = grid_maximize_zeta(c, spec);
    CHECK(o.grid.z1_hi == 1.0);
    CHECK(o.grid.z2_hi == 3.0);
    CHECK(o.evaluations >= 101L * 201L / 2);
    CHECK(o.argmaxes.front().pair.z1 == doctest::Approx(0.4277).epsilon(1e-3));
    CHECK(o.argmaxes.front().pair.z2 == doctest::Approx(1.9059).epsilon(1e-3));
}

TEST_CASE("empty feasible lattice is rejected") {
    ScaleContext c(ModelParams({0.1, 0.1}, {0.5, 0.5}, 1.0, 0.05, 0.5));
    GridSpec spec;
    spec.z1_lo = 2.0;
    spec.z1_hi = 3.0;
    spec.z2_lo = 0.0;
    spec.z2_hi = 1.0;
    CHECK_THROWS(grid_maximize_zeta(c, spec));
}
