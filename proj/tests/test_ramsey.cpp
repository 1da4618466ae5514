#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "umskel/ramsey.hpp"

using namespace umskel;

namespace {

/// Smallest i in 1..t with m_i <= m_{i-1} (m_t/m_0)^{1/t}, replayed from the
/// recorded ring masses.
int replay_ring_index(const std::vector<double>& m, int t) {
    const double growth = (m[0] == 0.0 && m[static_cast<std::size_t>(t)] == 0.0)
                              ? 0.0
                              : m[static_cast<std::size_t>(t)] / m[0];
    for (int i = 1; i <= t; ++i)
        if (m[static_cast<std::size_t>(i)] <= m[static_cast<std::size_t>(i - 1)] * std::pow(growth, 1.0 / t))
            return i;
    return -1;
}

}  // namespace

TEST_CASE("two points split into singletons") {
    const auto space = testing::unit_line(2);
    const auto mu = PointMeasure::uniform(2);
    const auto dec = bartal_decompose(space, mu, Cluster{0, 1}, 2);
    CHECK(dec.center == 0);
    CHECK(dec.ring_index == 1);
    CHECK(dec.p == Cluster{0});
    CHECK(dec.q == Cluster{1});
    CHECK(dec.ring_masses == std::vector<double>{0.5, 0.5, 0.5});
    CHECK(set_distance(space, dec.p, dec.q) >= 1.0 / 16.0);

    const auto [lhs, rhs] = ap_guarantee(space, mu, dec, Cluster{0, 1});
    CHECK(lhs == doctest::Approx(0.5 * std::sqrt(2.0)));
    CHECK(rhs == 0.5);
    CHECK(verify_decomposition(space, mu, Cluster{0, 1}, dec).all_pass());
}

TEST_CASE("ring radii hit the endpoints exactly") {
    CHECK(ring_radius(3.0, 0, 7) == 3.0 / 8.0);
    CHECK(ring_radius(3.0, 7, 7) == 3.0 / 4.0);
    CHECK(ring_radius(1.0, 1, 2) == 0.1875);
}

TEST_CASE("five unit points") {
    const auto space = testing::unit_line(5);
    const auto mu = PointMeasure::uniform(5);
    const Cluster z = Cluster::all(5);
    const auto dec = bartal_decompose(space, mu, z, 2);
    CHECK(verify_decomposition(space, mu, z, dec).all_pass());
    CHECK(dec.center == brute_force_argmax_ratio(space, mu, z));
}

TEST_CASE("seventeen unit points satisfy the sparse partition bound") {
    const auto space = testing::unit_line(17);
    const auto mu = PointMeasure::uniform(17);
    const Cluster z = Cluster::all(17);
    const auto dec = bartal_decompose(space, mu, z, 3);
    const auto [lhs, rhs] = ap_guarantee(space, mu, dec, z);
    CHECK(lhs >= rhs);
}

TEST_CASE("decomposition errors") {
    const auto space = testing::unit_line(3);
    const auto mu = PointMeasure::uniform(3);
    CHECK_THROWS_WITH(bartal_decompose(space, mu, Cluster{1}, 2), "cluster not splittable");
    CHECK_THROWS_WITH(bartal_decompose(space, mu, Cluster{}, 2), "cluster not splittable");
    CHECK_THROWS_WITH(bartal_decompose(space, mu, Cluster{0, 1}, 1), "t must be at least 2");
}

TEST_CASE("brute force argmax picks the isolated point") {
    // Diameter 10: the points at 0 and 2 share their radius-2.5 ball, so only
    // the point at 10 has ratio 1.
    const auto space = testing::line_space({0.0, 2.0, 10.0});
    CHECK(brute_force_argmax_ratio(space, PointMeasure::uniform(3), Cluster::all(3)) == 2);
    // Ties go to the first point.
    CHECK(brute_force_argmax_ratio(testing::line_space({0.0, 0.1, 10.0}),
                                   PointMeasure({0.1, 0.1, 0.8}), Cluster::all(3)) == 0);
    CHECK(brute_force_argmax_ratio(testing::unit_line(2), PointMeasure::uniform(2),
                                   Cluster{0, 1}) == 0);
}

TEST_CASE("verifier rejects a split that is not separated") {
    const auto space = testing::unit_line(5);
    const auto mu = PointMeasure::uniform(5);
    // P and Q are 0.1 apart, below diam/16 = 0.25.
    const auto dense = testing::line_space({0.0, 0.1, 0.2, 3.0, 4.0});
    Decomposition tight;
    tight.p = Cluster{0};
    tight.q = Cluster{1, 2, 3, 4};
    tight.t = 2;
    tight.parent_diam = 4.0;
    const auto report = verify_decomposition(dense, mu, Cluster::all(5), tight);
    CHECK_FALSE(report.passed("split_separation"));
    CHECK(report.passed("split_disjoint"));

    Decomposition overlap = tight;
    overlap.p = Cluster{0, 1};
    overlap.q = Cluster{1, 2};
    CHECK_FALSE(verify_decomposition(space, mu, Cluster::all(5), overlap).passed("split_disjoint"));
}

TEST_CASE("verifier on a split with empty Q") {
    const auto space = testing::unit_line(5);
    const auto mu = PointMeasure::uniform(5);
    Decomposition d;
    d.p = Cluster{0, 1, 2, 3};
    d.t = 2;
    d.parent_diam = 4.0;
    const auto report = verify_decomposition(space, mu, Cluster::all(5), d);
    CHECK(report.passed("split_disjoint"));
    CHECK(report.find("split_diameter_halving") != nullptr);
    CHECK(report.find("split_mass_exchange") != nullptr);
    CHECK(report.find("split_sparse_partition") != nullptr);
}

TEST_CASE("massless cluster follows the same construction") {
    const auto space = testing::unit_line(4);
    const PointMeasure mu({0.0, 0.0, 0.0, 1.0});
    const Cluster z{0, 1, 2};
    const auto dec = bartal_decompose(space, mu, z, 3);
    CHECK(dec.center == 0);
    CHECK(verify_decomposition(space, mu, z, dec).all_pass());
}

TEST_CASE("random small spaces agree with the oracles") {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng() % 7;
        const auto space = (rep % 2) ? testing::random_plane_space(rng, n)
                                      : testing::random_lattice_space(rng, n, 6);
        const auto mu = testing::random_probability(rng, n);
        const int t = 2 + static_cast<int>(rng() % 4);
        const Cluster z = Cluster::all(n);
        const auto dec = bartal_decompose(space, mu, z, t);

        CHECK(dec.center == brute_force_argmax_ratio(space, mu, z));
        CHECK(dec.ring_index == replay_ring_index(dec.ring_masses, t));
        for (std::size_t i = 1; i < dec.ring_masses.size(); ++i)
            CHECK(dec.ring_masses[i - 1] <= dec.ring_masses[i]);

        const double delta = diameter(space, z);
        CHECK(dec.p == ball(space, z, dec.center, ring_radius(delta, dec.ring_index - 1, t),
                            BallKind::closed));
        CHECK(dec.q == set_difference(z, ball(space, z, dec.center,
                                              ring_radius(delta, dec.ring_index, t),
                                              BallKind::open)));
        const auto report = verify_decomposition(space, mu, z, dec);
        CHECK_MESSAGE(report.all_pass(),
                      (report.all_pass() ? std::string() : report.first_failure()->name));
        CHECK(bartal_decompose(space, mu, z, t) == dec);
    }
}
