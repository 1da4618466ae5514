#include <doctest.h>

#include <algorithm>
#include <random>

#include "test_support.hpp"
#include "umskel/instances.hpp"
#include "umskel/metric_space.hpp"

using namespace umskel;

namespace {

/// Minimal number of intervals of length <= target covering sorted points;
/// left-to-right greedy is optimal on the line.
std::size_t interval_cover_oracle(std::vector<double> x, double target) {
    std::sort(x.begin(), x.end());
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.size();) {
        const double start = x[i];
        while (i < x.size() && x[i] - start <= target) ++i;
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("diameter of small clusters") {
    const auto line = testing::unit_line(4);
    CHECK(diameter(line, Cluster{3}) == 0.0);
    CHECK(diameter(line, Cluster{0, 1, 2, 3}) == 3.0);
    CHECK_THROWS_WITH(diameter(line, Cluster{}), "empty cluster");

    const auto cantor = generate(cantor_spec(2)).space;
    // Points are ordered left to right: 0, 2/9, 2/3, 8/9.
    CHECK(diameter(cantor, Cluster{0, 2}) == 2.0 / 3.0);
}

TEST_CASE("closed and open balls") {
    const auto line = testing::unit_line(5);
    const Cluster all = Cluster::all(5);
    CHECK(ball(line, all, 2, 0.0, BallKind::closed) == Cluster{2});
    CHECK(ball(line, all, 2, 0.0, BallKind::open).empty());
    CHECK(ball(line, all, 2, 1.0, BallKind::closed) == Cluster{1, 2, 3});
    CHECK(ball(line, all, 2, 1.0, BallKind::open) == Cluster{2});
    CHECK(ball(line, Cluster{0, 1}, 4, 2.5, BallKind::closed).empty());
}

TEST_CASE("set distance") {
    const auto line = testing::unit_line(5);
    CHECK(set_distance(line, Cluster{0}, Cluster{0}) == 0.0);
    CHECK(set_distance(line, Cluster{0}, Cluster{3}) == 3.0);
    CHECK(set_distance(line, Cluster{0, 1}, Cluster{3, 4}) == 2.0);
    CHECK_THROWS(set_distance(line, Cluster{}, Cluster{1}));
}

TEST_CASE("local mass mu*") {
    const auto line = testing::unit_line(4);
    const auto mu = PointMeasure::uniform(4);
    CHECK(mu_star(line, mu, Cluster{2}) == doctest::Approx(0.25));
    // Radius 3/4: every ball holds only its centre.
    CHECK(mu_star(line, mu, Cluster{0, 1, 2, 3}) == 0.25);
    CHECK(mu_star(line, PointMeasure({0.1, 0.2, 0.3, 0.4}), Cluster{1}) == 0.2);
}

TEST_CASE("greedy cover on a unit line matches the interval oracle") {
    const auto line = testing::unit_line(17);
    const auto est = greedy_cover_count(line, Cluster::all(17), 1.0);
    CHECK(est.count == 9);
    CHECK(est.is_upper_bound);
    std::vector<double> x(17);
    for (int i = 0; i < 17; ++i) x[static_cast<std::size_t>(i)] = i;
    CHECK(est.count == interval_cover_oracle(x, 1.0));

    CHECK(greedy_cover_count(line, Cluster{4}, 0.0).count == 1);
    CHECK(greedy_cover_count(line, Cluster::all(17), 16.0).count == 1);
    CHECK(greedy_cover_count(line, Cluster{}, 1.0).count == 0);
}

TEST_CASE("greedy cover is optimal on random sorted line sets") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(1 + rng() % 30);
        for (auto& v : x) v = u(rng);
        std::sort(x.begin(), x.end());
        x.erase(std::unique(x.begin(), x.end()), x.end());
        const auto space = testing::line_space(x);
        const double target = u(rng) / 4.0;
        CHECK(greedy_cover_count(space, Cluster::all(x.size()), target).count ==
              interval_cover_oracle(x, target));
    }
}

TEST_CASE("greedy cover pieces partition the set within the target diameter") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const auto space = testing::random_plane_space(rng, 2 + rng() % 40);
        const Cluster all = Cluster::all(space.size());
        const double target = diameter(space, all) / 8.0;
        const auto pieces = greedy_cover(space, all, target);
        CHECK(pieces.size() >= 1);
        Cluster uni;
        std::size_t total = 0;
        for (const auto& p : pieces) {
            CHECK(diameter(space, p) <= target);
            uni = set_union(uni, p);
            total += p.size();
        }
        CHECK(uni == all);
        CHECK(total == all.size());
        CHECK(greedy_cover_count(space, all, target).count == pieces.size());
    }
}

TEST_CASE("exact cover never exceeds the greedy estimate") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 60; ++rep) {
        const auto space = testing::random_lattice_space(rng, 1 + rng() % kExactCoverLimit);
        const Cluster all = Cluster::all(space.size());
        const double target = static_cast<double>(rng() % 5);
        const auto exact = exact_cover_count(space, all, target);
        CHECK_FALSE(exact.is_upper_bound);
        CHECK(exact.count <= greedy_cover_count(space, all, target).count);
        CHECK(exact.count >= 1);
    }
    const auto line = testing::unit_line(13);
    CHECK_THROWS(exact_cover_count(line, Cluster::all(13), 1.0));
    // Line with spacing 1 and pieces of diameter 1: pairs.
    CHECK(exact_cover_count(testing::unit_line(7), Cluster::all(7), 1.0).count == 4);
}

TEST_CASE("validation reports violated axioms") {
    CHECK(validate(testing::unit_line(3)).empty());

    FiniteMetricSpace asym(3, {0, 1, 1, 2, 0, 1, 1, 1, 0});
    const auto v = validate(asym);
    REQUIRE_FALSE(v.empty());
    CHECK(v.front().kind == Violation::Kind::symmetry);
    CHECK(v.front().i == 0);
    CHECK(v.front().j == 1);

    FiniteMetricSpace tri(3, {0, 1, 3, 1, 0, 1, 3, 1, 0});
    const auto w = validate(tri);
    REQUIRE_FALSE(w.empty());
    CHECK(w.front().kind == Violation::Kind::triangle);
    CHECK(w.front().describe().find("(0,1,2)") != std::string::npos);
    CHECK_THROWS_AS(require_valid(tri), ValidationError);

    FiniteMetricSpace same(2, {0, 0, 0, 0});
    REQUIRE_FALSE(validate(same).empty());
    CHECK(validate(same).front().kind == Violation::Kind::coincident);
}

TEST_CASE("measure is monotone and additive on disjoint clusters") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rng() % 50;
        const auto mu = testing::random_probability(rng, n);
        std::vector<PointId> a, b;
        for (PointId p = 0; p < n; ++p) (rng() % 2 ? a : b).push_back(p);
        const Cluster ca(a), cb(b);
        const double joint = mu.mass(set_union(ca, cb));
        CHECK(std::abs(joint - (mu.mass(ca) + mu.mass(cb))) <= 1e-12 * std::max(joint, 1e-300));
        CHECK(mu.mass(ca) <= joint);
    }
}

TEST_CASE("mu* never exceeds mu and balls are nested") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        const auto space = testing::random_plane_space(rng, 1 + rng() % 25);
        const auto mu = testing::random_probability(rng, space.size());
        std::vector<PointId> members;
        for (PointId p = 0; p < space.size(); ++p)
            if (rng() % 3) members.push_back(p);
        if (members.empty()) members.push_back(0);
        const Cluster a(members);
        CHECK(mu_star(space, mu, a) <= mu.mass(a));
        const PointId c = a[rng() % a.size()];
        const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const Cluster open = ball(space, a, c, r, BallKind::open);
        const Cluster closed = ball(space, a, c, r, BallKind::closed);
        CHECK(open.is_subset_of(closed));
        CHECK(closed.is_subset_of(a));
        const Cluster other = set_difference(Cluster::all(space.size()), a);
        if (!other.empty())
            for (PointId x : a)
                for (PointId y : other) CHECK(set_distance(space, a, other) <= space(x, y));
    }
}

TEST_CASE("minimum positive distance") {
    CHECK(min_positive_distance(testing::line_space({0.0, 0.5, 2.0})) == 0.5);
    CHECK(min_positive_distance(testing::unit_line(1)) == 0.0);
}
