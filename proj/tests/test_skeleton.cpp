#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "umskel/instances.hpp"
#include "umskel/skeleton.hpp"

using namespace umskel;

namespace {

std::string first_failure_name(const CheckReport& r) {
    return r.all_pass() ? std::string() : r.first_failure()->name + ": " + r.first_failure()->detail;
}

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<std::pair<double, double>>& xy) {
    double mx = 0, my = 0;
    for (const auto& [x, y] : xy) {
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxy = 0, sxx = 0;
    for (const auto& [x, y] : xy) {
        sxy += (std::log(x) - mx) * (std::log(y) - my);
        sxx += (std::log(x) - mx) * (std::log(x) - mx);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("single point skeleton") {
    const auto space = testing::unit_line(1);
    const auto tree = build_skeleton(space, PointMeasure::uniform(1), 2);
    REQUIRE(tree.size() == 1);
    CHECK(tree[0].is_leaf());
    CHECK(tree[0].delta == 0.0);
    const auto um = skeleton_measure(tree);
    CHECK(um.points == Cluster{0});
    CHECK(um.nu[0] == 1.0);
    CHECK_THROWS(distortion(space, um));
    CHECK(ultrametric_distance(um, 0, 0) == 0.0);
}

TEST_CASE("two point skeleton") {
    const auto space = testing::unit_line(2);
    const auto mu = PointMeasure::uniform(2);
    const auto tree = build_skeleton(space, mu, 2);
    REQUIRE(tree.size() == 3);
    CHECK(tree[0].delta == 1.0);
    CHECK(tree[0].xi == doctest::Approx(std::sqrt(2.0)));
    CHECK(tree[1].xi == doctest::Approx(0.5 / std::sqrt(0.5)));
    CHECK(tree[2].xi == doctest::Approx(0.5 / std::sqrt(0.5)));
    CHECK(tree[1].cluster == Cluster{0});
    CHECK(tree[2].cluster == Cluster{1});

    const auto um = skeleton_measure(tree);
    CHECK(um.nu[0] == 0.5);
    CHECK(um.nu[1] == 0.5);
    CHECK(ultrametric_distance(um, 0, 1) == 1.0);
    CHECK(distortion(space, um) == 1.0);

    const CoverEstimate lambda = doubling_estimate(space);
    const auto growth = check_measure_growth(space, mu, um, 2, lambda);
    CHECK(growth.all_pass());
    CHECK(verify_tree(space, mu, tree).all_pass());
}

TEST_CASE("cantor skeleton satisfies the tree invariants") {
    const auto inst = generate(cantor_spec(3));
    const auto tree = build_skeleton(inst.space, inst.mu, 2);
    const auto report = verify_tree(inst.space, inst.mu, tree);
    CHECK_MESSAGE(report.all_pass(), first_failure_name(report));
    for (const auto& node : tree.nodes)
        if (!node.is_leaf()) {
            const auto [a, b] = *node.children;
            CHECK(node.xi <= (tree[a].xi + tree[b].xi) * (1.0 + 1e-9));
        }
    CHECK(tree.leaves().size() == build_skeleton(inst.space, inst.mu, 2).leaves().size());
}

TEST_CASE("skeleton measure matches the path product of xi ratios") {
    const auto inst = generate(cantor_spec(2));
    const auto tree = build_skeleton(inst.space, inst.mu, 2);
    const auto um = skeleton_measure(tree);
    double total = 0.0;
    for (NodeId leaf : tree.leaves()) {
        // Recompute xi from the clusters rather than trusting stored values.
        double expected = 1.0;
        const auto path = tree.path_to_root(leaf);
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            const NodeId child = path[k];
            const auto [a, b] = *tree[path[k + 1]].children;
            const double xa = xi_value(inst.space, inst.mu, tree[a].cluster, 2);
            const double xb = xi_value(inst.space, inst.mu, tree[b].cluster, 2);
            expected *= (child == a ? xa : xb) / (xa + xb);
        }
        const PointId p = tree[leaf].cluster.front();
        CHECK(um.nu[p] == doctest::Approx(expected).epsilon(1e-12));
        total += um.nu[p];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("skeleton measure needs a probability measure") {
    const auto space = testing::unit_line(3);
    const auto tree = build_skeleton(space, PointMeasure({0.2, 0.2, 0.2}), 2);
    CHECK_THROWS_WITH(skeleton_measure(tree), "measure not normalized");
}

TEST_CASE("ultrametric distance rejects points outside the skeleton") {
    // Three collinear points where the middle one is discarded by the split.
    const auto space = testing::unit_line(9);
    const auto tree = build_skeleton(space, PointMeasure::uniform(9), 2);
    const auto um = skeleton_measure(tree);
    bool found = false;
    for (PointId p = 0; p < 9; ++p)
        if (um.leaf_of[p] == kNoNode) {
            CHECK_THROWS_WITH(ultrametric_distance(um, p, um.points.front()),
                              "point not in skeleton");
            found = true;
        }
    if (!found) CHECK(um.points.size() == 9);
    CHECK_THROWS(ultrametric_distance(um, 99, 0));
}

TEST_CASE("sixteen point line distortion") {
    const auto space = testing::unit_line(16);
    const auto mu = PointMeasure::uniform(16);
    const auto um = skeleton_measure(build_skeleton(space, mu, 2));
    const double dist = distortion(space, um);
    CHECK(dist >= 1.0);
    CHECK(dist <= 16.0);
    double oracle = 0.0;
    for (PointId x : um.points)
        for (PointId y : um.points)
            if (x != y) oracle = std::max(oracle, ultrametric_distance(um, x, y) / space(x, y));
    CHECK(dist == oracle);
    // Regression value of the deterministic construction.
    CHECK(dist == 10.0);
}

TEST_CASE("measure growth on a cantor set") {
    const auto inst = generate(cantor_spec(4));
    const auto um = skeleton_measure(build_skeleton(inst.space, inst.mu, 2));
    const auto lambda = doubling_estimate(inst.space);
    const auto report = check_measure_growth(inst.space, inst.mu, um, 2, lambda);
    CHECK_MESSAGE(report.all_pass(), first_failure_name(report));
    CHECK(report.at("growth_internal").evaluated > 0);
    const auto wrong = generate(cantor_spec(3));
    CHECK_THROWS(check_measure_growth(wrong.space, wrong.mu, um, 2, lambda));
}

TEST_CASE("frostman fit on a uniform line matches the closed form") {
    const std::size_t n = 256;
    const auto space = testing::unit_line(n);
    const auto mu = PointMeasure::uniform(n);
    const std::vector<double> radii{1, 2, 4, 8, 16, 32};
    const auto fit = frostman_fit(space, mu, radii);
    std::vector<std::pair<double, double>> closed;
    for (double r : radii) closed.emplace_back(r, (2.0 * r + 1.0) / static_cast<double>(n));
    CHECK(fit.exponent == doctest::Approx(log_log_slope(closed)).epsilon(1e-9));
    CHECK(fit.exponent == doctest::Approx(1.0).epsilon(0.15));
    REQUIRE(fit.samples.size() == radii.size());
    CHECK(fit.samples[2].second == doctest::Approx(9.0 / 256.0));
}

TEST_CASE("frostman fit of a single atom is flat") {
    const auto fit = frostman_fit(testing::unit_line(1), PointMeasure::uniform(1), {1, 2, 4, 8});
    CHECK(fit.exponent == doctest::Approx(0.0));
    CHECK(fit.constant == doctest::Approx(1.0));
}

TEST_CASE("frostman fit of the cantor measure") {
    const auto inst = generate(cantor_spec(7));
    const auto radii = dyadic_radii(std::pow(3.0, -7), 1.0);
    const auto fit = frostman_fit(inst.space, inst.mu, radii);
    CHECK(std::abs(fit.exponent - std::log(2.0) / std::log(3.0)) <= 0.1);
}

TEST_CASE("frostman fit rejects degenerate radii") {
    const auto space = testing::unit_line(4);
    const auto mu = PointMeasure::uniform(4);
    CHECK_THROWS(frostman_fit(space, mu, {1, 2}));
    CHECK_THROWS(frostman_fit(space, mu, {1, 1.5, 2}));
    CHECK_THROWS(frostman_fit(space, mu, {0, 1, 4}));
    CHECK_THROWS(frostman_fit(space, PointMeasure({0, 0, 0, 0}), {1, 2, 4}));
}

TEST_CASE("dyadic radii") {
    CHECK(dyadic_radii(0.3, 2.0) == std::vector<double>{2.0, 1.0, 0.5});
    CHECK(dyadic_radii(0.25, 1.0) == std::vector<double>{1.0, 0.5, 0.25});
    CHECK(dyadic_radii(3.0, 1.0).empty());
}

TEST_CASE("skeleton construction is deterministic") {
    const auto inst = generate(random_doubling_spec(3, 3));
    CHECK(build_skeleton(inst.space, inst.mu, 3) == build_skeleton(inst.space, inst.mu, 3));
}

TEST_CASE("random spaces satisfy every skeleton guarantee") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 1 + rng() % 40;
        const auto space = (rep % 2) ? testing::random_plane_space(rng, n)
                                      : testing::random_lattice_space(rng, n);
        const auto mu = testing::random_probability(rng, n);
        const int t = 2 + static_cast<int>(rng() % 3);
        const auto tree = build_skeleton(space, mu, t);
        const auto um = skeleton_measure(tree);
        const auto lambda = doubling_estimate(space);
        CheckReport all = verify_tree(space, mu, tree);
        all.merge(check_ultrametric_axioms(um));
        all.merge(check_distortion_sandwich(space, um, t));
        all.merge(check_skeleton_measure(um, lambda));
        all.merge(check_measure_growth(space, mu, um, t, lambda));
        CHECK_MESSAGE(all.all_pass(), first_failure_name(all));

        // Leaf map is a bijection onto U.
        CHECK(um.points.size() == tree.leaves().size());
        for (PointId p : um.points) CHECK(tree[um.leaf_of[p]].cluster == Cluster{p});

        // The matrix agrees with per-pair least common ancestor queries.
        const auto rho = ultrametric_matrix(um);
        const std::size_t k = um.points.size();
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                CHECK(rho[i * k + j] == ultrametric_distance(um, um.points[i], um.points[j]));
    }
}

TEST_CASE("verify_tree catches tampering") {
    const auto inst = generate(cantor_spec(3));
    auto tree = build_skeleton(inst.space, inst.mu, 2);
    auto tampered = tree;
    tampered.nodes[1].delta *= 1.5;
    CHECK_FALSE(verify_tree(inst.space, inst.mu, tampered).passed("delta_consistency"));

    auto swapped = tree;
    std::swap(swapped.nodes[0].children->at(0), swapped.nodes[0].children->at(1));
    CHECK_FALSE(verify_tree(inst.space, inst.mu, swapped).all_pass());

    auto wrong_xi = tree;
    wrong_xi.nodes[2].xi += 0.25;
    CHECK_FALSE(verify_tree(inst.space, inst.mu, wrong_xi).passed("xi_consistency"));
}

TEST_CASE("axiom checker flags a broken ultrametric") {
    const auto space = testing::unit_line(4);
    const auto mu = PointMeasure::uniform(4);
    auto um = skeleton_measure(build_skeleton(space, mu, 2));
    REQUIRE(um.points.size() >= 3);
    // Raising a leaf's parent label above the root breaks the strong triangle
    // inequality for some triple.
    for (auto& node : um.tree.nodes)
        if (!node.is_leaf() && node.parent != kNoNode) node.delta = 100.0;
    const auto report = check_ultrametric_axioms(um);
    CHECK(report.passed("ultrametric_symmetry"));
    CHECK_FALSE(report.passed("ultrametric_strong_triangle"));
}
