#include "umskel/nearly_um.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace umskel {

int ScaleSchedule::t_at(int level) const {
    if (level < 1 || level > max_level || static_cast<std::size_t>(level) > t_of.size())
        throw std::out_of_range("missing schedule level " + std::to_string(level));
    return t_of[static_cast<std::size_t>(level - 1)];
}

double ScaleSchedule::lambda_at(int level) const {
    if (level < 1 || static_cast<std::size_t>(level) > lambda_profile.size())
        throw std::out_of_range("missing schedule level " + std::to_string(level));
    return static_cast<double>(lambda_profile[static_cast<std::size_t>(level - 1)].count);
}

bool ScaleSchedule::is_constant() const {
    return !t_of.empty() &&
           std::all_of(t_of.begin(), t_of.end(), [&](int t) { return t == t_of.front(); });
}

ScaleSchedule ScaleSchedule::constant(int t0, int max_level) {
    if (t0 < 2) throw std::invalid_argument("t must be at least 2");
    if (max_level < 1) throw std::invalid_argument("max_level must be positive");
    ScaleSchedule s;
    s.max_level = max_level;
    s.lambda_profile.assign(static_cast<std::size_t>(max_level), CoverEstimate{1, true});
    s.eta.assign(static_cast<std::size_t>(max_level), 0.0);
    s.t_of.assign(static_cast<std::size_t>(max_level), t0);
    return s;
}

int level_of(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("level needs a positive finite length");
    int e = 0;
    const double m = std::frexp(delta, &e);
    return m == 0.5 ? 1 - e : -e;
}

int default_max_level(const FiniteMetricSpace& space) {
    if (space.size() < 2) return 1;
    int e = 0;
    std::frexp(min_positive_distance(space), &e);
    // ceil(-log2 m) = 1 - e for every positive m.
    return std::max(1, 2 - e);
}

std::vector<CoverEstimate> doubling_profile(const FiniteMetricSpace& space, int max_level) {
    std::vector<CoverEstimate> out;
    const std::size_t n = space.size();
    const double smallest = n >= 2 ? min_positive_distance(space) : 0.0;
    const Cluster everything = Cluster::all(n);
    for (int i = 1; i <= max_level; ++i) {
        const double scale = std::ldexp(1.0, -i);
        std::size_t best = 1;
        if (n >= 2 && scale >= smallest) {
            for (PointId x = 0; x < n; ++x) {
                const Cluster b = ball(space, everything, x, scale, BallKind::closed);
                if (b.size() <= best) continue;
                best = std::max(best, greedy_cover_count(space, b, scale / 16.0).count);
            }
        }
        out.push_back({best, true});
    }
    return out;
}

ScaleSchedule schedule_from_epsilon(const std::vector<CoverEstimate>& profile, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (profile.empty()) throw std::invalid_argument("empty doubling profile");
    ScaleSchedule s;
    s.epsilon = epsilon;
    s.max_level = static_cast<int>(profile.size());
    s.lambda_profile = profile;
    int running = 2;
    for (std::size_t k = 0; k < profile.size(); ++k) {
        const double i = static_cast<double>(k + 1);
        const double lambda = static_cast<double>(std::max<std::size_t>(profile[k].count, 1));
        const double eta = std::log2(std::log(std::numbers::e * lambda)) / i;
        const double exponent = i * (eta + 2.0 * std::numbers::log2e / std::sqrt(i));
        const double raw = std::ceil(std::exp2(exponent) / epsilon);
        if (!(raw < 1e9)) throw std::overflow_error("schedule parameter too large");
        running = std::max(running, static_cast<int>(raw));
        s.eta.push_back(eta);
        s.t_of.push_back(running);
    }
    return s;
}

RescaledSpace rescale_to_half(const FiniteMetricSpace& space) {
    if (space.size() < 2) throw std::invalid_argument("cannot rescale a single point");
    const double diam = diameter(space, Cluster::all(space.size()));
    if (!(diam > 0.0)) throw std::invalid_argument("cannot rescale a space of diameter 0");
    const double denom = 2.0 * diam;
    std::vector<double> table = space.table();
    for (double& d : table) d /= denom;
    return {FiniteMetricSpace(space.size(), std::move(table)), 1.0 / denom};
}

SkeletonTree build_nearly_um_skeleton(const FiniteMetricSpace& space, const PointMeasure& mu,
                                      const ScaleSchedule& schedule) {
    auto t_for = [&](double delta) {
        if (delta == 0.0) return schedule.t_of.empty() ? 2 : schedule.t_of.back();
        return schedule.t_at(level_of(delta));
    };
    return build_tree(space, mu, t_for, schedule.is_constant() ? schedule.t_of.front() : 0);
}

SkeletonTree relabel_deltas(const SkeletonTree& tree, const FiniteMetricSpace& space) {
    SkeletonTree out = tree;
    for (auto& node : out.nodes) node.delta = diameter(space, node.cluster);
    return out;
}

std::vector<NodeId> level_sets(const SkeletonTree& tree, int i) {
    std::vector<NodeId> out;
    const double scale = std::ldexp(1.0, -i);
    const auto end = tree.subtree_ends();
    for (NodeId v = 0; v < tree.size();) {
        if (tree.nodes[v].delta <= scale) {
            out.push_back(v);
            v = end[v];
        } else {
            ++v;
        }
    }
    return out;
}

Cluster cluster_union(const SkeletonTree& tree, const std::vector<NodeId>& nodes) {
    std::vector<PointId> all;
    for (NodeId v : nodes)
        all.insert(all.end(), tree.nodes[v].cluster.begin(), tree.nodes[v].cluster.end());
    return Cluster(std::move(all));
}

namespace {

Cluster leaf_points(const SkeletonTree& tree) {
    std::vector<PointId> pts;
    for (NodeId v : tree.leaves()) pts.push_back(tree.nodes[v].cluster.front());
    return Cluster(std::move(pts));
}

}  // namespace

CheckReport check_level_structure(const SkeletonTree& tree, int max_level) {
    PredicateCheck antichain("level_antichain");
    PredicateCheck nesting("level_nesting");
    PredicateCheck transition("level_transition");
    PredicateCheck final_level("level_final_is_skeleton");
    const auto end = tree.subtree_ends();

    std::vector<std::vector<NodeId>> levels;
    for (int i = 1; i <= max_level + 1; ++i) levels.push_back(level_sets(tree, i));

    Cluster previous;
    for (int i = 1; i <= max_level + 1; ++i) {
        const auto& level = levels[static_cast<std::size_t>(i - 1)];
        for (std::size_t a = 0; a + 1 < level.size(); ++a)
            antichain.observe(end[level[a]] <= level[a + 1],
                              "level " + std::to_string(i) + " nodes " +
                                  std::to_string(level[a]) + " and " +
                                  std::to_string(level[a + 1]) + " are nested");
        const Cluster uni = cluster_union(tree, level);
        if (i > 1)
            nesting.observe(uni.is_subset_of(previous),
                            "level " + std::to_string(i) + " union is not inside level " +
                                std::to_string(i - 1));
        previous = uni;
        if (i > max_level) break;

        // Below a node u of Level_i that is not in Level_{i+1}, the next level
        // consists of the P children along u's chain of Q children, plus the
        // first Q descendant that is already small enough.
        const auto& next = levels[static_cast<std::size_t>(i)];
        const double half = std::ldexp(1.0, -(i + 1));
        for (NodeId u : level) {
            if (tree.nodes[u].delta <= half) continue;
            std::vector<NodeId> expected;
            NodeId w = u;
            while (tree.nodes[w].delta > half) {
                const auto [p, q] = *tree.nodes[w].children;
                expected.push_back(p);
                w = q;
            }
            expected.push_back(w);
            std::sort(expected.begin(), expected.end());
            std::vector<NodeId> actual;
            for (NodeId v : next)
                if (u <= v && v < end[u]) actual.push_back(v);
            transition.observe(actual == expected, "level " + std::to_string(i) + " node " +
                                                       std::to_string(u));
        }
    }
    final_level.observe(cluster_union(tree, levels.back()) == leaf_points(tree),
                        "finest level is not the set of leaf points");

    CheckReport report;
    report.add(antichain.result());
    report.add(nesting.result());
    report.add(transition.result());
    report.add(final_level.result());
    return report;
}

MassRetention check_mass_retention(const FiniteMetricSpace& space, const PointMeasure& mu,
                                   const SkeletonTree& tree, const ScaleSchedule& schedule) {
    if (mu.size() != space.size() || tree.n_points != space.size())
        throw std::invalid_argument("tree does not match space");
    MassRetention out;
    InequalityCheck per_level("level_mass_decrease", kMassTolerance);
    std::vector<double> level_mass;
    for (int i = 1; i <= schedule.max_level + 1; ++i)
        level_mass.push_back(mu.mass(cluster_union(tree, level_sets(tree, i))));
    double log_bound = 0.0;
    for (int i = 1; i <= schedule.max_level; ++i) {
        const double lambda = schedule.lambda_at(i);
        const double t = static_cast<double>(schedule.t_at(i));
        per_level.observe(level_mass[static_cast<std::size_t>(i - 1)],
                          std::pow(lambda, 1.0 / t) * level_mass[static_cast<std::size_t>(i)],
                          "level " + std::to_string(i));
        log_bound -= std::log(lambda) / t;
    }
    out.mass_retained = mu.mass(leaf_points(tree));
    out.product_bound = std::exp(log_bound);
    out.above_one_minus_epsilon = out.mass_retained > 1.0 - schedule.epsilon;

    InequalityCheck product("mass_retention_product", kMassTolerance);
    product.observe(out.product_bound, out.mass_retained, "prod lambda^(-1/t) <= mu(U)");
    PredicateCheck eps("mass_retention_epsilon");
    eps.observe(out.above_one_minus_epsilon,
                "mu(U)=" + format_double(out.mass_retained) + " is not above 1-epsilon=" +
                    format_double(1.0 - schedule.epsilon));
    out.report.add(per_level.result());
    out.report.add(product.result());
    out.report.add(eps.result());
    return out;
}

ScalewiseDistortion check_scalewise_distortion(const FiniteMetricSpace& space,
                                               const UltrametricSkeleton& um,
                                               const ScaleSchedule& schedule, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    ScalewiseDistortion out;
    InequalityCheck lower("scalewise_dominates_d");
    InequalityCheck upper("scalewise_distortion_bound");
    PredicateCheck covered("scalewise_levels_covered");
    const std::size_t k = um.points.size();
    const auto rho = ultrametric_matrix(um);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double d = space(um.points[i], um.points[j]);
            const double r = rho[i * k + j];
            auto witness = [&] {
                return "pair (" + std::to_string(um.points[i]) + "," +
                       std::to_string(um.points[j]) + ")";
            };
            lower.observe_lazy(d, r, witness);
            const int level = level_of(d);
            if (!covered.observe_lazy(level >= 1 && level <= schedule.max_level, witness))
                continue;
            upper.observe_lazy(r, 8.0 * schedule.t_at(level) * d, witness);
            out.c_beta = std::max(out.c_beta, r / std::pow(d, beta));
        }
    out.report.add(lower.result());
    out.report.add(upper.result());
    out.report.add(covered.result());
    return out;
}

}  // namespace umskel
