#include "umskel/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace umskel {

std::vector<NodeId> SkeletonTree::subtree_ends() const {
    std::vector<NodeId> end(nodes.size());
    for (NodeId v = nodes.size(); v-- > 0;)
        end[v] = nodes[v].is_leaf() ? v + 1 : end[(*nodes[v].children)[1]];
    return end;
}

std::vector<NodeId> SkeletonTree::leaves() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < nodes.size(); ++v)
        if (nodes[v].is_leaf()) out.push_back(v);
    return out;
}

std::vector<NodeId> SkeletonTree::path_to_root(NodeId v) const {
    std::vector<NodeId> out;
    for (; v != kNoNode; v = nodes[v].parent) out.push_back(v);
    return out;
}

namespace {

double xi_of(double mass, double mu_star, int t) {
    if (mass == 0.0) return 0.0;
    return mass / std::pow(mu_star, 1.0 / t);
}

class TreeBuilder {
public:
    TreeBuilder(const FiniteMetricSpace& space, const PointMeasure& mu,
                const std::function<int(double)>& t_for_delta, SkeletonTree& tree)
        : space_(space), mu_(mu), t_for_delta_(t_for_delta), tree_(tree) {}

    NodeId grow(Cluster cluster, NodeId parent, int inherited_t) {
        const NodeId id = tree_.nodes.size();
        tree_.nodes.emplace_back();
        SkeletonNode node;
        node.delta = diameter(space_, cluster);
        node.mass = mu_.mass(cluster);
        node.mu_star = mu_star(space_, mu_, cluster);
        node.parent = parent;
        if (cluster.size() == 1) {
            node.t = inherited_t;
            node.xi = xi_of(node.mass, node.mu_star, node.t);
            node.cluster = std::move(cluster);
            tree_.nodes[id] = std::move(node);
            return id;
        }
        node.t = t_for_delta_(node.delta);
        node.xi = xi_of(node.mass, node.mu_star, node.t);
        Decomposition dec = bartal_decompose(space_, mu_, cluster, node.t);
        node.cluster = std::move(cluster);
        const int t = node.t;
        Cluster p = dec.p;
        Cluster q = dec.q;
        node.split = std::move(dec);
        tree_.nodes[id] = std::move(node);
        const NodeId left = grow(std::move(p), id, t);
        const NodeId right = grow(std::move(q), id, t);
        tree_.nodes[id].children = std::array<NodeId, 2>{left, right};
        return id;
    }

private:
    const FiniteMetricSpace& space_;
    const PointMeasure& mu_;
    const std::function<int(double)>& t_for_delta_;
    SkeletonTree& tree_;
};

}  // namespace

SkeletonTree build_tree(const FiniteMetricSpace& space, const PointMeasure& mu,
                        const std::function<int(double)>& t_for_delta, int tree_t) {
    if (space.size() == 0) throw std::invalid_argument("empty space");
    if (mu.size() != space.size()) throw std::invalid_argument("measure does not match space");
    require_valid(space);
    SkeletonTree tree;
    tree.n_points = space.size();
    tree.t = tree_t;
    TreeBuilder builder(space, mu, t_for_delta, tree);
    builder.grow(Cluster::all(space.size()), kNoNode, t_for_delta(0.0));
    return tree;
}

SkeletonTree build_skeleton(const FiniteMetricSpace& space, const PointMeasure& mu, int t) {
    if (t < 2) throw std::invalid_argument("t must be at least 2");
    return build_tree(space, mu, [t](double) { return t; }, t);
}

UltrametricSkeleton skeleton_measure(SkeletonTree tree) {
    if (tree.nodes.empty()) throw std::invalid_argument("empty tree");
    if (std::abs(tree.nodes[0].mass - 1.0) > 1e-9)
        throw std::invalid_argument("measure not normalized");
    const std::size_t n = tree.n_points;
    std::vector<double> node_nu(tree.size(), 0.0);
    std::vector<double> weights(n, 0.0);
    std::vector<NodeId> leaf_of(n, kNoNode);
    std::vector<PointId> points;
    node_nu[0] = 1.0;
    for (NodeId v = 0; v < tree.size(); ++v) {
        const auto& node = tree.nodes[v];
        if (node.is_leaf()) {
            const PointId p = node.cluster.front();
            weights[p] = node_nu[v];
            leaf_of[p] = v;
            points.push_back(p);
            continue;
        }
        const auto [a, b] = *node.children;
        const double xa = tree.nodes[a].xi;
        const double xb = tree.nodes[b].xi;
        const double s = xa + xb;
        if (s == 0.0) {
            node_nu[a] = node_nu[v] / 2.0;
            node_nu[b] = node_nu[v] / 2.0;
        } else {
            node_nu[a] = xa / s * node_nu[v];
            node_nu[b] = xb / s * node_nu[v];
        }
    }
    UltrametricSkeleton um;
    um.points = Cluster(std::move(points));
    um.leaf_of = std::move(leaf_of);
    um.nu = PointMeasure(std::move(weights));
    um.tree = std::move(tree);
    return um;
}

double ultrametric_distance(const UltrametricSkeleton& um, PointId x, PointId y) {
    if (x >= um.leaf_of.size() || y >= um.leaf_of.size() || um.leaf_of[x] == kNoNode ||
        um.leaf_of[y] == kNoNode)
        throw std::invalid_argument("point not in skeleton");
    if (x == y) return 0.0;
    const auto end = um.tree.subtree_ends();
    const NodeId target = um.leaf_of[y];
    NodeId a = um.leaf_of[x];
    while (!(a <= target && target < end[a])) a = um.tree.nodes[a].parent;
    return um.tree.nodes[a].delta;
}

namespace {

/// Leaf-rank bookkeeping: leaves of the subtree of v have ranks [lo[v], hi[v]).
struct LeafRanks {
    std::vector<std::size_t> lo, hi;
    std::vector<std::size_t> pos;  ///< leaf rank -> position in um.points
};

LeafRanks leaf_ranks(const UltrametricSkeleton& um) {
    const auto& tree = um.tree;
    const auto end = tree.subtree_ends();
    std::vector<std::size_t> prefix(tree.size() + 1, 0);
    for (NodeId v = 0; v < tree.size(); ++v)
        prefix[v + 1] = prefix[v] + (tree.nodes[v].is_leaf() ? 1 : 0);
    LeafRanks r;
    r.lo.resize(tree.size());
    r.hi.resize(tree.size());
    for (NodeId v = 0; v < tree.size(); ++v) {
        r.lo[v] = prefix[v];
        r.hi[v] = prefix[end[v]];
        if (tree.nodes[v].is_leaf()) {
            const PointId p = tree.nodes[v].cluster.front();
            auto it = std::lower_bound(um.points.begin(), um.points.end(), p);
            r.pos.push_back(static_cast<std::size_t>(it - um.points.begin()));
        }
    }
    return r;
}

}  // namespace

std::vector<double> ultrametric_matrix(const UltrametricSkeleton& um) {
    const std::size_t k = um.points.size();
    std::vector<double> m(k * k, 0.0);
    const auto ranks = leaf_ranks(um);
    for (NodeId w = 0; w < um.tree.size(); ++w) {
        const auto& node = um.tree.nodes[w];
        if (node.is_leaf()) continue;
        const auto [a, b] = *node.children;
        for (std::size_t i = ranks.lo[a]; i < ranks.hi[a]; ++i)
            for (std::size_t j = ranks.lo[b]; j < ranks.hi[b]; ++j) {
                const std::size_t pi = ranks.pos[i], pj = ranks.pos[j];
                m[pi * k + pj] = node.delta;
                m[pj * k + pi] = node.delta;
            }
    }
    return m;
}

double distortion(const FiniteMetricSpace& space, const UltrametricSkeleton& um) {
    const std::size_t k = um.points.size();
    if (k < 2) throw std::invalid_argument("distortion needs at least two skeleton points");
    const auto rho = ultrametric_matrix(um);
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            worst = std::max(worst, rho[i * k + j] / space(um.points[i], um.points[j]));
    return worst;
}

CheckReport verify_tree(const FiniteMetricSpace& space, const PointMeasure& mu,
                        const SkeletonTree& tree) {
    CheckReport report;
    const std::size_t n = space.size();
    PredicateCheck root("tree_root");
    PredicateCheck laminar("tree_laminar");
    PredicateCheck labels("delta_consistency");
    PredicateCheck leaves("tree_leaves");
    PredicateCheck monotone("delta_monotone");
    PredicateCheck stored("xi_consistency");
    PredicateCheck witness("split_witness");
    InequalityCheck separation("tree_separation");
    InequalityCheck subadd("xi_subadditive", kMassTolerance);
    CheckReport splits;

    root.observe(tree.n_points == n && mu.size() == n, "tree, space and measure sizes differ");
    root.observe(!tree.nodes.empty() && tree.nodes[0].cluster == Cluster::all(n) &&
                     tree.nodes[0].parent == kNoNode,
                 "root cluster is not the whole space");
    if (!root.result().pass) {
        report.add(root.result());
        return report;
    }

    auto close = [](double a, double b) {
        return std::abs(a - b) <= kMassTolerance * std::max(std::abs(a), std::abs(b));
    };
    const std::size_t count = tree.size();
    std::vector<NodeId> end(count, kNoNode);
    for (NodeId v = count; v-- > 0;) {
        const auto& node = tree.nodes[v];
        if (node.is_leaf()) {
            end[v] = v + 1;
        } else {
            const auto [a, b] = *node.children;
            end[v] = (a < count && b < count && end[b] != kNoNode) ? end[b] : v + 1;
        }
    }

    for (NodeId v = 0; v < count; ++v) {
        const auto& node = tree.nodes[v];
        const std::string at = "node " + std::to_string(v);
        const bool in_range =
            std::all_of(node.cluster.begin(), node.cluster.end(), [&](PointId p) { return p < n; });
        if (!laminar.observe(!node.cluster.empty() && in_range, at + " has an invalid cluster"))
            continue;
        labels.observe_lazy(node.delta == diameter(space, node.cluster), [&] {
            return at + " stores delta " + format_double(node.delta) + " but its diameter is " +
                   format_double(diameter(space, node.cluster));
        });
        leaves.observe(node.is_leaf() == (node.cluster.size() == 1),
                       at + ": leaves must be exactly the singleton clusters");
        leaves.observe(node.is_leaf() == (node.delta == 0.0),
                       at + ": delta must vanish exactly at leaves");
        stored.observe_lazy(close(node.mass, mu.mass(node.cluster)) &&
                                close(node.mu_star, mu_star(space, mu, node.cluster)) &&
                                close(node.xi, xi_of(node.mass, node.mu_star, node.t)),
                            [&] { return at + " stores inconsistent mass, mu* or xi"; });

        if (node.is_leaf()) {
            witness.observe(!node.split.has_value(), at + " is a leaf with a split witness");
            continue;
        }
        const auto [a, b] = *node.children;
        const bool shape = a == v + 1 && b < count && b == end[a] &&
                           tree.nodes[a].parent == v && tree.nodes[b].parent == v;
        if (!laminar.observe(shape, at + " children are not laid out in preorder")) continue;
        const auto& ca = tree.nodes[a].cluster;
        const auto& cb = tree.nodes[b].cluster;
        laminar.observe(ca.is_subset_of(node.cluster) && cb.is_subset_of(node.cluster) &&
                            !ca.intersects(cb) && !ca.empty() && !cb.empty(),
                        at + " children are not disjoint non-empty subsets");
        monotone.observe(tree.nodes[a].delta <= node.delta && tree.nodes[b].delta <= node.delta,
                         at + " has a child with a larger delta");
        laminar.observe(node.t >= 2, at + " split with t < 2");
        if (!ca.empty() && !cb.empty() && node.t >= 1)
            separation.observe_lazy(node.delta / (8.0 * node.t), set_distance(space, ca, cb),
                                    [&] { return at + " d(C0,C1) >= delta/(8t)"; });
        // Children are measured with this split's t; under a schedule their own
        // stored xi may use a larger one.
        const auto& na = tree.nodes[a];
        const auto& nb = tree.nodes[b];
        subadd.observe_lazy(node.xi,
                            xi_of(na.mass, na.mu_star, node.t) + xi_of(nb.mass, nb.mu_star, node.t),
                            [&] { return at + " xi(u) <= xi(u0) + xi(u1)"; });
        if (!witness.observe(node.split.has_value() && node.split->p == ca &&
                                 node.split->q == cb && node.split->t == node.t,
                             at + " split witness does not match its children"))
            continue;
        splits.absorb(verify_decomposition(space, mu, node.cluster, *node.split));
    }
    for (auto* c : {&root, &laminar, &labels, &leaves, &monotone, &stored, &witness})
        report.add(c->result());
    report.add(separation.result());
    report.add(subadd.result());
    report.merge(splits);
    return report;
}

CheckReport check_ultrametric_axioms(const UltrametricSkeleton& um, std::size_t exhaustive_limit,
                                     std::size_t sampled_triples) {
    CheckReport report;
    const std::size_t k = um.points.size();
    const auto rho = ultrametric_matrix(um);
    PredicateCheck sym("ultrametric_symmetry");
    PredicateCheck ident("ultrametric_identity");
    InequalityCheck strong("ultrametric_strong_triangle");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            sym.observe_lazy(rho[i * k + j] == rho[j * k + i], [&] {
                return "pair (" + std::to_string(um.points[i]) + "," +
                       std::to_string(um.points[j]) + ")";
            });
            ident.observe_lazy((rho[i * k + j] == 0.0) == (i == j), [&] {
                return "pair (" + std::to_string(um.points[i]) + "," +
                       std::to_string(um.points[j]) + ")";
            });
        }
    auto triple = [&](std::size_t x, std::size_t y, std::size_t z) {
        strong.observe_lazy(rho[x * k + z], std::max(rho[x * k + y], rho[y * k + z]), [&] {
            return "triple (" + std::to_string(um.points[x]) + "," +
                   std::to_string(um.points[y]) + "," + std::to_string(um.points[z]) + ")";
        });
    };
    if (k <= exhaustive_limit) {
        for (std::size_t x = 0; x < k; ++x)
            for (std::size_t z = x + 1; z < k; ++z) {
                const double direct = rho[x * k + z];
                double best = direct;
                std::size_t arg = x;
                for (std::size_t y = 0; y < k; ++y) {
                    const double via = std::max(rho[x * k + y], rho[y * k + z]);
                    if (via < best) {
                        best = via;
                        arg = y;
                    }
                }
                // Record the tightest witness for this pair; all other y are looser.
                triple(x, arg, z);
            }
    } else if (k > 0) {
        std::mt19937_64 rng(0x5eed);
        for (std::size_t s = 0; s < sampled_triples; ++s) triple(rng() % k, rng() % k, rng() % k);
    }
    report.add(sym.result());
    report.add(ident.result());
    report.add(strong.result());
    return report;
}

CheckReport check_distortion_sandwich(const FiniteMetricSpace& space,
                                      const UltrametricSkeleton& um, int t) {
    CheckReport report;
    const std::size_t k = um.points.size();
    const auto rho = ultrametric_matrix(um);
    InequalityCheck lower("rho_dominates_d");
    InequalityCheck upper("rho_distortion_bound");
    const double factor = 8.0 * t;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double d = space(um.points[i], um.points[j]);
            const double r = rho[i * k + j];
            auto witness = [&] {
                return "pair (" + std::to_string(um.points[i]) + "," +
                       std::to_string(um.points[j]) + ")";
            };
            lower.observe_lazy(d, r, witness);
            upper.observe_lazy(r, factor * d, witness);
        }
    report.add(lower.result());
    report.add(upper.result());
    return report;
}

CheckReport check_skeleton_measure(const UltrametricSkeleton& um,
                                   const CoverEstimate& lambda_hat) {
    CheckReport report;
    const auto& tree = um.tree;
    InequalityCheck total("nu_total");
    total.observe(std::abs(um.nu.total() - 1.0), 1e-9, "|nu(U) - 1| <= 1e-9");
    report.add(total.result());

    std::vector<double> sub(tree.size(), 0.0);
    for (NodeId v = tree.size(); v-- > 0;) {
        const auto& node = tree.nodes[v];
        if (node.is_leaf())
            sub[v] = um.nu[node.cluster.front()];
        else
            sub[v] = sub[(*node.children)[0]] + sub[(*node.children)[1]];
    }
    InequalityCheck dominated("nu_dominated_by_xi", kMassTolerance);
    InequalityCheck lower("xi_lower_bound", kMassTolerance);
    InequalityCheck ratio("doubling_mass_ratio", kMassTolerance);
    InequalityCheck upper("xi_upper_bound", kMassTolerance);
    const double lam = static_cast<double>(lambda_hat.count);
    for (NodeId v = 0; v < tree.size(); ++v) {
        const auto& node = tree.nodes[v];
        const std::string at = "node " + std::to_string(v);
        const double power = 1.0 - 1.0 / node.t;
        dominated.observe_lazy(sub[v], node.xi, [&] { return at; });
        lower.observe_lazy(std::pow(node.mass, power), node.xi, [&] { return at; });
        const double r = node.mass == 0.0 ? 0.0 : node.mass / node.mu_star;
        ratio.observe_lazy(r, lam * lam, [&] { return at + " mu/mu* <= lambda^2"; });
        upper.observe_lazy(node.xi, std::pow(lam, 2.0 / node.t) * std::pow(node.mass, power),
                           [&] { return at; });
    }
    report.add(dominated.result());
    report.add(lower.result());
    report.add(ratio.result());
    report.add(upper.result());
    return report;
}

CheckReport check_measure_growth(const FiniteMetricSpace& space, const PointMeasure& mu,
                                 const UltrametricSkeleton& um, int t,
                                 const CoverEstimate& lambda_hat) {
    const std::size_t n = space.size();
    if (um.tree.n_points != n || mu.size() != n || um.leaf_of.size() != n)
        throw std::invalid_argument("skeleton does not match space");
    const auto& tree = um.tree;
    const auto end = tree.subtree_ends();
    PredicateCheck contain("growth_cover_containment");
    InequalityCheck internal("growth_internal", kMassTolerance);
    InequalityCheck bound("growth_bound");

    const double lam_factor = std::pow(static_cast<double>(lambda_hat.count), 2.0 / t);
    const double power = 1.0 - 1.0 / t;
    const double cover_scale = 16.0 * t;
    const double blowup = 16.0 * t + 1.0;
    const std::size_t k = um.points.size();

    std::vector<std::pair<double, PointId>> u_order(k);
    std::vector<std::pair<double, PointId>> x_order(n);
    std::vector<double> nu_prefix(k + 1), mu_prefix(n + 1);
    std::vector<NodeId> min_leaf(k + 1), max_leaf(k + 1);

    for (PointId x = 0; x < n; ++x) {
        const auto row = space.row(x);
        for (std::size_t i = 0; i < k; ++i) u_order[i] = {row[um.points[i]], um.points[i]};
        std::sort(u_order.begin(), u_order.end());
        for (PointId y = 0; y < n; ++y) x_order[y] = {row[y], y};
        std::sort(x_order.begin(), x_order.end());

        CompensatedSum nu_sum, mu_sum;
        min_leaf[0] = kNoNode;
        max_leaf[0] = 0;
        for (std::size_t i = 0; i < k; ++i) {
            nu_sum.add(um.nu[u_order[i].second]);
            nu_prefix[i + 1] = nu_sum.value();
            const NodeId leaf = um.leaf_of[u_order[i].second];
            min_leaf[i + 1] = std::min(min_leaf[i], leaf);
            max_leaf[i + 1] = std::max(max_leaf[i], leaf);
        }
        for (std::size_t i = 0; i < n; ++i) {
            mu_sum.add(mu[x_order[i].second]);
            mu_prefix[i + 1] = mu_sum.value();
        }
        if (k == 0) continue;

        const PointId y = u_order[0].second;
        const auto chain = tree.path_to_root(um.leaf_of[y]);
        std::size_t level = 0;
        std::size_t within = 0;
        std::size_t mu_within = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const double r = u_order[i].first;
            if (i + 1 < k && u_order[i + 1].first == r) continue;
            within = i + 1;
            const double reach = cover_scale * r;
            while (level + 1 < chain.size() && tree.nodes[chain[level + 1]].delta <= reach) ++level;
            const NodeId v = chain[level];
            const double nu_ball = nu_prefix[within];
            auto witness = [&] {
                return "x=" + std::to_string(x) + " r=" + format_double(r) + " node " +
                       std::to_string(v);
            };
            contain.observe_lazy(min_leaf[within] >= v && max_leaf[within] < end[v], witness);
            internal.observe_lazy(nu_ball, tree.nodes[v].xi, witness);
            const double outer = blowup * r;
            while (mu_within < n && x_order[mu_within].first <= outer) ++mu_within;
            bound.observe_lazy(nu_ball, lam_factor * std::pow(mu_prefix[mu_within], power),
                               witness);
        }
    }
    CheckReport report;
    report.add(contain.result());
    report.add(internal.result());
    report.add(bound.result());
    return report;
}

CoverEstimate doubling_estimate(const FiniteMetricSpace& space) {
    const std::size_t n = space.size();
    if (n < 2) return {1, true};
    const Cluster everything = Cluster::all(n);
    const double diam = diameter(space, everything);
    const double smallest = min_positive_distance(space);
    std::size_t best = 1;
    for (double s = diam; s >= smallest; s /= 2.0) {
        for (PointId x = 0; x < n; ++x) {
            const Cluster b = ball(space, everything, x, s, BallKind::closed);
            if (b.size() <= best) continue;
            best = std::max(best, greedy_cover_count(space, b, s / 2.0).count);
        }
    }
    return {best, true};
}

std::vector<double> dyadic_radii(double lo, double hi) {
    std::vector<double> out;
    if (!(lo > 0.0) || !(hi >= lo)) return out;
    for (int e = std::ilogb(hi); std::ldexp(1.0, e) >= lo; --e) out.push_back(std::ldexp(1.0, e));
    return out;
}

FrostmanFit frostman_fit(const FiniteMetricSpace& space, const PointMeasure& measure,
                         const std::vector<double>& radii) {
    if (radii.size() < 3) throw std::invalid_argument("frostman fit needs at least 3 radii");
    const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
    if (!(*lo > 0.0) || *hi < 4.0 * *lo)
        throw std::invalid_argument("radii must be positive and span two octaves");
    if (measure.size() != space.size() || !(measure.total() > 0.0))
        throw std::invalid_argument("measure must be positive on the space");
    FrostmanFit fit;
    const Cluster everything = Cluster::all(space.size());
    for (double r : radii) {
        double best = 0.0;
        for (PointId x = 0; x < space.size(); ++x)
            best = std::max(best, measure.mass(ball(space, everything, x, r, BallKind::closed)));
        fit.samples.emplace_back(r, best);
    }
    double mx = 0.0, my = 0.0;
    for (const auto& [r, m] : fit.samples) {
        mx += std::log(r);
        my += std::log(m);
    }
    mx /= static_cast<double>(fit.samples.size());
    my /= static_cast<double>(fit.samples.size());
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [r, m] : fit.samples) {
        sxy += (std::log(r) - mx) * (std::log(m) - my);
        sxx += (std::log(r) - mx) * (std::log(r) - mx);
    }
    fit.exponent = sxy / sxx;
    fit.constant = std::exp(my - fit.exponent * mx);
    return fit;
}

}  // namespace umskel
