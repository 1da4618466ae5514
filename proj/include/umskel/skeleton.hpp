#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "umskel/check_report.hpp"
#include "umskel/metric_space.hpp"
#include "umskel/ramsey.hpp"

namespace umskel {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct SkeletonNode {
    Cluster cluster;
    double delta = 0.0;    ///< diam(cluster)
    double mass = 0.0;     ///< mu(cluster)
    double mu_star = 0.0;
    double xi = 0.0;       ///< mass / mu_star^{1/t}
    int t = 2;             ///< parameter of this node's split (a leaf inherits its parent's)
    NodeId parent = kNoNode;
    std::optional<std::array<NodeId, 2>> children;  ///< (P side, Q side)
    std::optional<Decomposition> split;

    bool is_leaf() const { return !children.has_value(); }
    friend bool operator==(const SkeletonNode&, const SkeletonNode&) = default;
};

/// Full binary tree of clusters. Nodes are stored in preorder, so the subtree
/// of v occupies the id range [v, subtree_end(v)).
struct SkeletonTree {
    std::size_t n_points = 0;
    /// Split parameter when constant, 0 when it varies with scale.
    int t = 2;
    std::vector<SkeletonNode> nodes;

    NodeId root() const { return 0; }
    const SkeletonNode& operator[](NodeId v) const { return nodes[v]; }
    std::size_t size() const { return nodes.size(); }

    std::vector<NodeId> subtree_ends() const;
    /// Leaves in preorder.
    std::vector<NodeId> leaves() const;
    /// Ancestors of v from v itself up to the root.
    std::vector<NodeId> path_to_root(NodeId v) const;

    friend bool operator==(const SkeletonTree&, const SkeletonTree&) = default;
};

/// Recursive splitting with a scale-dependent parameter: a cluster of diameter
/// delta is split with t = t_for_delta(delta). Used by both the fixed and the
/// scale-scheduled skeletons.
SkeletonTree build_tree(const FiniteMetricSpace& space, const PointMeasure& mu,
                        const std::function<int(double)>& t_for_delta, int tree_t);

SkeletonTree build_skeleton(const FiniteMetricSpace& space, const PointMeasure& mu, int t);

/// The subset U (one point per leaf), the leaf map and the skeleton measure.
struct UltrametricSkeleton {
    SkeletonTree tree;
    Cluster points;
    /// Indexed by point id; kNoNode for points outside U.
    std::vector<NodeId> leaf_of;
    /// Supported on `points`, sized to the whole space.
    PointMeasure nu;
};

/// Splits unit mass top-down in proportion to the children's xi values.
/// Requires the tree's measure to be a probability measure.
UltrametricSkeleton skeleton_measure(SkeletonTree tree);

/// Diameter label of the least common ancestor of the two leaves.
double ultrametric_distance(const UltrametricSkeleton& um, PointId x, PointId y);

/// All pairwise ultrametric distances over `um.points`, row-major in the
/// order of `um.points`.
std::vector<double> ultrametric_matrix(const UltrametricSkeleton& um);

/// Largest rho/d over distinct pairs of U.
double distortion(const FiniteMetricSpace& space, const UltrametricSkeleton& um);

/// Structural invariants shared by fixed and scheduled trees: root, laminar
/// children, labels, leaves, separation at every split (with that split's t),
/// stored xi values, xi sub-additivity and per-split decomposition checks.
CheckReport verify_tree(const FiniteMetricSpace& space, const PointMeasure& mu,
                        const SkeletonTree& tree);

/// Ultrametric axioms on U: exhaustive over triples up to `exhaustive_limit`
/// points, otherwise `sampled_triples` seeded random triples.
CheckReport check_ultrametric_axioms(const UltrametricSkeleton& um,
                                     std::size_t exhaustive_limit = 256,
                                     std::size_t sampled_triples = 100000);

/// d <= rho <= 8t d over all pairs of U, exact comparisons.
CheckReport check_distortion_sandwich(const FiniteMetricSpace& space,
                                      const UltrametricSkeleton& um, int t);

/// Total mass, nu <= xi on every subtree, and the two-sided xi bounds using
/// lambda_hat in place of the doubling constant and each node's own t.
CheckReport check_skeleton_measure(const UltrametricSkeleton& um,
                                   const CoverEstimate& lambda_hat);

/// Measure growth at every centre and jump radius:
///  - growth_cover_containment: B(x,r) cap U lies in the rho-ball node v;
///  - growth_internal: nu(B(x,r)) <= xi(v);
///  - growth_bound: nu(B(x,r)) <= lambda^{2/t} mu(B(x,(16t+1)r))^{1-1/t}.
CheckReport check_measure_growth(const FiniteMetricSpace& space, const PointMeasure& mu,
                                 const UltrametricSkeleton& um, int t,
                                 const CoverEstimate& lambda_hat);

/// Greedy doubling estimate: the largest greedy count of pieces of diameter
/// s/2 covering a ball B(x, s), over centres x and dyadic scales
/// s = diam 2^{-j} down to the smallest distance.
CoverEstimate doubling_estimate(const FiniteMetricSpace& space);

struct FrostmanFit {
    double exponent = 0.0;
    double constant = 0.0;
    std::vector<std::pair<double, double>> samples;  ///< (radius, max ball mass)
};

/// Least-squares slope of log max_x measure(B(x, r)) against log r.
FrostmanFit frostman_fit(const FiniteMetricSpace& space, const PointMeasure& measure,
                         const std::vector<double>& radii);

/// Powers of two in [lo, hi], largest first.
std::vector<double> dyadic_radii(double lo, double hi);

}  // namespace umskel
