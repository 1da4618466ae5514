#pragma once

#include <vector>

#include "umskel/check_report.hpp"
#include "umskel/metric_space.hpp"
#include "umskel/skeleton.hpp"

namespace umskel {

/// Per-level split parameters. Level i (1-based) covers diameters in
/// (2^{-i-1}, 2^{-i}]; vectors are indexed by i - 1.
struct ScaleSchedule {
    double epsilon = 0.5;
    int max_level = 0;
    std::vector<CoverEstimate> lambda_profile;
    std::vector<double> eta;
    std::vector<int> t_of;

    /// Throws std::out_of_range("missing schedule level") outside [1, max_level].
    int t_at(int level) const;
    double lambda_at(int level) const;
    bool is_constant() const;

    /// t(i) = t0 at every level, profile all 1 and eta all 0.
    static ScaleSchedule constant(int t0, int max_level);

    friend bool operator==(const ScaleSchedule&, const ScaleSchedule&) = default;
};

/// floor(-log2(delta)) for delta > 0, exact for all positive doubles.
int level_of(double delta);

/// ceil(-log2(min positive distance)) + 1; 1 for a single point.
int default_max_level(const FiniteMetricSpace& space);

/// For i = 1..max_level, the largest greedy count of pieces of diameter
/// 2^{-i}/16 needed for a ball B(x, 2^{-i}), over all centres. Levels whose
/// scale is below the smallest distance get 1.
std::vector<CoverEstimate> doubling_profile(const FiniteMetricSpace& space, int max_level);

/// eta(i) = log2(ln(e lambda_i)) / i and
/// t(i) = ceil(2^{i (eta(i) + 2 log2(e) / sqrt(i))} / epsilon), then a running
/// maximum over i and a floor of 2.
ScaleSchedule schedule_from_epsilon(const std::vector<CoverEstimate>& profile, double epsilon);

struct RescaledSpace {
    FiniteMetricSpace space;
    double alpha = 1.0;  ///< new distance = alpha * old distance
};

/// Scales the space to diameter exactly 1/2.
RescaledSpace rescale_to_half(const FiniteMetricSpace& space);

/// Splits a cluster of diameter delta with t = schedule.t_at(level_of(delta)).
/// A constant schedule reproduces build_skeleton node for node.
SkeletonTree build_nearly_um_skeleton(const FiniteMetricSpace& space, const PointMeasure& mu,
                                      const ScaleSchedule& schedule);

/// Copy of the tree with every delta replaced by the cluster diameter in
/// `space` (used to express a tree built on a rescaled space in original units).
SkeletonTree relabel_deltas(const SkeletonTree& tree, const FiniteMetricSpace& space);

/// Shallowest nodes with delta <= 2^{-i}, in preorder.
std::vector<NodeId> level_sets(const SkeletonTree& tree, int i);

/// Union of the clusters of the given nodes.
Cluster cluster_union(const SkeletonTree& tree, const std::vector<NodeId>& nodes);

/// Antichain, nesting, level transition and final-level checks for levels
/// 1..max_level + 1.
CheckReport check_level_structure(const SkeletonTree& tree, int max_level);

struct MassRetention {
    CheckReport report;
    double mass_retained = 0.0;  ///< mu(U)
    double product_bound = 1.0;  ///< prod_i lambda_i^{-1/t(i)}
    bool above_one_minus_epsilon = false;
};

/// Per-level mass decrease with the profile's lambda estimates, mu(U) against
/// the product bound, and mu(U) > 1 - epsilon.
MassRetention check_mass_retention(const FiniteMetricSpace& space, const PointMeasure& mu,
                                   const SkeletonTree& tree, const ScaleSchedule& schedule);

struct ScalewiseDistortion {
    CheckReport report;
    /// max over pairs of rho / d^beta in the (rescaled) space of the tree.
    double c_beta = 0.0;
};

/// d <= rho and rho <= 8 t(floor(-log2 d)) d over all pairs of U, exact.
ScalewiseDistortion check_scalewise_distortion(const FiniteMetricSpace& space,
                                               const UltrametricSkeleton& um,
                                               const ScaleSchedule& schedule, double beta);

}  // namespace umskel
