#pragma once

#include <utility>
#include <vector>

#include "umskel/check_report.hpp"
#include "umskel/metric_space.hpp"

namespace umskel {

/// One Ramsey split of a cluster Z into a well-separated pair (P, Q).
///
/// P is the closed ring-ball H_{i-1} around `center`; Q is everything in Z
/// outside the open ball of radius (1 + i/t) diam(Z) / 8. Points strictly
/// between the two radii belong to neither side.
struct Decomposition {
    Cluster p;
    Cluster q;
    PointId center = 0;         ///< the ratio maximiser x_P
    int ring_index = 1;         ///< chosen i in {1, ..., t}
    int t = 2;
    double parent_diam = 0.0;   ///< diam(Z)
    std::vector<double> ring_masses;  ///< mu(H_0), ..., mu(H_t)

    friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

/// Radius (1 + j/t) * diam / 8, computed so that j = 0 gives diam/8 and
/// j = t gives diam/4 exactly.
double ring_radius(double parent_diam, int j, int t);

/// Mass ratio mu(B(x, diam/8) cap Z) / mu(B°(x, diam/4) cap Z) with 0/0 = 0.
double ball_mass_ratio(double inner_mass, double outer_mass);

/// Whether ring i is light: mu(H_i) <= mu(H_{i-1}) * (mu(H_t)/mu(H_0))^{1/t}.
bool is_light_ring(const std::vector<double>& ring_masses, int i, int t);

/// Splits Z (|Z| >= 2) following the lightest-ring construction. The centre
/// maximises the ball mass ratio (smallest index on ties) and the ring index
/// is the smallest light one.
Decomposition bartal_decompose(const FiniteMetricSpace& space, const PointMeasure& mu,
                               const Cluster& z, int t);

/// (mu(P) * lambda^{1/t}, mu(Z \ Q)) with lambda the greedy diam(Z)/8 cover
/// count of Z. The first entry must dominate the second.
std::pair<double, double> ap_guarantee(const FiniteMetricSpace& space, const PointMeasure& mu,
                                       const Decomposition& dec, const Cluster& z);

/// Relative tolerance on the mass inequalities, whose t-th roots are inexact.
inline constexpr double kMassTolerance = 1e-9;

/// Checks disjointness, containment, separation, diameter halving and the three
/// mass inequalities of one split.
CheckReport verify_decomposition(const FiniteMetricSpace& space, const PointMeasure& mu,
                                 const Cluster& z, const Decomposition& dec);

/// Exhaustive smallest-index maximiser of the ball mass ratio over Z.
PointId brute_force_argmax_ratio(const FiniteMetricSpace& space, const PointMeasure& mu,
                                 const Cluster& z);

/// mu(A) / mu*(A)^{1/t}, 0 for massless or empty A.
double xi_value(const FiniteMetricSpace& space, const PointMeasure& mu, const Cluster& a, int t);

}  // namespace umskel
