#include "umskel/ramsey.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace umskel {

double ring_radius(double parent_diam, int j, int t) {
    return (parent_diam / 8.0) * (1.0 + static_cast<double>(j) / static_cast<double>(t));
}

double ball_mass_ratio(double inner_mass, double outer_mass) {
    if (inner_mass == 0.0 && outer_mass == 0.0) return 0.0;
    return inner_mass / outer_mass;
}

bool is_light_ring(const std::vector<double>& ring_masses, int i, int t) {
    const double growth = ball_mass_ratio(ring_masses[t], ring_masses[0]);
    return ring_masses[i] <= ring_masses[i - 1] * std::pow(growth, 1.0 / t);
}

Decomposition bartal_decompose(const FiniteMetricSpace& space, const PointMeasure& mu,
                               const Cluster& z, int t) {
    if (t < 2) throw std::invalid_argument("t must be at least 2");
    if (z.size() < 2) throw std::invalid_argument("cluster not splittable");
    const double delta = diameter(space, z);
    if (!(delta > 0.0)) throw std::invalid_argument("cluster not splittable");

    const double inner = delta / 8.0;
    const double outer = delta / 4.0;
    PointId center = z.front();
    double best = -1.0;
    for (PointId x : z) {
        const auto row = space.row(x);
        CompensatedSum in, out;
        for (PointId y : z) {
            const double d = row[y];
            if (d <= inner) in.add(mu[y]);
            if (d < outer) out.add(mu[y]);
        }
        const double ratio = ball_mass_ratio(in.value(), out.value());
        if (ratio > best) {
            best = ratio;
            center = x;
        }
    }

    Decomposition dec;
    dec.center = center;
    dec.t = t;
    dec.parent_diam = delta;
    dec.ring_masses.reserve(static_cast<std::size_t>(t) + 1);
    for (int j = 0; j < t; ++j)
        dec.ring_masses.push_back(
            mu.mass(ball(space, z, center, ring_radius(delta, j, t), BallKind::closed)));
    dec.ring_masses.push_back(mu.mass(ball(space, z, center, outer, BallKind::open)));

    int chosen = 0;
    for (int i = 1; i <= t && chosen == 0; ++i)
        if (is_light_ring(dec.ring_masses, i, t)) chosen = i;
    if (chosen == 0) {
        // Only reachable through rounding in the t-th root; take the ring
        // closest to satisfying the light-ring bound.
        const double root = std::pow(ball_mass_ratio(dec.ring_masses[t], dec.ring_masses[0]),
                                     1.0 / t);
        double least = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= t; ++i) {
            const double excess = dec.ring_masses[i] - dec.ring_masses[i - 1] * root;
            if (excess < least) {
                least = excess;
                chosen = i;
            }
        }
    }
    dec.ring_index = chosen;
    dec.p = ball(space, z, center, ring_radius(delta, chosen - 1, t), BallKind::closed);
    dec.q = set_difference(z, ball(space, z, center, ring_radius(delta, chosen, t),
                                   BallKind::open));
    return dec;
}

std::pair<double, double> ap_guarantee(const FiniteMetricSpace& space, const PointMeasure& mu,
                                       const Decomposition& dec, const Cluster& z) {
    const double delta = diameter(space, z);
    const auto lambda = greedy_cover_count(space, z, delta / 8.0).count;
    const double lhs = mu.mass(dec.p) * std::pow(static_cast<double>(lambda), 1.0 / dec.t);
    const double rhs = mu.mass(set_difference(z, dec.q));
    return {lhs, rhs};
}

double xi_value(const FiniteMetricSpace& space, const PointMeasure& mu, const Cluster& a, int t) {
    if (a.empty()) return 0.0;
    const double m = mu.mass(a);
    if (m == 0.0) return 0.0;
    return m / std::pow(mu_star(space, mu, a), 1.0 / t);
}

CheckReport verify_decomposition(const FiniteMetricSpace& space, const PointMeasure& mu,
                                 const Cluster& z, const Decomposition& dec) {
    CheckReport report;
    const int t = dec.t;
    const double delta = diameter(space, z);

    PredicateCheck disjoint("split_disjoint");
    disjoint.observe(!dec.p.intersects(dec.q), "P and Q share a point");
    report.add(disjoint.result());

    PredicateCheck within("split_within_parent");
    within.observe(dec.p.is_subset_of(z) && dec.q.is_subset_of(z), "P or Q leaves Z");
    within.observe(!dec.p.empty(), "P is empty");
    report.add(within.result());

    InequalityCheck separation("split_separation");
    if (!dec.p.empty() && !dec.q.empty())
        separation.observe(delta / (8.0 * t), set_distance(space, dec.p, dec.q),
                           "d(P,Q) >= diam(Z)/(8t)");
    report.add(separation.result());

    const Cluster kept = set_difference(z, dec.q);
    InequalityCheck halving("split_diameter_halving");
    if (!kept.empty())
        halving.observe(diameter(space, kept), delta / 2.0, "diam(Z\\Q) <= diam(Z)/2");
    report.add(halving.result());

    const double root = 1.0 / t;
    auto star = [&](const Cluster& a) { return a.empty() ? 0.0 : mu_star(space, mu, a); };

    InequalityCheck exchange("split_mass_exchange", kMassTolerance);
    exchange.observe(mu.mass(kept) * std::pow(star(kept), root),
                     mu.mass(dec.p) * std::pow(star(z), root),
                     "mu(Z\\Q) mu*(Z\\Q)^(1/t) <= mu(P) mu*(Z)^(1/t)");
    report.add(exchange.result());

    InequalityCheck subadd("split_xi_subadditive", kMassTolerance);
    subadd.observe(xi_value(space, mu, z, t),
                   xi_value(space, mu, dec.p, t) + xi_value(space, mu, dec.q, t),
                   "xi(Z) <= xi(P) + xi(Q)");
    report.add(subadd.result());

    InequalityCheck sparse("split_sparse_partition", kMassTolerance);
    if (!dec.p.empty()) {
        const auto [lhs, rhs] = ap_guarantee(space, mu, dec, z);
        sparse.observe(rhs, lhs, "mu(Z\\Q) <= mu(P) lambda^(1/t)");
    }
    report.add(sparse.result());
    return report;
}

PointId brute_force_argmax_ratio(const FiniteMetricSpace& space, const PointMeasure& mu,
                                 const Cluster& z) {
    if (z.empty()) throw std::invalid_argument("empty cluster");
    const double delta = diameter(space, z);
    PointId arg = z.front();
    double best = -1.0;
    for (PointId x : z) {
        const double num = mu.mass(ball(space, z, x, delta / 8.0, BallKind::closed));
        const double den = mu.mass(ball(space, z, x, delta / 4.0, BallKind::open));
        const double f = (num == 0.0 && den == 0.0) ? 0.0 : num / den;
        if (f > best) {
            best = f;
            arg = x;
        }
    }
    return arg;
}

}  // namespace umskel
