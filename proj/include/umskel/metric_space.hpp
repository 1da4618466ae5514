#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace umskel {

using PointId = std::size_t;

/// A set of point indices kept as a strictly increasing sequence.
class Cluster {
public:
    Cluster() = default;
    /// Sorts and removes duplicates.
    explicit Cluster(std::vector<PointId> members);
    Cluster(std::initializer_list<PointId> members);

    /// Members must already be strictly increasing; not re-checked.
    static Cluster from_sorted(std::vector<PointId> members);
    /// {0, 1, ..., n-1}
    static Cluster all(std::size_t n);

    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    PointId operator[](std::size_t i) const { return members_[i]; }
    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }
    PointId front() const { return members_.front(); }
    std::span<const PointId> members() const { return members_; }

    bool contains(PointId p) const;
    bool is_subset_of(const Cluster& other) const;
    bool intersects(const Cluster& other) const;

    friend bool operator==(const Cluster&, const Cluster&) = default;

private:
    std::vector<PointId> members_;
};

Cluster set_difference(const Cluster& a, const Cluster& b);
Cluster set_union(const Cluster& a, const Cluster& b);
Cluster set_intersection(const Cluster& a, const Cluster& b);

/// n points with a full symmetric distance table stored row-major.
///
/// Construction only checks shape and that entries are finite and
/// nonnegative. The metric axioms are checked by validate().
class FiniteMetricSpace {
public:
    FiniteMetricSpace() = default;
    FiniteMetricSpace(std::size_t n, std::vector<double> table);
    explicit FiniteMetricSpace(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return n_; }
    double operator()(PointId i, PointId j) const { return table_[i * n_ + j]; }
    std::span<const double> row(PointId i) const {
        return {table_.data() + i * n_, n_};
    }
    const std::vector<double>& table() const { return table_; }

    friend bool operator==(const FiniteMetricSpace&, const FiniteMetricSpace&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> table_;
};

/// Nonnegative mass per point.
class PointMeasure {
public:
    PointMeasure() = default;
    explicit PointMeasure(std::vector<double> weights);
    static PointMeasure uniform(std::size_t n);

    std::size_t size() const { return weights_.size(); }
    double operator[](PointId p) const { return weights_[p]; }
    const std::vector<double>& weights() const { return weights_; }

    /// Compensated sum of the weights of `a`, accumulated in index order.
    double mass(const Cluster& a) const;
    double total() const;
    bool is_probability(double tol = 1e-9) const;

    friend bool operator==(const PointMeasure&, const PointMeasure&) = default;

private:
    std::vector<double> weights_;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct CoverEstimate {
    std::size_t count = 0;
    bool is_upper_bound = true;

    friend bool operator==(const CoverEstimate&, const CoverEstimate&) = default;
};

enum class BallKind { closed, open };

double diameter(const FiniteMetricSpace& space, const Cluster& a);
Cluster ball(const FiniteMetricSpace& space, const Cluster& a, PointId center, double r,
             BallKind kind);
double set_distance(const FiniteMetricSpace& space, const Cluster& a, const Cluster& b);

/// Largest mass of a closed ball of radius diam(A)/4 centred in A,
/// intersected with A.
double mu_star(const FiniteMetricSpace& space, const PointMeasure& mu, const Cluster& a);

/// Greedy cover of `a` by pieces of diameter at most `target_diam`.
///
/// Repeatedly seeds a piece at the smallest uncovered index and grows it with
/// the remaining uncovered points in order of distance to the seed, admitting a
/// point only if the piece stays within `target_diam`.
std::vector<Cluster> greedy_cover(const FiniteMetricSpace& space, const Cluster& a,
                                  double target_diam);
CoverEstimate greedy_cover_count(const FiniteMetricSpace& space, const Cluster& a,
                                 double target_diam);
/// Minimal cover count by subset dynamic programming. Only for |a| <= 12.
CoverEstimate exact_cover_count(const FiniteMetricSpace& space, const Cluster& a,
                                double target_diam);

inline constexpr std::size_t kExactCoverLimit = 12;

struct Violation {
    enum class Kind { diagonal, symmetry, coincident, triangle };
    Kind kind;
    PointId i = 0, j = 0, k = 0;
    std::string describe() const;
};

/// Triangle-inequality slack admitted on generated and loaded instances, whose
/// distances carry binary64 rounding from coordinates.
inline constexpr double kTriangleTolerance = 1e-12;

/// Lists violated axioms, at most `cap` of them. Triangle checks admit
/// `triangle_tol` of absolute slack.
std::vector<Violation> validate(const FiniteMetricSpace& space, double triangle_tol = 0.0,
                                std::size_t cap = 32);

class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string what, std::vector<Violation> violations)
        : std::runtime_error(std::move(what)), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Throws ValidationError listing the witnesses when validate() is non-empty.
void require_valid(const FiniteMetricSpace& space, double triangle_tol = kTriangleTolerance);

/// Smallest positive pairwise distance, 0 for fewer than two points.
double min_positive_distance(const FiniteMetricSpace& space);

}  // namespace umskel
