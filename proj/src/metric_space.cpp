#include "umskel/metric_space.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

namespace umskel {

Cluster::Cluster(std::vector<PointId> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

Cluster::Cluster(std::initializer_list<PointId> members)
    : Cluster(std::vector<PointId>(members)) {}

Cluster Cluster::from_sorted(std::vector<PointId> members) {
    Cluster c;
    c.members_ = std::move(members);
    return c;
}

Cluster Cluster::all(std::size_t n) {
    std::vector<PointId> m(n);
    std::iota(m.begin(), m.end(), PointId{0});
    return from_sorted(std::move(m));
}

bool Cluster::contains(PointId p) const {
    return std::binary_search(members_.begin(), members_.end(), p);
}

bool Cluster::is_subset_of(const Cluster& other) const {
    return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                         members_.end());
}

bool Cluster::intersects(const Cluster& other) const {
    auto a = members_.begin();
    auto b = other.members_.begin();
    while (a != members_.end() && b != other.members_.end()) {
        if (*a == *b) return true;
        if (*a < *b)
            ++a;
        else
            ++b;
    }
    return false;
}

Cluster set_difference(const Cluster& a, const Cluster& b) {
    std::vector<PointId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return Cluster::from_sorted(std::move(out));
}

Cluster set_union(const Cluster& a, const Cluster& b) {
    std::vector<PointId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return Cluster::from_sorted(std::move(out));
}

Cluster set_intersection(const Cluster& a, const Cluster& b) {
    std::vector<PointId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return Cluster::from_sorted(std::move(out));
}

FiniteMetricSpace::FiniteMetricSpace(std::size_t n, std::vector<double> table)
    : n_(n), table_(std::move(table)) {
    if (table_.size() != n_ * n_)
        throw std::invalid_argument("distance table must have n*n entries");
    for (double d : table_)
        if (!std::isfinite(d) || d < 0.0)
            throw std::invalid_argument("distances must be finite and nonnegative");
}

namespace {
std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.size());
    for (const auto& r : rows) {
        if (r.size() != rows.size())
            throw std::invalid_argument("distance table must be square");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return flat;
}
}  // namespace

FiniteMetricSpace::FiniteMetricSpace(const std::vector<std::vector<double>>& rows)
    : FiniteMetricSpace(rows.size(), flatten(rows)) {}

PointMeasure::PointMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
    for (double w : weights_)
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("weights must be finite and nonnegative");
}

PointMeasure PointMeasure::uniform(std::size_t n) {
    return PointMeasure(std::vector<double>(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n)));
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double PointMeasure::mass(const Cluster& a) const {
    CompensatedSum s;
    for (PointId p : a) s.add(weights_[p]);
    return s.value();
}

double PointMeasure::total() const {
    CompensatedSum s;
    for (double w : weights_) s.add(w);
    return s.value();
}

bool PointMeasure::is_probability(double tol) const { return std::abs(total() - 1.0) <= tol; }

double diameter(const FiniteMetricSpace& space, const Cluster& a) {
    if (a.empty()) throw std::invalid_argument("empty cluster");
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto row = space.row(a[i]);
        for (std::size_t j = i + 1; j < a.size(); ++j) best = std::max(best, row[a[j]]);
    }
    return best;
}

Cluster ball(const FiniteMetricSpace& space, const Cluster& a, PointId center, double r,
             BallKind kind) {
    if (center >= space.size()) throw std::out_of_range("ball center out of range");
    const auto row = space.row(center);
    std::vector<PointId> out;
    for (PointId y : a) {
        const double d = row[y];
        if (kind == BallKind::closed ? d <= r : d < r) out.push_back(y);
    }
    return Cluster::from_sorted(std::move(out));
}

double set_distance(const FiniteMetricSpace& space, const Cluster& a, const Cluster& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty cluster");
    double best = std::numeric_limits<double>::infinity();
    for (PointId x : a) {
        const auto row = space.row(x);
        for (PointId y : b) best = std::min(best, row[y]);
    }
    return best;
}

double mu_star(const FiniteMetricSpace& space, const PointMeasure& mu, const Cluster& a) {
    if (a.empty()) throw std::invalid_argument("empty cluster");
    const double r = diameter(space, a) / 4.0;
    double best = 0.0;
    for (PointId c : a) {
        const auto row = space.row(c);
        CompensatedSum s;
        for (PointId y : a)
            if (row[y] <= r) s.add(mu[y]);
        best = std::max(best, s.value());
    }
    return best;
}

std::vector<Cluster> greedy_cover(const FiniteMetricSpace& space, const Cluster& a,
                                  double target_diam) {
    if (target_diam < 0.0) throw std::invalid_argument("target diameter must be nonnegative");
    std::vector<Cluster> pieces;
    std::vector<char> covered(a.size(), 0);
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < a.size(); ++s) {
        if (covered[s]) continue;
        const PointId seed = a[s];
        const auto seed_row = space.row(seed);
        order.clear();
        for (std::size_t j = s + 1; j < a.size(); ++j)
            if (!covered[j] && seed_row[a[j]] <= target_diam) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return seed_row[a[x]] < seed_row[a[y]];
        });
        std::vector<PointId> piece{seed};
        covered[s] = 1;
        for (std::size_t j : order) {
            const auto row = space.row(a[j]);
            const bool fits = std::all_of(piece.begin(), piece.end(),
                                          [&](PointId p) { return row[p] <= target_diam; });
            if (fits) {
                piece.push_back(a[j]);
                covered[j] = 1;
            }
        }
        pieces.emplace_back(std::move(piece));
    }
    return pieces;
}

CoverEstimate greedy_cover_count(const FiniteMetricSpace& space, const Cluster& a,
                                 double target_diam) {
    return {greedy_cover(space, a, target_diam).size(), true};
}

CoverEstimate exact_cover_count(const FiniteMetricSpace& space, const Cluster& a,
                                double target_diam) {
    const std::size_t m = a.size();
    if (m > kExactCoverLimit) throw std::invalid_argument("exact cover limited to 12 points");
    if (m == 0) return {0, false};
    const std::size_t full = (std::size_t{1} << m) - 1;
    std::vector<char> valid(full + 1, 0);
    valid[0] = 1;
    for (std::size_t mask = 1; mask <= full; ++mask) {
        const int low = std::countr_zero(mask);
        const std::size_t rest = mask & (mask - 1);
        bool ok = valid[rest];
        for (std::size_t r = rest; ok && r; r &= r - 1)
            ok = space(a[low], a[std::countr_zero(r)]) <= target_diam;
        valid[mask] = ok;
    }
    std::vector<std::size_t> best(full + 1, m);
    best[0] = 0;
    for (std::size_t mask = 1; mask <= full; ++mask) {
        const std::size_t low = mask & (~mask + 1);
        const std::size_t rest = mask ^ low;
        for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
            const std::size_t piece = sub | low;
            if (valid[piece]) best[mask] = std::min(best[mask], best[mask ^ piece] + 1);
            if (sub == 0) break;
        }
    }
    return {best[full], false};
}

std::string Violation::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::diagonal: os << "diagonal entry (" << i << "," << i << ") is not zero"; break;
        case Kind::symmetry: os << "symmetry violation at (" << i << "," << j << ")"; break;
        case Kind::coincident: os << "points " << i << " and " << j << " coincide"; break;
        case Kind::triangle:
            os << "triangle violation at (" << i << "," << j << "," << k << "): d(" << i << ","
               << k << ") > d(" << i << "," << j << ") + d(" << j << "," << k << ")";
            break;
    }
    return os.str();
}

std::vector<Violation> validate(const FiniteMetricSpace& space, double triangle_tol,
                                std::size_t cap) {
    using K = Violation::Kind;
    std::vector<Violation> out;
    const std::size_t n = space.size();
    auto full = [&] { return out.size() >= cap; };
    for (std::size_t i = 0; i < n && !full(); ++i)
        if (space(i, i) != 0.0) out.push_back({K::diagonal, i, i, 0});
    for (std::size_t i = 0; i < n && !full(); ++i)
        for (std::size_t j = i + 1; j < n && !full(); ++j) {
            if (space(i, j) != space(j, i)) out.push_back({K::symmetry, i, j, 0});
            else if (space(i, j) == 0.0) out.push_back({K::coincident, i, j, 0});
        }
    for (std::size_t i = 0; i < n && !full(); ++i) {
        const auto ri = space.row(i);
        for (std::size_t j = 0; j < n && !full(); ++j) {
            const auto rj = space.row(j);
            const double dij = ri[j] + triangle_tol;
            bool any = false;
            for (std::size_t k = 0; k < n; ++k) any |= ri[k] > dij + rj[k];
            if (!any) continue;
            for (std::size_t k = 0; k < n && !full(); ++k)
                if (ri[k] > dij + rj[k]) out.push_back({K::triangle, i, j, k});
        }
    }
    return out;
}

void require_valid(const FiniteMetricSpace& space, double triangle_tol) {
    auto v = validate(space, triangle_tol);
    if (v.empty()) return;
    std::string msg = "invalid metric space: " + v.front().describe();
    if (v.size() > 1) msg += " (and " + std::to_string(v.size() - 1) + " more)";
    throw ValidationError(msg, std::move(v));
}

double min_positive_distance(const FiniteMetricSpace& space) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = i + 1; j < space.size(); ++j)
            if (space(i, j) > 0.0) best = std::min(best, space(i, j));
    return std::isinf(best) ? 0.0 : best;
}

}  // namespace umskel
