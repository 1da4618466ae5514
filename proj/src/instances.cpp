#include "umskel/instances.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

#include "umskel/check_report.hpp"
#include "umskel/serialization.hpp"

namespace umskel {

namespace {

/// q with ratio == 1/q exactly and q^level below 2^53, or 0.
std::uint64_t integer_reciprocal(double ratio, int level) {
    const double q = std::round(1.0 / ratio);
    if (q < 2.0 || 1.0 / q != ratio) return 0;
    double power = 1.0;
    for (int j = 0; j < level; ++j) power *= q;
    if (power > 9007199254740992.0) return 0;
    return static_cast<std::uint64_t>(q);
}

Instance cantor(const InstanceSpec& spec) {
    const int k = spec.level;
    const double c = spec.ratio;
    if (k < 0 || k > 20) throw std::invalid_argument("cantor level must be in [0, 20]");
    if (!(c > 0.0 && c <= 0.5)) throw std::invalid_argument("cantor ratio must be in (0, 1/2]");
    const std::size_t n = std::size_t{1} << k;
    std::vector<double> table(n * n, 0.0);

    if (const std::uint64_t q = integer_reciprocal(c, k)) {
        // Left endpoints as integers over q^k; each distance is one rounding.
        std::vector<std::int64_t> num(n, 0);
        double denom = 1.0;
        for (int j = 0; j < k; ++j) denom *= static_cast<double>(q);
        for (std::size_t b = 0; b < n; ++b) {
            std::int64_t x = 0;
            for (int j = 1; j <= k; ++j) {
                x *= static_cast<std::int64_t>(q);
                if ((b >> (k - j)) & 1U) x += static_cast<std::int64_t>(q - 1);
            }
            num[b] = x;
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                table[a * n + b] = static_cast<double>(std::llabs(num[a] - num[b])) / denom;
    } else {
        std::vector<double> x(n, 0.0);
        for (std::size_t b = 0; b < n; ++b) {
            double step = 1.0 - c;
            for (int j = 1; j <= k; ++j, step *= c)
                if ((b >> (k - j)) & 1U) x[b] += step;
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) table[a * n + b] = std::abs(x[a] - x[b]);
    }

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    if (spec.measure == MeasureKind::self_similar) {
        const double p = spec.left_mass;
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("left mass must be in (0, 1)");
        for (std::size_t b = 0; b < n; ++b) {
            double m = 1.0;
            for (int j = 1; j <= k; ++j) m *= ((b >> (k - j)) & 1U) ? 1.0 - p : p;
            w[b] = m;
        }
    }
    return {FiniteMetricSpace(n, std::move(table)), PointMeasure(std::move(w))};
}

Instance grid(const InstanceSpec& spec) {
    const int d = spec.dim;
    const int m = spec.side;
    if (d < 1 || d > 4) throw std::invalid_argument("grid dimension must be in [1, 4]");
    if (m < 1) throw std::invalid_argument("grid side must be positive");
    std::size_t n = 1;
    for (int j = 0; j < d; ++j) n *= static_cast<std::size_t>(m);
    if (n > 8192) throw std::invalid_argument("grid too large");
    std::vector<std::vector<int>> coords(n, std::vector<int>(static_cast<std::size_t>(d)));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rest = i;
        for (int j = d; j-- > 0;) {
            coords[i][static_cast<std::size_t>(j)] = static_cast<int>(rest % m);
            rest /= static_cast<std::size_t>(m);
        }
    }
    std::vector<double> table(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            long long mx = 0, sq = 0;
            for (int j = 0; j < d; ++j) {
                const long long diff = std::llabs(coords[a][static_cast<std::size_t>(j)] -
                                                  coords[b][static_cast<std::size_t>(j)]);
                mx = std::max(mx, diff);
                sq += diff * diff;
            }
            table[a * n + b] = spec.metric == GridMetric::max
                                   ? static_cast<double>(mx)
                                   : std::sqrt(static_cast<double>(sq));
        }
    return {FiniteMetricSpace(n, std::move(table)), PointMeasure::uniform(n)};
}

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Instance random_doubling(const InstanceSpec& spec) {
    const int levels = spec.levels;
    const int branching = spec.branching;
    const int d = spec.dim;
    if (levels < 0 || branching < 1 || d < 1 || d > 8)
        throw std::invalid_argument("bad random_doubling parameters");
    double total = 1.0;
    for (int j = 0; j < levels; ++j) total *= branching;
    if (total > 8192) throw std::invalid_argument("random_doubling instance too large");

    std::mt19937_64 rng(spec.seed);
    std::vector<std::vector<double>> points{std::vector<double>(static_cast<std::size_t>(d), 0.5)};
    double radius = 0.5;
    auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
        return std::sqrt(s);
    };
    for (int level = 0; level < levels; ++level) {
        radius /= 4.0;
        std::vector<std::vector<double>> next;
        for (const auto& parent : points) {
            // Each net point keeps itself and gains branching - 1 children
            // that stay a quarter radius apart from their siblings.
            std::vector<std::vector<double>> kids{parent};
            while (static_cast<int>(kids.size()) < branching) {
                std::vector<double> cand = parent;
                for (int attempt = 0; attempt < 64; ++attempt) {
                    for (std::size_t j = 0; j < cand.size(); ++j)
                        cand[j] = parent[j] + (2.0 * unit_uniform(rng) - 1.0) * radius;
                    bool spaced = true;
                    for (const auto& k : kids) spaced = spaced && dist(k, cand) >= radius / 4.0;
                    if (spaced) break;
                }
                kids.push_back(cand);
            }
            next.insert(next.end(), kids.begin(), kids.end());
        }
        points = std::move(next);
    }
    const std::size_t n = points.size();
    std::vector<double> table(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) table[a * n + b] = table[b * n + a] =
                                                    dist(points[a], points[b]);
    return {FiniteMetricSpace(n, std::move(table)), PointMeasure::uniform(n)};
}

Instance snowflake(const InstanceSpec& spec) {
    if (!(spec.theta > 0.0 && spec.theta <= 1.0))
        throw std::invalid_argument("snowflake exponent must be in (0, 1]");
    if (!spec.base) throw std::invalid_argument("snowflake needs a base instance");
    Instance base = generate(*spec.base);
    std::vector<double> table = base.space.table();
    for (double& d : table) d = d == 0.0 ? 0.0 : std::pow(d, spec.theta);
    return {FiniteMetricSpace(base.space.size(), std::move(table)), std::move(base.mu)};
}

}  // namespace

Instance generate(const InstanceSpec& spec) {
    Instance out = [&]() -> Instance {
        switch (spec.kind) {
            case InstanceKind::cantor: return cantor(spec);
            case InstanceKind::grid: return grid(spec);
            case InstanceKind::random_doubling: return random_doubling(spec);
            case InstanceKind::snowflake: return snowflake(spec);
            case InstanceKind::matrix: {
                auto loaded = load_space_file(spec.path);
                PointMeasure mu = loaded.weights ? PointMeasure(*loaded.weights)
                                                 : PointMeasure::uniform(loaded.space.size());
                return {std::move(loaded.space), std::move(mu)};
            }
        }
        throw std::invalid_argument("unknown instance kind");
    }();
    if (spec.measure == MeasureKind::self_similar && spec.kind != InstanceKind::cantor)
        throw std::invalid_argument("self-similar weights need a cantor instance");
    if (spec.measure == MeasureKind::explicit_weights) {
        if (spec.weights.size() != out.space.size())
            throw std::invalid_argument("weights do not match the instance size");
        out.mu = PointMeasure(spec.weights);
    }
    require_valid(out.space, kTriangleTolerance);
    return out;
}

InstanceSpec cantor_spec(int level, double ratio) {
    InstanceSpec s;
    s.kind = InstanceKind::cantor;
    s.level = level;
    s.ratio = ratio;
    return s;
}

InstanceSpec grid_spec(int dim, int side, GridMetric metric) {
    InstanceSpec s;
    s.kind = InstanceKind::grid;
    s.dim = dim;
    s.side = side;
    s.metric = metric;
    return s;
}

InstanceSpec random_doubling_spec(std::uint64_t seed, int levels, int branching, int dim) {
    InstanceSpec s;
    s.kind = InstanceKind::random_doubling;
    s.seed = seed;
    s.levels = levels;
    s.branching = branching;
    s.dim = dim;
    return s;
}

InstanceSpec snowflake_spec(const InstanceSpec& base, double theta) {
    InstanceSpec s;
    s.kind = InstanceKind::snowflake;
    s.theta = theta;
    s.base = std::make_shared<const InstanceSpec>(base);
    return s;
}

std::string describe(const InstanceSpec& spec) {
    switch (spec.kind) {
        case InstanceKind::cantor: {
            const double q = std::round(1.0 / spec.ratio);
            const std::string r = (1.0 / q == spec.ratio) ? "1/" + std::to_string(static_cast<int>(q))
                                                          : format_double(spec.ratio);
            return "cantor(" + std::to_string(spec.level) + "," + r + ")";
        }
        case InstanceKind::grid:
            return "grid(" + std::to_string(spec.dim) + "," + std::to_string(spec.side) +
                   (spec.metric == GridMetric::euclidean ? ",euclidean)" : ")");
        case InstanceKind::random_doubling:
            return "random_doubling(seed=" + std::to_string(spec.seed) + ")";
        case InstanceKind::snowflake:
            return "snowflake(" + format_double(spec.theta) + "," +
                   (spec.base ? describe(*spec.base) : std::string("?")) + ")";
        case InstanceKind::matrix: return "matrix(" + spec.path + ")";
    }
    return "?";
}

}  // namespace umskel
