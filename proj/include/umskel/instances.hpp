#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "umskel/metric_space.hpp"

namespace umskel {

enum class InstanceKind { cantor, grid, random_doubling, snowflake, matrix };
enum class MeasureKind { uniform, explicit_weights, self_similar };
enum class GridMetric { max, euclidean };

struct InstanceSpec {
    InstanceKind kind = InstanceKind::cantor;

    // cantor
    int level = 3;
    double ratio = 1.0 / 3.0;  ///< contraction ratio in (0, 1/2]

    // grid
    int dim = 1;
    int side = 5;
    GridMetric metric = GridMetric::max;

    // random_doubling (also uses dim)
    std::uint64_t seed = 1;
    int levels = 4;
    int branching = 4;

    // snowflake
    double theta = 0.5;
    std::shared_ptr<const InstanceSpec> base;

    // matrix
    std::string path;

    MeasureKind measure = MeasureKind::uniform;
    std::vector<double> weights;  ///< explicit_weights
    double left_mass = 0.5;       ///< self_similar: mass of the left branch at each level
};

struct Instance {
    FiniteMetricSpace space;
    PointMeasure mu;
};

/// Deterministic in the spec (and its seed). Throws std::invalid_argument on
/// bad parameters; every generated space passes validate() with
/// kTriangleTolerance.
Instance generate(const InstanceSpec& spec);

/// Spec helpers for the common kinds.
InstanceSpec cantor_spec(int level, double ratio = 1.0 / 3.0);
InstanceSpec grid_spec(int dim, int side, GridMetric metric = GridMetric::max);
InstanceSpec random_doubling_spec(std::uint64_t seed, int levels = 4, int branching = 4,
                                  int dim = 2);
InstanceSpec snowflake_spec(const InstanceSpec& base, double theta);

/// Short human-readable label such as "cantor(5,1/3)" or "grid(2,16)".
std::string describe(const InstanceSpec& spec);

}  // namespace umskel
