#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "umskel/check_report.hpp"
#include "umskel/metric_space.hpp"
#include "umskel/nearly_um.hpp"
#include "umskel/skeleton.hpp"

namespace umskel {

/// Malformed space file; line and field are 1-based (field 0: whole line).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t field, const std::string& message);
    std::size_t line() const { return line_; }
    std::size_t field() const { return field_; }

private:
    std::size_t line_;
    std::size_t field_;
};

struct LoadedSpace {
    FiniteMetricSpace space;
    std::optional<std::vector<double>> weights;
};

/// Space file:
///   n=<count>
///   <row 0>
///   ...
///   <row n-1>
///   weights: w0,w1,...        (optional)
/// Rows are comma separated. A row i holds either all n distances or the
/// lower triangle with the diagonal (i + 1 entries); missing upper entries
/// are mirrored. Blank lines and lines starting with '#' are ignored.
/// Throws ParseError on malformed text and ValidationError on axiom
/// violations (triangle slack kTriangleTolerance).
LoadedSpace parse_space(std::string_view text);
LoadedSpace load_space_file(const std::string& path);

/// Full matrix with shortest round-trip decimals, so parse_space(format_space(x))
/// reproduces every value bit for bit.
std::string format_space(const FiniteMetricSpace& space, const PointMeasure* mu = nullptr);
void save_space_file(const std::string& path, const FiniteMetricSpace& space,
                     const PointMeasure* mu = nullptr);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Tree document: nodes (id, delta, cluster, mass, mu_star, xi, t, parent,
/// children, ring witness), and when `um` is given the leaf table and nu.
/// The witness omits P and Q, which are the children's clusters.
nlohmann::ordered_json tree_to_json(const SkeletonTree& tree,
                                    const UltrametricSkeleton* um = nullptr);
SkeletonTree tree_from_json(const nlohmann::ordered_json& doc);

nlohmann::ordered_json schedule_to_json(const ScaleSchedule& schedule);
ScaleSchedule schedule_from_json(const nlohmann::ordered_json& doc);

/// Checks sorted by name: {name, pass, worst_slack, evaluated, detail}.
nlohmann::ordered_json checks_to_json(const CheckReport& report);

}  // namespace umskel
