#include "umskel/serialization.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace umskel {

using nlohmann::ordered_json;

ParseError::ParseError(std::size_t line, std::size_t field, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) +
                         (field ? ", field " + std::to_string(field) : std::string()) + ": " +
                         message),
      line_(line),
      field_(field) {}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(std::string_view field, std::size_t line, std::size_t index) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ParseError(line, index, "invalid number '" + std::string(field) + "'");
    if (!std::isfinite(value)) throw ParseError(line, index, "non-finite value");
    return value;
}

}  // namespace

LoadedSpace parse_space(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t number = 0;
    for (std::size_t start = 0; start <= text.size();) {
        const auto nl = text.find('\n', start);
        const auto raw = text.substr(start, nl == text.npos ? text.npos : nl - start);
        ++number;
        const auto line = trim(raw);
        if (!line.empty() && line.front() != '#') lines.emplace_back(number, line);
        if (nl == text.npos) break;
        start = nl + 1;
    }
    if (lines.empty()) throw ParseError(1, 0, "missing header 'n=<count>'");

    const auto [header_line, header] = lines.front();
    if (header.substr(0, 2) != "n=")
        throw ParseError(header_line, 0, "expected header 'n=<count>'");
    const auto count_text = trim(header.substr(2));
    std::size_t n = 0;
    const auto res = std::from_chars(count_text.data(), count_text.data() + count_text.size(), n);
    if (count_text.empty() || res.ec != std::errc() ||
        res.ptr != count_text.data() + count_text.size() || n == 0)
        throw ParseError(header_line, 1, "invalid point count '" + std::string(count_text) + "'");
    if (n > 20000) throw ParseError(header_line, 1, "point count too large");

    const double unset = std::nan("");
    std::vector<double> raw(n * n, unset);
    std::size_t row = 0;
    std::optional<std::vector<double>> weights;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto [line_no, line] = lines[k];
        if (line.substr(0, 8) == "weights:") {
            if (weights) throw ParseError(line_no, 0, "duplicate weights line");
            const auto fields = split_commas(line.substr(8));
            if (fields.size() != n)
                throw ParseError(line_no, 0,
                                 "expected " + std::to_string(n) + " weights, found " +
                                     std::to_string(fields.size()));
            std::vector<double> w;
            for (std::size_t f = 0; f < fields.size(); ++f) {
                w.push_back(parse_number(fields[f], line_no, f + 1));
                if (w.back() < 0.0) throw ParseError(line_no, f + 1, "negative weight");
            }
            weights = std::move(w);
            continue;
        }
        if (weights) throw ParseError(line_no, 0, "distance row after weights line");
        if (row >= n) throw ParseError(line_no, 0, "more than " + std::to_string(n) + " rows");
        const auto fields = split_commas(line);
        if (fields.size() != n && fields.size() != row + 1)
            throw ParseError(line_no, 0,
                             "row " + std::to_string(row) + " needs " + std::to_string(n) +
                                 " entries (or " + std::to_string(row + 1) +
                                 " for a lower triangle), found " + std::to_string(fields.size()));
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const double v = parse_number(fields[f], line_no, f + 1);
            if (v < 0.0) throw ParseError(line_no, f + 1, "negative distance");
            raw[row * n + f] = v;
        }
        ++row;
    }
    if (row != n)
        throw ParseError(lines.back().first, 0,
                         "expected " + std::to_string(n) + " rows, found " + std::to_string(row));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::isnan(raw[i * n + j])) raw[i * n + j] = raw[j * n + i];

    LoadedSpace out{FiniteMetricSpace(n, std::move(raw)), std::move(weights)};
    require_valid(out.space, kTriangleTolerance);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("cannot write " + path);
}

LoadedSpace load_space_file(const std::string& path) { return parse_space(read_file(path)); }

std::string format_space(const FiniteMetricSpace& space, const PointMeasure* mu) {
    const std::size_t n = space.size();
    std::string out = "n=" + std::to_string(n) + "\n";
    for (PointId i = 0; i < n; ++i) {
        for (PointId j = 0; j < n; ++j) {
            if (j) out += ',';
            out += format_double(space(i, j));
        }
        out += '\n';
    }
    if (mu) {
        out += "weights: ";
        for (PointId i = 0; i < mu->size(); ++i) {
            if (i) out += ',';
            out += format_double((*mu)[i]);
        }
        out += '\n';
    }
    return out;
}

void save_space_file(const std::string& path, const FiniteMetricSpace& space,
                     const PointMeasure* mu) {
    write_file(path, format_space(space, mu));
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

ordered_json tree_to_json(const SkeletonTree& tree, const UltrametricSkeleton* um) {
    ordered_json doc;
    doc["format"] = "umskel-tree";
    doc["version"] = 1;
    doc["n"] = tree.n_points;
    doc["t"] = tree.t;
    ordered_json nodes = ordered_json::array();
    for (NodeId v = 0; v < tree.size(); ++v) {
        const auto& node = tree.nodes[v];
        ordered_json j;
        j["id"] = v;
        j["delta"] = node.delta;
        j["cluster"] = std::vector<PointId>(node.cluster.begin(), node.cluster.end());
        j["mass"] = node.mass;
        j["mu_star"] = node.mu_star;
        j["xi"] = node.xi;
        j["t"] = node.t;
        j["parent"] = node.parent == kNoNode ? ordered_json(nullptr) : ordered_json(node.parent);
        if (node.children)
            j["children"] = {(*node.children)[0], (*node.children)[1]};
        else
            j["children"] = nullptr;
        if (node.split) {
            const auto& s = *node.split;
            j["split"] = {{"center", s.center},
                          {"ring_index", s.ring_index},
                          {"t", s.t},
                          {"parent_diam", s.parent_diam},
                          {"ring_masses", s.ring_masses}};
        } else {
            j["split"] = nullptr;
        }
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);
    if (um) {
        ordered_json leaves = ordered_json::array();
        ordered_json nu = ordered_json::array();
        for (PointId p : um->points) {
            leaves.push_back({p, um->leaf_of[p]});
            nu.push_back({p, um->nu[p]});
        }
        doc["leaf_of"] = std::move(leaves);
        doc["nu"] = std::move(nu);
    }
    return doc;
}

SkeletonTree tree_from_json(const ordered_json& doc) {
    try {
        if (doc.at("format").get<std::string>() != "umskel-tree")
            throw std::invalid_argument("not a tree document");
        SkeletonTree tree;
        tree.n_points = doc.at("n").get<std::size_t>();
        tree.t = doc.at("t").get<int>();
        const auto& nodes = doc.at("nodes");
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            const auto& j = nodes[v];
            if (j.at("id").get<std::size_t>() != v)
                throw std::invalid_argument("node ids must be consecutive");
            SkeletonNode node;
            node.delta = j.at("delta").get<double>();
            node.cluster = Cluster(j.at("cluster").get<std::vector<PointId>>());
            node.mass = j.at("mass").get<double>();
            node.mu_star = j.at("mu_star").get<double>();
            node.xi = j.at("xi").get<double>();
            node.t = j.at("t").get<int>();
            node.parent = j.at("parent").is_null() ? kNoNode : j.at("parent").get<NodeId>();
            if (!j.at("children").is_null()) {
                const auto c = j.at("children").get<std::vector<NodeId>>();
                if (c.size() != 2) throw std::invalid_argument("a node needs two children");
                node.children = std::array<NodeId, 2>{c[0], c[1]};
            }
            if (!j.at("split").is_null()) {
                const auto& s = j.at("split");
                Decomposition d;
                d.center = s.at("center").get<PointId>();
                d.ring_index = s.at("ring_index").get<int>();
                d.t = s.at("t").get<int>();
                d.parent_diam = s.at("parent_diam").get<double>();
                d.ring_masses = s.at("ring_masses").get<std::vector<double>>();
                node.split = std::move(d);
            }
            tree.nodes.push_back(std::move(node));
        }
        for (auto& node : tree.nodes)
            if (node.split && node.children) {
                const auto [a, b] = *node.children;
                if (a >= tree.size() || b >= tree.size())
                    throw std::invalid_argument("child id out of range");
                node.split->p = tree.nodes[a].cluster;
                node.split->q = tree.nodes[b].cluster;
            }
        return tree;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed tree document: ") + e.what());
    }
}

ordered_json schedule_to_json(const ScaleSchedule& schedule) {
    ordered_json doc;
    doc["epsilon"] = schedule.epsilon;
    doc["max_level"] = schedule.max_level;
    ordered_json levels = ordered_json::array();
    for (int i = 1; i <= schedule.max_level; ++i) {
        const auto k = static_cast<std::size_t>(i - 1);
        levels.push_back({{"level", i},
                          {"lambda_hat", schedule.lambda_profile[k].count},
                          {"eta", schedule.eta[k]},
                          {"t", schedule.t_of[k]}});
    }
    doc["levels"] = std::move(levels);
    return doc;
}

ScaleSchedule schedule_from_json(const ordered_json& doc) {
    try {
        ScaleSchedule s;
        s.epsilon = doc.at("epsilon").get<double>();
        s.max_level = doc.at("max_level").get<int>();
        for (const auto& level : doc.at("levels")) {
            s.lambda_profile.push_back({level.at("lambda_hat").get<std::size_t>(), true});
            s.eta.push_back(level.at("eta").get<double>());
            s.t_of.push_back(level.at("t").get<int>());
        }
        if (s.t_of.size() != static_cast<std::size_t>(s.max_level))
            throw std::invalid_argument("schedule level count mismatch");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed schedule: ") + e.what());
    }
}

ordered_json checks_to_json(const CheckReport& report) {
    ordered_json out = ordered_json::array();
    for (const auto& r : report.sorted()) {
        ordered_json j;
        j["name"] = r.name;
        j["pass"] = r.pass;
        j["worst_slack"] = r.worst_slack ? ordered_json(*r.worst_slack) : ordered_json(nullptr);
        j["evaluated"] = r.evaluated;
        j["detail"] = r.detail;
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace umskel
