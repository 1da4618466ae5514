#include "umskel/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "umskel/instances.hpp"
#include "umskel/nearly_um.hpp"
#include "umskel/serialization.hpp"
#include "umskel/skeleton.hpp"

namespace umskel {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Options {
    std::string input = "-";
    std::string out;
    std::string format = "structured";
    std::string tree;
    int t = 2;
    double epsilon = 0.5;
    std::optional<double> beta;

    // gen
    std::string kind = "cantor";
    std::string base = "cantor";
    int level = 3;
    std::string ratio = "1/3";
    int dim = 1;
    int side = 5;
    std::string metric = "max";
    std::uint64_t seed = 1;
    int levels = 4;
    int branching = 4;
    double theta = 0.5;
    std::string measure = "uniform";
    double left_mass = 0.5;
    std::string path;
};

/// Usage problems detected after option parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Input {
    std::string digest;
    FiniteMetricSpace space;
    PointMeasure mu;
};

Input load_input(const std::string& path, std::istream& in) {
    std::string text;
    if (path == "-")
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    else
        text = read_file(path);
    LoadedSpace loaded = parse_space(text);
    PointMeasure mu = loaded.weights ? PointMeasure(*loaded.weights)
                                     : PointMeasure::uniform(loaded.space.size());
    return {sha256_hex(text), std::move(loaded.space), std::move(mu)};
}

struct RunReport {
    std::string command;
    std::string input_digest;
    ordered_json parameters = ordered_json::object();
    ordered_json outputs = ordered_json::object();
    CheckReport checks;
    double elapsed_ms = 0.0;
};

std::string render(const RunReport& r, const std::string& format) {
    if (format == "structured") {
        ordered_json doc;
        doc["command"] = r.command;
        doc["input_digest"] = r.input_digest;
        doc["parameters"] = r.parameters;
        doc["outputs"] = r.outputs;
        doc["checks"] = checks_to_json(r.checks);
        doc["timing"] = {{"elapsed_ms", r.elapsed_ms}};
        return doc.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "command " << r.command << "\n";
    os << "input_digest " << r.input_digest << "\n";
    for (const auto& [k, v] : r.parameters.items()) os << "parameter " << k << " " << v.dump() << "\n";
    for (const auto& [k, v] : r.outputs.items()) os << "output " << k << " " << v.dump() << "\n";
    for (const auto& c : r.checks.sorted()) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name << " evaluated=" << c.evaluated;
        if (c.worst_slack) os << " worst_slack=" << format_double(*c.worst_slack);
        if (!c.pass) os << " detail=" << c.detail;
        os << "\n";
    }
    os << "timing elapsed_ms " << format_double(r.elapsed_ms) << "\n";
    return os.str();
}

std::optional<double> nu_frostman_exponent(const FiniteMetricSpace& space,
                                           const UltrametricSkeleton& um) {
    if (space.size() < 2) return std::nullopt;
    const auto radii = dyadic_radii(min_positive_distance(space),
                                    diameter(space, Cluster::all(space.size())));
    if (radii.size() < 3) return std::nullopt;
    return frostman_fit(space, um.nu, radii).exponent;
}

void common_outputs(RunReport& r, const FiniteMetricSpace& space, const PointMeasure& mu,
                    const UltrametricSkeleton& um, const CoverEstimate& lambda_hat) {
    r.outputs["n"] = space.size();
    r.outputs["skeleton_size"] = um.points.size();
    if (um.points.size() >= 2) r.outputs["distortion"] = distortion(space, um);
    r.outputs["mass_retained"] = mu.mass(um.points);
    if (const auto alpha = nu_frostman_exponent(space, um)) r.outputs["frostman_exponent"] = *alpha;
    r.outputs["lambda_hat"] = lambda_hat.count;
}

/// Structural checks whose failure makes the remaining suites meaningless.
bool structurally_sound(const CheckReport& report) {
    for (const char* name : {"tree_root", "tree_laminar", "tree_leaves", "split_witness"})
        if (const auto* r = report.find(name); r && !r->pass) return false;
    return true;
}

CheckReport fixed_suites(const FiniteMetricSpace& space, const PointMeasure& mu,
                         const SkeletonTree& tree, const UltrametricSkeleton& um,
                         const CoverEstimate& lambda_hat) {
    CheckReport report = verify_tree(space, mu, tree);
    if (!structurally_sound(report)) return report;
    report.merge(check_ultrametric_axioms(um));
    report.merge(check_distortion_sandwich(space, um, tree.t));
    report.merge(check_skeleton_measure(um, lambda_hat));
    report.merge(check_measure_growth(space, mu, um, tree.t, lambda_hat));
    return report;
}

struct ScheduledSpace {
    FiniteMetricSpace space;
    double alpha = 1.0;
};

ScheduledSpace scheduled_space(const FiniteMetricSpace& space) {
    if (space.size() < 2) return {space, 1.0};
    auto r = rescale_to_half(space);
    return {std::move(r.space), r.alpha};
}

ScaleSchedule make_schedule(const FiniteMetricSpace& scaled, double epsilon) {
    const int max_level = default_max_level(scaled);
    return schedule_from_epsilon(doubling_profile(scaled, max_level), epsilon);
}

CheckReport nearly_suites(const FiniteMetricSpace& scaled, const PointMeasure& mu,
                          const SkeletonTree& tree, const UltrametricSkeleton& um,
                          const ScaleSchedule& schedule, double beta,
                          const CoverEstimate& lambda_hat, RunReport& r) {
    CheckReport report = verify_tree(scaled, mu, tree);
    if (!structurally_sound(report)) return report;
    report.merge(check_level_structure(tree, schedule.max_level));
    auto retention = check_mass_retention(scaled, mu, tree, schedule);
    report.merge(retention.report);
    auto scalewise = check_scalewise_distortion(scaled, um, schedule, beta);
    report.merge(scalewise.report);
    report.merge(check_ultrametric_axioms(um));
    // nu <= xi needs one t along every path, so it only applies to constant schedules.
    if (tree.t >= 2) report.merge(check_skeleton_measure(um, lambda_hat));
    r.outputs["product_bound"] = retention.product_bound;
    r.outputs["above_one_minus_epsilon"] = retention.above_one_minus_epsilon;
    if (um.points.size() >= 2) r.outputs["c_beta"] = scalewise.c_beta;
    return report;
}

void add_unscaled_constant(RunReport& r, double alpha, double beta) {
    if (r.outputs.contains("c_beta"))
        r.outputs["c_beta_unscaled"] = r.outputs["c_beta"].get<double>() * std::pow(alpha, beta - 1.0);
}

void emit(const RunReport& r, const Options& o, std::ostream& out, const std::string& report_path) {
    const std::string text = render(r, o.format);
    if (report_path.empty())
        out << text;
    else
        write_file(report_path, text);
}

int finish(const RunReport& r, std::ostream& err) {
    if (r.checks.all_pass()) return kExitOk;
    for (const auto& c : r.checks.sorted())
        if (!c.pass) err << "check failed: " << c.name << ": " << c.detail << "\n";
    return kExitCheckFailed;
}

std::string prepare_out_dir(const Options& o) {
    if (o.out.empty()) return {};
    std::filesystem::create_directories(o.out);
    return o.out;
}

std::string report_name(const Options& o) {
    return o.format == "structured" ? "report.json" : "report.txt";
}

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int cmd_skeleton(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    if (o.t < 2) throw UsageError("t must be at least 2");
    const Input input = load_input(o.input, in);
    RunReport r;
    r.command = "skeleton";
    r.input_digest = input.digest;
    r.parameters["t"] = o.t;

    SkeletonTree tree = build_skeleton(input.space, input.mu, o.t);
    const UltrametricSkeleton um = skeleton_measure(tree);
    const CoverEstimate lambda_hat = doubling_estimate(input.space);
    common_outputs(r, input.space, input.mu, um, lambda_hat);
    r.checks = fixed_suites(input.space, input.mu, um.tree, um, lambda_hat);

    const std::string dir = prepare_out_dir(o);
    if (!dir.empty()) {
        ordered_json doc = tree_to_json(um.tree, &um);
        doc["kind"] = "fixed";
        write_file(dir + "/tree.json", doc.dump(2) + "\n");
    }
    r.elapsed_ms = elapsed_ms(start);
    emit(r, o, out, dir.empty() ? std::string() : dir + "/" + report_name(o));
    return finish(r, err);
}

int cmd_nearly(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    const double beta = o.beta.value_or(0.9);
    if (!(o.epsilon > 0.0 && o.epsilon < 1.0)) throw UsageError("epsilon must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw UsageError("beta must lie in (0, 1)");
    const Input input = load_input(o.input, in);
    RunReport r;
    r.command = "nearly";
    r.input_digest = input.digest;
    r.parameters["epsilon"] = o.epsilon;
    r.parameters["beta"] = beta;

    const ScheduledSpace scaled = scheduled_space(input.space);
    const ScaleSchedule schedule = make_schedule(scaled.space, o.epsilon);
    SkeletonTree tree = build_nearly_um_skeleton(scaled.space, input.mu, schedule);
    const UltrametricSkeleton um = skeleton_measure(tree);
    const CoverEstimate lambda_hat = doubling_estimate(scaled.space);
    common_outputs(r, scaled.space, input.mu, um, lambda_hat);
    r.outputs["alpha"] = scaled.alpha;
    r.outputs["max_level"] = schedule.max_level;
    r.outputs["schedule"] = schedule_to_json(schedule);
    r.checks = nearly_suites(scaled.space, input.mu, um.tree, um, schedule, beta, lambda_hat, r);
    add_unscaled_constant(r, scaled.alpha, beta);

    const std::string dir = prepare_out_dir(o);
    if (!dir.empty()) {
        ordered_json doc = tree_to_json(um.tree, &um);
        doc["kind"] = "nearly";
        doc["alpha"] = scaled.alpha;
        doc["beta"] = beta;
        doc["schedule"] = schedule_to_json(schedule);
        write_file(dir + "/tree.json", doc.dump(2) + "\n");
    }
    r.elapsed_ms = elapsed_ms(start);
    emit(r, o, out, dir.empty() ? std::string() : dir + "/" + report_name(o));
    return finish(r, err);
}

void check_stored_measure(const ordered_json& doc, const UltrametricSkeleton& um,
                          CheckReport& report) {
    if (!doc.contains("nu") || !doc.contains("leaf_of")) return;
    PredicateCheck c("nu_consistency");
    std::vector<PointId> points;
    for (const auto& entry : doc.at("nu")) {
        const PointId p = entry.at(0).get<PointId>();
        const double m = entry.at(1).get<double>();
        points.push_back(p);
        c.observe(p < um.nu.size() && um.nu[p] == m,
                  "stored nu of point " + std::to_string(p) + " differs");
    }
    c.observe(Cluster(points) == um.points, "stored skeleton points differ");
    for (const auto& entry : doc.at("leaf_of")) {
        const PointId p = entry.at(0).get<PointId>();
        c.observe(p < um.leaf_of.size() && um.leaf_of[p] == entry.at(1).get<NodeId>(),
                  "stored leaf of point " + std::to_string(p) + " differs");
    }
    report.add(c.result());
}

int cmd_verify(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    if (o.tree.empty()) throw UsageError("verify needs --tree");
    const Input input = load_input(o.input, in);
    ordered_json doc;
    try {
        doc = ordered_json::parse(read_file(o.tree));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed tree document: ") + e.what());
    }
    const SkeletonTree tree = tree_from_json(doc);
    const bool scheduled = doc.value("kind", std::string("fixed")) == "nearly";

    RunReport r;
    r.command = "verify";
    r.input_digest = input.digest;
    r.parameters["tree_digest"] = sha256_hex(read_file(o.tree));
    r.parameters["kind"] = scheduled ? "nearly" : "fixed";

    PredicateCheck rebuilt("rebuild_identical");
    if (!scheduled) {
        r.parameters["t"] = tree.t;
        const CoverEstimate lambda_hat = doubling_estimate(input.space);
        CheckReport report = verify_tree(input.space, input.mu, tree);
        if (structurally_sound(report)) {
            const UltrametricSkeleton um = skeleton_measure(tree);
            report = fixed_suites(input.space, input.mu, tree, um, lambda_hat);
            check_stored_measure(doc, um, report);
            common_outputs(r, input.space, input.mu, um, lambda_hat);
        }
        rebuilt.observe(tree.t >= 2 && build_skeleton(input.space, input.mu, tree.t) == tree,
                        "rebuilding from the input gives a different tree");
        r.checks = std::move(report);
    } else {
        const ScaleSchedule stored = schedule_from_json(doc.at("schedule"));
        const double beta = o.beta.value_or(doc.value("beta", 0.9));
        if (!(beta > 0.0 && beta < 1.0)) throw UsageError("beta must lie in (0, 1)");
        r.parameters["epsilon"] = stored.epsilon;
        r.parameters["beta"] = beta;
        const ScheduledSpace scaled = scheduled_space(input.space);
        PredicateCheck consistent("schedule_consistency");
        consistent.observe(make_schedule(scaled.space, stored.epsilon) == stored,
                           "stored schedule differs from the recomputed one");
        consistent.observe(doc.value("alpha", 0.0) == scaled.alpha,
                           "stored scale factor differs from the recomputed one");
        const CoverEstimate lambda_hat = doubling_estimate(scaled.space);
        CheckReport report = verify_tree(scaled.space, input.mu, tree);
        if (structurally_sound(report)) {
            const UltrametricSkeleton um = skeleton_measure(tree);
            report = nearly_suites(scaled.space, input.mu, tree, um, stored, beta, lambda_hat, r);
            check_stored_measure(doc, um, report);
            common_outputs(r, scaled.space, input.mu, um, lambda_hat);
            add_unscaled_constant(r, scaled.alpha, beta);
        }
        bool same = false;
        try {
            same = build_nearly_um_skeleton(scaled.space, input.mu, stored) == tree;
        } catch (const std::out_of_range&) {
            same = false;
        }
        rebuilt.observe(same, "rebuilding from the input gives a different tree");
        report.add(consistent.result());
        r.checks = std::move(report);
    }
    r.checks.add(rebuilt.result());
    r.elapsed_ms = elapsed_ms(start);
    emit(r, o, out, o.out);
    return finish(r, err);
}

InstanceSpec spec_from_options(const Options& o, const std::string& kind) {
    InstanceSpec s;
    if (kind == "cantor") {
        s.kind = InstanceKind::cantor;
    } else if (kind == "grid") {
        s.kind = InstanceKind::grid;
    } else if (kind == "random_doubling") {
        s.kind = InstanceKind::random_doubling;
    } else if (kind == "matrix") {
        s.kind = InstanceKind::matrix;
    } else if (kind == "snowflake") {
        if (o.base == "snowflake") throw UsageError("snowflake base cannot be a snowflake");
        return snowflake_spec(spec_from_options(o, o.base), o.theta);
    } else {
        throw UsageError("unknown kind '" + kind + "'");
    }
    s.level = o.level;
    const auto slash = o.ratio.find('/');
    try {
        s.ratio = slash == std::string::npos
                      ? std::stod(o.ratio)
                      : std::stod(o.ratio.substr(0, slash)) / std::stod(o.ratio.substr(slash + 1));
    } catch (const std::exception&) {
        throw UsageError("invalid ratio '" + o.ratio + "'");
    }
    s.dim = o.dim;
    s.side = o.side;
    s.metric = o.metric == "euclidean" ? GridMetric::euclidean : GridMetric::max;
    s.seed = o.seed;
    s.levels = o.levels;
    s.branching = o.branching;
    s.path = o.path;
    s.left_mass = o.left_mass;
    s.measure = o.measure == "self_similar" ? MeasureKind::self_similar : MeasureKind::uniform;
    return s;
}

int cmd_gen(const Options& o, std::ostream& out) {
    const Instance inst = generate(spec_from_options(o, o.kind));
    const std::string text = format_space(inst.space, &inst.mu);
    if (o.out.empty() || o.out == "-")
        out << text;
    else
        write_file(o.out, text);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Ultrametric skeletons of finite metric-measure spaces"};
    app.require_subcommand(1);
    Options o;
    const std::vector<std::string> formats{"text", "structured"};

    auto* gen = app.add_subcommand("gen", "Generate a test instance as a space file");
    gen->add_option("--kind", o.kind, "cantor|grid|random_doubling|snowflake|matrix")
        ->check(CLI::IsMember({"cantor", "grid", "random_doubling", "snowflake", "matrix"}));
    gen->add_option("--base", o.base, "base kind for snowflake")
        ->check(CLI::IsMember({"cantor", "grid", "random_doubling", "matrix"}));
    gen->add_option("--level", o.level, "cantor construction level");
    gen->add_option("--ratio", o.ratio, "cantor contraction ratio, e.g. 1/3");
    gen->add_option("--dim", o.dim, "grid or random_doubling dimension");
    gen->add_option("--side", o.side, "grid points per axis");
    gen->add_option("--metric", o.metric, "grid metric")->check(CLI::IsMember({"max", "euclidean"}));
    gen->add_option("--seed", o.seed, "random_doubling seed");
    gen->add_option("--levels", o.levels, "random_doubling levels");
    gen->add_option("--branching", o.branching, "random_doubling branching");
    gen->add_option("--theta", o.theta, "snowflake exponent in (0, 1]");
    gen->add_option("--measure", o.measure, "uniform|self_similar")
        ->check(CLI::IsMember({"uniform", "self_similar"}));
    gen->add_option("--left-mass", o.left_mass, "self-similar left branch mass");
    gen->add_option("--path", o.path, "matrix kind: space file to re-emit");
    gen->add_option("--out", o.out, "output file (default: standard output)");

    auto* skel = app.add_subcommand("skeleton", "Build and verify a fixed-t skeleton");
    auto* nearly = app.add_subcommand("nearly", "Build and verify a scale-scheduled skeleton");
    auto* verify = app.add_subcommand("verify", "Re-run every check against a stored tree");
    for (auto* sub : {skel, nearly, verify}) {
        sub->add_option("--input", o.input, "space file, '-' for standard input");
        sub->add_option("--format", o.format, "report format")->check(CLI::IsMember(formats));
    }
    skel->add_option("--t", o.t, "split parameter (>= 2)");
    skel->add_option("--out", o.out, "directory for tree.json and the report");
    nearly->add_option("--epsilon", o.epsilon, "mass loss bound in (0, 1)");
    nearly->add_option("--beta", o.beta, "Hoelder exponent in (0, 1)");
    nearly->add_option("--out", o.out, "directory for tree.json and the report");
    verify->add_option("--tree", o.tree, "tree document")->required();
    verify->add_option("--beta", o.beta, "Hoelder exponent for scheduled trees");
    verify->add_option("--out", o.out, "report file (default: standard output)");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) return cmd_gen(o, out);
        if (*skel) return cmd_skeleton(o, in, out, err);
        if (*nearly) return cmd_nearly(o, in, out, err);
        return cmd_verify(o, in, out, err);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
    } catch (const ValidationError& e) {
        err << "invalid space: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitUsage;
}

}  // namespace umskel
