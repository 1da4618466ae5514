#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace umskel {

struct CheckResult {
    std::string name;
    bool pass = true;
    /// Smallest (rhs - lhs) observed over all instances of the inequality;
    /// empty for purely structural checks or when nothing was evaluated.
    std::optional<double> worst_slack;
    std::size_t evaluated = 0;
    std::string detail;
};

/// Named pass/fail results. Names are unique; merge() overwrites by name.
class CheckReport {
public:
    void add(CheckResult r);
    void merge(const CheckReport& other);
    /// Combines same-named checks: pass is and-ed, counts add up and the
    /// smaller worst slack wins.
    void absorb(const CheckReport& other);

    bool all_pass() const;
    const CheckResult* first_failure() const;
    const CheckResult* find(const std::string& name) const;
    const CheckResult& at(const std::string& name) const;
    bool passed(const std::string& name) const { return at(name).pass; }

    /// Sorted by name.
    std::vector<CheckResult> sorted() const;
    const std::vector<CheckResult>& results() const { return results_; }

private:
    std::vector<CheckResult> results_;
};

/// Accumulates instances of `lhs <= rhs` for one named check.
///
/// An instance passes when rhs - lhs >= -rel_tol * max(|lhs|, |rhs|). The
/// worst instance (smallest slack) is kept with its witness description.
class InequalityCheck {
public:
    explicit InequalityCheck(std::string name, double rel_tol = 0.0);

    /// Returns whether this instance passed.
    bool observe(double lhs, double rhs, const std::string& witness = {});
    template <class WitnessFn>
    bool observe_lazy(double lhs, double rhs, WitnessFn&& witness) {
        const double slack = rhs - lhs;
        const bool ok = instance_ok(lhs, rhs);
        if (!ok || !worst_ || slack < *worst_) return observe(lhs, rhs, witness());
        ++count_;
        return ok;
    }

    CheckResult result() const;

private:
    bool instance_ok(double lhs, double rhs) const;

    std::string name_;
    double rel_tol_;
    std::optional<double> worst_;
    std::string worst_witness_;
    std::string first_failure_;
    std::size_t count_ = 0;
    std::size_t failures_ = 0;
};

/// Structural (boolean) check that keeps the first failing witness.
class PredicateCheck {
public:
    explicit PredicateCheck(std::string name) : name_(std::move(name)) {}
    bool observe(bool ok, const std::string& witness = {});
    template <class WitnessFn>
    bool observe_lazy(bool ok, WitnessFn&& witness) {
        if (ok) {
            ++count_;
            return true;
        }
        return observe(false, witness());
    }
    CheckResult result() const;

private:
    std::string name_;
    std::string first_failure_;
    std::size_t count_ = 0;
    std::size_t failures_ = 0;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace umskel
