#include "umskel/check_report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace umskel {

void CheckReport::add(CheckResult r) {
    for (auto& existing : results_)
        if (existing.name == r.name) {
            existing = std::move(r);
            return;
        }
    results_.push_back(std::move(r));
}

void CheckReport::merge(const CheckReport& other) {
    for (const auto& r : other.results_) add(r);
}

void CheckReport::absorb(const CheckReport& other) {
    for (const auto& r : other.results_) {
        const CheckResult* existing = find(r.name);
        if (!existing) {
            add(r);
            continue;
        }
        CheckResult merged = *existing;
        merged.evaluated += r.evaluated;
        if (r.worst_slack && (!merged.worst_slack || *r.worst_slack < *merged.worst_slack)) {
            merged.worst_slack = r.worst_slack;
            if (merged.pass) merged.detail = r.detail;
        }
        if (merged.pass && !r.pass) merged.detail = r.detail;
        merged.pass = merged.pass && r.pass;
        add(std::move(merged));
    }
}

bool CheckReport::all_pass() const {
    return std::all_of(results_.begin(), results_.end(), [](const auto& r) { return r.pass; });
}

const CheckResult* CheckReport::first_failure() const {
    for (const auto& r : sorted())
        if (!r.pass) return find(r.name);
    return nullptr;
}

const CheckResult* CheckReport::find(const std::string& name) const {
    for (const auto& r : results_)
        if (r.name == name) return &r;
    return nullptr;
}

const CheckResult& CheckReport::at(const std::string& name) const {
    if (const auto* r = find(name)) return *r;
    throw std::out_of_range("no check named " + name);
}

std::vector<CheckResult> CheckReport::sorted() const {
    auto out = results_;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

InequalityCheck::InequalityCheck(std::string name, double rel_tol)
    : name_(std::move(name)), rel_tol_(rel_tol) {}

bool InequalityCheck::instance_ok(double lhs, double rhs) const {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return rhs - lhs >= -rel_tol_ * scale;
}

bool InequalityCheck::observe(double lhs, double rhs, const std::string& witness) {
    ++count_;
    const double slack = rhs - lhs;
    const bool ok = instance_ok(lhs, rhs);
    const std::string text = witness + (witness.empty() ? "" : ": ") + "lhs=" +
                             format_double(lhs) + " rhs=" + format_double(rhs);
    if (!worst_ || slack < *worst_) {
        worst_ = slack;
        worst_witness_ = text;
    }
    if (!ok) {
        if (failures_ == 0) first_failure_ = text;
        ++failures_;
    }
    return ok;
}

CheckResult InequalityCheck::result() const {
    CheckResult r;
    r.name = name_;
    r.pass = failures_ == 0;
    r.worst_slack = worst_;
    r.evaluated = count_;
    if (failures_ > 0)
        r.detail = std::to_string(failures_) + " of " + std::to_string(count_) +
                   " failed; first " + first_failure_;
    else
        r.detail = worst_witness_;
    return r;
}

bool PredicateCheck::observe(bool ok, const std::string& witness) {
    ++count_;
    if (!ok) {
        if (failures_ == 0) first_failure_ = witness;
        ++failures_;
    }
    return ok;
}

CheckResult PredicateCheck::result() const {
    CheckResult r;
    r.name = name_;
    r.pass = failures_ == 0;
    r.evaluated = count_;
    if (failures_ > 0)
        r.detail = std::to_string(failures_) + " of " + std::to_string(count_) +
                   " failed; first " + first_failure_;
    return r;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace umskel
