#ifndef STATGEO_REPORT_HPP
#define STATGEO_REPORT_HPP

#include <string>
#include <vector>

namespace statgeo {

/// One verified identity: residual against tolerance. The anchor spells the
/// identity out in ASCII so reports are self-describing.
struct CheckResult {
    std::string id;
    std::string anchor;
    double residual = 0.0;
    double tol = 0.0;
    bool pass = false;

    static CheckResult make(std::string id, std::string anchor, double residual, double tol) {
        CheckResult c;
        c.id = std::move(id);
        c.anchor = std::move(anchor);
        c.residual = residual;
        c.tol = tol;
        c.pass = residual <= tol;
        return c;
    }
};

struct SuiteReport {
    std::string name;
    std::vector<CheckResult> checks;
    int points_used = 0;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add(CheckResult c) { checks.push_back(std::move(c)); }
};

struct Report {
    std::string structure_name;
    std::vector<SuiteReport> suites;
    unsigned long long seed = 0;
    double wall_ms = 0.0;

    bool pass() const {
        for (const auto& s : suites)
            if (!s.pass()) return false;
        return true;
    }
};

/// Alphabetically-ordered JSON (stable for byte-identical replay; wall_ms is
/// the only field expected to vary between identical runs).
std::string to_json(const Report& report, int indent = 2);

}  // namespace statgeo

#endif
