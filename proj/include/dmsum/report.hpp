#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dmsum {

// Outcome of scanning an inequality over a range. `worst_ratio` is the
// largest observed value of the checked quantity (already normalised so
// that the inequality reads worst_ratio <= bound), `worst_arg` where it
// occurred.
struct BoundReport {
    BoundReport() = default;
    BoundReport(std::string name, double lo, double hi, double bound_value = 0)
        : lemma(std::move(name)), range_lo(lo), range_hi(hi), bound(bound_value)
    {
    }

    std::string lemma;
    double range_lo = 0;
    double range_hi = 0;
    double worst_ratio = -HUGE_VAL;
    double worst_arg = 0;
    double bound = 0;
    bool pass = true;
    std::string note;
    nlohmann::json details = nlohmann::json::object();
    std::vector<BoundReport> parts;

    // Records an observation; the first maximum wins on ties so the
    // reported argument is deterministic.
    void observe(double value, double arg)
    {
        if (value > worst_ratio) {
            worst_ratio = value;
            worst_arg = arg;
        }
    }

    void finish_upper() { pass = pass && worst_ratio <= bound; }

    // Combines sub-checks: pass iff all pass; worst_ratio is the largest
    // part ratio relative to its own bound.
    void add_part(BoundReport part)
    {
        pass = pass && part.pass;
        const double rel = part.bound != 0 ? part.worst_ratio / part.bound : part.worst_ratio;
        if (parts.empty() || rel > worst_ratio) {
            worst_ratio = rel;
            worst_arg = part.worst_arg;
        }
        bound = 1.0;
        parts.push_back(std::move(part));
    }
};

inline nlohmann::json to_json(const BoundReport& r)
{
    nlohmann::json j;
    j["lemma"] = r.lemma;
    j["range"] = {r.range_lo, r.range_hi};
    j["worst_ratio"] = std::isfinite(r.worst_ratio) ? nlohmann::json(r.worst_ratio) : nlohmann::json(nullptr);
    j["worst_arg"] = r.worst_arg;
    j["bound"] = r.bound;
    j["pass"] = r.pass;
    if (!r.note.empty()) j["note"] = r.note;
    if (!r.details.empty()) j["details"] = r.details;
    if (!r.parts.empty()) {
        j["parts"] = nlohmann::json::array();
        for (const auto& p : r.parts) j["parts"].push_back(to_json(p));
    }
    return j;
}

} // namespace dmsum
