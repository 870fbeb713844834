#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "twoport/circuit.hpp"
#include "twoport/dataset.hpp"
#include "twoport/threads.hpp"

namespace twoport {

/// Exact structural match: equal length and componentwise equal
/// (alignment, type, value bin) after canonicalization of both sides.
/// Set canonical=false for strict positional comparison.
inline bool complete_match(const Configuration& pred, const Configuration& gold,
                           bool canonical = true) {
    const Configuration a = canonical ? canonicalize(pred, CanonMode::ByBin) : pred;
    const Configuration b = canonical ? canonicalize(gold, CanonMode::ByBin) : gold;
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].alignment != b[i].alignment || a[i].type != b[i].type ||
            a[i].value_bin != b[i].value_bin)
            return false;
    }
    return true;
}

/// Structure-only match: equal length and componentwise equal
/// (alignment, type), with value bins ignored throughout — canonicalization
/// treats same-type components in a run as indistinguishable.
inline bool value_agnostic_match(const Configuration& pred, const Configuration& gold,
                                 bool canonical = true) {
    const Configuration a = canonical ? canonicalize(pred, CanonMode::TypeOnly) : pred;
    const Configuration b = canonical ? canonicalize(gold, CanonMode::TypeOnly) : gold;
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].alignment != b[i].alignment || a[i].type != b[i].type) return false;
    }
    return true;
}

struct EvalRow {
    int length = 0;
    std::size_t n = 0;
    std::size_t complete = 0;
    std::size_t value_agnostic = 0;
    std::size_t failures = 0;

    [[nodiscard]] double complete_acc() const {
        return n ? static_cast<double>(complete) / static_cast<double>(n) : 0.0;
    }
    [[nodiscard]] double value_agnostic_acc() const {
        return n ? static_cast<double>(value_agnostic) / static_cast<double>(n) : 0.0;
    }
};

struct EvalTable {
    std::vector<EvalRow> rows;  // ascending length, one row per length present

    [[nodiscard]] const EvalRow* row(int length) const {
        for (const auto& r : rows)
            if (r.length == length) return &r;
        return nullptr;
    }

    [[nodiscard]] EvalRow totals() const {
        EvalRow t;
        for (const auto& r : rows) {
            t.n += r.n;
            t.complete += r.complete;
            t.value_agnostic += r.value_agnostic;
            t.failures += r.failures;
        }
        return t;
    }

    [[nodiscard]] std::string to_csv() const {
        std::string out = "length,complete_acc,value_agnostic_acc,n\n";
        char line[128];
        for (const auto& r : rows) {
            std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%zu\n", r.length,
                          r.complete_acc(), r.value_agnostic_acc(), r.n);
            out += line;
        }
        return out;
    }
};

/// Scores a predictor over a record set, one row per circuit length.
/// The predictor maps a DatasetRecord to a Configuration and must be
/// thread-safe; a throwing prediction scores zero on both metrics.
template <class Predictor>
EvalTable evaluate(Predictor&& predict, const std::vector<DatasetRecord>& records,
                   bool canonical = true, unsigned threads = 1) {
    if (records.empty()) throw InvalidInput("evaluate: empty record set");

    struct Outcome {
        bool complete = false;
        bool value_agnostic = false;
        bool failed = false;
    };
    std::vector<Outcome> outcomes(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        try {
            const Configuration pred = predict(records[i]);
            outcomes[i].complete = complete_match(pred, records[i].config, canonical);
            outcomes[i].value_agnostic =
                value_agnostic_match(pred, records[i].config, canonical);
        } catch (const std::exception&) {
            outcomes[i].failed = true;
        }
    }, threads);

    std::map<int, EvalRow> by_length;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const int len = static_cast<int>(records[i].config.size());
        EvalRow& row = by_length[len];
        row.length = len;
        ++row.n;
        row.complete += outcomes[i].complete ? 1 : 0;
        row.value_agnostic += outcomes[i].value_agnostic ? 1 : 0;
        row.failures += outcomes[i].failed ? 1 : 0;
    }
    EvalTable table;
    for (auto& [len, row] : by_length) table.rows.push_back(row);
    return table;
}

} // namespace twoport
