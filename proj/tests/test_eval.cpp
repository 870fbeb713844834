#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <vector>

#include "twoport/enumerate.hpp"
#include "twoport/eval.hpp"
#include "twoport/rng.hpp"

using namespace twoport;

namespace {

constexpr Alignment S = Alignment::Series;
constexpr Alignment P = Alignment::Parallel;

std::vector<DatasetRecord> synthetic_records(std::size_t count, std::uint64_t seed) {
    const ValueGrid grid = ValueGrid::standard();
    const FrequencyGrid freqs = FrequencyGrid::log_spaced(8, 1.0, 1e6);
    Rng rng(seed);
    std::vector<DatasetRecord> records(count);
    for (std::size_t i = 0; i < count; ++i) {
        records[i].id = i;
        records[i].split = Split::Test;
        records[i].config = random_canonical(1 + rng.index(4), grid, rng);
        records[i].termination = Termination::load(1.0);
        records[i].normalized =
            normalize(simulate(records[i].config, freqs, records[i].termination));
    }
    return records;
}

/// Moves the first component's bin to a different slot, keeping structure.
Configuration shift_first_bin(const Configuration& c, const ValueGrid& grid) {
    Configuration out = c;
    const int bin = (out[0].value_bin + 1) % grid.num_bins();
    out[0] = grid.make_component(out[0].alignment, out[0].type, bin);
    return out;
}

} // namespace

TEST_CASE("complete match compares bin-level structure up to run symmetry", "[eval]") {
    const ValueGrid grid = ValueGrid::standard();
    const Configuration gold = canonicalize(Configuration(
        {grid.make_component(S, ComponentType::Resistor, 1),
         grid.make_component(S, ComponentType::Capacitor, 2),
         grid.make_component(P, ComponentType::Inductor, 0)}));

    Configuration permuted = gold;
    std::swap(permuted.components[0], permuted.components[1]);  // same run
    CHECK(complete_match(permuted, gold));
    CHECK_FALSE(complete_match(permuted, gold, false));  // positional mode is strict
    CHECK(complete_match(gold, gold, false));

    CHECK_FALSE(complete_match(shift_first_bin(gold, grid), gold));
    Configuration shorter = gold;
    shorter.components.pop_back();
    CHECK_FALSE(complete_match(shorter, gold));
}

TEST_CASE("value-agnostic match ignores bins but not structure", "[eval]") {
    const ValueGrid grid = ValueGrid::standard();
    const Configuration gold = canonicalize(Configuration(
        {grid.make_component(S, ComponentType::Resistor, 1),
         grid.make_component(P, ComponentType::Capacitor, 2)}));

    CHECK(value_agnostic_match(shift_first_bin(gold, grid), gold));

    Configuration wrong_type = gold;
    wrong_type[0] = grid.make_component(S, ComponentType::Inductor, 1);
    CHECK_FALSE(value_agnostic_match(wrong_type, gold));

    Configuration wrong_align = gold;
    wrong_align[1] = grid.make_component(S, ComponentType::Capacitor, 2);
    CHECK_FALSE(value_agnostic_match(canonicalize(wrong_align), gold));

    // same types in a run with swapped bins: agnostic yes, complete yes too
    // (bin multisets agree), so agnostic dominates complete by construction
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Configuration a = random_canonical(1 + rng.index(5), grid, rng);
        Configuration b = rng.coin() ? a : random_canonical(1 + rng.index(5), grid, rng);
        if (rng.coin() && !b.empty()) b = shift_first_bin(b, grid);
        if (complete_match(b, a)) CHECK(value_agnostic_match(b, a));
    }
}

TEST_CASE("oracle predictor scores one on both metrics", "[eval]") {
    const auto records = synthetic_records(60, 11);
    const EvalTable table =
        evaluate([](const DatasetRecord& r) { return r.config; }, records);
    REQUIRE(!table.rows.empty());
    std::size_t n = 0;
    for (const auto& row : table.rows) {
        CHECK(row.complete_acc() == 1.0);
        CHECK(row.value_agnostic_acc() == 1.0);
        CHECK(row.failures == 0);
        n += row.n;
    }
    CHECK(n == records.size());
    const EvalRow t = table.totals();
    CHECK(t.complete == records.size());
    CHECK(t.value_agnostic == records.size());
}

TEST_CASE("noisy predictor keeps value-agnostic at or above complete", "[eval]") {
    const ValueGrid grid = ValueGrid::standard();
    const auto records = synthetic_records(120, 12);
    auto noisy = [&grid](const DatasetRecord& r) {
        if (r.id % 3 == 0) return shift_first_bin(r.config, grid);  // bin error
        if (r.id % 7 == 0) {
            Configuration c = r.config;
            c.components.push_back(grid.make_component(S, ComponentType::Resistor, 0));
            return canonicalize(c);  // structural error
        }
        return r.config;
    };
    const EvalTable table = evaluate(noisy, records, true, 3);
    const EvalRow t = table.totals();
    CHECK(t.n == records.size());
    CHECK(t.value_agnostic >= t.complete);
    CHECK(t.complete < records.size());       // bin errors hurt complete
    CHECK(t.value_agnostic < records.size()); // structural errors hurt both
    CHECK(t.value_agnostic > t.complete);     // bin-only errors split the metrics
    for (const auto& row : table.rows)
        CHECK(row.value_agnostic >= row.complete);
}

TEST_CASE("throwing predictions count as failures, not crashes", "[eval]") {
    const auto records = synthetic_records(30, 13);
    auto flaky = [](const DatasetRecord& r) -> Configuration {
        if (r.id % 2 == 0) throw std::runtime_error("no prediction");
        return r.config;
    };
    const EvalTable table = evaluate(flaky, records);
    const EvalRow t = table.totals();
    CHECK(t.failures == 15);
    CHECK(t.complete == 15);
    CHECK(t.n == 30);

    CHECK_THROWS_AS(evaluate(flaky, std::vector<DatasetRecord>{}), InvalidInput);
}

TEST_CASE("evaluation table renders stable CSV", "[eval]") {
    const auto records = synthetic_records(40, 14);
    const EvalTable table =
        evaluate([](const DatasetRecord& r) { return r.config; }, records);
    const std::string csv = table.to_csv();
    CHECK(csv.rfind("length,complete_acc,value_agnostic_acc,n\n", 0) == 0);
    CHECK(csv.find("1.000000,1.000000") != std::string::npos);
    // one data line per row plus the header
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == table.rows.size() + 1);
    // rows ascend by length
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        CHECK(table.rows[i].length > table.rows[i - 1].length);
}
