#pragma once

#include <functional>
#include <type_traits>
#include <vector>

#include "twoport/circuit.hpp"
#include "twoport/counting.hpp"
#include "twoport/errors.hpp"
#include "twoport/rng.hpp"
#include "twoport/value_grid.hpp"

namespace twoport {

namespace detail {

// Pair index q = type * n_v + bin orders components by (type, bin), which on
// an ascending grid equals the canonical (type, value) order.
inline Component component_from_pair(const ValueGrid& grid, Alignment a, int q) {
    const int n_v = grid.num_bins();
    return grid.make_component(a, static_cast<ComponentType>(q / n_v), q % n_v);
}

template <class Visitor>
bool visit_runs(const ValueGrid& grid, const std::vector<int>& run_sizes,
                Alignment first, Visitor&& visit) {
    const int m = grid.num_types() * grid.num_bins();
    const std::size_t n_runs = run_sizes.size();
    std::vector<std::vector<int>> picks(n_runs);
    Configuration config;

    // Depth-first over runs; each run iterates nondecreasing pair sequences
    // (multisets) via an odometer.
    std::function<bool(std::size_t)> rec = [&](std::size_t r) -> bool {
        if (r == n_runs) return visit(config);
        const Alignment a =
            (r % 2 == 0) == (first == Alignment::Series) ? Alignment::Series
                                                         : Alignment::Parallel;
        auto& pick = picks[r];
        pick.assign(static_cast<std::size_t>(run_sizes[r]), 0);
        const std::size_t base = config.size();
        config.components.resize(base + pick.size());
        while (true) {
            for (std::size_t i = 0; i < pick.size(); ++i)
                config.components[base + i] = component_from_pair(grid, a, pick[i]);
            if (!rec(r + 1)) return false;
            // advance odometer keeping entries nondecreasing
            std::size_t i = pick.size();
            while (i > 0 && pick[i - 1] == m - 1) --i;
            if (i == 0) break;
            const int v = ++pick[i - 1];
            for (std::size_t j = i; j < pick.size(); ++j) pick[j] = v;
        }
        config.components.resize(base);
        return true;
    };
    return rec(0);
}

} // namespace detail

/// Streams every canonical configuration of exact length n over the grid's
/// (n_c, n_v) universe, each exactly once. The visitor returns false to stop
/// early. Returns false if the visitor stopped the stream.
template <class Visitor>
bool for_each_canonical(int n, const ValueGrid& grid, Visitor&& visit) {
    if (n < 1) throw InvalidInput("for_each_canonical: n must be >= 1");
    // Compositions of n: cut-point bitmask over the n-1 gaps.
    const std::uint64_t n_compositions = std::uint64_t{1} << (n - 1);
    for (std::uint64_t bits = 0; bits < n_compositions; ++bits) {
        std::vector<int> run_sizes;
        int run = 1;
        for (int gap = 0; gap < n - 1; ++gap) {
            if (bits & (std::uint64_t{1} << gap)) {
                run_sizes.push_back(run);
                run = 1;
            } else {
                ++run;
            }
        }
        run_sizes.push_back(run);
        for (Alignment first : {Alignment::Series, Alignment::Parallel}) {
            auto forward_visit = [&](const Configuration& c) -> bool {
                if constexpr (std::is_void_v<decltype(visit(c))>) {
                    visit(c);
                    return true;
                } else {
                    return visit(c);
                }
            };
            if (!detail::visit_runs(grid, run_sizes, first, forward_visit)) return false;
        }
    }
    return true;
}

/// Materializes the full canonical enumeration. Throws CapacityError when the
/// exact count exceeds `cap`.
inline std::vector<Configuration> enumerate_canonical(int n, const ValueGrid& grid,
                                                      std::uint64_t cap = 1'000'000) {
    const BigInt total = count_canonical(n, grid.num_types(), grid.num_bins()).count;
    if (total > cap)
        throw CapacityError("enumerate_canonical: count " + total.str() +
                            " exceeds cap " + std::to_string(cap));
    std::vector<Configuration> out;
    out.reserve(static_cast<std::size_t>(total));
    for_each_canonical(n, grid, [&](const Configuration& c) {
        out.push_back(c);
        return true;
    });
    return out;
}

/// Draws a canonical configuration of exact length n, deterministic per Rng
/// state: a uniform composition into alignment runs, a uniform first
/// alignment, then per run a uniform multiset of (type, bin) pairs.
inline Configuration random_canonical(int n, const ValueGrid& grid, Rng& rng) {
    if (n < 1) throw InvalidInput("random_canonical: n must be >= 1");
    const int m = grid.num_types() * grid.num_bins();
    Configuration config;
    config.components.reserve(static_cast<std::size_t>(n));
    Alignment align = rng.coin() ? Alignment::Series : Alignment::Parallel;
    int remaining = n;
    while (remaining > 0) {
        int run = 1;
        while (run < remaining && !rng.coin()) ++run;
        std::vector<int> picks(static_cast<std::size_t>(run));
        for (int& q : picks) q = rng.index(static_cast<std::size_t>(m));
        std::sort(picks.begin(), picks.end());
        for (int q : picks)
            config.components.push_back(detail::component_from_pair(grid, align, q));
        align = align == Alignment::Series ? Alignment::Parallel : Alignment::Series;
        remaining -= run;
    }
    return config;
}

inline Configuration random_canonical(int n, const ValueGrid& grid, std::uint64_t seed) {
    Rng rng(seed);
    return random_canonical(n, grid, rng);
}

} // namespace twoport
