#pragma once

#include <cmath>
#include <vector>

#include "twoport/circuit.hpp"
#include "twoport/errors.hpp"

namespace twoport {

/// Quantization grid: per component type, an ascending list of representative
/// values. n_c is the number of active types (prefix of R, C, L), n_v the
/// number of bins per type.
class ValueGrid {
public:
    ValueGrid(int n_c, std::vector<std::vector<double>> values)
        : n_c_(n_c), values_(std::move(values)) {
        if (n_c_ < 1 || n_c_ > kNumComponentTypes)
            throw InvalidInput("ValueGrid: n_c out of range");
        if (values_.size() != static_cast<std::size_t>(n_c_))
            throw InvalidInput("ValueGrid: one value list per active type required");
        const std::size_t nv = values_[0].size();
        for (const auto& per_type : values_) {
            if (per_type.empty() || per_type.size() != nv)
                throw InvalidInput("ValueGrid: equal nonempty bin counts required");
            for (std::size_t i = 0; i < per_type.size(); ++i) {
                if (!(per_type[i] > 0.0)) throw InvalidInput("ValueGrid: values must be > 0");
                if (i && !(per_type[i] > per_type[i - 1]))
                    throw InvalidInput("ValueGrid: values must be strictly increasing");
            }
        }
    }

    /// The stock 5-value grid: R {0.1,1,10,100,1000} ohm,
    /// C {1e-6..1e-2} F, L {1e-7..1e-3} H. Corner frequencies of RC/RL pairs
    /// fall inside the 1 Hz - 1 MHz band.
    static ValueGrid standard() {
        return ValueGrid(3, {{0.1, 1.0, 10.0, 100.0, 1000.0},
                             {1e-6, 1e-5, 1e-4, 1e-3, 1e-2},
                             {1e-7, 1e-6, 1e-5, 1e-4, 1e-3}});
    }

    /// Small synthetic grid for combinatorial tests: n_v decade values per type,
    /// offset per type so values never collide across types.
    static ValueGrid synthetic(int n_c, int n_v) {
        std::vector<std::vector<double>> values(static_cast<std::size_t>(n_c));
        for (int t = 0; t < n_c; ++t) {
            for (int b = 0; b < n_v; ++b) {
                values[static_cast<std::size_t>(t)].push_back(
                    (1.0 + t) * std::pow(10.0, b));
            }
        }
        return ValueGrid(n_c, std::move(values));
    }

    [[nodiscard]] int num_types() const { return n_c_; }
    [[nodiscard]] int num_bins() const { return static_cast<int>(values_[0].size()); }

    [[nodiscard]] double representative(ComponentType t, int bin) const {
        const auto ti = static_cast<std::size_t>(t);
        if (ti >= values_.size() || bin < 0 ||
            bin >= static_cast<int>(values_[ti].size()))
            throw InvalidInput("ValueGrid: bin out of range");
        return values_[ti][static_cast<std::size_t>(bin)];
    }

    /// Nearest bin in log space; exact midpoints resolve to the lower index.
    [[nodiscard]] int quantize(double value, ComponentType t) const {
        if (!(value > 0.0)) throw InvalidInput("quantize: value must be > 0");
        const auto& grid = values_.at(static_cast<std::size_t>(t));
        const double lv = std::log(value);
        int best = 0;
        double best_dist = std::abs(lv - std::log(grid[0]));
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double dist = std::abs(lv - std::log(grid[i]));
            if (dist < best_dist) {
                best = static_cast<int>(i);
                best_dist = dist;
            }
        }
        return best;
    }

    [[nodiscard]] Component make_component(Alignment a, ComponentType t, int bin) const {
        return Component{a, t, representative(t, bin), bin};
    }

    [[nodiscard]] const std::vector<std::vector<double>>& values() const { return values_; }

private:
    int n_c_;
    std::vector<std::vector<double>> values_;
};

} // namespace twoport
