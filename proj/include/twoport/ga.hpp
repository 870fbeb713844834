#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "twoport/circuit.hpp"
#include "twoport/enumerate.hpp"
#include "twoport/errors.hpp"
#include "twoport/rng.hpp"
#include "twoport/spectrum.hpp"
#include "twoport/threads.hpp"
#include "twoport/value_grid.hpp"

namespace twoport {

struct Individual {
    Configuration config;
    std::optional<double> cached_loss;
};

struct GAParams {
    std::size_t population = 100;
    std::size_t elites = 10;
    double mutation_prob = 0.01;
    std::size_t generations = 1000;
    int init_length_min = 1;
    int init_length_max = 10;
    // genome cap matching the modeled circuit family; without one, near-flat
    // fitness lets chain lengths compound a few percent per generation until
    // evaluation cost and memory explode
    int max_length = 10;
    ValueGrid grid = ValueGrid::standard();

    void validate() const {
        if (population == 0 || elites >= population)
            throw InvalidInput("GAParams: need 0 < elites < population");
        if (mutation_prob < 0.0 || mutation_prob > 1.0)
            throw InvalidInput("GAParams: mutation_prob must be in [0, 1]");
        if (init_length_min < 1 || init_length_max < init_length_min)
            throw InvalidInput("GAParams: bad init length range");
        if (max_length < init_length_max)
            throw InvalidInput("GAParams: max_length must cover init lengths");
    }
};

namespace detail {

inline Component random_component(const ValueGrid& grid, Rng& rng) {
    const Alignment a = rng.coin() ? Alignment::Series : Alignment::Parallel;
    const auto t = static_cast<ComponentType>(rng.index(
        static_cast<std::size_t>(grid.num_types())));
    const int bin = rng.index(static_cast<std::size_t>(grid.num_bins()));
    return grid.make_component(a, t, bin);
}

} // namespace detail

/// With probability p applies exactly one structural mutation (add / remove /
/// replace a random component; remove is skipped at length 1, add at
/// max_length) and returns the canonicalized result; otherwise returns the
/// input unchanged.
inline Individual mutate(const Individual& ind, double p, const ValueGrid& grid, Rng& rng,
                         int max_length = std::numeric_limits<int>::max()) {
    if (p < 0.0 || p > 1.0) throw InvalidInput("mutate: p must be in [0, 1]");
    if (!rng.bernoulli(p)) return ind;

    Configuration config = ind.config;
    const std::size_t n = config.size();
    // op 0 = add (unavailable at max_length), 1 = replace,
    // 2 = remove (unavailable at length 1)
    const bool can_add = n < static_cast<std::size_t>(max_length);
    int op = rng.index((can_add ? 2 : 1) + (n > 1 ? 1 : 0));
    if (!can_add) ++op;
    if (op == 0) {
        const std::size_t pos = static_cast<std::size_t>(rng.index(n + 1));
        config.components.insert(config.components.begin() + static_cast<std::ptrdiff_t>(pos),
                                 detail::random_component(grid, rng));
    } else if (op == 1) {
        config.components[static_cast<std::size_t>(rng.index(n))] =
            detail::random_component(grid, rng);
    } else {
        config.components.erase(config.components.begin() + rng.index(n));
    }
    return Individual{canonicalize(config), std::nullopt};
}

/// Deterministic single-point crossover: prefix of `a` up to cut_a plus
/// suffix of `b` from cut_b, canonicalized.
inline Individual crossover_at(const Individual& a, const Individual& b,
                               std::size_t cut_a, std::size_t cut_b) {
    if (a.config.empty() || b.config.empty())
        throw InvalidInput("crossover: empty parent");
    Configuration child;
    child.components.assign(a.config.components.begin(),
                            a.config.components.begin() + static_cast<std::ptrdiff_t>(cut_a));
    child.components.insert(child.components.end(),
                            b.config.components.begin() + static_cast<std::ptrdiff_t>(cut_b),
                            b.config.components.end());
    if (child.empty()) throw InvalidInput("crossover: cuts produce an empty child");
    return Individual{canonicalize(child), std::nullopt};
}

inline Individual crossover(const Individual& a, const Individual& b, Rng& rng,
                            int max_length = std::numeric_limits<int>::max()) {
    while (true) {
        const std::size_t cut_a = static_cast<std::size_t>(rng.index(a.config.size() + 1));
        const std::size_t cut_b = static_cast<std::size_t>(rng.index(b.config.size() + 1));
        if (cut_a == 0 && cut_b == b.config.size()) continue;  // empty child, redraw
        if (cut_a + (b.config.size() - cut_b) > static_cast<std::size_t>(max_length))
            continue;  // over the genome cap, redraw
        return crossover_at(a, b, cut_a, cut_b);
    }
}

/// exp(-L_S); a singular simulation makes the individual unselectable.
inline double fitness(const Individual& ind, const Spectrum& target, const Termination& term) {
    if (ind.cached_loss) return std::exp(-*ind.cached_loss);
    try {
        const double loss = spectrum_loss(simulate(ind.config, target.grid, term), target);
        return std::exp(-loss);
    } catch (const NumericalError&) {
        return 0.0;
    }
}

struct EvolveResult {
    Individual best;
    std::vector<double> history;  // per-generation best loss, length == generations
};

namespace detail {

inline double individual_loss(const Configuration& config, const Spectrum& target,
                              const Termination& term) {
    try {
        return spectrum_loss(simulate(config, target.grid, term), target);
    } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
    }
}

/// Elite order: loss, then shorter chain, then lexicographic canonical key.
inline bool elite_less(const Individual& x, double lx, const Individual& y, double ly,
                       std::string* kx, std::string* ky) {
    if (lx != ly) return lx < ly;
    if (x.config.size() != y.config.size()) return x.config.size() < y.config.size();
    if (kx->empty()) *kx = canonical_key(x.config);
    if (ky->empty()) *ky = canonical_key(y.config);
    return *kx < *ky;
}

/// Single-point crossover with the child length drawn uniformly over what the
/// parents can produce. Uniform independent cuts would concentrate children
/// near the parents' mean length, starving the short end of the search.
inline Individual balanced_crossover(const Individual& a, const Individual& b, Rng& rng,
                                     int max_length) {
    const std::size_t la = a.config.size(), lb = b.config.size();
    const std::size_t hi = std::min<std::size_t>(la + lb, static_cast<std::size_t>(max_length));
    const std::size_t want = 1 + rng.index(hi);
    // cuts realizing the target length: cut_a + (lb - cut_b) == want
    const std::size_t lo_a = want > lb ? want - lb : 0;
    const std::size_t hi_a = std::min(la, want);
    const std::size_t cut_a = lo_a + rng.index(hi_a - lo_a + 1);
    return crossover_at(a, b, cut_a, lb - (want - cut_a));
}

} // namespace detail

/// Generational GA: elites survive unchanged, the remainder is bred by
/// fitness-proportional parent selection, single-point crossover and
/// mutation. Mates carry a different configuration than the first parent
/// where possible, and children repeating a configuration already bred this
/// generation are redrawn. Deterministic per seed; fitness evaluation may be
/// parallel.
inline EvolveResult evolve(const Spectrum& target, const GAParams& params,
                           const Termination& term, std::uint64_t seed,
                           unsigned threads = 1) {
    params.validate();
    Rng rng(seed);

    std::vector<Individual> pop(params.population);
    for (auto& ind : pop) {
        const int len = params.init_length_min +
                        static_cast<int>(rng.bounded(static_cast<std::uint64_t>(
                            params.init_length_max - params.init_length_min + 1)));
        ind.config = random_canonical(len, params.grid, rng);
    }

    auto evaluate = [&](std::vector<Individual>& xs) {
        parallel_for(xs.size(), [&](std::size_t i) {
            if (!xs[i].cached_loss)
                xs[i].cached_loss = detail::individual_loss(xs[i].config, target, term);
        }, threads);
    };
    evaluate(pop);

    EvolveResult result;
    result.history.reserve(params.generations);
    Individual best;
    double best_loss = std::numeric_limits<double>::infinity();
    std::string best_key;

    // the overall best uses the same total order as elitism, so a zero-loss
    // tie resolves to the shortest chain no matter which one turned up first
    auto consider_best = [&](const Individual& cand, std::string* cand_key) {
        if (best.config.empty() ||
            detail::elite_less(cand, *cand.cached_loss, best, best_loss, cand_key,
                               &best_key)) {
            best = cand;
            best_loss = *cand.cached_loss;
            best_key = *cand_key;
        }
    };

    std::vector<std::size_t> order(pop.size());
    std::vector<std::string> keys(pop.size());
    std::vector<double> weights(pop.size());

    for (std::size_t gen = 0; gen < params.generations; ++gen) {
        // rank for elitism
        for (std::size_t i = 0; i < pop.size(); ++i) {
            order[i] = i;
            keys[i].clear();
        }
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return detail::elite_less(pop[x], *pop[x].cached_loss, pop[y],
                                      *pop[y].cached_loss, &keys[x], &keys[y]);
        });

        consider_best(pop[order[0]], &keys[order[0]]);

        double weight_sum = 0.0;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            const double l = *pop[i].cached_loss;
            weights[i] = std::isfinite(l) ? std::exp(-l) : 0.0;
            weight_sum += weights[i];
        }
        auto select_parent = [&]() -> const Individual& {
            if (weight_sum <= 0.0) return pop[rng.bounded(pop.size())];
            double r = rng.uniform() * weight_sum;
            for (std::size_t i = 0; i < pop.size(); ++i) {
                r -= weights[i];
                if (r <= 0.0) return pop[i];
            }
            return pop.back();
        };
        // breeding crosses two different configurations whenever the
        // population still holds one; a self-cross only clones the parent
        // and stalls the search once selection has concentrated
        auto select_mate = [&](const Individual& first) -> const Individual& {
            for (int tries = 0; tries < 64; ++tries) {
                const Individual& cand = select_parent();
                if (!(cand.config == first.config)) return cand;
            }
            return select_parent();
        };

        // duplicate children are redrawn (bounded tries): re-evaluating a
        // configuration already present this generation buys nothing on a
        // discrete search space
        std::unordered_set<std::string> seen;
        std::vector<Individual> next;
        next.reserve(pop.size());
        for (std::size_t e = 0; e < params.elites; ++e) {
            next.push_back(pop[order[e]]);
            seen.insert(canonical_key(next.back().config));
        }
        while (next.size() < params.population) {
            Individual child;
            for (int tries = 0; tries < 20; ++tries) {
                const Individual& pa = select_parent();
                const Individual& pb = select_mate(pa);
                child = detail::balanced_crossover(pa, pb, rng, params.max_length);
                child = mutate(child, params.mutation_prob, params.grid, rng, params.max_length);
                if (seen.insert(canonical_key(child.config)).second) break;
            }
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        evaluate(pop);

        double gen_best = std::numeric_limits<double>::infinity();
        for (const auto& ind : pop) gen_best = std::min(gen_best, *ind.cached_loss);
        result.history.push_back(std::min(gen_best, best_loss));
    }

    // the final population may contain a new overall best
    for (const auto& ind : pop) {
        std::string key;
        consider_best(ind, &key);
    }
    result.best = best;
    return result;
}

} // namespace twoport
