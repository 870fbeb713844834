// Acceptance gate: one numbered check per release criterion, each printing a
// single PASS/FAIL line. Run with no arguments for all checks or with an index
// (1-9) for one of them; the exit code is 0 only if every executed check passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "mna_oracle.hpp"
#include "twoport/counting.hpp"
#include "twoport/dataset.hpp"
#include "twoport/diffsim.hpp"
#include "twoport/enumerate.hpp"
#include "twoport/eval.hpp"
#include "twoport/ga.hpp"
#include "twoport/nn/train.hpp"

using namespace twoport;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

double rel_vec_error(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-30);
}

// ---------------------------------------------------------------------------
// 1. counting
// ---------------------------------------------------------------------------

/// Exhaustive oracle: walk every raw chain of length n over the (3,5) grid,
/// canonicalize, and count distinct canonical forms via a packed 6-bit code
/// per component. Independent of the closed-form recurrence under test.
std::uint64_t brute_force_count(int n, const ValueGrid& grid) {
    const int base = 2 * grid.num_types() * grid.num_bins();
    std::unordered_set<std::uint64_t> keys;
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    while (true) {
        Configuration raw;
        for (int i = 0; i < n; ++i) {
            const int d = digit[static_cast<std::size_t>(i)];
            raw.components.push_back(grid.make_component(
                static_cast<Alignment>(d / 15), static_cast<ComponentType>((d / 5) % 3),
                d % 5));
        }
        std::uint64_t key = 0;
        for (const Component& c : canonicalize(raw).components)
            key = key * 64 +
                  static_cast<std::uint64_t>((static_cast<int>(c.alignment) << 5) |
                                             (static_cast<int>(c.type) << 3) | c.value_bin);
        keys.insert(key);
        int i = 0;
        while (i < n && ++digit[static_cast<std::size_t>(i)] == base)
            digit[static_cast<std::size_t>(i++)] = 0;
        if (i == n) break;
    }
    return keys.size();
}

Outcome criterion_counting() {
    const auto t0 = Clock::now();
    const BigInt c1 = count_canonical(1, 3, 5).count;
    const BigInt c2 = count_canonical(2, 3, 5).count;
    const BigInt c3 = count_canonical(3, 3, 5).count;
    const BigInt c4 = count_canonical(4, 3, 5).count;
    const double recurrence_s = elapsed_s(t0);

    const ValueGrid grid = ValueGrid::standard();
    const std::uint64_t b3 = brute_force_count(3, grid);
    const std::uint64_t b4 = brute_force_count(4, grid);

    const bool pass = c1 == 30 && c2 == 690 && c3 == BigInt(b3) && c4 == BigInt(b4) &&
                      recurrence_s < 1.0;
    return {pass, format("n=1: %s, n=2: %s (expected 30, 690); n=3: %s vs brute %llu; "
                         "n=4: %s vs brute %llu; recurrence %.4fs (< 1s)",
                         c1.str().c_str(), c2.str().c_str(), c3.str().c_str(),
                         static_cast<unsigned long long>(b3), c4.str().c_str(),
                         static_cast<unsigned long long>(b4), recurrence_s)};
}

// ---------------------------------------------------------------------------
// 2. simulator vs nodal-analysis oracle
// ---------------------------------------------------------------------------

Outcome criterion_simulator_oracle() {
    const auto t0 = Clock::now();
    const ValueGrid grid = ValueGrid::standard();
    const FrequencyGrid freqs = default_grid();
    Rng rng(2024);
    double worst = 0.0;
    int worst_at = -1;
    for (int i = 0; i < 200; ++i) {
        const Configuration c = random_canonical(1 + rng.index(6), grid, rng);
        for (const Termination& term : {Termination::load(1.0), Termination::open()}) {
            const double dev =
                test::max_rel_deviation(simulate(c, freqs, term),
                                        test::mna_simulate(c, freqs, term));
            if (dev > worst) {
                worst = dev;
                worst_at = i;
            }
        }
    }
    const double wall = elapsed_s(t0);
    const bool pass = worst <= 1e-9 && wall < 30.0;
    return {pass, format("200 circuits x 512 freqs x both terminations: worst rel "
                         "deviation %.3e (circuit %d, tol 1e-9), %.1fs (< 30s)",
                         worst, worst_at, wall)};
}

// ---------------------------------------------------------------------------
// 3. invariance under canonicalization
// ---------------------------------------------------------------------------

Outcome criterion_symmetry() {
    const ValueGrid grid = ValueGrid::standard();
    const FrequencyGrid freqs = default_grid();
    Rng rng(3031);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int n = 1 + rng.index(6);
        Configuration raw;
        for (int k = 0; k < n; ++k)
            raw.components.push_back(
                grid.make_component(static_cast<Alignment>(rng.index(2)),
                                    static_cast<ComponentType>(rng.index(3)),
                                    rng.index(5)));
        const Configuration canon = canonicalize(raw);
        for (const Termination& term : {Termination::load(1.0), Termination::open()})
            worst = std::max(worst, test::max_rel_deviation(simulate(raw, freqs, term),
                                                            simulate(canon, freqs, term)));
    }
    return {worst <= 1e-9,
            format("100 raw chains vs canonical forms, both terminations: worst rel "
                   "deviation %.3e (tol 1e-9)",
                   worst)};
}

// ---------------------------------------------------------------------------
// 4. reverse-mode gradients vs central differences
// ---------------------------------------------------------------------------

Outcome criterion_gradients() {
    const ValueGrid grid = ValueGrid::standard();
    const FrequencyGrid freqs = default_grid();
    Rng rng(4042);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Termination term =
            i % 2 ? Termination::open() : Termination::load(1.0);
        const Spectrum target =
            simulate(random_canonical(1 + rng.index(4), grid, rng), freqs, term);
        const CandidateConfig cand =
            CandidateConfig::from(random_canonical(1 + rng.index(4), grid, rng));

        double loss = 0.0;
        const std::vector<double> ad = grad_values(cand, target, term, &loss);
        const double h = 1e-6;
        std::vector<double> fd(ad.size());
        for (std::size_t k = 0; k < fd.size(); ++k) {
            CandidateConfig hi = cand, lo = cand;
            hi.log_values[k] += h;
            lo.log_values[k] -= h;
            fd[k] = (loss_spectrum(hi, target, term) - loss_spectrum(lo, target, term)) /
                    (2 * h);
        }
        // central differences carry absolute noise ~ 2d*eps*loss/h; resonant
        // open-circuit targets push the loss high enough that microscale
        // gradients vanish below it, so the comparison floors there
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < fd.size(); ++k) {
            num += (ad[k] - fd[k]) * (ad[k] - fd[k]);
            den += fd[k] * fd[k];
        }
        const double fd_noise = 2.0 * static_cast<double>(freqs.size()) *
                                std::numeric_limits<double>::epsilon() * loss / h;
        const double err =
            std::sqrt(num) / std::max({std::sqrt(den), fd_noise / 1e-5, 1e-30});
        worst = std::max(worst, err);
    }
    return {worst <= 1e-5,
            format("100 random candidate/target pairs: worst gradient deviation %.3e "
                   "relative (tol 1e-5, floored at the FD noise scale)",
                   worst)};
}

// ---------------------------------------------------------------------------
// 5. value refinement
// ---------------------------------------------------------------------------

Outcome criterion_refinement() {
    const auto t0 = Clock::now();
    const ValueGrid grid = ValueGrid::standard();
    const FrequencyGrid freqs = default_grid();
    const Termination term = Termination::load(1.0);
    int hits = 0;
    for (int t = 0; t < 100; ++t) {
        Rng rng(5050 + static_cast<std::uint64_t>(t));
        const Configuration truth = random_canonical(3, grid, rng);
        const Spectrum target = simulate(truth, freqs, term);
        CandidateConfig cand = CandidateConfig::from(truth);
        for (double& lv : cand.log_values) lv += std::log(1.5);
        const RefineResult r = refine(cand, target, term, 5000, 0.01);
        if (r.final_loss < 1e-8) ++hits;
    }
    const double wall = elapsed_s(t0);
    const bool pass = hits >= 95 && wall < 300.0;
    return {pass, format("recovered loss < 1e-8 in %d/100 trials (need >= 95), %.0fs "
                         "(< 300s)",
                         hits, wall)};
}

// ---------------------------------------------------------------------------
// 6. GA recovery
// ---------------------------------------------------------------------------

/// One port sees the whole chain only for some shapes: a series element needs
/// load current through it, a shunt at the source is shorted by the ideal
/// source under load. Targets are drawn only from (structure, termination)
/// pairs where every component influences the measured response.
bool identifiable_measurement(const Configuration& c, Termination& term) {
    const bool first_series = c[0].alignment == Alignment::Series;
    if (c.size() == 1) {
        term = first_series ? Termination::load(1.0) : Termination::open();
        return true;
    }
    const bool second_series = c[1].alignment == Alignment::Series;
    if (first_series) {
        term = Termination::load(1.0);  // S,S and S,P are fully visible under load
        return true;
    }
    if (!second_series) {
        term = Termination::open();  // P,P drives measurable current when open
        return true;
    }
    return false;  // P,S: source shorts the shunt, open port starves the series
}

Outcome criterion_ga() {
    const auto t0 = Clock::now();
    GAParams params;
    params.population = 100;
    params.elites = 10;
    params.mutation_prob = 0.01;
    params.generations = 200;
    const FrequencyGrid freqs = default_grid();

    std::vector<Configuration> shallow = enumerate_canonical(1, params.grid);
    for (Configuration& c : enumerate_canonical(2, params.grid))
        shallow.push_back(std::move(c));

    // 100 runs per length keep the binomial noise of the rate estimate well
    // inside the 90% bar (about 1.7 runs per sigma at the measured rates)
    constexpr int kRunsPerLength = 100;
    int hits = 0;
    bool monotone = true;
    int len1_hits = 0, len2_hits = 0;
    for (int run = 0; run < 2 * kRunsPerLength; ++run) {
        const int length = run < kRunsPerLength ? 1 : 2;
        Rng draw(6000 + static_cast<std::uint64_t>(run));
        Configuration truth;
        Termination term = Termination::load(1.0);
        Spectrum target;
        for (;;) {
            truth = random_canonical(length, params.grid, draw);
            if (!identifiable_measurement(truth, term)) continue;
            target = simulate(truth, freqs, term);
            // Reject targets that a non-equivalent circuit of the same or
            // shorter length also hits: with those, no loss minimizer can name
            // a winner. Longer mimics always exist (a shunt at the source or a
            // series at an open port never shows up in the response) but lose
            // the shortest-chain tie-break, so they stay fair game.
            bool ambiguous = false;
            for (const Configuration& other : shallow) {
                if (other.size() > truth.size()) continue;
                if (equivalent(other, truth)) continue;
                try {
                    if (spectrum_loss(simulate(other, freqs, term), target) < 1e-6) {
                        ambiguous = true;
                        break;
                    }
                } catch (const NumericalError&) {
                }
            }
            if (!ambiguous) break;
        }

        const EvolveResult res =
            evolve(target, params, term, 6100 + static_cast<std::uint64_t>(run));
        for (std::size_t g = 1; g < res.history.size(); ++g)
            if (res.history[g] > res.history[g - 1]) monotone = false;
        if (equivalent(res.best.config, truth)) {
            ++hits;
            (length == 1 ? len1_hits : len2_hits)++;
        }
    }
    const double wall = elapsed_s(t0);
    const int need = 2 * kRunsPerLength * 9 / 10;
    const bool pass = hits >= need && monotone;
    return {pass, format("recovered %d/%d targets (length-1 %d/%d, length-2 %d/%d, "
                         "need >= %d); best-loss history nonincreasing in %s runs; %.0fs",
                         hits, 2 * kRunsPerLength, len1_hits, kRunsPerLength, len2_hits,
                         kRunsPerLength, need, monotone ? "all" : "NOT all", wall)};
}

// ---------------------------------------------------------------------------
// 7. neural checks at desk scale
// ---------------------------------------------------------------------------

std::vector<DatasetRecord> spectrum_records(std::size_t count, int freq_count,
                                            int min_len, int max_len,
                                            std::uint64_t seed) {
    const ValueGrid grid = ValueGrid::standard();
    const FrequencyGrid freqs = FrequencyGrid::log_spaced(freq_count, 1.0, 1e6);
    Rng rng(seed);
    std::vector<DatasetRecord> records(count);
    for (std::size_t i = 0; i < count; ++i) {
        records[i].id = i;
        records[i].config =
            random_canonical(min_len + rng.index(max_len - min_len + 1), grid, rng);
        records[i].termination = Termination::load(1.0);
        records[i].normalized =
            normalize(simulate(records[i].config, freqs, records[i].termination));
    }
    return records;
}

double hypernet_gradcheck_error(nn::Mode mode) {
    const nn::ArchConfig cfg = nn::ArchConfig::test_scale();
    const std::vector<DatasetRecord> records =
        spectrum_records(2, cfg.spectrum_len, 1, 3, 91);
    const std::size_t idx[2] = {0, 1};

    nn::Hypernet<double> net(cfg, mode);
    Rng init_rng(5);
    net.init(init_rng);
    nn::detail::BatchWork<double> work;
    std::vector<double> grad(net.param_count(), 0.0);
    nn::detail::run_batch(net, records, idx, 2, 1.0, nullptr, &grad, work);

    auto loss_of = [&](const nn::Hypernet<double>& n2) {
        nn::detail::BatchWork<double> w2;
        return nn::detail::run_batch(n2, records, idx, 2, 1.0, nullptr, nullptr, w2)
                   .loss.total() /
               2.0;
    };
    Rng pick(300 + static_cast<std::uint64_t>(mode));
    std::vector<double> fd, ad;
    const double h = 1e-5;
    for (int k = 0; k < 40; ++k) {
        const auto i = static_cast<std::size_t>(pick.index(net.param_count()));
        nn::Hypernet<double> hi = net, lo = net;
        hi.params()[i] += h;
        lo.params()[i] -= h;
        fd.push_back((loss_of(hi) - loss_of(lo)) / (2 * h));
        ad.push_back(grad[i]);
    }
    return rel_vec_error(ad, fd);
}

Outcome criterion_neural() {
    const auto t0 = Clock::now();
    const ValueGrid grid = ValueGrid::standard();

    // (a) end-to-end gradient check at test scale, all conditioning modes
    double grad_err = 0.0;
    for (const nn::Mode mode :
         {nn::Mode::HyperFull, nn::Mode::HyperGruOnly, nn::Mode::Vanilla})
        grad_err = std::max(grad_err, hypernet_gradcheck_error(mode));
    const bool pass_a = grad_err <= 1e-5;

    // (b) overfit 10 samples to >= 99% teacher-forced token accuracy
    nn::ArchConfig overfit_arch = nn::ArchConfig::test_scale();
    overfit_arch.spectrum_len = 64;
    overfit_arch.hidden = 16;
    overfit_arch.emb_type_dim = 8;
    overfit_arch.emb_value_dim = 8;
    const std::vector<DatasetRecord> ten = spectrum_records(10, 64, 1, 3, 71);
    nn::Model<float> overfit_model(overfit_arch, nn::Mode::HyperFull, grid);
    nn::TrainOptions overfit_opt;
    overfit_opt.epochs = 400;
    overfit_opt.lr = 3e-3;
    overfit_opt.tf_prob = 1.0;
    overfit_opt.batch_size = 10;
    overfit_opt.seed = 2;
    nn::train(overfit_model, ten, ten, overfit_opt);
    const double overfit_acc = nn::teacher_forced_accuracy(overfit_model, ten);
    const bool pass_b = overfit_acc >= 0.99;

    // (c) reduced-dataset direction: full hypernetwork conditioning must beat
    // the hidden-state-conditioned decoder on value-agnostic test accuracy
    GenerateOptions gopt;
    gopt.split = SplitSpec{4, 2, 640, 100, 100};  // 30+690+640+640 = 2000 train
    gopt.frequencies = FrequencyGrid::log_spaced(128, 1.0, 1e6);
    gopt.seed = 77;
    const std::vector<DatasetRecord> all = generate_dataset(gopt);
    std::vector<DatasetRecord> train_set, val_set, test_set;
    for (const DatasetRecord& r : all) {
        (r.split == Split::Train ? train_set
         : r.split == Split::Val ? val_set
                                 : test_set)
            .push_back(r);
    }

    nn::ArchConfig arch;
    arch.spectrum_len = 128;
    arch.conv_channels = 16;
    arch.blocks_per_branch = 2;
    arch.proj_dim = 64;
    arch.hidden = 32;
    arch.emb_type_dim = 15;
    arch.emb_value_dim = 15;
    nn::TrainOptions opt;
    opt.epochs = 100;
    opt.lr = 3e-4;
    opt.tf_prob = 0.5;
    opt.batch_size = 32;
    opt.seed = 7;

    auto test_accuracy = [&](nn::Mode mode) {
        nn::Model<float> model(arch, mode, grid);
        nn::train(model, train_set, val_set, opt);
        const EvalTable table = evaluate(
            [&](const DatasetRecord& r) { return nn::predict_normalized(model, r.normalized); },
            test_set);
        return table.totals().value_agnostic_acc();
    };
    const double acc_full = test_accuracy(nn::Mode::HyperFull);
    const double acc_vanilla = test_accuracy(nn::Mode::Vanilla);
    const bool pass_c = acc_full > acc_vanilla;

    const double wall = elapsed_s(t0);
    const bool pass = pass_a && pass_b && pass_c && wall < 7200.0;
    return {pass, format("(a) gradcheck err %.2e (tol 1e-5); (b) overfit accuracy "
                         "%.4f (need >= 0.99); (c) value-agnostic test accuracy "
                         "hyper-full %.4f vs vanilla %.4f (need strictly greater); "
                         "%.0fs (< 7200s)",
                         grad_err, overfit_acc, acc_full, acc_vanilla, wall)};
}

// ---------------------------------------------------------------------------
// 8. dataset splits
// ---------------------------------------------------------------------------

Outcome criterion_dataset() {
    const auto t0 = Clock::now();
    GenerateOptions opt;
    opt.seed = 1;
    DatasetManifest manifest;
    const std::vector<DatasetRecord> records = generate_dataset(opt, &manifest);

    std::map<int, std::size_t> per_length[3];
    std::unordered_set<std::string> keys[3];
    std::unordered_set<std::string> train_short;
    for (const DatasetRecord& r : records) {
        const int s = static_cast<int>(r.split);
        per_length[s][static_cast<int>(r.config.size())]++;
        keys[s].insert(canonical_key(r.config));
        if (r.split == Split::Train && r.config.size() <= 3)
            train_short.insert(canonical_key(r.config));
    }

    const std::size_t train_n = keys[0].size(), val_n = keys[1].size(),
                      test_n = keys[2].size();
    bool composition = manifest.train_count == 23870 && manifest.val_count == 3360 &&
                       manifest.test_count == 2800 && train_n == 23870 &&
                       val_n == 3360 && test_n == 2800;
    const std::size_t want_train[11] = {0, 30, 690, 15310, 1120, 1120, 1120,
                                        1120, 1120, 1120, 1120};
    for (int n = 1; n <= 10; ++n) {
        composition = composition &&
                      per_length[0][n] == want_train[static_cast<std::size_t>(n)] &&
                      per_length[1][n] == (n >= 4 ? 480u : 0u) &&
                      per_length[2][n] == (n >= 4 ? 400u : 0u);
    }

    // train content at n <= 3 must be exactly the exhaustive enumeration
    std::unordered_set<std::string> exhaustive;
    for (int n = 1; n <= 3; ++n)
        for (const Configuration& c : enumerate_canonical(n, opt.grid))
            exhaustive.insert(canonical_key(c));
    const bool exhaustive_ok = train_short == exhaustive;

    bool disjoint = true;
    for (const auto& k : keys[1])
        if (keys[0].count(k) || keys[2].count(k)) disjoint = false;
    for (const auto& k : keys[2])
        if (keys[0].count(k)) disjoint = false;

    const double wall = elapsed_s(t0);
    const bool pass = composition && exhaustive_ok && disjoint;
    return {pass,
            format("splits %zu/%zu/%zu (want 23870/3360/2800), per-length composition "
                   "%s, train n<=3 %s exhaustive enumeration, cross-split equivalences "
                   "%s; %.0fs",
                   train_n, val_n, test_n, composition ? "ok" : "WRONG",
                   exhaustive_ok ? "equals" : "DIFFERS FROM",
                   disjoint ? "none" : "FOUND", wall)};
}

// ---------------------------------------------------------------------------
// 9. metrics
// ---------------------------------------------------------------------------

Outcome criterion_metrics() {
    const ValueGrid grid = ValueGrid::standard();
    Rng rng(909);
    std::vector<DatasetRecord> records(240);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].id = i;
        records[i].config = random_canonical(1 + rng.index(6), grid, rng);
    }

    const EvalTable oracle =
        evaluate([](const DatasetRecord& r) { return r.config; }, records);
    bool oracle_ok = true;
    for (const EvalRow& row : oracle.rows)
        oracle_ok = oracle_ok && row.complete_acc() == 1.0 &&
                    row.value_agnostic_acc() == 1.0 && row.failures == 0;

    const EvalTable noisy = evaluate(
        [&](const DatasetRecord& r) {
            Configuration c = r.config;
            if (r.id % 3 == 0) {
                c[0] = grid.make_component(c[0].alignment, c[0].type,
                                           (c[0].value_bin + 1) % grid.num_bins());
            } else if (r.id % 5 == 0) {
                c.components.push_back(
                    grid.make_component(Alignment::Series, ComponentType::Resistor, 0));
            } else if (r.id % 11 == 0) {
                throw NumericalError("degenerate decode");
            }
            return c;
        },
        records);
    bool dominance = true;
    for (const EvalRow& row : noisy.rows)
        dominance = dominance && row.value_agnostic >= row.complete;
    const EvalRow totals = noisy.totals();
    const bool separated = totals.value_agnostic > totals.complete;

    const bool pass = oracle_ok && dominance && separated;
    return {pass, format("oracle predictor %s 1.0/1.0 on every length; value-agnostic "
                         ">= complete on %s rows (noisy totals %zu >= %zu of %zu)",
                         oracle_ok ? "scored" : "DID NOT score",
                         dominance ? "all" : "NOT all", totals.value_agnostic,
                         totals.complete, totals.n)};
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    Outcome (*fn)();
};

constexpr Criterion kCriteria[] = {
    {1, "counting", criterion_counting},
    {2, "simulator-oracle", criterion_simulator_oracle},
    {3, "canonicalization-symmetry", criterion_symmetry},
    {4, "gradient-check", criterion_gradients},
    {5, "refinement", criterion_refinement},
    {6, "ga-recovery", criterion_ga},
    {7, "neural", criterion_neural},
    {8, "dataset-splits", criterion_dataset},
    {9, "metrics", criterion_metrics},
};

int run_one(const Criterion& c) {
    Outcome o;
    try {
        o = c.fn();
    } catch (const std::exception& e) {
        o = {false, std::string("unhandled exception: ") + e.what()};
    }
    std::printf("ACCEPTANCE %d (%s): %s - %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    return o.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 2) {
        std::fprintf(stderr, "usage: %s [criterion 1-9]\n", argv[0]);
        return 2;
    }
    if (argc == 2) {
        char* end = nullptr;
        const long k = std::strtol(argv[1], &end, 10);
        if (!end || *end != '\0' || k < 1 || k > 9) {
            std::fprintf(stderr, "usage: %s [criterion 1-9]\n", argv[0]);
            return 2;
        }
        return run_one(kCriteria[k - 1]);
    }
    int failures = 0;
    for (const Criterion& c : kCriteria) failures += run_one(c);
    return failures ? 1 : 0;
}
