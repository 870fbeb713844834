#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "twoport/twoport.hpp"

namespace {

using namespace twoport;

Termination parse_termination(const std::string& s) {
    if (s == "open") return Termination::open();
    const std::string prefix = "load:";
    if (s.rfind(prefix, 0) == 0) {
        char* end = nullptr;
        const double z = std::strtod(s.c_str() + prefix.size(), &end);
        if (end && *end == '\0' && z > 0.0) return Termination::load(z);
    }
    throw InvalidInput("termination must be 'open' or 'load:<impedance>', got '" + s + "'");
}

unsigned resolve_threads(unsigned cli_threads) {
    if (const char* env = std::getenv("TPF_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return cli_threads ? cli_threads : default_thread_count();
}

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file, bool binary) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, binary ? std::ios::binary : std::ios::out);
    if (!file) throw InvalidInput("cannot open output file: " + path);
    return file;
}

int cmd_count(int n, int nc, int nv) {
    std::cout << count_canonical(n, nc, nv).count << '\n';
    return 0;
}

int cmd_enumerate(int n, int nc, int nv, bool use_standard) {
    const ValueGrid grid = use_standard ? ValueGrid::standard() : ValueGrid::synthetic(nc, nv);
    for_each_canonical(n, grid, [](const Configuration& c) {
        std::cout << format_configuration(c) << '\n';
    });
    return 0;
}

int cmd_simulate(const std::string& literal, const std::string& term_str,
                 const std::string& format, const std::string& out_path, std::size_t d,
                 double f_first, double f_last) {
    const Configuration config = parse_configuration(literal);
    const Termination term = parse_termination(term_str);
    const Spectrum s = simulate(config, FrequencyGrid::log_spaced(d, f_first, f_last), term);
    std::ofstream file;
    if (format == "csv") {
        write_spectrum_csv(open_or_stdout(out_path, file, false), s);
    } else if (format == "bin") {
        if (out_path.empty())
            throw InvalidInput("simulate: binary output requires --output <file>");
        write_spectrum_binary(open_or_stdout(out_path, file, true), s,
                              term.is_open() ? kSpectrumFlagOpen : 0u);
    } else {
        throw InvalidInput("simulate: --out must be csv or bin");
    }
    return 0;
}

int cmd_refine(const std::string& literal, const std::string& target_path,
               const std::string& term_str, std::size_t iters, double lr) {
    const Configuration config = parse_configuration(literal);
    const Spectrum target = load_spectrum_file(target_path);
    const Termination term = parse_termination(term_str);
    const RefineResult r = refine(CandidateConfig::from(config), target, term, iters, lr);
    std::printf("initial_loss %.17g\n", r.initial_loss);
    std::printf("final_loss %.17g\n", r.final_loss);
    std::printf("iters %zu\n", r.iters);
    std::printf("config %s\n", format_configuration(r.candidate.realized()).c_str());
    return 0;
}

int cmd_ga(const std::string& target_path, const std::string& term_str,
           std::size_t generations, std::size_t pop, std::size_t elites, double mutation,
           std::uint64_t seed, const std::string& history_path, unsigned threads) {
    const Spectrum target = load_spectrum_file(target_path);
    const Termination term = parse_termination(term_str);
    GAParams params;
    params.population = pop;
    params.elites = elites;
    params.mutation_prob = mutation;
    params.generations = generations;
    const EvolveResult r = evolve(target, params, term, seed, threads);

    std::ofstream file;
    std::ostream& hist = open_or_stdout(history_path, file, false);
    hist << "generation,best_loss\n";
    for (std::size_t g = 0; g < r.history.size(); ++g)
        hist << g << ',' << r.history[g] << '\n';
    std::printf("best %s\n", format_configuration(r.best.config).c_str());
    std::printf("best_loss %.17g\n", r.best.cached_loss ? *r.best.cached_loss : 0.0);
    return 0;
}

SplitSpec parse_split_spec(const std::string& name) {
    if (name == "standard") return SplitSpec::standard();
    if (name == "reduced") {
        SplitSpec s;
        s.max_length = 4;
        s.exhaustive_max = 2;
        s.train_random_per_length = 640;
        s.val_per_length = 100;
        s.test_per_length = 100;
        return s;
    }
    throw InvalidInput("gen-dataset: unknown split spec '" + name + "'");
}

struct SplitOverrides {
    int max_length = -1;
    int exhaustive_max = -1;
    long train_per_length = -1;
    long val_per_length = -1;
    long test_per_length = -1;
    long points = -1;
};

int cmd_gen_dataset(const std::string& spec_name, const std::string& out_dir,
                    std::uint64_t seed, const std::string& term_str, bool raw,
                    const SplitOverrides& ov, unsigned threads) {
    GenerateOptions opt;
    opt.split = parse_split_spec(spec_name);
    if (ov.max_length >= 0) opt.split.max_length = ov.max_length;
    if (ov.exhaustive_max >= 0) opt.split.exhaustive_max = ov.exhaustive_max;
    if (ov.train_per_length >= 0)
        opt.split.train_random_per_length = static_cast<std::size_t>(ov.train_per_length);
    if (ov.val_per_length >= 0)
        opt.split.val_per_length = static_cast<std::size_t>(ov.val_per_length);
    if (ov.test_per_length >= 0)
        opt.split.test_per_length = static_cast<std::size_t>(ov.test_per_length);
    if (ov.points >= 0)
        opt.frequencies =
            FrequencyGrid::log_spaced(static_cast<std::size_t>(ov.points), 1.0, 1e6);
    opt.termination = parse_termination(term_str);
    opt.seed = seed;
    opt.include_raw = raw;
    opt.threads = threads;
    DatasetManifest manifest;
    const auto records = generate_dataset(opt, &manifest);
    write_dataset(out_dir, records, manifest);
    std::printf("train %llu\nval %llu\ntest %llu\nduplicate_rejections %llu\n",
                static_cast<unsigned long long>(manifest.train_count),
                static_cast<unsigned long long>(manifest.val_count),
                static_cast<unsigned long long>(manifest.test_count),
                static_cast<unsigned long long>(manifest.duplicate_rejections));
    return 0;
}

int cmd_train(const std::string& dataset_dir, const std::string& mode_str,
              const std::string& model_path, const std::string& log_path, int epochs,
              double lr, double tf, int batch, std::uint64_t seed) {
    const DatasetManifest manifest = read_manifest(
        std::filesystem::path(dataset_dir) / "manifest.json");
    const auto train_set = load_split(dataset_dir, Split::Train, manifest);
    const auto val_set = load_split(dataset_dir, Split::Val, manifest);

    nn::TrainOptions opt;
    opt.epochs = epochs;
    opt.lr = lr;
    opt.tf_prob = tf;
    opt.batch_size = batch;
    opt.seed = seed;

    nn::Model<float> model(nn::ArchConfig::standard(), nn::parse_mode(mode_str),
                           manifest.grid());
    const nn::TrainResult result = nn::train(model, train_set, val_set, opt);
    save_checkpoint(model_path, model);

    std::ofstream file;
    std::ostream& log = open_or_stdout(log_path, file, false);
    log << "# mode " << mode_str << " optimizer adam lr " << lr << " batch " << batch
        << " clip_norm " << opt.clip_norm << " tf_prob " << tf << " seed " << seed
        << " n_w " << model.net.layout().decoder.total << " params "
        << model.net.param_count() << '\n';
    log << "epoch,train_total,val_partial\n";
    char line[96];
    for (const auto& e : result.log) {
        std::snprintf(line, sizeof line, "%d,%.9g,%.9g\n", e.epoch, e.train_total,
                      e.val_partial);
        log << line;
    }
    std::printf("best_epoch %d\nbest_val_partial %.9g\nmodel %s\n", result.best_epoch,
                result.best_val_partial, model_path.c_str());
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& spectrum_path,
                bool refine_values, const std::string& term_str) {
    const nn::Model<float> model = nn::load_checkpoint(model_path);
    const Spectrum target = load_spectrum_file(spectrum_path);
    const Configuration config =
        nn::predict(model, target, refine_values, parse_termination(term_str));
    std::cout << format_configuration(config) << '\n';
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& dataset_dir,
             const std::string& split_name_str, bool positional, unsigned threads) {
    const nn::Model<float> model = nn::load_checkpoint(model_path);
    const DatasetManifest manifest = read_manifest(
        std::filesystem::path(dataset_dir) / "manifest.json");
    const auto records = load_split(dataset_dir, parse_split(split_name_str), manifest);
    const EvalTable table = evaluate(
        [&](const DatasetRecord& r) { return nn::predict_normalized(model, r.normalized); },
        records, !positional, threads);
    std::cout << table.to_csv();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-port analog circuit synthesis toolkit"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker thread cap (default: all cores)");

    // count
    auto* count = app.add_subcommand("count", "number of canonical configurations");
    int count_n = 1, count_nc = 3, count_nv = 5;
    count->add_option("n", count_n, "circuit length")->required();
    count->add_option("--nc", count_nc, "component types");
    count->add_option("--nv", count_nv, "value bins per type");

    // enumerate
    auto* enumerate = app.add_subcommand("enumerate", "list canonical configurations");
    int enum_n = 1, enum_nc = 3, enum_nv = 5;
    bool enum_synth = false;
    enumerate->add_option("n", enum_n, "circuit length")->required();
    enumerate->add_option("--nc", enum_nc, "component types (with --synthetic)");
    enumerate->add_option("--nv", enum_nv, "value bins (with --synthetic)");
    enumerate->add_flag("--synthetic", enum_synth, "use the synthetic test grid");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "simulate a configuration literal");
    std::string sim_config, sim_term = "load:1", sim_format = "csv", sim_out;
    std::size_t sim_d = 512;
    double sim_f0 = 1.0, sim_f1 = 1e6;
    simulate->add_option("--config", sim_config, "configuration literal")->required();
    simulate->add_option("--term", sim_term, "termination: load:<z> or open");
    simulate->add_option("--out", sim_format, "output format: csv or bin");
    simulate->add_option("--output", sim_out, "output file (default stdout)");
    simulate->add_option("-d,--points", sim_d, "frequency samples");
    simulate->add_option("--fmin", sim_f0, "first frequency in Hz");
    simulate->add_option("--fmax", sim_f1, "last frequency in Hz");

    // refine
    auto* refine_cmd = app.add_subcommand("refine", "gradient-refine component values");
    std::string ref_config, ref_target, ref_term = "load:1";
    std::size_t ref_iters = 5000;
    double ref_lr = 0.01;
    refine_cmd->add_option("--config", ref_config, "starting configuration literal")
        ->required();
    refine_cmd->add_option("--target", ref_target, "target spectrum file")->required();
    refine_cmd->add_option("--term", ref_term, "termination: load:<z> or open");
    refine_cmd->add_option("--iters", ref_iters, "maximum optimizer steps");
    refine_cmd->add_option("--lr", ref_lr, "learning rate");

    // ga
    auto* ga = app.add_subcommand("ga", "evolve a configuration toward a target spectrum");
    std::string ga_target, ga_term = "load:1", ga_history;
    std::size_t ga_gens = 1000, ga_pop = 100, ga_elites = 10;
    double ga_mut = 0.01;
    std::uint64_t ga_seed = 0;
    ga->add_option("--target", ga_target, "target spectrum file")->required();
    ga->add_option("--term", ga_term, "termination: load:<z> or open");
    ga->add_option("--generations", ga_gens, "generations");
    ga->add_option("--pop", ga_pop, "population size");
    ga->add_option("--elites", ga_elites, "elites preserved per generation");
    ga->add_option("--mutation", ga_mut, "mutation probability");
    ga->add_option("--seed", ga_seed, "random seed");
    ga->add_option("--history", ga_history, "best-loss history CSV file (default stdout)");

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "generate the circuit dataset");
    std::string gen_spec = "standard", gen_out = "dataset", gen_term = "load:1";
    std::uint64_t gen_seed = 0;
    bool gen_raw = false;
    SplitOverrides gen_ov;
    gen->add_option("--spec", gen_spec, "split spec: standard or reduced");
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--term", gen_term, "termination: load:<z> or open");
    gen->add_flag("--raw", gen_raw, "embed raw complex spectra in records");
    gen->add_option("--max-length", gen_ov.max_length, "override: longest circuit");
    gen->add_option("--exhaustive-max", gen_ov.exhaustive_max,
                    "override: exhaustive train lengths up to this");
    gen->add_option("--train-per-length", gen_ov.train_per_length,
                    "override: random train draws per length");
    gen->add_option("--val-per-length", gen_ov.val_per_length,
                    "override: val draws per length");
    gen->add_option("--test-per-length", gen_ov.test_per_length,
                    "override: test draws per length");
    gen->add_option("--points", gen_ov.points, "override: frequency sample count");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the spectrum-to-circuit model");
    std::string tr_dataset, tr_mode = "hyper-full", tr_model = "model.tpm", tr_log;
    int tr_epochs = 700, tr_batch = 32;
    double tr_lr = 1e-4, tr_tf = 0.5;
    std::uint64_t tr_seed = 0;
    train_cmd->add_option("--dataset", tr_dataset, "dataset directory")->required();
    train_cmd->add_option("--mode", tr_mode, "hyper-full | hyper-gru-only | vanilla");
    train_cmd->add_option("--model", tr_model, "checkpoint output file");
    train_cmd->add_option("--log", tr_log, "training log CSV file (default stdout)");
    train_cmd->add_option("--epochs", tr_epochs, "training epochs");
    train_cmd->add_option("--lr", tr_lr, "learning rate");
    train_cmd->add_option("--tf", tr_tf, "teacher forcing probability");
    train_cmd->add_option("--batch", tr_batch, "batch size");
    train_cmd->add_option("--seed", tr_seed, "random seed");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "decode a circuit from a spectrum");
    std::string pr_model, pr_spectrum, pr_term = "load:1";
    bool pr_refine = false;
    predict_cmd->add_option("--model", pr_model, "checkpoint file")->required();
    predict_cmd->add_option("--spectrum", pr_spectrum, "target spectrum file")->required();
    predict_cmd->add_flag("--refine", pr_refine, "gradient-refine decoded values");
    predict_cmd->add_option("--term", pr_term, "termination for refinement");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score a model on a dataset split");
    std::string ev_model, ev_dataset, ev_split = "test";
    bool ev_positional = false;
    eval_cmd->add_option("--model", ev_model, "checkpoint file")->required();
    eval_cmd->add_option("--dataset", ev_dataset, "dataset directory")->required();
    eval_cmd->add_option("--split", ev_split, "train | val | test");
    eval_cmd->add_flag("--positional", ev_positional,
                       "match positionally without canonicalization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const unsigned nthreads = resolve_threads(threads);
        if (count->parsed()) return cmd_count(count_n, count_nc, count_nv);
        if (enumerate->parsed())
            return cmd_enumerate(enum_n, enum_nc, enum_nv, !enum_synth);
        if (simulate->parsed())
            return cmd_simulate(sim_config, sim_term, sim_format, sim_out, sim_d, sim_f0,
                                sim_f1);
        if (refine_cmd->parsed())
            return cmd_refine(ref_config, ref_target, ref_term, ref_iters, ref_lr);
        if (ga->parsed())
            return cmd_ga(ga_target, ga_term, ga_gens, ga_pop, ga_elites, ga_mut, ga_seed,
                          ga_history, nthreads);
        if (gen->parsed())
            return cmd_gen_dataset(gen_spec, gen_out, gen_seed, gen_term, gen_raw,
                                   gen_ov, nthreads);
        if (train_cmd->parsed())
            return cmd_train(tr_dataset, tr_mode, tr_model, tr_log, tr_epochs, tr_lr,
                             tr_tf, tr_batch, tr_seed);
        if (predict_cmd->parsed())
            return cmd_predict(pr_model, pr_spectrum, pr_refine, pr_term);
        if (eval_cmd->parsed())
            return cmd_eval(ev_model, ev_dataset, ev_split, ev_positional, nthreads);
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 3;
    }
}
