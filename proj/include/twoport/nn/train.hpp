#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "twoport/dataset.hpp"
#include "twoport/diffsim.hpp"
#include "twoport/errors.hpp"
#include "twoport/nn/decoder.hpp"
#include "twoport/nn/hypernet.hpp"

namespace twoport::nn {

struct TrainOptions {
    int epochs = 700;
    double lr = 1e-4;
    double tf_prob = 0.5;
    int batch_size = 32;
    double clip_norm = 5.0;
    std::uint64_t seed = 0;
};

struct EpochLog {
    int epoch = 0;
    double train_total = 0.0;  // mean per-sample L_total over the epoch
    double val_partial = 0.0;  // mean per-sample L_partial, full teacher forcing
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_partial = std::numeric_limits<double>::infinity();
};

/// A trained (or trainable) spectrum-to-configuration model.
template <class T>
struct Model {
    Hypernet<T> net;
    ValueGrid grid;
    std::uint64_t seed = 0;
    int epoch = 0;
    double val_partial = std::numeric_limits<double>::infinity();

    Model(const ArchConfig& arch, Mode mode, ValueGrid g)
        : net(arch, mode), grid(std::move(g)) {
        if (net.config().n_types != grid.num_types() ||
            net.config().n_bins != grid.num_bins())
            throw InvalidInput("Model: grid shape does not match the architecture");
    }

    [[nodiscard]] const ArchConfig& arch() const { return net.config(); }
    [[nodiscard]] Mode mode() const { return net.mode(); }
};

namespace detail {

template <class T>
struct BatchWork {
    typename Hypernet<T>::Workspace ws;
    MatT<T> X, out, dout;
    std::vector<T> w_buf, dw_buf;
    std::vector<StepTrace<T>> trace;
};

template <class T>
void batch_input(const ArchConfig& cfg, const std::vector<DatasetRecord>& records,
                 const std::size_t* idx, std::size_t B, MatT<T>& X) {
    const int L = cfg.spectrum_len;
    X.resize(cfg.spectrum_channels, static_cast<Eigen::Index>(B) * L);
    for (std::size_t s = 0; s < B; ++s) {
        const NormalizedSpectrum& ns = records[idx[s]].normalized;
        if (static_cast<int>(ns.length()) != L)
            throw InvalidInput("batch_input: spectrum length does not match the model");
        for (int c = 0; c < cfg.spectrum_channels; ++c) {
            const auto& ch = ns.channels[static_cast<std::size_t>(c)];
            for (int p = 0; p < L; ++p)
                X(c, static_cast<Eigen::Index>(s) * L + p) = static_cast<T>(ch[static_cast<std::size_t>(p)]);
        }
    }
}

struct BatchStats {
    SequenceLoss loss;  // summed over samples
    int correct = 0;
    int total = 0;
    std::size_t samples = 0;
};

/// Forward (and optionally backward) for one batch. With grad != nullptr the
/// per-sample loss gradients are scaled by 1/B and accumulated into grad.
template <class T>
BatchStats run_batch(const Hypernet<T>& net, const std::vector<DatasetRecord>& records,
                     const std::size_t* idx, std::size_t B, double tf_prob, Rng* rng,
                     std::vector<std::type_identity_t<T>>* grad, BatchWork<T>& work) {
    const ArchConfig& cfg = net.config();
    const HypernetLayout& HL = net.layout();
    const DecoderLayout& DL = HL.decoder;
    const Mode mode = net.mode();

    batch_input(cfg, records, idx, B, work.X);
    net.forward(work.X, work.ws, work.out);
    if (grad) {
        work.dout.resize(work.out.rows(), work.out.cols());
        work.dout.setZero();
    }

    BatchStats stats;
    stats.samples = B;
    const T scale = T(1) / static_cast<T>(B);
    work.w_buf.resize(DL.total);
    work.dw_buf.resize(DL.total);

    for (std::size_t s = 0; s < B; ++s) {
        const auto col = static_cast<Eigen::Index>(s);
        const T* w = nullptr;
        VecT<T> h0;
        const VecT<T>* h0p = nullptr;
        switch (mode) {
            case Mode::HyperFull:
                w = work.out.col(col).data();
                break;
            case Mode::HyperGruOnly:
                std::copy_n(work.out.col(col).data(), DL.gru_size, work.w_buf.data());
                std::copy_n(net.shared_decoder(), HL.shared_size,
                            work.w_buf.data() + DL.gru_size);
                w = work.w_buf.data();
                break;
            case Mode::Vanilla:
                w = net.shared_decoder();
                h0 = work.out.col(col);
                h0p = &h0;
                break;
        }

        const Configuration& gold = records[idx[s]].config;
        const auto outcome = decoder_supervised_forward(
            cfg, DL, w, h0p, gold, tf_prob, rng, grad ? &work.trace : nullptr);
        stats.loss.align += outcome.loss.align;
        stats.loss.type += outcome.loss.type;
        stats.loss.value += outcome.loss.value;
        stats.correct += outcome.correct;
        stats.total += outcome.total;

        if (!grad) continue;
        std::fill(work.dw_buf.begin(), work.dw_buf.end(), T(0));
        VecT<T> dh0;
        if (mode == Mode::Vanilla) dh0 = VecT<T>::Zero(DL.hidden);
        decoder_backward(cfg, DL, w, h0p, work.trace, scale, work.dw_buf.data(),
                         mode == Mode::Vanilla ? &dh0 : nullptr);
        switch (mode) {
            case Mode::HyperFull:
                work.dout.col(col) = Eigen::Map<const VecT<T>>(
                    work.dw_buf.data(), static_cast<Eigen::Index>(DL.total));
                break;
            case Mode::HyperGruOnly: {
                work.dout.col(col) = Eigen::Map<const VecT<T>>(
                    work.dw_buf.data(), static_cast<Eigen::Index>(DL.gru_size));
                T* sh = grad->data() + HL.shared_off;
                const T* src = work.dw_buf.data() + DL.gru_size;
                for (std::size_t i = 0; i < HL.shared_size; ++i) sh[i] += src[i];
                break;
            }
            case Mode::Vanilla: {
                T* sh = grad->data() + HL.shared_off;
                for (std::size_t i = 0; i < HL.shared_size; ++i)
                    sh[i] += work.dw_buf[i];
                work.dout.col(col) = dh0;
                break;
            }
        }
    }

    if (grad) net.backward(work.X, work.dout, work.ws, *grad);
    return stats;
}

template <class T>
struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<T> m, v;
    std::uint64_t step = 0;

    Adam(std::size_t n, double rate) : lr(rate), m(n, T(0)), v(n, T(0)) {}

    void update(std::vector<T>& params, const std::vector<T>& grad) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = static_cast<double>(grad[i]);
            const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * g;
            const double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * g * g;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            params[i] -= static_cast<T>(lr * (mi / c1) / (std::sqrt(vi / c2) + eps));
        }
    }
};

template <class T>
void clip_gradient(std::vector<T>& grad, double max_norm) {
    double sq = 0.0;
    for (const T g : grad) sq += static_cast<double>(g) * static_cast<double>(g);
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const T f = static_cast<T>(max_norm / norm);
        for (T& g : grad) g *= f;
    }
}

} // namespace detail

/// Mean per-sample partial loss (alignment + type) under full teacher
/// forcing; the paper's model-selection quantity.
template <class T>
double validation_partial(const Model<T>& model, const std::vector<DatasetRecord>& records,
                          int batch_size = 32) {
    if (records.empty()) throw InvalidInput("validation_partial: empty record set");
    detail::BatchWork<T> work;
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double partial = 0.0;
    for (std::size_t at = 0; at < idx.size(); at += static_cast<std::size_t>(batch_size)) {
        const std::size_t B =
            std::min(static_cast<std::size_t>(batch_size), idx.size() - at);
        const auto stats = detail::run_batch(model.net, records, idx.data() + at, B, 1.0,
                                             nullptr, nullptr, work);
        partial += stats.loss.partial();
    }
    return partial / static_cast<double>(records.size());
}

/// Fraction of argmax head decisions agreeing with gold under full teacher
/// forcing (three decisions per component step, one at the EOS step).
template <class T>
double teacher_forced_accuracy(const Model<T>& model,
                               const std::vector<DatasetRecord>& records,
                               int batch_size = 32) {
    if (records.empty()) throw InvalidInput("teacher_forced_accuracy: empty record set");
    detail::BatchWork<T> work;
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    long correct = 0, total = 0;
    for (std::size_t at = 0; at < idx.size(); at += static_cast<std::size_t>(batch_size)) {
        const std::size_t B =
            std::min(static_cast<std::size_t>(batch_size), idx.size() - at);
        const auto stats = detail::run_batch(model.net, records, idx.data() + at, B, 1.0,
                                             nullptr, nullptr, work);
        correct += stats.correct;
        total += stats.total;
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

/// Adam training with per-step teacher forcing. After every epoch the
/// validation partial loss (full teacher forcing) is evaluated and the
/// parameters of the best epoch are restored on return. Deterministic per
/// seed; throws NumericalError if the loss goes non-finite.
template <class T>
TrainResult train(Model<T>& model, const std::vector<DatasetRecord>& train_set,
                  const std::vector<DatasetRecord>& val_set, const TrainOptions& opt) {
    if (train_set.empty() || val_set.empty())
        throw InvalidInput("train: empty split");
    if (opt.epochs < 1 || opt.batch_size < 1 || !(opt.lr > 0.0))
        throw InvalidInput("train: bad options");
    for (const auto& r : train_set)
        if (r.config.size() + 1 > static_cast<std::size_t>(model.arch().max_decode_len))
            throw InvalidInput("train: sample longer than max_decode_len");

    Rng rng(opt.seed);
    model.net.init(rng);
    model.seed = opt.seed;

    detail::Adam<T> adam(model.net.param_count(), opt.lr);
    std::vector<T> grad(model.net.param_count(), T(0));
    detail::BatchWork<T> work;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    std::vector<T> best_params = model.net.params();

    for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_total = 0.0;
        for (std::size_t at = 0; at < order.size();
             at += static_cast<std::size_t>(opt.batch_size)) {
            const std::size_t B =
                std::min(static_cast<std::size_t>(opt.batch_size), order.size() - at);
            std::fill(grad.begin(), grad.end(), T(0));
            const auto stats = detail::run_batch(model.net, train_set, order.data() + at,
                                                 B, opt.tf_prob, &rng, &grad, work);
            const double batch_total = stats.loss.total();
            if (!std::isfinite(batch_total))
                throw NumericalError("train: loss diverged at epoch " +
                                     std::to_string(epoch) + ", batch " +
                                     std::to_string(at / static_cast<std::size_t>(
                                                        opt.batch_size)));
            epoch_total += batch_total;
            detail::clip_gradient(grad, opt.clip_norm);
            adam.update(model.net.params(), grad);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_total = epoch_total / static_cast<double>(train_set.size());
        log.val_partial = validation_partial(model, val_set, opt.batch_size);
        result.log.push_back(log);
        if (log.val_partial < result.best_val_partial) {
            result.best_val_partial = log.val_partial;
            result.best_epoch = epoch;
            best_params = model.net.params();
        }
    }

    model.net.params() = best_params;
    model.epoch = result.best_epoch;
    model.val_partial = result.best_val_partial;
    return result;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

/// Greedy decode for one normalized spectrum. Throws NumericalError on a
/// degenerate empty decode (immediate EOS).
template <class T>
Configuration predict_normalized(const Model<T>& model, const NormalizedSpectrum& ns,
                                 std::vector<TokenStep>* steps = nullptr) {
    const ArchConfig& cfg = model.arch();
    detail::BatchWork<T> work;
    const int L = cfg.spectrum_len;
    if (static_cast<int>(ns.length()) != L)
        throw InvalidInput("predict: spectrum length does not match the model");
    work.X.resize(cfg.spectrum_channels, L);
    for (int c = 0; c < cfg.spectrum_channels; ++c)
        for (int p = 0; p < L; ++p)
            work.X(c, p) = static_cast<T>(ns.channels[static_cast<std::size_t>(c)]
                                                     [static_cast<std::size_t>(p)]);
    model.net.forward(work.X, work.ws, work.out);

    const DecoderLayout& DL = model.net.layout().decoder;
    const T* w = nullptr;
    VecT<T> h0;
    const VecT<T>* h0p = nullptr;
    std::vector<T> w_buf;
    switch (model.mode()) {
        case Mode::HyperFull:
            w = work.out.col(0).data();
            break;
        case Mode::HyperGruOnly:
            w_buf.resize(DL.total);
            std::copy_n(work.out.col(0).data(), DL.gru_size, w_buf.data());
            std::copy_n(model.net.shared_decoder(), model.net.layout().shared_size,
                        w_buf.data() + DL.gru_size);
            w = w_buf.data();
            break;
        case Mode::Vanilla:
            w = model.net.shared_decoder();
            h0 = work.out.col(0);
            h0p = &h0;
            break;
    }
    Configuration config = decode_greedy(cfg, DL, w, h0p, model.grid, steps);
    if (config.empty()) throw NumericalError("predict: degenerate empty decode");
    return config;
}

/// Full prediction path: normalize, decode and (optionally) refine the
/// component values against the raw target spectrum.
template <class T>
Configuration predict(const Model<T>& model, const Spectrum& target, bool refine_values,
                      const Termination& term) {
    Configuration config = predict_normalized(model, normalize(target));
    if (!refine_values) return config;
    const RefineResult r = refine(CandidateConfig::from(config), target, term);
    Configuration refined = r.candidate.realized();
    for (std::size_t i = 0; i < config.size(); ++i)
        config.components[i].value = refined[i].value;
    return config;
}

// ---------------------------------------------------------------------------
// Checkpoint format: magic line, one JSON header line, float32 blob.
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[] = "TPMODEL1";

namespace detail {

inline nlohmann::json arch_to_json(const ArchConfig& a) {
    return {{"spectrum_channels", a.spectrum_channels},
            {"spectrum_len", a.spectrum_len},
            {"conv_channels", a.conv_channels},
            {"blocks_per_branch", a.blocks_per_branch},
            {"kernels", a.kernels},
            {"proj_dim", a.proj_dim},
            {"hidden", a.hidden},
            {"emb_align_dim", a.emb_align_dim},
            {"emb_type_dim", a.emb_type_dim},
            {"emb_value_dim", a.emb_value_dim},
            {"n_types", a.n_types},
            {"n_bins", a.n_bins},
            {"max_decode_len", a.max_decode_len}};
}

inline ArchConfig arch_from_json(const nlohmann::json& j) {
    ArchConfig a;
    a.spectrum_channels = j.at("spectrum_channels").get<int>();
    a.spectrum_len = j.at("spectrum_len").get<int>();
    a.conv_channels = j.at("conv_channels").get<int>();
    a.blocks_per_branch = j.at("blocks_per_branch").get<int>();
    a.kernels = j.at("kernels").get<std::array<int, 3>>();
    a.proj_dim = j.at("proj_dim").get<int>();
    a.hidden = j.at("hidden").get<int>();
    a.emb_align_dim = j.at("emb_align_dim").get<int>();
    a.emb_type_dim = j.at("emb_type_dim").get<int>();
    a.emb_value_dim = j.at("emb_value_dim").get<int>();
    a.n_types = j.at("n_types").get<int>();
    a.n_bins = j.at("n_bins").get<int>();
    a.max_decode_len = j.at("max_decode_len").get<int>();
    return a;
}

} // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const Model<float>& model) {
    nlohmann::json j;
    j["arch"] = detail::arch_to_json(model.arch());
    j["mode"] = mode_name(model.mode());
    j["n_w"] = model.net.layout().decoder.total;
    j["param_count"] = model.net.param_count();
    j["grid"] = model.grid.values();
    j["seed"] = model.seed;
    j["epoch"] = model.epoch;
    j["val_partial_loss"] = model.val_partial;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IntegrityError("cannot open checkpoint for writing: " + path.string());
    out << kCheckpointMagic << '\n' << j.dump() << '\n';
    out.write(reinterpret_cast<const char*>(model.net.params().data()),
              static_cast<std::streamsize>(model.net.param_count() * sizeof(float)));
    if (!out) throw IntegrityError("checkpoint write failed: " + path.string());
}

inline Model<float> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("cannot open checkpoint: " + path.string());
    std::string magic, header;
    if (!std::getline(in, magic) || magic != kCheckpointMagic)
        throw IntegrityError("checkpoint: bad magic in " + path.string());
    if (!std::getline(in, header))
        throw IntegrityError("checkpoint: missing header in " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(header);
        const ArchConfig arch = detail::arch_from_json(j.at("arch"));
        const Mode mode = parse_mode(j.at("mode").get<std::string>());
        const auto grid_values = j.at("grid").get<std::vector<std::vector<double>>>();
        Model<float> model(arch, mode,
                           ValueGrid(static_cast<int>(grid_values.size()), grid_values));
        if (j.at("param_count").get<std::size_t>() != model.net.param_count() ||
            j.at("n_w").get<std::size_t>() != model.net.layout().decoder.total)
            throw IntegrityError("checkpoint: parameter count mismatch");
        model.seed = j.at("seed").get<std::uint64_t>();
        model.epoch = j.at("epoch").get<int>();
        model.val_partial = j.at("val_partial_loss").get<double>();
        in.read(reinterpret_cast<char*>(model.net.params().data()),
                static_cast<std::streamsize>(model.net.param_count() * sizeof(float)));
        if (static_cast<std::size_t>(in.gcount()) !=
            model.net.param_count() * sizeof(float))
            throw IntegrityError("checkpoint: truncated parameter blob");
        char extra;
        if (in.read(&extra, 1); in.gcount() != 0)
            throw IntegrityError("checkpoint: trailing bytes after parameter blob");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("checkpoint: bad header: ") + e.what());
    }
}

} // namespace twoport::nn
