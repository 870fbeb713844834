#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "twoport/errors.hpp"

namespace twoport::nn {

/// Which parts of the decoder the spectrum conditions.
///  HyperFull:    the generator emits every decoder weight.
///  HyperGruOnly: the generator emits the GRU block; heads and embedding
///                tables are ordinary shared parameters.
///  Vanilla:      all decoder weights are shared; the spectrum feature only
///                sets the initial hidden state through a learned projection.
enum class Mode { HyperFull, HyperGruOnly, Vanilla };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::HyperFull: return "hyper-full";
        case Mode::HyperGruOnly: return "hyper-gru-only";
        case Mode::Vanilla: return "vanilla";
    }
    throw InvalidInput("mode_name: bad mode");
}

inline Mode parse_mode(const std::string& s) {
    if (s == "hyper-full") return Mode::HyperFull;
    if (s == "hyper-gru-only") return Mode::HyperGruOnly;
    if (s == "vanilla") return Mode::Vanilla;
    throw InvalidInput("parse_mode: unknown mode '" + s + "'");
}

struct ArchConfig {
    int spectrum_channels = 4;
    int spectrum_len = 512;
    int conv_channels = 32;
    int blocks_per_branch = 3;
    std::array<int, 3> kernels{3, 5, 7};
    int proj_dim = 256;
    int hidden = 64;
    int emb_align_dim = 2;
    int emb_type_dim = 31;
    int emb_value_dim = 31;
    int n_types = 3;
    int n_bins = 5;
    int max_decode_len = 12;

    static ArchConfig standard() { return ArchConfig{}; }

    /// Tiny variant for finite-difference gradient checks.
    static ArchConfig test_scale() {
        ArchConfig c;
        c.conv_channels = 8;
        c.blocks_per_branch = 1;
        c.proj_dim = 16;
        c.hidden = 8;
        c.emb_align_dim = 2;
        c.emb_type_dim = 3;
        c.emb_value_dim = 3;
        return c;
    }

    [[nodiscard]] int input_dim() const {
        return emb_align_dim + emb_type_dim + emb_value_dim;
    }
    [[nodiscard]] int feat_dim() const {
        return static_cast<int>(kernels.size()) * proj_dim;
    }
    [[nodiscard]] int type_vocab() const { return n_types + 2; }    // + SOS + EOS
    [[nodiscard]] int type_classes() const { return n_types + 2; }  // + EOS + reserved
    [[nodiscard]] int value_rows() const { return n_bins + 1; }     // + null row
    [[nodiscard]] int sos_row() const { return n_types; }
    [[nodiscard]] int eos_row() const { return n_types + 1; }
    [[nodiscard]] int eos_class() const { return n_types; }
    [[nodiscard]] int reserved_class() const { return n_types + 1; }
    [[nodiscard]] int null_value_row() const { return n_bins; }

    void validate() const {
        if (spectrum_channels < 1 || spectrum_len < 8 || conv_channels < 1 ||
            blocks_per_branch < 0 || proj_dim < 1 || hidden < 1 || n_types < 1 ||
            n_bins < 1 || max_decode_len < 1 || emb_align_dim < 1 ||
            emb_type_dim < 1 || emb_value_dim < 1)
            throw InvalidInput("ArchConfig: dimension out of range");
        for (int k : kernels)
            if (k < 1 || k % 2 == 0) throw InvalidInput("ArchConfig: kernels must be odd");
    }
};

/// Offsets of the decoder's weight blocks inside its flat weight vector.
/// Matrices are row-major (out x in). The GRU block occupies the prefix
/// [0, gru_size) so that the GRU-only generator maps onto a contiguous range.
struct DecoderLayout {
    int input = 0;
    int hidden = 0;
    int align_classes = 2;
    int type_classes = 0;
    int value_classes = 0;
    int align_rows = 2;
    int type_rows = 0;
    int value_rows = 0;
    int emb_align_dim = 0;
    int emb_type_dim = 0;
    int emb_value_dim = 0;

    std::size_t w_r = 0, u_r = 0, b_r = 0;
    std::size_t w_z = 0, u_z = 0, b_z = 0;
    std::size_t w_n = 0, u_n = 0, b_n = 0;
    std::size_t head_a_w = 0, head_a_b = 0;
    std::size_t head_t_w = 0, head_t_b = 0;
    std::size_t head_v_w = 0, head_v_b = 0;
    std::size_t emb_a = 0, emb_t = 0, emb_v = 0;
    std::size_t gru_size = 0;
    std::size_t total = 0;

    explicit DecoderLayout(const ArchConfig& cfg) {
        cfg.validate();
        input = cfg.input_dim();
        hidden = cfg.hidden;
        type_classes = cfg.type_classes();
        value_classes = cfg.n_bins;
        type_rows = cfg.type_vocab();
        value_rows = cfg.value_rows();
        emb_align_dim = cfg.emb_align_dim;
        emb_type_dim = cfg.emb_type_dim;
        emb_value_dim = cfg.emb_value_dim;

        std::size_t off = 0;
        auto take = [&off](std::size_t n) {
            const std::size_t at = off;
            off += n;
            return at;
        };
        const auto h = static_cast<std::size_t>(hidden);
        const auto in = static_cast<std::size_t>(input);
        w_r = take(h * in); u_r = take(h * h); b_r = take(h);
        w_z = take(h * in); u_z = take(h * h); b_z = take(h);
        w_n = take(h * in); u_n = take(h * h); b_n = take(h);
        gru_size = off;
        head_a_w = take(static_cast<std::size_t>(align_classes) * h);
        head_a_b = take(static_cast<std::size_t>(align_classes));
        head_t_w = take(static_cast<std::size_t>(type_classes) * h);
        head_t_b = take(static_cast<std::size_t>(type_classes));
        head_v_w = take(static_cast<std::size_t>(value_classes) * h);
        head_v_b = take(static_cast<std::size_t>(value_classes));
        emb_a = take(static_cast<std::size_t>(align_rows) * emb_align_dim);
        emb_t = take(static_cast<std::size_t>(type_rows) * emb_type_dim);
        emb_v = take(static_cast<std::size_t>(value_rows) * emb_value_dim);
        total = off;
    }
};

/// Offsets of the hypernetwork's own parameters: three convolutional
/// branches, per-branch projections, the mode-dependent output affine, and
/// (for the modes that train part of the decoder directly) a shared decoder
/// segment appended at the end.
struct HypernetLayout {
    struct Conv {
        std::size_t w = 0, b = 0;
        int c_in = 0, c_out = 0, k = 0;
    };
    struct Affine {
        std::size_t w = 0, b = 0;
        int in = 0, out = 0;
    };

    ArchConfig cfg;
    Mode mode = Mode::HyperFull;
    DecoderLayout decoder;
    std::vector<Conv> convs;           // branch-major: stem then block convs
    std::array<Affine, 3> proj{};
    Affine out{};
    std::size_t shared_off = 0;
    std::size_t shared_size = 0;       // 0 | heads+embeddings | full decoder
    std::size_t total = 0;

    HypernetLayout(const ArchConfig& c, Mode m) : cfg(c), mode(m), decoder(c) {
        std::size_t off = 0;
        auto take = [&off](std::size_t n) {
            const std::size_t at = off;
            off += n;
            return at;
        };
        for (int k : cfg.kernels) {
            Conv stem;
            stem.c_in = cfg.spectrum_channels;
            stem.c_out = cfg.conv_channels;
            stem.k = k;
            stem.w = take(static_cast<std::size_t>(stem.c_out) * stem.c_in * k);
            stem.b = take(static_cast<std::size_t>(stem.c_out));
            convs.push_back(stem);
            for (int blk = 0; blk < cfg.blocks_per_branch; ++blk) {
                for (int half = 0; half < 2; ++half) {
                    Conv cv;
                    cv.c_in = cfg.conv_channels;
                    cv.c_out = cfg.conv_channels;
                    cv.k = k;
                    cv.w = take(static_cast<std::size_t>(cv.c_out) * cv.c_in * k);
                    cv.b = take(static_cast<std::size_t>(cv.c_out));
                    convs.push_back(cv);
                }
            }
        }
        for (std::size_t br = 0; br < cfg.kernels.size(); ++br) {
            proj[br].in = cfg.conv_channels;
            proj[br].out = cfg.proj_dim;
            proj[br].w = take(static_cast<std::size_t>(cfg.proj_dim) * cfg.conv_channels);
            proj[br].b = take(static_cast<std::size_t>(cfg.proj_dim));
        }
        out.in = cfg.feat_dim();
        switch (mode) {
            case Mode::HyperFull: out.out = static_cast<int>(decoder.total); break;
            case Mode::HyperGruOnly: out.out = static_cast<int>(decoder.gru_size); break;
            case Mode::Vanilla: out.out = cfg.hidden; break;
        }
        out.w = take(static_cast<std::size_t>(out.out) * out.in);
        out.b = take(static_cast<std::size_t>(out.out));
        switch (mode) {
            case Mode::HyperFull: shared_size = 0; break;
            case Mode::HyperGruOnly: shared_size = decoder.total - decoder.gru_size; break;
            case Mode::Vanilla: shared_size = decoder.total; break;
        }
        shared_off = take(shared_size);
        total = off;
    }

    [[nodiscard]] std::size_t convs_per_branch() const {
        return 1 + 2 * static_cast<std::size_t>(cfg.blocks_per_branch);
    }
};

} // namespace twoport::nn
