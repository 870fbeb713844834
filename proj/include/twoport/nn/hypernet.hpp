#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "twoport/errors.hpp"
#include "twoport/nn/arch.hpp"
#include "twoport/nn/tensor.hpp"
#include "twoport/rng.hpp"

namespace twoport::nn {

/// Convolutional spectrum encoder plus the mode-dependent output affine.
/// Input is a channels x (batch * length) matrix with sample-major columns;
/// convolutions are same-padded and never mix samples. Output is one column
/// per sample: the generated decoder weights (hyper modes) or the initial
/// hidden state (vanilla mode).
template <class T>
class Hypernet {
public:
    Hypernet(const ArchConfig& cfg, Mode mode)
        : layout_(cfg, mode), params_(layout_.total, T(0)) {}

    [[nodiscard]] const HypernetLayout& layout() const { return layout_; }
    [[nodiscard]] const ArchConfig& config() const { return layout_.cfg; }
    [[nodiscard]] Mode mode() const { return layout_.mode; }
    [[nodiscard]] std::size_t param_count() const { return layout_.total; }
    [[nodiscard]] int out_dim() const { return layout_.out.out; }

    std::vector<T>& params() { return params_; }
    [[nodiscard]] const std::vector<T>& params() const { return params_; }
    [[nodiscard]] const T* shared_decoder() const {
        return params_.data() + layout_.shared_off;
    }

    /// Affine and convolution tensors get U(-1/sqrt(fan_in), +1/sqrt(fan_in));
    /// shared GRU/head blocks use fan = hidden and shared embeddings N(0, 1).
    void init(Rng& rng) {
        auto uniform_fill = [&](std::size_t off, std::size_t n, double bound) {
            for (std::size_t i = 0; i < n; ++i)
                params_[off + i] = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
        };
        for (const auto& cv : layout_.convs) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(cv.c_in) * cv.k);
            uniform_fill(cv.w, static_cast<std::size_t>(cv.c_out) * cv.c_in * cv.k, bound);
            uniform_fill(cv.b, static_cast<std::size_t>(cv.c_out), bound);
        }
        for (const auto& af : layout_.proj) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(af.in));
            uniform_fill(af.w, static_cast<std::size_t>(af.out) * af.in, bound);
            uniform_fill(af.b, static_cast<std::size_t>(af.out), bound);
        }
        {
            const double bound = 1.0 / std::sqrt(static_cast<double>(layout_.out.in));
            uniform_fill(layout_.out.w,
                         static_cast<std::size_t>(layout_.out.out) * layout_.out.in, bound);
            uniform_fill(layout_.out.b, static_cast<std::size_t>(layout_.out.out), bound);
        }
        if (layout_.shared_size) {
            const DecoderLayout& D = layout_.decoder;
            const std::size_t base = layout_.shared_off;
            const std::size_t dec_base =
                layout_.mode == Mode::Vanilla ? 0 : D.gru_size;
            const double bound = 1.0 / std::sqrt(static_cast<double>(D.hidden));
            uniform_fill(base, D.emb_a - dec_base, bound);
            const std::size_t emb_begin = base + (D.emb_a - dec_base);
            for (std::size_t i = emb_begin; i < base + layout_.shared_size; ++i)
                params_[i] = static_cast<T>(rng.normal());
        }
    }

    struct Workspace {
        struct Branch {
            std::vector<MatT<T>> acts;  // block inputs/outputs: acts[0] = stem out
            std::vector<MatT<T>> y1;    // first conv output per block
            MatT<T> pooled;             // channels x batch
        };
        std::array<Branch, 3> branches;
        MatT<T> feat;                           // feat_dim x batch
        MatT<T> col, a_buf, dy_buf, da_buf, dcol;  // scratch
        std::size_t batch = 0;
    };

    /// out: out_dim x batch. The workspace keeps the activations needed by
    /// backward and is reusable across calls.
    void forward(const MatT<T>& X, Workspace& ws, MatT<T>& out) const {
        const ArchConfig& cfg = layout_.cfg;
        if (X.rows() != cfg.spectrum_channels || X.cols() % cfg.spectrum_len != 0)
            throw InvalidInput("Hypernet::forward: bad input shape");
        const std::size_t B = static_cast<std::size_t>(X.cols()) /
                              static_cast<std::size_t>(cfg.spectrum_len);
        ws.batch = B;
        const int L = cfg.spectrum_len;
        const int C = cfg.conv_channels;
        ws.feat.resize(cfg.feat_dim(), static_cast<Eigen::Index>(B));

        for (std::size_t br = 0; br < cfg.kernels.size(); ++br) {
            auto& wb = ws.branches[br];
            wb.acts.resize(static_cast<std::size_t>(cfg.blocks_per_branch) + 1);
            wb.y1.resize(static_cast<std::size_t>(cfg.blocks_per_branch));
            const auto* cv = &layout_.convs[br * layout_.convs_per_branch()];
            conv_forward(*cv, X, B, wb.acts[0], ws.col);
            ++cv;
            for (int blk = 0; blk < cfg.blocks_per_branch; ++blk) {
                ws.a_buf = wb.acts[static_cast<std::size_t>(blk)].cwiseMax(T(0));
                conv_forward(*cv, ws.a_buf, B, wb.y1[static_cast<std::size_t>(blk)],
                             ws.col);
                ++cv;
                ws.a_buf = wb.y1[static_cast<std::size_t>(blk)].cwiseMax(T(0));
                conv_forward(*cv, ws.a_buf, B, wb.acts[static_cast<std::size_t>(blk) + 1],
                             ws.col);
                ++cv;
                wb.acts[static_cast<std::size_t>(blk) + 1] +=
                    wb.acts[static_cast<std::size_t>(blk)];
            }
            const MatT<T>& last = wb.acts.back();
            wb.pooled.resize(C, static_cast<Eigen::Index>(B));
            for (std::size_t s = 0; s < B; ++s)
                wb.pooled.col(static_cast<Eigen::Index>(s)) =
                    last.block(0, static_cast<Eigen::Index>(s) * L, C, L).rowwise().mean();
            const auto& af = layout_.proj[br];
            ConstMapT<T> P(params_.data() + af.w, af.out, af.in);
            ws.feat.middleRows(static_cast<Eigen::Index>(br) * cfg.proj_dim,
                               cfg.proj_dim) = P * wb.pooled;
            ws.feat.middleRows(static_cast<Eigen::Index>(br) * cfg.proj_dim, cfg.proj_dim)
                .colwise() += Eigen::Map<const VecT<T>>(params_.data() + af.b, af.out);
        }

        ConstMapT<T> Wo(params_.data() + layout_.out.w, layout_.out.out, layout_.out.in);
        out.resize(layout_.out.out, static_cast<Eigen::Index>(B));
        out.noalias() = Wo * ws.feat;
        out.colwise() +=
            Eigen::Map<const VecT<T>>(params_.data() + layout_.out.b, layout_.out.out);
    }

    /// Accumulates parameter gradients into grad (length param_count).
    /// dout must match the out of the preceding forward on the same workspace.
    void backward(const MatT<T>& X, const MatT<T>& dout, Workspace& ws,
                  std::vector<T>& grad) const {
        const ArchConfig& cfg = layout_.cfg;
        const std::size_t B = ws.batch;
        const int L = cfg.spectrum_len;
        const int C = cfg.conv_channels;
        if (grad.size() != layout_.total)
            throw InvalidInput("Hypernet::backward: bad gradient buffer size");

        // output affine
        {
            MapT<T> dWo(grad.data() + layout_.out.w, layout_.out.out, layout_.out.in);
            dWo.noalias() += dout * ws.feat.transpose();
            Eigen::Map<VecT<T>>(grad.data() + layout_.out.b, layout_.out.out) +=
                dout.rowwise().sum();
        }
        ConstMapT<T> Wo(params_.data() + layout_.out.w, layout_.out.out, layout_.out.in);
        MatT<T> dfeat = Wo.transpose() * dout;

        for (std::size_t br = 0; br < cfg.kernels.size(); ++br) {
            auto& wb = ws.branches[br];
            const auto& af = layout_.proj[br];
            const auto dfb = dfeat.middleRows(
                static_cast<Eigen::Index>(br) * cfg.proj_dim, cfg.proj_dim);
            {
                MapT<T> dP(grad.data() + af.w, af.out, af.in);
                dP.noalias() += dfb * wb.pooled.transpose();
                Eigen::Map<VecT<T>>(grad.data() + af.b, af.out) += dfb.rowwise().sum();
            }
            ConstMapT<T> P(params_.data() + af.w, af.out, af.in);
            MatT<T> dpooled = P.transpose() * dfb;

            // pooling spreads gradient uniformly over the temporal axis
            ws.da_buf.resize(C, static_cast<Eigen::Index>(B) * L);
            for (std::size_t s = 0; s < B; ++s)
                ws.da_buf.block(0, static_cast<Eigen::Index>(s) * L, C, L) =
                    (dpooled.col(static_cast<Eigen::Index>(s)) / T(L)) *
                    Eigen::Matrix<T, 1, Eigen::Dynamic>::Ones(L);

            const auto* convs = &layout_.convs[br * layout_.convs_per_branch()];
            for (int blk = cfg.blocks_per_branch - 1; blk >= 0; --blk) {
                const auto& cv1 = convs[1 + 2 * blk];
                const auto& cv2 = convs[2 + 2 * blk];
                const MatT<T>& block_in = wb.acts[static_cast<std::size_t>(blk)];
                const MatT<T>& y1 = wb.y1[static_cast<std::size_t>(blk)];

                ws.a_buf = y1.cwiseMax(T(0));
                conv_backward(cv2, ws.a_buf, ws.da_buf, B, grad, ws.dy_buf, ws.col,
                              ws.dcol);
                ws.dy_buf.array() *= (y1.array() > T(0)).template cast<T>();

                ws.a_buf = block_in.cwiseMax(T(0));
                MatT<T> dy1 = std::move(ws.dy_buf);
                conv_backward(cv1, ws.a_buf, dy1, B, grad, ws.dy_buf, ws.col, ws.dcol);
                ws.dy_buf.array() *= (block_in.array() > T(0)).template cast<T>();
                ws.da_buf += ws.dy_buf;  // identity shortcut
            }
            conv_backward(convs[0], X, ws.da_buf, B, grad, ws.dy_buf, ws.col, ws.dcol,
                          /*need_dx=*/false);
        }
    }

private:
    HypernetLayout layout_;
    std::vector<T> params_;

    /// col(t*C + ci, s*L + p) = X(ci, s*L + p + t - k/2), zero outside the
    /// sample; only boundary columns are re-zeroed between calls.
    static void im2col(const MatT<T>& X, int k, std::size_t B, int L, MatT<T>& col) {
        const int C = static_cast<int>(X.rows());
        const int pad = k / 2;
        col.resize(static_cast<Eigen::Index>(C) * k, X.cols());
        for (int t = 0; t < k; ++t) {
            const int delta = t - pad;
            const int lo = std::max(0, -delta);
            const int hi = std::min(L, L - delta);
            for (std::size_t s = 0; s < B; ++s) {
                const Eigen::Index base = static_cast<Eigen::Index>(s) * L;
                if (lo > 0) col.block(t * C, base, C, lo).setZero();
                if (hi < L) col.block(t * C, base + hi, C, L - hi).setZero();
                col.block(t * C, base + lo, C, hi - lo) =
                    X.block(0, base + lo + delta, C, hi - lo);
            }
        }
    }

    static void col2im_add(const MatT<T>& dcol, int k, std::size_t B, int L,
                           MatT<T>& dX) {
        const int C = static_cast<int>(dX.rows());
        const int pad = k / 2;
        for (int t = 0; t < k; ++t) {
            const int delta = t - pad;
            const int lo = std::max(0, -delta);
            const int hi = std::min(L, L - delta);
            for (std::size_t s = 0; s < B; ++s) {
                const Eigen::Index base = static_cast<Eigen::Index>(s) * L;
                dX.block(0, base + lo + delta, C, hi - lo) +=
                    dcol.block(t * C, base + lo, C, hi - lo);
            }
        }
    }

    void conv_forward(const HypernetLayout::Conv& cv, const MatT<T>& X, std::size_t B,
                      MatT<T>& Y, MatT<T>& col) const {
        im2col(X, cv.k, B, layout_.cfg.spectrum_len, col);
        ConstMapT<T> W(params_.data() + cv.w, cv.c_out,
                       static_cast<Eigen::Index>(cv.c_in) * cv.k);
        Y.resize(cv.c_out, X.cols());
        Y.noalias() = W * col;
        Y.colwise() += Eigen::Map<const VecT<T>>(params_.data() + cv.b, cv.c_out);
    }

    void conv_backward(const HypernetLayout::Conv& cv, const MatT<T>& X, const MatT<T>& dY,
                       std::size_t B, std::vector<T>& grad, MatT<T>& dX, MatT<T>& col,
                       MatT<T>& dcol, bool need_dx = true) const {
        const int L = layout_.cfg.spectrum_len;
        im2col(X, cv.k, B, L, col);
        MapT<T> dW(grad.data() + cv.w, cv.c_out, static_cast<Eigen::Index>(cv.c_in) * cv.k);
        dW.noalias() += dY * col.transpose();
        Eigen::Map<VecT<T>>(grad.data() + cv.b, cv.c_out) += dY.rowwise().sum();
        if (!need_dx) return;
        ConstMapT<T> W(params_.data() + cv.w, cv.c_out,
                       static_cast<Eigen::Index>(cv.c_in) * cv.k);
        dcol.resize(static_cast<Eigen::Index>(cv.c_in) * cv.k, X.cols());
        dcol.noalias() = W.transpose() * dY;
        dX.resize(cv.c_in, X.cols());
        dX.setZero();
        col2im_add(dcol, cv.k, B, L, dX);
    }
};

} // namespace twoport::nn
