#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "twoport/circuit.hpp"
#include "twoport/errors.hpp"
#include "twoport/nn/arch.hpp"
#include "twoport/nn/tensor.hpp"
#include "twoport/rng.hpp"
#include "twoport/value_grid.hpp"

namespace twoport::nn {

/// Input token of one decoder step. align is -1 for control tokens (their
/// alignment slot embeds as zeros); type indexes the type embedding table
/// (components, SOS, EOS); value indexes the value table (bins + null row).
struct Token {
    int align = -1;
    int type = 0;
    int value = 0;
};

inline Token sos_token(const ArchConfig& cfg) {
    return Token{-1, cfg.sos_row(), cfg.null_value_row()};
}

namespace detail {

template <class T>
int argmax(const VecT<T>& v, int skip = -1) {
    int best = skip == 0 ? 1 : 0;
    for (int i = best + 1; i < v.size(); ++i) {
        if (i == skip) continue;
        if (v[i] > v[best]) best = i;
    }
    return best;
}

template <class T>
double cross_entropy(const VecT<T>& logits, int gold) {
    const T mx = logits.maxCoeff();
    double sum = 0.0;
    for (int i = 0; i < logits.size(); ++i)
        sum += std::exp(static_cast<double>(logits[i] - mx));
    return std::log(sum) - static_cast<double>(logits[gold] - mx);
}

template <class T>
VecT<T> softmax(const VecT<T>& logits) {
    const T mx = logits.maxCoeff();
    VecT<T> p = (logits.array() - mx).exp().matrix();
    p /= p.sum();
    return p;
}

} // namespace detail

/// ReLU(concat(alignment row or zeros, type row, value row)).
template <class T>
VecT<T> embed_token(const DecoderLayout& L, const T* w, const Token& tok) {
    if (tok.align >= L.align_rows || tok.type < 0 || tok.type >= L.type_rows ||
        tok.value < 0 || tok.value >= L.value_rows)
        throw InvalidInput("embed_token: index out of table bounds");
    VecT<T> x = VecT<T>::Zero(L.input);
    if (tok.align >= 0) {
        ConstMapT<T> ea(w + L.emb_a, L.align_rows, L.emb_align_dim);
        x.segment(0, L.emb_align_dim) = ea.row(tok.align);
    }
    ConstMapT<T> et(w + L.emb_t, L.type_rows, L.emb_type_dim);
    x.segment(L.emb_align_dim, L.emb_type_dim) = et.row(tok.type);
    ConstMapT<T> ev(w + L.emb_v, L.value_rows, L.emb_value_dim);
    x.segment(L.emb_align_dim + L.emb_type_dim, L.emb_value_dim) = ev.row(tok.value);
    return x.cwiseMax(T(0));
}

namespace detail {

template <class T>
VecT<T> sigmoid(VecT<T> v) {
    for (int i = 0; i < v.size(); ++i) v[i] = T(1) / (T(1) + std::exp(-v[i]));
    return v;
}

template <class T>
struct GruStep {
    VecT<T> r, z, c, uh, h;
};

/// r = sig(Wr x + Ur h + br); z = sig(Wz x + Uz h + bz);
/// c = tanh(Wn x + r .* (Un h) + bn); h' = (1 - z) .* h + z .* c.
template <class T>
GruStep<T> gru_forward(const DecoderLayout& L, const T* w, const VecT<T>& x,
                       const VecT<T>& h) {
    const auto vec = [&](std::size_t off) {
        return Eigen::Map<const VecT<T>>(w + off, L.hidden);
    };
    ConstMapT<T> Wr(w + L.w_r, L.hidden, L.input), Ur(w + L.u_r, L.hidden, L.hidden);
    ConstMapT<T> Wz(w + L.w_z, L.hidden, L.input), Uz(w + L.u_z, L.hidden, L.hidden);
    ConstMapT<T> Wn(w + L.w_n, L.hidden, L.input), Un(w + L.u_n, L.hidden, L.hidden);
    GruStep<T> s;
    s.r = sigmoid<T>(Wr * x + Ur * h + vec(L.b_r));
    s.z = sigmoid<T>(Wz * x + Uz * h + vec(L.b_z));
    s.uh = Un * h;
    s.c = (Wn * x + s.r.cwiseProduct(s.uh) + vec(L.b_n)).array().tanh().matrix();
    s.h = (VecT<T>::Ones(L.hidden) - s.z).cwiseProduct(h) + s.z.cwiseProduct(s.c);
    return s;
}

template <class T>
struct HeadLogits {
    VecT<T> a, t, v;
};

template <class T>
HeadLogits<T> head_forward(const DecoderLayout& L, const T* w, const VecT<T>& h) {
    HeadLogits<T> out;
    ConstMapT<T> Ha(w + L.head_a_w, L.align_classes, L.hidden);
    ConstMapT<T> Ht(w + L.head_t_w, L.type_classes, L.hidden);
    ConstMapT<T> Hv(w + L.head_v_w, L.value_classes, L.hidden);
    out.a = Ha * h + Eigen::Map<const VecT<T>>(w + L.head_a_b, L.align_classes);
    out.t = Ht * h + Eigen::Map<const VecT<T>>(w + L.head_t_b, L.type_classes);
    out.v = Hv * h + Eigen::Map<const VecT<T>>(w + L.head_v_b, L.value_classes);
    return out;
}

/// Maps per-head argmaxes (reserved class masked) to the next input token.
template <class T>
Token predicted_token(const ArchConfig& cfg, const HeadLogits<T>& lg) {
    const int cls = argmax(lg.t, cfg.reserved_class());
    if (cls == cfg.eos_class()) return Token{-1, cfg.eos_row(), cfg.null_value_row()};
    return Token{argmax(lg.a), cls, argmax(lg.v)};
}

} // namespace detail

/// One GRU recurrence step on a flat decoder weight vector.
template <class T>
VecT<T> gru_step(const DecoderLayout& L, const T* w, const VecT<T>& x, const VecT<T>& h) {
    if (x.size() != L.input || h.size() != L.hidden)
        throw InvalidInput("gru_step: shape mismatch");
    return detail::gru_forward(L, w, x, h).h;
}

// ---------------------------------------------------------------------------
// Step records and sequence loss
// ---------------------------------------------------------------------------

/// Raw head logits of one decoding step.
struct TokenStep {
    std::vector<double> align_logits;
    std::vector<double> type_logits;
    std::vector<double> value_logits;
};

struct SequenceLoss {
    double align = 0.0;
    double type = 0.0;
    double value = 0.0;

    [[nodiscard]] double total() const { return align + type + value; }
    [[nodiscard]] double partial() const { return align + type; }
};

/// Categorical cross-entropy summed over steps. Steps 0..L-1 are supervised
/// on the gold components (all three heads); step L is the terminal step,
/// supervised through the type head alone with the EOS class.
inline SequenceLoss sequence_loss(const std::vector<TokenStep>& steps,
                                  const Configuration& gold, const ArchConfig& cfg) {
    if (steps.size() != gold.size() + 1)
        throw InvalidInput("sequence_loss: need one step per component plus EOS");
    auto ce = [](const std::vector<double>& logits, int g) {
        double mx = logits[0];
        for (double l : logits) mx = std::max(mx, l);
        double sum = 0.0;
        for (double l : logits) sum += std::exp(l - mx);
        return std::log(sum) - (logits[static_cast<std::size_t>(g)] - mx);
    };
    SequenceLoss out;
    for (std::size_t t = 0; t < steps.size(); ++t) {
        if (t < gold.size()) {
            const Component& c = gold[t];
            if (c.value_bin == kNoBin)
                throw InvalidInput("sequence_loss: gold components need value bins");
            out.align += ce(steps[t].align_logits, static_cast<int>(c.alignment));
            out.type += ce(steps[t].type_logits, static_cast<int>(c.type));
            out.value += ce(steps[t].value_logits, c.value_bin);
        } else {
            out.type += ce(steps[t].type_logits, cfg.eos_class());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Greedy decoding
// ---------------------------------------------------------------------------

/// Greedy decode from SOS; stops at EOS or max_decode_len. Values are the
/// representatives of the predicted bins. Ties break toward the lowest
/// index; the reserved type class is never selected.
template <class T>
Configuration decode_greedy(const ArchConfig& cfg, const DecoderLayout& L, const T* w,
                            const VecT<T>* h0, const ValueGrid& grid,
                            std::vector<TokenStep>* steps_out = nullptr) {
    if (grid.num_types() != cfg.n_types || grid.num_bins() != cfg.n_bins)
        throw InvalidInput("decode_greedy: grid shape does not match the model");
    Configuration config;
    VecT<T> h = h0 ? *h0 : VecT<T>::Zero(L.hidden);
    if (h.size() != L.hidden) throw InvalidInput("decode_greedy: bad h0 size");
    Token tok = sos_token(cfg);
    for (int t = 0; t < cfg.max_decode_len; ++t) {
        const VecT<T> x = embed_token(L, w, tok);
        const auto step = detail::gru_forward(L, w, x, h);
        h = step.h;
        const auto lg = detail::head_forward(L, w, h);
        if (steps_out) {
            TokenStep rec;
            for (int i = 0; i < lg.a.size(); ++i)
                rec.align_logits.push_back(static_cast<double>(lg.a[i]));
            for (int i = 0; i < lg.t.size(); ++i)
                rec.type_logits.push_back(static_cast<double>(lg.t[i]));
            for (int i = 0; i < lg.v.size(); ++i)
                rec.value_logits.push_back(static_cast<double>(lg.v[i]));
            steps_out->push_back(std::move(rec));
        }
        tok = detail::predicted_token(cfg, lg);
        if (tok.type == cfg.eos_row()) break;
        config.components.push_back(grid.make_component(
            static_cast<Alignment>(tok.align), static_cast<ComponentType>(tok.type),
            tok.value));
    }
    return config;
}

// ---------------------------------------------------------------------------
// Supervised forward/backward for training
// ---------------------------------------------------------------------------

template <class T>
struct StepTrace {
    Token fed;
    VecT<T> x;
    detail::GruStep<T> gru;
    VecT<T> pa, pt, pv;
    bool component = false;  // align/value heads supervised at this step
    int gold_align = -1, gold_type = 0, gold_value = -1;
};

struct SupervisedOutcome {
    SequenceLoss loss;
    int correct = 0;  // argmax decisions agreeing with gold across supervised heads
    int total = 0;
};

/// Runs the decoder along the gold sequence. At each step after the first
/// the fed token is the gold component with probability tf_prob, otherwise
/// the model's own argmax prediction; tf_prob >= 1 never consults the RNG.
template <class T>
SupervisedOutcome decoder_supervised_forward(const ArchConfig& cfg, const DecoderLayout& L,
                                             const T* w, const VecT<T>* h0,
                                             const Configuration& gold, double tf_prob,
                                             Rng* rng, std::vector<StepTrace<T>>* trace) {
    const std::size_t n = gold.size();
    for (const Component& c : gold.components) {
        if (c.value_bin == kNoBin)
            throw InvalidInput("decoder_supervised_forward: gold needs value bins");
    }
    if (tf_prob < 1.0 && !rng)
        throw InvalidInput("decoder_supervised_forward: rng required when tf_prob < 1");

    SupervisedOutcome out;
    VecT<T> h = h0 ? *h0 : VecT<T>::Zero(L.hidden);
    Token fed = sos_token(cfg);
    if (trace) trace->clear();
    for (std::size_t t = 0; t <= n; ++t) {
        const VecT<T> x = embed_token(L, w, fed);
        auto gru = detail::gru_forward(L, w, x, h);
        h = gru.h;
        const auto lg = detail::head_forward(L, w, h);

        StepTrace<T> rec;
        rec.fed = fed;
        rec.x = x;
        rec.gru = gru;
        rec.pa = detail::softmax(lg.a);
        rec.pt = detail::softmax(lg.t);
        rec.pv = detail::softmax(lg.v);

        const Token pred = detail::predicted_token(cfg, lg);
        if (t < n) {
            const Component& c = gold[t];
            rec.component = true;
            rec.gold_align = static_cast<int>(c.alignment);
            rec.gold_type = static_cast<int>(c.type);
            rec.gold_value = c.value_bin;
            out.loss.align += detail::cross_entropy(lg.a, rec.gold_align);
            out.loss.type += detail::cross_entropy(lg.t, rec.gold_type);
            out.loss.value += detail::cross_entropy(lg.v, rec.gold_value);
            out.total += 3;
            out.correct += (pred.align == rec.gold_align ? 1 : 0) +
                           (pred.type == rec.gold_type ? 1 : 0) +
                           (pred.value == rec.gold_value ? 1 : 0);
            const bool force = tf_prob >= 1.0 || rng->bernoulli(tf_prob);
            fed = force ? Token{rec.gold_align, rec.gold_type, rec.gold_value} : pred;
        } else {
            rec.gold_type = cfg.eos_class();
            out.loss.type += detail::cross_entropy(lg.t, rec.gold_type);
            out.total += 1;
            out.correct += (pred.type == cfg.eos_row() ? 1 : 0);
        }
        if (trace) trace->push_back(std::move(rec));
    }
    return out;
}

/// Accumulates d(scale * L_total)/dw into dw (length layout.total) and, when
/// dh0 is given, the gradient w.r.t. the initial hidden state.
template <class T>
void decoder_backward(const ArchConfig& cfg, const DecoderLayout& L, const T* w,
                      const VecT<T>* h0, const std::vector<StepTrace<T>>& trace, T scale,
                      T* dw, VecT<T>* dh0) {
    ConstMapT<T> Wr(w + L.w_r, L.hidden, L.input), Ur(w + L.u_r, L.hidden, L.hidden);
    ConstMapT<T> Wz(w + L.w_z, L.hidden, L.input), Uz(w + L.u_z, L.hidden, L.hidden);
    ConstMapT<T> Wn(w + L.w_n, L.hidden, L.input), Un(w + L.u_n, L.hidden, L.hidden);
    ConstMapT<T> Ha(w + L.head_a_w, L.align_classes, L.hidden);
    ConstMapT<T> Ht(w + L.head_t_w, L.type_classes, L.hidden);
    ConstMapT<T> Hv(w + L.head_v_w, L.value_classes, L.hidden);

    MapT<T> dWr(dw + L.w_r, L.hidden, L.input), dUr(dw + L.u_r, L.hidden, L.hidden);
    MapT<T> dWz(dw + L.w_z, L.hidden, L.input), dUz(dw + L.u_z, L.hidden, L.hidden);
    MapT<T> dWn(dw + L.w_n, L.hidden, L.input), dUn(dw + L.u_n, L.hidden, L.hidden);
    MapT<T> dHa(dw + L.head_a_w, L.align_classes, L.hidden);
    MapT<T> dHt(dw + L.head_t_w, L.type_classes, L.hidden);
    MapT<T> dHv(dw + L.head_v_w, L.value_classes, L.hidden);
    MapT<T> dEa(dw + L.emb_a, L.align_rows, L.emb_align_dim);
    MapT<T> dEt(dw + L.emb_t, L.type_rows, L.emb_type_dim);
    MapT<T> dEv(dw + L.emb_v, L.value_rows, L.emb_value_dim);
    const auto dvec = [&](std::size_t off, int n) {
        return Eigen::Map<VecT<T>>(dw + off, n);
    };

    VecT<T> dh = VecT<T>::Zero(L.hidden);
    for (std::size_t ti = trace.size(); ti-- > 0;) {
        const StepTrace<T>& s = trace[ti];
        const VecT<T>& h_prev =
            ti == 0 ? (h0 ? *h0 : VecT<T>::Zero(L.hidden)) : trace[ti - 1].gru.h;

        // heads
        VecT<T> dlt = s.pt * scale;
        dlt[s.gold_type] -= scale;
        dh += Ht.transpose() * dlt;
        dHt += dlt * s.gru.h.transpose();
        dvec(L.head_t_b, L.type_classes) += dlt;
        if (s.component) {
            VecT<T> dla = s.pa * scale;
            dla[s.gold_align] -= scale;
            VecT<T> dlv = s.pv * scale;
            dlv[s.gold_value] -= scale;
            dh += Ha.transpose() * dla + Hv.transpose() * dlv;
            dHa += dla * s.gru.h.transpose();
            dHv += dlv * s.gru.h.transpose();
            dvec(L.head_a_b, L.align_classes) += dla;
            dvec(L.head_v_b, L.value_classes) += dlv;
        }

        // gru: h' = (1-z).*h_prev + z.*c
        const VecT<T> dz_gate = dh.cwiseProduct(s.gru.c - h_prev);
        const VecT<T> dc = dh.cwiseProduct(s.gru.z);
        VecT<T> dh_prev = dh.cwiseProduct(VecT<T>::Ones(L.hidden) - s.gru.z);

        const VecT<T> dac =
            dc.cwiseProduct(VecT<T>::Ones(L.hidden) - s.gru.c.cwiseProduct(s.gru.c));
        VecT<T> dx = Wn.transpose() * dac;
        dWn += dac * s.x.transpose();
        dvec(L.b_n, L.hidden) += dac;
        const VecT<T> dr_gate = dac.cwiseProduct(s.gru.uh);
        const VecT<T> duh = dac.cwiseProduct(s.gru.r);
        dUn += duh * h_prev.transpose();
        dh_prev += Un.transpose() * duh;

        const VecT<T> daz = dz_gate.cwiseProduct(s.gru.z)
                                .cwiseProduct(VecT<T>::Ones(L.hidden) - s.gru.z);
        dWz += daz * s.x.transpose();
        dUz += daz * h_prev.transpose();
        dvec(L.b_z, L.hidden) += daz;
        dx += Wz.transpose() * daz;
        dh_prev += Uz.transpose() * daz;

        const VecT<T> dar = dr_gate.cwiseProduct(s.gru.r)
                                .cwiseProduct(VecT<T>::Ones(L.hidden) - s.gru.r);
        dWr += dar * s.x.transpose();
        dUr += dar * h_prev.transpose();
        dvec(L.b_r, L.hidden) += dar;
        dx += Wr.transpose() * dar;
        dh_prev += Ur.transpose() * dar;

        // embeddings through the input ReLU
        for (int i = 0; i < L.input; ++i)
            if (!(s.x[i] > T(0))) dx[i] = T(0);
        if (s.fed.align >= 0)
            dEa.row(s.fed.align) += dx.segment(0, L.emb_align_dim).transpose();
        dEt.row(s.fed.type) +=
            dx.segment(L.emb_align_dim, L.emb_type_dim).transpose();
        dEv.row(s.fed.value) +=
            dx.segment(L.emb_align_dim + L.emb_type_dim, L.emb_value_dim).transpose();

        dh = std::move(dh_prev);
    }
    if (dh0) *dh0 += dh;
}

} // namespace twoport::nn
