#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "twoport/autodiff.hpp"
#include "twoport/circuit.hpp"
#include "twoport/errors.hpp"
#include "twoport/spectrum.hpp"

namespace twoport {

/// A configuration whose structure (alignments, types) is frozen while the
/// component values are optimized. Values are carried in log space so any
/// optimization trajectory stays strictly positive.
struct CandidateConfig {
    Configuration structure;
    std::vector<double> log_values;

    static CandidateConfig from(const Configuration& config) {
        if (config.empty()) throw InvalidInput("CandidateConfig: empty configuration");
        CandidateConfig cand;
        cand.structure = config;
        cand.log_values.reserve(config.size());
        for (const Component& c : config.components) {
            if (!(c.value > 0.0))
                throw InvalidInput("CandidateConfig: values must be > 0");
            cand.log_values.push_back(std::log(c.value));
        }
        return cand;
    }

    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> v(log_values.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(log_values[i]);
        return v;
    }

    /// The structure with current (exponentiated) values substituted.
    [[nodiscard]] Configuration realized() const {
        Configuration out = structure;
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i].value = std::exp(log_values[i]);
        return out;
    }
};

namespace detail {

/// Differentiable loss pipeline: exp the log-values, simulate per frequency
/// and accumulate the L2 spectrum discrepancy on the tape.
inline Var loss_on_tape(Tape& tape, const CandidateConfig& cand, const Spectrum& target,
                        const Termination& term, std::vector<std::int32_t>* leaf_indices) {
    const std::size_t n = cand.log_values.size();
    std::vector<Var> values;
    values.reserve(n);
    if (leaf_indices) leaf_indices->clear();
    for (std::size_t i = 0; i < n; ++i) {
        Var lv(tape, cand.log_values[i]);
        if (leaf_indices) leaf_indices->push_back(lv.idx);
        values.push_back(exp(lv));
    }

    const std::size_t d = target.V.size();
    Var acc = Var(tape, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const Mat2<Var> m = chain_matrix_t<Var>(
            cand.structure, kTwoPi * target.grid[i],
            [&](std::size_t k) { return values[k]; });
        Cx<Var> v, cur;
        solve_port(m, term, i, v, cur);
        const Var dv_re = target.V[i].real() - v.re;
        const Var dv_im = target.V[i].imag() - v.im;
        const Var di_re = target.I[i].real() - cur.re;
        const Var di_im = target.I[i].imag() - cur.im;
        acc = acc + (dv_re * dv_re + dv_im * dv_im + di_re * di_re + di_im * di_im);
    }
    return acc / static_cast<double>(d);
}

} // namespace detail

/// Eq-6-style loss of a candidate against a target spectrum (target grid is
/// the simulation grid).
inline double loss_spectrum(const CandidateConfig& cand, const Spectrum& target,
                            const Termination& term) {
    return spectrum_loss(simulate(cand.realized(), target.grid, term), target);
}

/// Exact reverse-mode gradient of loss_spectrum with respect to the
/// log-values.
inline std::vector<double> grad_values(const CandidateConfig& cand, const Spectrum& target,
                                       const Termination& term,
                                       double* loss_out = nullptr) {
    Tape tape;
    tape.reserve(target.V.size() * (160 + 90 * cand.structure.size()));
    std::vector<std::int32_t> leaves;
    const Var loss = detail::loss_on_tape(tape, cand, target, term, &leaves);
    if (loss_out) *loss_out = loss.value();
    const std::vector<double> adj = tape.gradient(loss.idx);
    std::vector<double> grad(leaves.size());
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad[i] = adj[static_cast<std::size_t>(leaves[i])];
    return grad;
}

struct AdamState {
    std::size_t step = 0;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(std::size_t n, double lr_ = 0.01)
        : lr(lr_), m(n, 0.0), v(n, 0.0) {}

    void update(std::vector<double>& params, const std::vector<double>& grad) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

struct RefineResult {
    CandidateConfig candidate;   // best-seen iterate
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::size_t iters = 0;
};

inline constexpr double kRefineStopLoss = 1e-8;

/// Adam refinement of the log-values until the loss drops below 1e-8 or
/// max_iters is reached; returns the best-seen iterate.
inline RefineResult refine(const CandidateConfig& cand, const Spectrum& target,
                           const Termination& term, std::size_t max_iters = 5000,
                           double lr = 0.01) {
    if (max_iters < 1) throw InvalidInput("refine: max_iters must be >= 1");
    RefineResult result;
    result.candidate = cand;

    CandidateConfig current = cand;
    AdamState adam(cand.log_values.size(), lr);

    Tape tape;
    tape.reserve(target.V.size() * (160 + 90 * cand.structure.size()));
    std::vector<std::int32_t> leaves;

    double best_loss = loss_spectrum(current, target, term);
    result.initial_loss = best_loss;
    result.final_loss = best_loss;
    if (best_loss < kRefineStopLoss) return result;

    std::vector<double> grad(current.log_values.size());
    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        tape.clear();
        const Var loss = detail::loss_on_tape(tape, current, target, term, &leaves);
        if (!std::isfinite(loss.value()))
            throw NumericalError("refine: non-finite loss at iteration " +
                                 std::to_string(iter));
        const std::vector<double> adj = tape.gradient(loss.idx);
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad[i] = adj[static_cast<std::size_t>(leaves[i])];
        adam.update(current.log_values, grad);

        const double l = loss_spectrum(current, target, term);
        if (!std::isfinite(l))
            throw NumericalError("refine: non-finite loss at iteration " +
                                 std::to_string(iter));
        result.iters = iter;
        if (l < best_loss) {
            best_loss = l;
            result.candidate = current;
        }
        if (l < kRefineStopLoss) break;
    }
    result.final_loss = best_loss;
    return result;
}

} // namespace twoport
