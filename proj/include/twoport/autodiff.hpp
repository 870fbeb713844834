#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "twoport/errors.hpp"

namespace twoport {

/// Append-only record of primitive scalar operations. Nodes are stored in
/// execution order, so the list is already topologically sorted and the
/// backward pass visits each node exactly once, in reverse.
class Tape {
public:
    struct Node {
        double p1, p2;            // local partials
        std::int32_t a1, a2;      // parent indices, -1 when absent
    };

    std::int32_t leaf(double value) {
        values_.push_back(value);
        nodes_.push_back({0.0, 0.0, -1, -1});
        return last_index();
    }

    std::int32_t push(double value, double p1, std::int32_t a1, double p2 = 0.0,
                      std::int32_t a2 = -1) {
        values_.push_back(value);
        nodes_.push_back({p1, p2, a1, a2});
        return last_index();
    }

    [[nodiscard]] double value(std::int32_t i) const {
        return values_[static_cast<std::size_t>(i)];
    }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

    /// Reverse sweep seeding d(root)/d(root) = 1. Returns the full adjoint
    /// vector; entry i is d(root)/d(node_i).
    [[nodiscard]] std::vector<double> gradient(std::int32_t root) const {
        std::vector<double> adj(nodes_.size(), 0.0);
        adj[static_cast<std::size_t>(root)] = 1.0;
        for (std::int32_t i = root; i >= 0; --i) {
            const double a = adj[static_cast<std::size_t>(i)];
            if (a == 0.0) continue;
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            if (n.a1 >= 0) adj[static_cast<std::size_t>(n.a1)] += n.p1 * a;
            if (n.a2 >= 0) adj[static_cast<std::size_t>(n.a2)] += n.p2 * a;
        }
        return adj;
    }

    void clear() {
        nodes_.clear();
        values_.clear();
    }

    void reserve(std::size_t n) {
        nodes_.reserve(n);
        values_.reserve(n);
    }

private:
    [[nodiscard]] std::int32_t last_index() const {
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
    std::vector<double> values_;
};

/// A scalar bound to a tape node. Copies share the node.
struct Var {
    Tape* tape = nullptr;
    std::int32_t idx = -1;
    double val = 0.0;

    Var() = default;
    Var(Tape& t, double v) : tape(&t), idx(t.leaf(v)), val(v) {}

    [[nodiscard]] double value() const { return val; }

    friend Var operator+(const Var& x, const Var& y) {
        return make(x.tape, x.val + y.val, 1.0, x.idx, 1.0, y.idx);
    }
    friend Var operator-(const Var& x, const Var& y) {
        return make(x.tape, x.val - y.val, 1.0, x.idx, -1.0, y.idx);
    }
    friend Var operator*(const Var& x, const Var& y) {
        return make(x.tape, x.val * y.val, y.val, x.idx, x.val, y.idx);
    }
    friend Var operator/(const Var& x, const Var& y) {
        return make(x.tape, x.val / y.val, 1.0 / y.val, x.idx,
                    -x.val / (y.val * y.val), y.idx);
    }
    friend Var operator-(const Var& x) { return make(x.tape, -x.val, -1.0, x.idx); }

    friend Var operator+(const Var& x, double c) { return make(x.tape, x.val + c, 1.0, x.idx); }
    friend Var operator+(double c, const Var& x) { return x + c; }
    friend Var operator-(const Var& x, double c) { return make(x.tape, x.val - c, 1.0, x.idx); }
    friend Var operator-(double c, const Var& x) { return make(x.tape, c - x.val, -1.0, x.idx); }
    friend Var operator*(const Var& x, double c) { return make(x.tape, x.val * c, c, x.idx); }
    friend Var operator*(double c, const Var& x) { return x * c; }
    friend Var operator/(const Var& x, double c) { return make(x.tape, x.val / c, 1.0 / c, x.idx); }
    friend Var operator/(double c, const Var& x) {
        return make(x.tape, c / x.val, -c / (x.val * x.val), x.idx);
    }

private:
    static Var make(Tape* t, double v, double p1, std::int32_t a1, double p2 = 0.0,
                    std::int32_t a2 = -1) {
        Var r;
        r.tape = t;
        r.idx = t->push(v, p1, a1, p2, a2);
        r.val = v;
        return r;
    }

    friend Var tanh(const Var& x);
    friend Var exp(const Var& x);
    friend Var log(const Var& x);
};

inline Var tanh(const Var& x) {
    const double t = std::tanh(x.val);
    return Var::make(x.tape, t, 1.0 - t * t, x.idx);
}

inline Var exp(const Var& x) {
    const double e = std::exp(x.val);
    return Var::make(x.tape, e, e, x.idx);
}

inline Var log(const Var& x) {
    return Var::make(x.tape, std::log(x.val), 1.0 / x.val, x.idx);
}

} // namespace twoport
