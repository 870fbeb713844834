#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "twoport/circuit.hpp"
#include "twoport/errors.hpp"

namespace twoport {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Complex arithmetic over a generic real scalar. Instantiated with double for
// the plain simulator and with the autodiff variable for gradient runs, so
// every complex operation reduces to real primitives.
// ---------------------------------------------------------------------------

template <class S>
struct Cx {
    S re{};
    S im{};

    friend Cx operator+(const Cx& x, const Cx& y) { return {x.re + y.re, x.im + y.im}; }
    friend Cx operator-(const Cx& x, const Cx& y) { return {x.re - y.re, x.im - y.im}; }
    friend Cx operator-(const Cx& x) { return {-x.re, -x.im}; }
    friend Cx operator*(const Cx& x, const Cx& y) {
        return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
    }
    friend Cx operator/(const Cx& x, const Cx& y) {
        const S d = y.re * y.re + y.im * y.im;
        return {(x.re * y.re + x.im * y.im) / d, (x.im * y.re - x.re * y.im) / d};
    }
};

/// A complex number a + ib in its 2x2 real-matrix form [[a, b], [-b, a]];
/// matrix products of this form encode complex products exactly.
struct Complex2x2 {
    double a = 0.0;
    double b = 0.0;

    static Complex2x2 from(std::complex<double> z) { return {z.real(), z.imag()}; }
    [[nodiscard]] std::complex<double> to_complex() const { return {a, b}; }

    [[nodiscard]] std::array<std::array<double, 2>, 2> as_matrix() const {
        return {{{a, b}, {-b, a}}};
    }

    friend Complex2x2 operator*(const Complex2x2& x, const Complex2x2& y) {
        // top row of the 2x2 real product; the bottom row is implied
        return {x.a * y.a - x.b * y.b, x.a * y.b + x.b * y.a};
    }
    friend Complex2x2 operator+(const Complex2x2& x, const Complex2x2& y) {
        return {x.a + y.a, x.b + y.b};
    }
};

/// 2x2 matrix of complex entries acting on the column (V, I).
template <class S>
struct Mat2 {
    Cx<S> m00, m01, m10, m11;

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.m00 * y.m00 + x.m01 * y.m10, x.m00 * y.m01 + x.m01 * y.m11,
                x.m10 * y.m00 + x.m11 * y.m10, x.m10 * y.m01 + x.m11 * y.m11};
    }
};

using TransferMatrix = Mat2<double>;

// ---------------------------------------------------------------------------
// Frequency grid
// ---------------------------------------------------------------------------

class FrequencyGrid {
public:
    /// Logarithmically spaced grid, endpoints exact.
    static FrequencyGrid log_spaced(std::size_t d, double f_first, double f_last) {
        if (d < 2 || !(f_first > 0.0) || !(f_last > f_first))
            throw InvalidInput("FrequencyGrid: need d >= 2 and 0 < f_first < f_last");
        std::vector<double> f(d);
        const double l0 = std::log(f_first);
        const double l1 = std::log(f_last);
        for (std::size_t i = 0; i < d; ++i) {
            f[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                                     static_cast<double>(d - 1));
        }
        f.front() = f_first;
        f.back() = f_last;
        return FrequencyGrid(std::move(f));
    }

    explicit FrequencyGrid(std::vector<double> f) : freqs_(std::move(f)) {
        for (std::size_t i = 0; i < freqs_.size(); ++i) {
            if (!(freqs_[i] > 0.0)) throw InvalidInput("FrequencyGrid: frequencies must be > 0");
            if (i && !(freqs_[i] > freqs_[i - 1]))
                throw InvalidInput("FrequencyGrid: frequencies must be strictly increasing");
        }
    }

    [[nodiscard]] std::size_t size() const { return freqs_.size(); }
    double operator[](std::size_t i) const { return freqs_[i]; }
    [[nodiscard]] const std::vector<double>& frequencies() const { return freqs_; }

    friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
        return a.freqs_ == b.freqs_;
    }

private:
    std::vector<double> freqs_;
};

/// 512 log-spaced points from 1 Hz to 1 MHz.
inline FrequencyGrid default_grid() { return FrequencyGrid::log_spaced(512, 1.0, 1e6); }

// ---------------------------------------------------------------------------
// Termination of the output port
// ---------------------------------------------------------------------------

struct Termination {
    enum class Kind { Load, OpenCircuit };
    Kind kind = Kind::Load;
    double z_load = 1.0;

    static Termination load(double z) {
        if (!(z > 0.0)) throw InvalidInput("Termination: load impedance must be > 0");
        return {Kind::Load, z};
    }
    static Termination open() { return {Kind::OpenCircuit, 0.0}; }

    [[nodiscard]] bool is_open() const { return kind == Kind::OpenCircuit; }

    friend bool operator==(const Termination& a, const Termination& b) {
        if (a.kind != b.kind) return false;
        return a.is_open() || a.z_load == b.z_load;
    }
};

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

struct Spectrum {
    std::vector<std::complex<double>> V;
    std::vector<std::complex<double>> I;
    FrequencyGrid grid{std::vector<double>{1.0, 2.0}};
};

/// tanh(Re V), tanh(Im V), tanh(Re I), tanh(Im I), in that channel order.
struct NormalizedSpectrum {
    std::array<std::vector<double>, 4> channels;

    [[nodiscard]] std::size_t length() const { return channels[0].size(); }
};

inline NormalizedSpectrum normalize(const Spectrum& s) {
    NormalizedSpectrum out;
    const std::size_t d = s.V.size();
    if (s.I.size() != d) throw InvalidInput("normalize: V/I length mismatch");
    for (auto& ch : out.channels) ch.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double parts[4] = {s.V[i].real(), s.V[i].imag(), s.I[i].real(),
                                 s.I[i].imag()};
        for (int c = 0; c < 4; ++c) {
            if (!std::isfinite(parts[c]))
                throw InvalidInput("normalize: non-finite spectrum entry");
            out.channels[static_cast<std::size_t>(c)][i] = std::tanh(parts[c]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Component and chain matrices
// ---------------------------------------------------------------------------

namespace detail {

template <class S>
double scalar_value(const S& s) {
    return s.value();
}
inline double scalar_value(double s) { return s; }

/// Forward-propagation matrix of one component for the state column (V, I).
/// Series impedance Z: [[1, -Z], [0, 1]]; shunt admittance Y: [[1, 0], [-Y, 1]].
template <class S>
Mat2<S> component_matrix_t(Alignment alignment, ComponentType type, const S& value,
                           double omega) {
    const S zero = value - value;
    const S one = zero + 1.0;
    if (alignment == Alignment::Series) {
        Cx<S> z;
        switch (type) {
            case ComponentType::Resistor: z = {value, zero}; break;
            case ComponentType::Inductor: z = {zero, omega * value}; break;
            case ComponentType::Capacitor: z = {zero, -1.0 / (omega * value)}; break;
        }
        return {{one, zero}, -z, {zero, zero}, {one, zero}};
    }
    Cx<S> y;
    switch (type) {
        case ComponentType::Resistor: y = {1.0 / value, zero}; break;
        case ComponentType::Inductor: y = {zero, -1.0 / (omega * value)}; break;
        case ComponentType::Capacitor: y = {zero, omega * value}; break;
    }
    return {{one, zero}, {zero, zero}, -y, {one, zero}};
}

template <class S, class ValueAt>
Mat2<S> chain_matrix_t(const Configuration& config, double omega, ValueAt&& value_at) {
    Mat2<S> acc = component_matrix_t<S>(config[0].alignment, config[0].type,
                                        value_at(std::size_t{0}), omega);
    for (std::size_t k = 1; k < config.size(); ++k) {
        const Mat2<S> t = component_matrix_t<S>(config[k].alignment, config[k].type,
                                                value_at(k), omega);
        acc = t * acc;  // T_k applied after T_1..T_{k-1}
    }
    return acc;
}

template <class S>
double cx_mag(const Cx<S>& z) {
    return std::hypot(scalar_value(z.re), scalar_value(z.im));
}

/// Solves the port constraints for one frequency. With V_in = 1:
///   Load Z_L:  (V_out, I_out) = M (1, I_in),  V_out = Z_L I_out
///   Open:      (V_out, I_out) = M (1, I_in),  I_out = 0, report I_in
/// Every component matrix has determinant 1, so the solve reduces to
///   Load:  V_out = -Z_L / (m01 - Z_L m11),  I_out = V_out / Z_L
///   Open:  V_out = 1 / m11,                 I_in  = -m10 / m11
/// which avoids the catastrophic cancellation of m00 + m01 I_in deep in
/// stopbands, where the matrix entries dwarf the response. Raises
/// SingularSolve when the denominator is degenerate (resonant case);
/// degeneracy test is relative to the matrix entry magnitudes.
template <class S>
void solve_port(const Mat2<S>& m, const Termination& term, std::size_t freq_index,
                Cx<S>& out_v, Cx<S>& out_i) {
    constexpr double kSingularTol = 1e-12;
    const S zero = m.m00.re - m.m00.re;
    const S one = zero + 1.0;
    if (term.is_open()) {
        const Cx<S>& den = m.m11;
        const double amax =
            std::max(std::max(cx_mag(m.m00), cx_mag(m.m01)),
                     std::max(cx_mag(m.m10), cx_mag(m.m11)));
        if (!(cx_mag(den) > kSingularTol * amax)) throw SingularSolve(freq_index);
        out_v = Cx<S>{one, zero} / den;
        out_i = -m.m10 / den;
        return;
    }
    const Cx<S> zl_c{zero + term.z_load, zero};
    const Cx<S> den = m.m01 - zl_c * m.m11;
    const double scale = std::max(
        {cx_mag(m.m01), term.z_load * cx_mag(m.m11), cx_mag(m.m00), 1e-300});
    if (!(cx_mag(den) > kSingularTol * scale)) throw SingularSolve(freq_index);
    out_v = Cx<S>{zero - term.z_load, zero} / den;
    out_i = Cx<S>{zero - 1.0, zero} / den;
}

} // namespace detail

inline TransferMatrix component_matrix(const Component& c, double f) {
    if (!(f > 0.0)) throw InvalidInput("component_matrix: frequency must be > 0");
    if (!(c.value > 0.0)) throw InvalidInput("component_matrix: value must be > 0");
    return detail::component_matrix_t<double>(c.alignment, c.type, c.value, kTwoPi * f);
}

inline TransferMatrix chain_matrix(const Configuration& config, double f) {
    if (config.empty()) throw InvalidInput("chain_matrix: empty configuration");
    if (!(f > 0.0)) throw InvalidInput("chain_matrix: frequency must be > 0");
    for (const Component& c : config.components) {
        if (!(c.value > 0.0)) throw InvalidInput("chain_matrix: value must be > 0");
    }
    return detail::chain_matrix_t<double>(config, kTwoPi * f,
                                          [&](std::size_t k) { return config[k].value; });
}

/// Simulates the characteristic functions over the grid with an ideal 1 V
/// source. Under Load the reported current is I_out; under OpenCircuit it is
/// I_in (I_out is identically zero there).
inline Spectrum simulate(const Configuration& config, const FrequencyGrid& grid,
                         const Termination& term) {
    if (config.empty()) throw InvalidInput("simulate: empty configuration");
    for (const Component& c : config.components) {
        if (!(c.value > 0.0)) throw InvalidInput("simulate: component value must be > 0");
    }
    Spectrum s;
    s.grid = grid;
    const std::size_t d = grid.size();
    s.V.resize(d);
    s.I.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const Mat2<double> m = detail::chain_matrix_t<double>(
            config, kTwoPi * grid[i], [&](std::size_t k) { return config[k].value; });
        Cx<double> v, cur;
        detail::solve_port(m, term, i, v, cur);
        if (!std::isfinite(v.re) || !std::isfinite(v.im) || !std::isfinite(cur.re) ||
            !std::isfinite(cur.im))
            throw SingularSolve(i);
        s.V[i] = {v.re, v.im};
        s.I[i] = {cur.re, cur.im};
    }
    return s;
}

/// L2 spectrum discrepancy: (1/d) * sum_i |V_i - V'_i|^2 + |I_i - I'_i|^2.
inline double spectrum_loss(const Spectrum& simulated, const Spectrum& target) {
    const std::size_t d = target.V.size();
    if (simulated.V.size() != d || simulated.I.size() != d || target.I.size() != d)
        throw InvalidInput("spectrum_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        acc += std::norm(target.V[i] - simulated.V[i]) +
               std::norm(target.I[i] - simulated.I[i]);
    }
    return acc / static_cast<double>(d);
}

} // namespace twoport
