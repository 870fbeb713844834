#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "twoport/errors.hpp"

namespace twoport {

using BigInt = boost::multiprecision::cpp_int;

/// Number of canonical chains of exact length `n` over `n_c` component types
/// and `n_v` values per type.
struct CanonicalCount {
    int n = 0;
    int n_c = 0;
    int n_v = 0;
    BigInt count;
};

namespace detail {

inline std::vector<BigInt> binomial_row(int m) {
    std::vector<BigInt> row(static_cast<std::size_t>(m) + 1);
    row[0] = 1;
    for (int k = 1; k <= m; ++k) {
        row[static_cast<std::size_t>(k)] =
            row[static_cast<std::size_t>(k - 1)] * (m - k + 1) / k;
    }
    return row;
}

} // namespace detail

/// Coefficients of z^0..z^n of the generating function 1 / (2(1-z)^m - 1)
/// with m = n_v * n_c, computed through the linear recurrence obtained by
/// multiplying both sides by the denominator:
///   p_0 = 1,  p_j = sum_{k=1}^{min(j,m)} 2 (-1)^{k+1} C(m,k) p_{j-k}.
inline std::vector<BigInt> canonical_count_series(int n, int n_c, int n_v) {
    if (n < 0) throw InvalidInput("count_canonical: n must be >= 0");
    if (n_c < 1 || n_v < 1) throw InvalidInput("count_canonical: n_c, n_v must be >= 1");
    const int m = n_c * n_v;
    const auto binom = detail::binomial_row(m);
    std::vector<BigInt> p(static_cast<std::size_t>(n) + 1);
    p[0] = 1;
    for (int j = 1; j <= n; ++j) {
        BigInt acc = 0;
        const int kmax = std::min(j, m);
        for (int k = 1; k <= kmax; ++k) {
            const BigInt term = 2 * binom[static_cast<std::size_t>(k)] *
                                p[static_cast<std::size_t>(j - k)];
            if (k % 2 == 1) acc += term;
            else acc -= term;
        }
        p[static_cast<std::size_t>(j)] = acc;
    }
    return p;
}

inline CanonicalCount count_canonical(int n, int n_c, int n_v) {
    auto series = canonical_count_series(n, n_c, n_v);
    return CanonicalCount{n, n_c, n_v, std::move(series[static_cast<std::size_t>(n)])};
}

} // namespace twoport
