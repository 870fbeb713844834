#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "twoport/errors.hpp"

namespace twoport {

/// How a component is inserted into the chain. Series < Parallel for
/// canonical tie-breaking.
enum class Alignment : std::uint8_t { Series = 0, Parallel = 1 };

/// Element kind. Canonical order is Resistor < Capacitor < Inductor.
enum class ComponentType : std::uint8_t { Resistor = 0, Capacitor = 1, Inductor = 2 };

constexpr int kNumAlignments = 2;
constexpr int kNumComponentTypes = 3;
constexpr int kNoBin = -1;

/// One electric element of a chain. `value` is in ohm, farad or henry
/// depending on `type`. `value_bin` is the quantization bin when the
/// component originates from a quantized grid, kNoBin otherwise.
struct Component {
    Alignment alignment = Alignment::Series;
    ComponentType type = ComponentType::Resistor;
    double value = 1.0;
    int value_bin = kNoBin;

    friend bool operator==(const Component& a, const Component& b) {
        if (a.alignment != b.alignment || a.type != b.type) return false;
        if (a.value_bin != kNoBin && b.value_bin != kNoBin)
            return a.value_bin == b.value_bin;
        return a.value == b.value;
    }
};

/// An ordered chain of components, source side first.
struct Configuration {
    std::vector<Component> components;

    Configuration() = default;
    explicit Configuration(std::vector<Component> c) : components(std::move(c)) {}

    [[nodiscard]] std::size_t size() const { return components.size(); }
    [[nodiscard]] bool empty() const { return components.empty(); }
    const Component& operator[](std::size_t i) const { return components[i]; }
    Component& operator[](std::size_t i) { return components[i]; }

    friend bool operator==(const Configuration& a, const Configuration& b) {
        return a.components == b.components;
    }
};

/// Sort key used inside a same-alignment run.
enum class CanonMode {
    ByValue,  ///< (type, value) ascending; the default ordering
    ByBin,    ///< (type, value_bin) ascending; for bin-level matching
    TypeOnly  ///< (type) only, stable among equals; for value-agnostic matching
};

namespace detail {

inline bool canon_less(const Component& a, const Component& b, CanonMode mode) {
    if (a.type != b.type) return a.type < b.type;
    switch (mode) {
        case CanonMode::ByValue: return a.value < b.value;
        case CanonMode::ByBin: return a.value_bin < b.value_bin;
        case CanonMode::TypeOnly: return false;
    }
    return false;
}

} // namespace detail

/// Sorts every maximal run of equal-alignment components by the canonical
/// key. Run boundaries and alignments are untouched, so the result is
/// Kirchhoff-equivalent to the input.
inline Configuration canonicalize(const Configuration& config,
                                  CanonMode mode = CanonMode::ByValue) {
    if (config.empty()) throw InvalidInput("canonicalize: empty configuration");
    Configuration out = config;
    auto& cs = out.components;
    std::size_t run_begin = 0;
    for (std::size_t i = 1; i <= cs.size(); ++i) {
        if (i == cs.size() || cs[i].alignment != cs[run_begin].alignment) {
            std::stable_sort(cs.begin() + static_cast<std::ptrdiff_t>(run_begin),
                             cs.begin() + static_cast<std::ptrdiff_t>(i),
                             [mode](const Component& a, const Component& b) {
                                 return detail::canon_less(a, b, mode);
                             });
            run_begin = i;
        }
    }
    return out;
}

[[nodiscard]] inline bool is_canonical(const Configuration& config) {
    if (config.empty()) throw InvalidInput("is_canonical: empty configuration");
    return canonicalize(config) == config;
}

/// True iff the two chains are indistinguishable under Kirchhoff symmetry,
/// i.e. their canonical forms coincide.
[[nodiscard]] inline bool equivalent(const Configuration& a, const Configuration& b) {
    if (a.empty() || b.empty()) throw InvalidInput("equivalent: empty configuration");
    if (a.size() != b.size()) return false;
    return canonicalize(a) == canonicalize(b);
}

// ---------------------------------------------------------------------------
// Textual configuration literal: `ALIGN:TYPE:VALUE` tokens joined by ';',
// e.g. "P:C:1m;S:R:1;S:L:0.5u".
// ---------------------------------------------------------------------------

inline char to_char(Alignment a) { return a == Alignment::Series ? 'S' : 'P'; }

inline char to_char(ComponentType t) {
    switch (t) {
        case ComponentType::Resistor: return 'R';
        case ComponentType::Capacitor: return 'C';
        case ComponentType::Inductor: return 'L';
    }
    return '?';
}

namespace detail {

inline double si_suffix_scale(char c, bool& ok) {
    ok = true;
    switch (c) {
        case 'p': return 1e-12;
        case 'n': return 1e-9;
        case 'u': return 1e-6;
        case 'm': return 1e-3;
        case 'k': return 1e3;
        case 'M': return 1e6;
        case 'G': return 1e9;
        default: ok = false; return 1.0;
    }
}

} // namespace detail

/// Parses a single component token. Throws InvalidInput naming the bad token.
inline Component parse_component(std::string_view token) {
    auto fail = [&](const char* why) {
        throw InvalidInput("bad component token '" + std::string(token) + "': " + why);
    };
    const auto p1 = token.find(':');
    const auto p2 = token.find(':', p1 == std::string_view::npos ? p1 : p1 + 1);
    if (p1 == std::string_view::npos || p2 == std::string_view::npos) {
        fail("expected ALIGN:TYPE:VALUE");
    }
    const std::string_view a = token.substr(0, p1);
    const std::string_view t = token.substr(p1 + 1, p2 - p1 - 1);
    std::string v(token.substr(p2 + 1));

    Component c;
    if (a == "S") c.alignment = Alignment::Series;
    else if (a == "P") c.alignment = Alignment::Parallel;
    else fail("alignment must be S or P");

    if (t == "R") c.type = ComponentType::Resistor;
    else if (t == "C") c.type = ComponentType::Capacitor;
    else if (t == "L") c.type = ComponentType::Inductor;
    else fail("type must be R, C or L");

    if (v.empty()) fail("missing value");
    double scale = 1.0;
    bool has_suffix = false;
    const double s = detail::si_suffix_scale(v.back(), has_suffix);
    if (has_suffix) {
        scale = s;
        v.pop_back();
        if (v.empty()) fail("missing value before SI suffix");
    }
    char* end = nullptr;
    const double parsed = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) fail("value is not a decimal number");
    c.value = parsed * scale;
    if (!(c.value > 0.0)) fail("value must be positive");
    return c;
}

inline Configuration parse_configuration(std::string_view literal) {
    if (literal.empty()) throw InvalidInput("empty configuration literal");
    Configuration config;
    std::size_t pos = 0;
    while (pos <= literal.size()) {
        std::size_t sep = literal.find(';', pos);
        if (sep == std::string_view::npos) sep = literal.size();
        config.components.push_back(parse_component(literal.substr(pos, sep - pos)));
        pos = sep + 1;
        if (sep == literal.size()) break;
    }
    return config;
}

/// Formats a configuration as a literal that parses back to the same values.
inline std::string format_configuration(const Configuration& config) {
    std::string out;
    char buf[40];
    for (std::size_t i = 0; i < config.size(); ++i) {
        const Component& c = config[i];
        if (i) out.push_back(';');
        std::snprintf(buf, sizeof(buf), "%c:%c:%.17g", to_char(c.alignment),
                      to_char(c.type), c.value);
        out += buf;
    }
    return out;
}

/// Stable text key of the canonical form; used for dedup hashing.
inline std::string canonical_key(const Configuration& config) {
    const Configuration canon = canonicalize(config);
    std::string key;
    char buf[48];
    for (const Component& c : canon.components) {
        if (c.value_bin != kNoBin) {
            std::snprintf(buf, sizeof(buf), "%c%c#%d;", to_char(c.alignment),
                          to_char(c.type), c.value_bin);
        } else {
            std::snprintf(buf, sizeof(buf), "%c%c@%.17g;", to_char(c.alignment),
                          to_char(c.type), c.value);
        }
        key += buf;
    }
    return key;
}

} // namespace twoport
