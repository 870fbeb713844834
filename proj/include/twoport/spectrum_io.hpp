#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "twoport/errors.hpp"
#include "twoport/spectrum.hpp"

namespace twoport {

// Spectrum file formats. CSV columns: frequency_hz, re_v, im_v, re_i, im_i.
// Binary layout: 16-byte header {magic "TPF1", u32 d, u32 flags, u32 reserved}
// followed by five little-endian float64 arrays of length d in column order.
// flags bit 0 records an open-circuit termination hint.

inline constexpr char kSpectrumMagic[4] = {'T', 'P', 'F', '1'};
inline constexpr std::uint32_t kSpectrumFlagOpen = 1u;

inline void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
    os << "frequency_hz,re_v,im_v,re_i,im_i\n";
    char line[200];
    for (std::size_t i = 0; i < s.V.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      s.grid[i], s.V[i].real(), s.V[i].imag(), s.I[i].real(),
                      s.I[i].imag());
        os << line;
    }
}

inline Spectrum read_spectrum_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("frequency_hz", 0) != 0)
        throw IntegrityError("spectrum csv: missing header line");
    std::vector<double> f;
    std::vector<std::complex<double>> v, cur;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double cols[5];
        int n = std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg", &cols[0], &cols[1],
                            &cols[2], &cols[3], &cols[4]);
        if (n != 5) throw IntegrityError("spectrum csv: malformed row '" + line + "'");
        f.push_back(cols[0]);
        v.emplace_back(cols[1], cols[2]);
        cur.emplace_back(cols[3], cols[4]);
    }
    if (f.empty()) throw IntegrityError("spectrum csv: no data rows");
    Spectrum s;
    s.grid = FrequencyGrid(std::move(f));
    s.V = std::move(v);
    s.I = std::move(cur);
    return s;
}

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x & 0xff),
                          static_cast<unsigned char>((x >> 8) & 0xff),
                          static_cast<unsigned char>((x >> 16) & 0xff),
                          static_cast<unsigned char>((x >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IntegrityError("spectrum binary: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64_array(std::ostream& os, const double* p, std::size_t n) {
    // little-endian host assumed; static_assert guards the build
    static_assert(std::endian::native == std::endian::little,
                  "binary spectrum format requires a little-endian host");
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
}

inline void get_f64_array(std::istream& is, double* p, std::size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 8));
    if (!is) throw IntegrityError("spectrum binary: truncated data");
}

} // namespace detail

inline void write_spectrum_binary(std::ostream& os, const Spectrum& s,
                                  std::uint32_t flags = 0) {
    os.write(kSpectrumMagic, 4);
    detail::put_u32(os, static_cast<std::uint32_t>(s.V.size()));
    detail::put_u32(os, flags);
    detail::put_u32(os, 0);
    const std::size_t d = s.V.size();
    std::vector<double> col(d);
    detail::put_f64_array(os, s.grid.frequencies().data(), d);
    auto write_part = [&](auto getter) {
        for (std::size_t i = 0; i < d; ++i) col[i] = getter(i);
        detail::put_f64_array(os, col.data(), d);
    };
    write_part([&](std::size_t i) { return s.V[i].real(); });
    write_part([&](std::size_t i) { return s.V[i].imag(); });
    write_part([&](std::size_t i) { return s.I[i].real(); });
    write_part([&](std::size_t i) { return s.I[i].imag(); });
}

inline Spectrum read_spectrum_binary(std::istream& is, std::uint32_t* flags_out = nullptr) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kSpectrumMagic, 4) != 0)
        throw IntegrityError("spectrum binary: bad magic");
    const std::uint32_t d = detail::get_u32(is);
    const std::uint32_t flags = detail::get_u32(is);
    detail::get_u32(is);  // reserved
    if (d < 2 || d > (1u << 24)) throw IntegrityError("spectrum binary: implausible length");
    std::vector<double> f(d), re_v(d), im_v(d), re_i(d), im_i(d);
    detail::get_f64_array(is, f.data(), d);
    detail::get_f64_array(is, re_v.data(), d);
    detail::get_f64_array(is, im_v.data(), d);
    detail::get_f64_array(is, re_i.data(), d);
    detail::get_f64_array(is, im_i.data(), d);
    Spectrum s;
    s.grid = FrequencyGrid(std::move(f));
    s.V.resize(d);
    s.I.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) {
        s.V[i] = {re_v[i], im_v[i]};
        s.I[i] = {re_i[i], im_i[i]};
    }
    if (flags_out) *flags_out = flags;
    return s;
}

/// Loads a spectrum file, sniffing binary vs CSV from the magic bytes.
inline Spectrum load_spectrum_file(const std::string& path, std::uint32_t* flags = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidInput("cannot open spectrum file: " + path);
    char magic[4] = {};
    is.read(magic, 4);
    is.seekg(0);
    if (std::memcmp(magic, kSpectrumMagic, 4) == 0) return read_spectrum_binary(is, flags);
    return read_spectrum_csv(is);
}

} // namespace twoport
