#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "twoport/circuit.hpp"
#include "twoport/counting.hpp"
#include "twoport/enumerate.hpp"
#include "twoport/errors.hpp"
#include "twoport/rng.hpp"
#include "twoport/spectrum.hpp"
#include "twoport/threads.hpp"
#include "twoport/value_grid.hpp"

namespace twoport {

inline constexpr int kDatasetFormatVersion = 1;

enum class Split { Train, Val, Test };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    throw InvalidInput("split_name: bad split");
}

inline Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw InvalidInput("parse_split: unknown split '" + s + "'");
}

/// Per-length sampling plan. Train is exhaustive up to exhaustive_max and
/// random above; val/test draw only from the random lengths.
struct SplitSpec {
    int max_length = 10;
    int exhaustive_max = 3;
    std::size_t train_random_per_length = 1120;
    std::size_t val_per_length = 480;
    std::size_t test_per_length = 400;

    static SplitSpec standard() { return SplitSpec{}; }

    void validate() const {
        if (max_length < 1 || exhaustive_max < 0 || exhaustive_max > max_length)
            throw InvalidInput("SplitSpec: need 0 <= exhaustive_max <= max_length, max_length >= 1");
    }

    [[nodiscard]] std::size_t random_quota(Split split, int length) const {
        if (length <= exhaustive_max || length > max_length) return 0;
        switch (split) {
            case Split::Train: return train_random_per_length;
            case Split::Val: return val_per_length;
            case Split::Test: return test_per_length;
        }
        return 0;
    }
};

struct DatasetRecord {
    std::uint64_t id = 0;
    Split split = Split::Train;
    Configuration config;
    Termination termination;
    NormalizedSpectrum normalized;
    std::vector<std::complex<double>> raw_v;  // empty unless raw embedding requested
    std::vector<std::complex<double>> raw_i;
};

struct DatasetManifest {
    int format_version = kDatasetFormatVersion;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> grid_values;
    std::size_t frequency_count = 512;
    double frequency_first_hz = 1.0;
    double frequency_last_hz = 1e6;
    Termination termination;
    std::uint64_t train_count = 0;
    std::uint64_t val_count = 0;
    std::uint64_t test_count = 0;
    std::uint64_t duplicate_rejections = 0;
    std::uint64_t singular_rejections = 0;

    [[nodiscard]] ValueGrid grid() const {
        return ValueGrid(static_cast<int>(grid_values.size()), grid_values);
    }
    [[nodiscard]] FrequencyGrid frequency_grid() const {
        return FrequencyGrid::log_spaced(frequency_count, frequency_first_hz,
                                         frequency_last_hz);
    }
    [[nodiscard]] std::uint64_t count(Split s) const {
        switch (s) {
            case Split::Train: return train_count;
            case Split::Val: return val_count;
            case Split::Test: return test_count;
        }
        return 0;
    }
};

// ---------------------------------------------------------------------------
// Serialization primitives
// ---------------------------------------------------------------------------

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "dataset serialization assumes a little-endian host");

inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const unsigned char* data, std::size_t n) {
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= n; i += 3) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += kB64Alphabet[v & 63];
    }
    if (i + 1 == n) {
        const unsigned v = data[i] << 16;
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == n) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

inline std::vector<unsigned char> base64_decode(const std::string& text) {
    auto sextet = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw IntegrityError("base64: length not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int s[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) throw IntegrityError("base64: bad padding");
                s[k] = 0;
                ++pad;
            } else {
                if (pad) throw IntegrityError("base64: data after padding");
                s[k] = sextet(c);
                if (s[k] < 0) throw IntegrityError("base64: invalid character");
            }
        }
        const unsigned v = static_cast<unsigned>((s[0] << 18) | (s[1] << 12) |
                                                 (s[2] << 6) | s[3]);
        out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
    }
    return out;
}

inline std::string doubles_to_b64(const std::vector<double>& xs) {
    return base64_encode(reinterpret_cast<const unsigned char*>(xs.data()),
                         xs.size() * sizeof(double));
}

inline std::vector<double> b64_to_doubles(const std::string& text) {
    const std::vector<unsigned char> bytes = base64_decode(text);
    if (bytes.size() % sizeof(double) != 0)
        throw IntegrityError("base64: payload is not a float64 array");
    std::vector<double> xs(bytes.size() / sizeof(double));
    std::memcpy(xs.data(), bytes.data(), bytes.size());
    return xs;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline nlohmann::json termination_to_json(const Termination& t) {
    if (t.is_open()) return nlohmann::json{{"kind", "open"}};
    return nlohmann::json{{"kind", "load"}, {"z_load", t.z_load}};
}

inline Termination termination_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "open") return Termination::open();
    if (kind == "load") return Termination::load(j.at("z_load").get<double>());
    throw IntegrityError("termination: unknown kind '" + kind + "'");
}

} // namespace detail

/// One JSONL line. The crc field is FNV-1a 64 of the record serialized
/// without it, in nlohmann's sorted-key text form.
inline std::string serialize_record(const DatasetRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["split"] = split_name(r.split);
    j["length"] = r.config.size();
    j["config"] = format_configuration(r.config);
    std::vector<int> bins;
    bins.reserve(r.config.size());
    for (const Component& c : r.config.components) bins.push_back(c.value_bin);
    j["bins"] = bins;
    j["termination"] = detail::termination_to_json(r.termination);
    nlohmann::json channels = nlohmann::json::array();
    for (const auto& ch : r.normalized.channels)
        channels.push_back(detail::doubles_to_b64(ch));
    j["channels"] = std::move(channels);
    if (!r.raw_v.empty()) {
        std::vector<double> re_v, im_v, re_i, im_i;
        for (const auto& z : r.raw_v) {
            re_v.push_back(z.real());
            im_v.push_back(z.imag());
        }
        for (const auto& z : r.raw_i) {
            re_i.push_back(z.real());
            im_i.push_back(z.imag());
        }
        j["raw"] = {{"re_v", detail::doubles_to_b64(re_v)},
                    {"im_v", detail::doubles_to_b64(im_v)},
                    {"re_i", detail::doubles_to_b64(re_i)},
                    {"im_i", detail::doubles_to_b64(im_i)}};
    }
    char crc[17];
    std::snprintf(crc, sizeof crc, "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(j.dump())));
    j["crc"] = crc;
    return j.dump();
}

inline DatasetRecord parse_record(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("dataset record: unparseable line: ") + e.what());
    }
    try {
        const std::string stored_crc = j.at("crc").get<std::string>();
        j.erase("crc");
        char computed[17];
        std::snprintf(computed, sizeof computed, "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a64(j.dump())));
        if (stored_crc != computed)
            throw IntegrityError("dataset record " + j.at("id").dump() +
                                 ": checksum mismatch");

        DatasetRecord r;
        r.id = j.at("id").get<std::uint64_t>();
        r.split = parse_split(j.at("split").get<std::string>());
        r.config = parse_configuration(j.at("config").get<std::string>());
        const auto bins = j.at("bins").get<std::vector<int>>();
        if (bins.size() != r.config.size() ||
            j.at("length").get<std::size_t>() != r.config.size())
            throw IntegrityError("dataset record " + std::to_string(r.id) +
                                 ": length fields disagree");
        for (std::size_t k = 0; k < bins.size(); ++k)
            r.config.components[k].value_bin = bins[k];
        r.termination = detail::termination_from_json(j.at("termination"));
        const auto& channels = j.at("channels");
        if (!channels.is_array() || channels.size() != 4)
            throw IntegrityError("dataset record " + std::to_string(r.id) +
                                 ": expected 4 spectrum channels");
        for (std::size_t c = 0; c < 4; ++c) {
            r.normalized.channels[c] =
                detail::b64_to_doubles(channels[c].get<std::string>());
            if (r.normalized.channels[c].size() != r.normalized.channels[0].size())
                throw IntegrityError("dataset record " + std::to_string(r.id) +
                                     ": ragged channels");
        }
        if (j.contains("raw")) {
            const auto& raw = j.at("raw");
            const auto re_v = detail::b64_to_doubles(raw.at("re_v").get<std::string>());
            const auto im_v = detail::b64_to_doubles(raw.at("im_v").get<std::string>());
            const auto re_i = detail::b64_to_doubles(raw.at("re_i").get<std::string>());
            const auto im_i = detail::b64_to_doubles(raw.at("im_i").get<std::string>());
            if (re_v.size() != im_v.size() || re_i.size() != im_i.size() ||
                re_v.size() != re_i.size())
                throw IntegrityError("dataset record " + std::to_string(r.id) +
                                     ": ragged raw arrays");
            for (std::size_t i = 0; i < re_v.size(); ++i) {
                r.raw_v.emplace_back(re_v[i], im_v[i]);
                r.raw_i.emplace_back(re_i[i], im_i[i]);
            }
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("dataset record: bad field: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GenerateOptions {
    SplitSpec split = SplitSpec::standard();
    ValueGrid grid = ValueGrid::standard();
    FrequencyGrid frequencies = default_grid();
    Termination termination = Termination::load(1.0);
    std::uint64_t seed = 0;
    bool include_raw = false;
    unsigned threads = 1;
};

/// Draws the full dataset deterministically from one seed. Exhaustive lengths
/// come straight from enumeration; random lengths are drawn with rejection of
/// anything equivalent to an already-accepted configuration (across all
/// splits) and of configurations whose simulation is singular. Simulation of
/// accepted records runs in parallel; record ids and order are draw order.
inline std::vector<DatasetRecord> generate_dataset(const GenerateOptions& opt,
                                                   DatasetManifest* manifest_out = nullptr) {
    opt.split.validate();
    constexpr std::uint64_t kMaxConsecutiveRejections = 100000;

    // capacity check: per length, total demand must not exceed the number of
    // distinct canonical configurations
    for (int n = 1; n <= opt.split.max_length; ++n) {
        const BigInt population =
            count_canonical(n, opt.grid.num_types(), opt.grid.num_bins()).count;
        BigInt demand = 0;
        if (n <= opt.split.exhaustive_max) demand += population;
        for (const Split s : {Split::Train, Split::Val, Split::Test})
            demand += BigInt(opt.split.random_quota(s, n));
        if (demand > population)
            throw CapacityError("dataset demand at length " + std::to_string(n) +
                                " exceeds the canonical population");
    }

    Rng rng(opt.seed);
    std::unordered_set<std::string> seen;
    std::uint64_t duplicate_rejections = 0;
    std::uint64_t singular_rejections = 0;

    struct Pending {
        Split split;
        Configuration config;
    };
    std::vector<Pending> pending;

    for (int n = 1; n <= opt.split.exhaustive_max; ++n) {
        for (Configuration& c : enumerate_canonical(n, opt.grid)) {
            seen.insert(canonical_key(c));
            pending.push_back({Split::Train, std::move(c)});
        }
    }

    auto simulates_cleanly = [&](const Configuration& c) {
        try {
            (void)simulate(c, opt.frequencies, opt.termination);
            return true;
        } catch (const NumericalError&) {
            return false;
        }
    };

    for (const Split s : {Split::Train, Split::Val, Split::Test}) {
        for (int n = opt.split.exhaustive_max + 1; n <= opt.split.max_length; ++n) {
            std::size_t need = opt.split.random_quota(s, n);
            std::uint64_t consecutive = 0;
            while (need > 0) {
                Configuration c = random_canonical(n, opt.grid, rng);
                if (!seen.insert(canonical_key(c)).second) {
                    ++duplicate_rejections;
                    if (++consecutive > kMaxConsecutiveRejections)
                        throw CapacityError("dataset draw stalled at length " +
                                            std::to_string(n));
                    continue;
                }
                if (!simulates_cleanly(c)) {
                    ++singular_rejections;
                    if (++consecutive > kMaxConsecutiveRejections)
                        throw CapacityError("dataset draw stalled at length " +
                                            std::to_string(n));
                    continue;
                }
                consecutive = 0;
                pending.push_back({s, std::move(c)});
                --need;
            }
        }
    }

    std::vector<DatasetRecord> records(pending.size());
    parallel_for(pending.size(), [&](std::size_t i) {
        DatasetRecord& r = records[i];
        r.id = i;
        r.split = pending[i].split;
        r.config = std::move(pending[i].config);
        r.termination = opt.termination;
        const Spectrum s = simulate(r.config, opt.frequencies, opt.termination);
        r.normalized = normalize(s);
        if (opt.include_raw) {
            r.raw_v = s.V;
            r.raw_i = s.I;
        }
    }, opt.threads);

    if (manifest_out) {
        DatasetManifest m;
        m.seed = opt.seed;
        m.grid_values = opt.grid.values();
        m.frequency_count = opt.frequencies.size();
        m.frequency_first_hz = opt.frequencies[0];
        m.frequency_last_hz = opt.frequencies[opt.frequencies.size() - 1];
        m.termination = opt.termination;
        for (const DatasetRecord& r : records) {
            if (r.split == Split::Train) ++m.train_count;
            else if (r.split == Split::Val) ++m.val_count;
            else ++m.test_count;
        }
        m.duplicate_rejections = duplicate_rejections;
        m.singular_rejections = singular_rejections;
        *manifest_out = m;
    }
    return records;
}

// ---------------------------------------------------------------------------
// File layout: <dir>/{train,val,test}.jsonl + <dir>/manifest.json
// ---------------------------------------------------------------------------

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    nlohmann::json j;
    j["format_version"] = m.format_version;
    j["seed"] = m.seed;
    j["grid"] = m.grid_values;
    j["frequencies"] = {{"count", m.frequency_count},
                        {"first_hz", m.frequency_first_hz},
                        {"last_hz", m.frequency_last_hz}};
    j["termination"] = detail::termination_to_json(m.termination);
    j["counts"] = {{"train", m.train_count},
                   {"val", m.val_count},
                   {"test", m.test_count}};
    j["duplicate_rejections"] = m.duplicate_rejections;
    j["singular_rejections"] = m.singular_rejections;
    std::ofstream out(path);
    if (!out) throw IntegrityError("cannot open manifest for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IntegrityError("manifest write failed: " + path.string());
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IntegrityError("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        DatasetManifest m;
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kDatasetFormatVersion)
            throw IntegrityError("manifest: unsupported format version " +
                                 std::to_string(m.format_version));
        m.seed = j.at("seed").get<std::uint64_t>();
        m.grid_values = j.at("grid").get<std::vector<std::vector<double>>>();
        m.frequency_count = j.at("frequencies").at("count").get<std::size_t>();
        m.frequency_first_hz = j.at("frequencies").at("first_hz").get<double>();
        m.frequency_last_hz = j.at("frequencies").at("last_hz").get<double>();
        m.termination = detail::termination_from_json(j.at("termination"));
        m.train_count = j.at("counts").at("train").get<std::uint64_t>();
        m.val_count = j.at("counts").at("val").get<std::uint64_t>();
        m.test_count = j.at("counts").at("test").get<std::uint64_t>();
        m.duplicate_rejections = j.at("duplicate_rejections").get<std::uint64_t>();
        m.singular_rejections = j.at("singular_rejections").get<std::uint64_t>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("manifest: bad field: ") + e.what());
    }
}

inline void write_dataset(const std::filesystem::path& dir,
                          const std::vector<DatasetRecord>& records,
                          const DatasetManifest& manifest) {
    std::filesystem::create_directories(dir);
    std::ofstream out[3];
    const char* names[3] = {"train.jsonl", "val.jsonl", "test.jsonl"};
    for (int s = 0; s < 3; ++s) {
        out[s].open(dir / names[s], std::ios::binary);
        if (!out[s])
            throw IntegrityError("cannot open dataset file for writing: " +
                                 (dir / names[s]).string());
    }
    for (const DatasetRecord& r : records)
        out[static_cast<int>(r.split)] << serialize_record(r) << '\n';
    for (int s = 0; s < 3; ++s) {
        out[s].flush();
        if (!out[s]) throw IntegrityError("dataset write failed");
    }
    write_manifest(dir / "manifest.json", manifest);
}

/// Streams one split file; each record's checksum is verified as it is read.
class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& file,
                           std::optional<std::uint64_t> expected_count = std::nullopt)
        : in_(file, std::ios::binary), path_(file.string()), expected_(expected_count) {
        if (!in_) throw IntegrityError("cannot open dataset file: " + path_);
    }

    std::optional<DatasetRecord> next() {
        std::string line;
        if (!std::getline(in_, line)) {
            if (in_.bad()) throw IntegrityError("read error in " + path_);
            if (expected_ && read_ != *expected_)
                throw IntegrityError(path_ + ": expected " + std::to_string(*expected_) +
                                     " records, found " + std::to_string(read_));
            return std::nullopt;
        }
        ++read_;
        return parse_record(line);
    }

    [[nodiscard]] std::uint64_t records_read() const { return read_; }

private:
    std::ifstream in_;
    std::string path_;
    std::optional<std::uint64_t> expected_;
    std::uint64_t read_ = 0;
};

inline std::vector<DatasetRecord> load_split(
    const std::filesystem::path& file,
    std::optional<std::uint64_t> expected_count = std::nullopt) {
    DatasetReader reader(file, expected_count);
    std::vector<DatasetRecord> records;
    while (auto r = reader.next()) records.push_back(std::move(*r));
    return records;
}

inline std::vector<DatasetRecord> load_split(const std::filesystem::path& dir, Split s,
                                             const DatasetManifest& manifest) {
    return load_split(dir / (std::string(split_name(s)) + ".jsonl"), manifest.count(s));
}

} // namespace twoport
